#include "scanalr/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <set>

#include "scanalr/config.hpp"
#include "scanalr/data.hpp"
#include "scanalr/error.hpp"
#include "scanalr/logistic.hpp"
#include "scanalr/pvalues.hpp"
#include "scanalr/replication.hpp"
#include "scanalr/report.hpp"
#include "scanalr/stats.hpp"
#include "scanalr/windows.hpp"

namespace scanalr {
namespace {

struct AnalyzeOptions {
  std::string data;
  std::string windows;
  std::string stat = "alr";
  std::string alt = "two";
  std::vector<std::string> pvalues;
  std::string covariates = "off";
  bool standardize = false;
  bool dedup = false;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;
  std::string dump_windows;
  std::string dump_scores;
  bool timing = false;
};

struct SimulateOptions {
  std::string experiment;
  std::string config;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out = ".";
};

struct PValueRequest {
  PValueMethod method;
  std::size_t L = 0;
  std::string text;
};

PValueRequest parse_pvalue(const std::string& text) {
  PValueRequest req;
  req.text = text;
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  if (name == "chi2" || name == "gdist") {
    if (colon != std::string::npos) throw InputError("--pvalue " + text + ": " + name + " takes no options");
    req.method = name == "chi2" ? PValueMethod::Chi2 : PValueMethod::Gdist;
    return req;
  }
  if (name != "perm" && name != "risk") throw InputError("--pvalue: unknown method '" + text + "'");
  req.method = name == "perm" ? PValueMethod::Perm : PValueMethod::Risk;
  req.L = 999;
  if (colon != std::string::npos) {
    const std::string opt = text.substr(colon + 1);
    if (opt.rfind("L=", 0) != 0) throw InputError("--pvalue " + text + ": expected L=<count>");
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(opt.substr(2), &used);
      if (used != opt.size() - 2 || v == 0) throw std::invalid_argument("L");
      req.L = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw InputError("--pvalue " + text + ": L must be a positive integer");
    }
  }
  return req;
}

StatPipeline parse_stat(const std::string& text, std::string& weights_path) {
  StatPipeline p;
  if (text == "scan") {
    p.kind = StatKind::Scan;
  } else if (text == "alr") {
    p.kind = StatKind::Alr;
  } else if (text.rfind("walr", 0) == 0) {
    p.kind = StatKind::WeightedAlr;
    const std::string prefix = "walr:weights=";
    if (text.rfind(prefix, 0) != 0 || text.size() == prefix.size())
      throw InputError("--stat walr needs a weight file: walr:weights=<file>");
    weights_path = text.substr(prefix.size());
  } else {
    throw InputError("--stat: expected scan, alr or walr:weights=<file>, got '" + text + "'");
  }
  return p;
}

CovariateMode parse_covariates(const std::string& text) {
  if (text == "off") return CovariateMode::Off;
  if (text == "on") return CovariateMode::Refit;
  if (text == "quadratic") return CovariateMode::Quadratic;
  throw InputError("--covariates: expected on, off or quadratic, got '" + text + "'");
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

int analyze(const AnalyzeOptions& o, std::ostream& out) {
  using Clock = std::chrono::steady_clock;
  std::map<std::string, double> timing;
  auto lap = [&, start = Clock::now()](const std::string& phase) mutable {
    const auto now = Clock::now();
    timing[phase] = std::chrono::duration<double>(now - start).count();
    start = now;
  };

  TestReport report;
  report.seed = o.seed;
  report.data_path = o.data;

  // flags first, so bad flags fail before any work
  const Sided sided = o.alt == "one" ? Sided::One : o.alt == "two" ? Sided::Two
                                                                   : throw InputError("--alt: expected one or two");
  std::string weights_path;
  StatPipeline pipeline = parse_stat(o.stat, weights_path);
  pipeline.sided = sided;
  pipeline.covariates = parse_covariates(o.covariates);
  std::vector<PValueRequest> requests;
  std::set<PValueMethod> seen;
  for (const auto& text : o.pvalues) {
    auto req = parse_pvalue(text);
    if (!seen.insert(req.method).second)
      throw InputError("--pvalue " + text + ": method " + std::string(method_name(req.method)) + " requested twice");
    if ((req.method == PValueMethod::Chi2 || req.method == PValueMethod::Gdist) && pipeline.kind == StatKind::Scan)
      throw InputError("--pvalue " + text + ": analytic tails apply to --stat alr or walr, not scan");
    requests.push_back(req);
  }
  WindowSpec spec = parse_window_spec(o.windows);
  if (o.dedup) spec.dedup = true;

  PointDataset data;
  if (detect_csv_kind(o.data) == CsvKind::Aggregated) {
    report.data_layout = "aggregated";
    data = load_aggregated_csv(o.data).expand();
  } else {
    report.data_layout = "point";
    data = load_point_csv(o.data);
  }
  if (o.standardize) {
    if (!data.has_covariates()) throw InputError("--standardize: the data has no covariate columns");
    data = data.standardized();
  }
  if (data.case_count() == 0 || data.case_count() == data.subjects())
    throw InputError(o.data + ": need at least one case and one control");
  for (const auto& req : requests)
    if (req.method == PValueMethod::Risk && !data.has_covariates())
      throw InputError("--pvalue " + req.text + ": risk-adjusted Monte Carlo needs covariate columns in --data");
  lap("load");

  const WindowSet ws = build_windows(data, spec, o.threads);
  if (pipeline.kind == StatKind::WeightedAlr) pipeline.weights = load_weights(weights_path);
  pipeline.validate(data, ws);
  lap("windows");

  const ScoreVector scores = pipeline.scores(data, ws, data.cases(), o.threads);
  report.statistic = pipeline.summarize(scores);
  if (pipeline.kind == StatKind::WeightedAlr) report.statistic.weights = weights_path;
  if (report.statistic.argmax) {
    const std::size_t w = *report.statistic.argmax;
    report.argmax_origin = ws.origin(w);
    report.argmax_n = ws.subject_counts()[w];
    report.argmax_m = ws.case_counts()[w];
  }
  report.fallback_windows = scores.count(WindowStatus::QuadraticFallback);
  report.degenerate_windows = scores.count(WindowStatus::Degenerate);
  lap("scores");

  std::optional<LogisticFit> fit;
  for (const auto& req : requests) {
    switch (req.method) {
      case PValueMethod::Chi2:
        report.pvalues.push_back(chi2_pvalue(report.statistic.value, sided));
        break;
      case PValueMethod::Gdist:
        report.pvalues.push_back(gdist_pvalue(report.statistic.value, sided));
        break;
      case PValueMethod::Perm:
        report.pvalues.push_back(permutation_pvalue(data, ws, pipeline, req.L, o.seed, o.threads));
        break;
      case PValueMethod::Risk:
        if (!fit) fit = fit_logistic_null(data);
        report.pvalues.push_back(risk_adjusted_mc_pvalue(data, ws, *fit, req.L, o.seed, o.threads));
        break;
      case PValueMethod::Exact:
        break;
    }
  }
  lap("pvalues");

  report.subjects = data.subjects();
  report.cases = data.case_count();
  report.covariate_names = data.covariate_names();
  report.window_spec = o.windows;
  report.windows = ws.size();
  report.cells = ws.cells();
  report.covariates = pipeline.covariates;
  report.standardized = o.standardize;
  report.options = {{"data", o.data},
                    {"windows", o.windows},
                    {"stat", o.stat},
                    {"alt", o.alt},
                    {"covariates", o.covariates},
                    {"standardize", o.standardize ? "1" : "0"},
                    {"dedup", o.dedup ? "1" : "0"},
                    {"seed", std::to_string(o.seed)}};
  std::string pv;
  for (const auto& req : requests) pv += (pv.empty() ? "" : " ") + req.text;
  report.options["pvalue"] = pv;

  if (!o.dump_windows.empty()) {
    std::ostringstream s;
    ws.write_tsv(s);
    write_text(o.dump_windows, s.str(), out);
  }
  if (!o.dump_scores.empty()) {
    std::ostringstream s;
    s.precision(17);
    s << "window\tscore\tstatus\n";
    static const char* kStatus[] = {"ok", "quadratic_fallback", "degenerate"};
    for (std::size_t w = 0; w < scores.size(); ++w)
      s << w << '\t' << scores.scores[w] << '\t'
        << (scores.status.empty() ? "ok" : kStatus[static_cast<int>(scores.status[w])]) << '\n';
    write_text(o.dump_scores, s.str(), out);
  }
  if (o.timing) report.timing = timing;
  write_text(o.out, report_json(report), out);
  return 0;
}

int simulate(const SimulateOptions& o, std::ostream& out) {
  Config cfg = o.config.empty() ? Config{} : Config::load(o.config);
  out << run_experiment(o.experiment, cfg, o.seed, o.threads, o.out);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatial scan and average likelihood ratio cluster tests"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  AnalyzeOptions a;
  auto* analyze_cmd = app.add_subcommand("analyze", "Test one dataset for spatial clustering");
  analyze_cmd->add_option("--data", a.data, "Point (id,x,y,case[,cov..]) or aggregated (id,x,y,cases,population) CSV")
      ->required();
  analyze_cmd
      ->add_option("--windows", a.windows,
                   "grid:w=40,s=10,o=5,min=2 | knn:jmax=10 | allpairs:wmax=20 | sets:<file>")
      ->required();
  analyze_cmd->add_option("--stat", a.stat, "scan | alr | walr:weights=<file>")->capture_default_str();
  analyze_cmd->add_option("--alt", a.alt, "one | two")->capture_default_str();
  analyze_cmd->add_option("--pvalue", a.pvalues, "chi2 | gdist | perm:L=999 | risk:L=999 (repeatable)");
  analyze_cmd->add_option("--covariates", a.covariates, "on | off | quadratic")->capture_default_str();
  analyze_cmd->add_flag("--standardize", a.standardize, "Centre and scale covariate columns");
  analyze_cmd->add_flag("--dedup", a.dedup, "Drop windows repeating an earlier membership");
  analyze_cmd->add_option("--seed", a.seed, "Monte Carlo seed")->capture_default_str();
  analyze_cmd->add_option("--threads", a.threads, "Worker threads (0 = all cores)")->capture_default_str();
  analyze_cmd->add_option("--out", a.out, "Report path (default stdout)");
  analyze_cmd->add_option("--dump-windows", a.dump_windows, "Write window provenance TSV");
  analyze_cmd->add_option("--dump-scores", a.dump_scores, "Write per-window scores TSV");
  analyze_cmd->add_flag("--timing", a.timing, "Include phase timings in the report");

  SimulateOptions s;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a replication experiment");
  simulate_cmd->add_option("--experiment", s.experiment, "example1 | example2 | qq | power")->required();
  simulate_cmd->add_option("--config", s.config, "key = value settings file");
  simulate_cmd->add_option("--seed", s.seed, "Master seed")->capture_default_str();
  simulate_cmd->add_option("--threads", s.threads, "Worker threads (0 = all cores)")->capture_default_str();
  simulate_cmd->add_option("--out", s.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*analyze_cmd) return analyze(a, out);
    return simulate(s, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace scanalr
