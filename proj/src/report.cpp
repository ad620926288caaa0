#include "scanalr/report.hpp"

#include <json.hpp>

namespace scanalr {

std::string report_json(const TestReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["schema"] = kReportSchema;
  j["tool"] = "scanalr";
  j["version"] = kToolVersion;
  j["options"] = r.options;
  j["dataset"] = {{"path", r.data_path},
                  {"layout", r.data_layout},
                  {"J", r.subjects},
                  {"I", r.cases},
                  {"p0", r.subjects ? static_cast<double>(r.cases) / static_cast<double>(r.subjects) : 0.0},
                  {"covariates", r.covariate_names}};
  j["windows"] = {{"spec", r.window_spec}, {"N", r.windows}, {"cells", r.cells}};
  j["covariate_adjustment"] = {{"mode", covariate_mode_name(r.covariates)},
                               {"standardized", r.standardized},
                               {"quadratic_fallback_windows", r.fallback_windows},
                               {"degenerate_windows", r.degenerate_windows}};

  ordered_json stat;
  stat["kind"] = stat_name(r.statistic.kind);
  stat["k"] = as_int(r.statistic.sided);
  stat["value"] = r.statistic.value;
  stat["N"] = r.statistic.windows;
  if (r.statistic.argmax) {
    ordered_json arg;
    arg["window"] = *r.statistic.argmax;
    if (r.argmax_origin) {
      const auto& o = *r.argmax_origin;
      if (o.center.empty()) {
        arg["set"] = o.set_id;
      } else {
        arg["center"] = o.center;
        arg["radius"] = o.radius;
      }
    }
    arg["n_B"] = static_cast<std::uint64_t>(r.argmax_n);
    arg["m_B"] = static_cast<std::uint64_t>(r.argmax_m);
    stat["argmax"] = arg;
  }
  if (!r.statistic.weights.empty()) stat["weights"] = r.statistic.weights;
  j["statistic"] = stat;

  ordered_json ps = ordered_json::array();
  for (const auto& p : r.pvalues) {
    ordered_json e;
    e["method"] = method_name(p.method);
    e["p"] = p.p;
    e["statistic"] = p.statistic;
    if (p.monte_carlo()) {
      e["L"] = p.mc_L;
      e["exceed"] = p.mc_exceed;
      e["seed"] = p.seed;
      e["se"] = p.se;
    }
    ps.push_back(e);
  }
  j["pvalues"] = ps;
  j["seed"] = r.seed;
  if (r.timing) j["timing_seconds"] = *r.timing;
  return j.dump(2) + "\n";
}

}  // namespace scanalr
