#include "scanalr/logistic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "scanalr/error.hpp"
#include "scanalr/parallel.hpp"

namespace scanalr {
namespace {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z)
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// Logistic likelihood over covariates, optionally with a window column.
struct Problem {
  std::span<const double> cov;
  std::size_t r = 0;
  std::span<const std::uint8_t> labels;
  std::span<const std::uint8_t> indicator;  // empty: no window column
  bool fit_theta = false;                   // else theta is a fixed offset
  double theta = 0.0;
  std::span<const std::uint8_t> include;  // empty: all subjects

  std::size_t subjects() const { return labels.size(); }
  std::size_t params() const { return r + (fit_theta ? 1 : 0); }
  bool active(std::size_t i) const { return include.empty() || include[i]; }

  double linear(std::size_t i, std::span<const double> p) const {
    double z = 0.0;
    const double* u = cov.data() + i * r;
    for (std::size_t k = 0; k < r; ++k) z += p[k] * u[k];
    if (!indicator.empty() && indicator[i]) z += fit_theta ? p[r] : theta;
    return z;
  }

  double log_likelihood(std::span<const double> p) const {
    double ll = 0.0;
    for (std::size_t i = 0; i < subjects(); ++i) {
      if (!active(i)) continue;
      const double z = linear(i, p);
      ll += (labels[i] ? z : 0.0) - softplus(z);
    }
    return ll;
  }
};

struct NewtonResult {
  std::vector<double> params;
  double log_likelihood = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
};

NewtonResult maximize(const Problem& pb, std::vector<double> start) {
  const std::size_t P = pb.params();
  const std::size_t J = pb.subjects();
  const double tolerance = kGradientTolerance * static_cast<double>(J);
  NewtonResult res;
  res.params = std::move(start);
  res.params.resize(P, 0.0);

  Eigen::VectorXd grad(P);
  Eigen::MatrixXd hess(P, P);
  std::vector<double> x(P);
  std::vector<double> trial(P);
  double ll = pb.log_likelihood(res.params);

  for (int iter = 0; iter <= kMaxNewtonIterations; ++iter) {
    grad.setZero();
    hess.setZero();
    for (std::size_t i = 0; i < J; ++i) {
      if (!pb.active(i)) continue;
      const double* u = pb.cov.data() + i * pb.r;
      for (std::size_t k = 0; k < pb.r; ++k) x[k] = u[k];
      if (pb.fit_theta) x[pb.r] = pb.indicator[i] ? 1.0 : 0.0;
      const double p = sigmoid(pb.linear(i, res.params));
      const double resid = (pb.labels[i] ? 1.0 : 0.0) - p;
      const double w = p * (1.0 - p);
      for (std::size_t a = 0; a < P; ++a) {
        if (x[a] == 0.0) continue;
        grad[static_cast<Eigen::Index>(a)] += x[a] * resid;
        for (std::size_t b = a; b < P; ++b) hess(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += w * x[a] * x[b];
      }
    }
    res.gradient_norm = grad.cwiseAbs().maxCoeff();
    res.iterations = iter;
    res.log_likelihood = ll;
    if (res.gradient_norm < tolerance) {
      res.converged = true;
      return res;
    }
    if (iter == kMaxNewtonIterations) break;
    hess.triangularView<Eigen::Lower>() = hess.transpose();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) break;

    // step halving until the likelihood does not drop
    double t = 1.0;
    double trial_ll = -std::numeric_limits<double>::infinity();
    for (int h = 0; h < 40; ++h, t *= 0.5) {
      for (std::size_t a = 0; a < P; ++a) trial[a] = res.params[a] + t * step[static_cast<Eigen::Index>(a)];
      trial_ll = pb.log_likelihood(trial);
      if (trial_ll >= ll - 1e-12 * (1.0 + std::abs(ll))) break;
    }
    res.params = trial;
    ll = trial_ll;
    for (double v : res.params) {
      if (!(std::abs(v) <= kDivergenceBound)) {
        res.diverged = true;
        res.log_likelihood = ll;
        return res;
      }
    }
  }
  res.log_likelihood = ll;
  return res;
}

Problem covariate_problem(const PointDataset& data, std::span<const std::uint8_t> labels) {
  Problem pb;
  pb.cov = data.covariates();
  pb.r = data.covariate_cols();
  pb.labels = labels;
  return pb;
}

void check_null_inputs(const PointDataset& data, std::span<const std::uint8_t> labels) {
  if (!data.has_covariates()) throw InputError("logistic fit requires covariates");
  if (labels.size() != data.subjects()) throw InputError("label vector length does not match J");
  std::size_t I = 0;
  for (auto x : labels) I += x;
  if (I == 0 || I == labels.size()) throw InputError("logistic fit needs both cases and controls");
  if (data.covariate_cols() > data.subjects()) throw InputError("more covariate columns than subjects");
}

// Per-window ingredients of the quadratic approximation.
struct QuadraticParts {
  std::vector<double> numerator;  // sum_i r_iB (X_i - p_i)
  std::vector<double> variance;   // v_B^2
  std::vector<double> mass;       // sum_{i in B} w_i
};

QuadraticParts quadratic_parts(const PointDataset& data, std::span<const std::uint8_t> labels,
                               const WindowSet& ws, const LogisticFit& fit) {
  const std::size_t J = data.subjects();
  const std::size_t r = data.covariate_cols();
  const auto basis = WeightedBasis::build(data.covariates(), r, fit.weights);
  std::vector<double> resid(J);
  for (std::size_t i = 0; i < J; ++i) resid[i] = (labels[i] ? 1.0 : 0.0) - fit.fitted[i];

  // unweighted (u~_k . e); zero up to the null fit's score residual
  std::vector<double> basis_resid(r, 0.0);
  for (std::size_t i = 0; i < J; ++i)
    for (std::size_t k = 0; k < r; ++k) basis_resid[k] += basis.columns[i * r + k] * resid[i];

  const auto e_B = ws.window_sums(ws.cell_totals(resid));
  const auto w_B = ws.window_sums(ws.cell_totals(fit.weights));
  QuadraticParts parts;
  parts.numerator = e_B;
  parts.variance = w_B;
  parts.mass = w_B;
  std::vector<double> wu(J);
  for (std::size_t k = 0; k < r; ++k) {
    for (std::size_t i = 0; i < J; ++i) wu[i] = fit.weights[i] * basis.columns[i * r + k];
    const auto g_B = ws.window_sums(ws.cell_totals(wu));  // (alpha_B . u~_k)_w
    for (std::size_t w = 0; w < ws.size(); ++w) {
      const double c = g_B[w] / basis.norms_sq[k];
      parts.numerator[w] -= c * basis_resid[k];
      parts.variance[w] -= c * g_B[w];
    }
  }
  return parts;
}

constexpr double kDegenerateRatio = 1e-10;

bool degenerate(const QuadraticParts& parts, std::size_t w) {
  return !(parts.mass[w] > 0.0) || parts.variance[w] <= kDegenerateRatio * parts.mass[w];
}

double quadratic_value(const QuadraticParts& parts, std::size_t w, Sided k) {
  const double num = parts.numerator[w];
  if (k == Sided::One && !(num > 0.0)) return 0.0;
  return num * num / (2.0 * parts.variance[w]);
}

}  // namespace

WeightedBasis WeightedBasis::build(std::span<const double> covariates, std::size_t cols,
                                   std::span<const double> weights) {
  WeightedBasis b;
  b.cols = cols;
  b.rows = weights.size();
  if (covariates.size() != b.rows * cols) throw InputError("weighted basis: covariate shape mismatch");
  b.columns.assign(covariates.begin(), covariates.end());
  b.norms_sq.assign(cols, 0.0);
  for (std::size_t k = 0; k < cols; ++k) {
    // subtract projections on earlier columns one at a time
    for (std::size_t s = 0; s < k; ++s) {
      const double a = b.weighted_dot(k, s, weights) / b.norms_sq[s];
      for (std::size_t i = 0; i < b.rows; ++i) b.columns[i * cols + k] -= a * b.columns[i * cols + s];
    }
    b.norms_sq[k] = b.weighted_dot(k, k, weights);
    if (!(b.norms_sq[k] > 0.0)) throw NumericError("covariate column " + std::to_string(k + 1) + " is collinear with earlier columns");
  }
  return b;
}

double WeightedBasis::weighted_dot(std::size_t a, std::size_t b, std::span<const double> weights) const {
  double s = 0.0;
  for (std::size_t i = 0; i < rows; ++i) s += columns[i * cols + a] * columns[i * cols + b] * weights[i];
  return s;
}

LogisticFit fit_logistic_null(const PointDataset& data) { return fit_logistic_null(data, data.cases()); }

LogisticFit fit_logistic_null(const PointDataset& data, std::span<const std::uint8_t> labels) {
  check_null_inputs(data, labels);
  const Problem pb = covariate_problem(data, labels);
  const NewtonResult res = maximize(pb, std::vector<double>(pb.r, 0.0));
  if (res.diverged)
    throw NumericError("logistic null fit: coefficient diverged beyond " + std::to_string(kDivergenceBound) +
                       " (separation)");
  if (!res.converged)
    throw NumericError("logistic null fit did not converge in " + std::to_string(kMaxNewtonIterations) +
                       " iterations (gradient " + std::to_string(res.gradient_norm) + ")");
  LogisticFit fit;
  fit.beta = res.params;
  fit.log_likelihood = res.log_likelihood;
  fit.converged = true;
  fit.iterations = res.iterations;
  fit.gradient_norm = res.gradient_norm;
  const std::size_t J = data.subjects();
  fit.fitted.resize(J);
  fit.weights.resize(J);
  for (std::size_t i = 0; i < J; ++i) {
    const double p = sigmoid(pb.linear(i, fit.beta));
    fit.fitted[i] = p;
    fit.weights[i] = p * (1.0 - p);
  }
  return fit;
}

WindowRefit refit_window(const PointDataset& data, std::span<const std::uint8_t> labels,
                         const LogisticFit& null_fit, std::span<const std::uint8_t> indicator, Sided k) {
  if (!null_fit.converged) throw InputError("refit requires a converged null fit");
  const std::size_t J = data.subjects();
  if (indicator.size() != J || labels.size() != J) throw InputError("refit: vector length mismatch");
  std::size_t n = 0, m = 0;
  for (std::size_t i = 0; i < J; ++i) {
    n += indicator[i];
    m += indicator[i] & labels[i];
  }
  WindowRefit out;
  if (n == 0 || n == J) {
    out.beta = null_fit.beta;
    out.converged = true;
    return out;
  }

  Problem pb = covariate_problem(data, labels);
  pb.indicator = indicator;
  if (m == 0 || m == n) {
    // theta runs off to -inf / +inf: window subjects contribute log 1 = 0
    out.theta = m == 0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    if (k == Sided::One && m == 0) {
      out.beta = null_fit.beta;
      out.converged = true;
      return out;
    }
    std::vector<std::uint8_t> outside(J);
    std::size_t out_cases = 0, out_total = 0;
    for (std::size_t i = 0; i < J; ++i) {
      outside[i] = indicator[i] ? 0 : 1;
      if (outside[i]) {
        ++out_total;
        out_cases += labels[i];
      }
    }
    Problem rest = covariate_problem(data, labels);
    rest.include = outside;
    double ll = 0.0;
    if (out_cases != 0 && out_cases != out_total) {
      const NewtonResult res = maximize(rest, null_fit.beta);
      if (res.diverged || !res.converged) throw NumericError("window refit (boundary) did not converge");
      ll = res.log_likelihood;
      out.beta = res.params;
      out.iterations = res.iterations;
    }
    out.score = std::max(ll - null_fit.log_likelihood, 0.0);
    out.converged = true;
    return out;
  }

  pb.fit_theta = true;
  std::vector<double> start = null_fit.beta;
  start.push_back(0.0);
  const NewtonResult res = maximize(pb, start);
  if (res.diverged) throw NumericError("window refit diverged");
  if (!res.converged) throw NumericError("window refit did not converge");
  out.theta = res.params.back();
  out.beta.assign(res.params.begin(), res.params.end() - 1);
  out.iterations = res.iterations;
  out.converged = true;
  if (k == Sided::One && out.theta < 0.0) {
    out.score = 0.0;
    return out;
  }
  out.score = std::max(res.log_likelihood - null_fit.log_likelihood, 0.0);
  return out;
}

double profile_log_likelihood(const PointDataset& data, std::span<const std::uint8_t> labels,
                              std::span<const std::uint8_t> indicator, double theta,
                              std::span<const double> beta_start) {
  if (!data.has_covariates()) throw InputError("profile likelihood requires covariates");
  Problem pb = covariate_problem(data, labels);
  pb.indicator = indicator;
  pb.theta = theta;
  std::vector<double> start(beta_start.begin(), beta_start.end());
  if (start.size() != pb.r) start.assign(pb.r, 0.0);
  const NewtonResult res = maximize(pb, start);
  if (res.diverged || !res.converged) throw NumericError("profile likelihood fit did not converge");
  return res.log_likelihood;
}

ScoreVector refit_window_scores(const PointDataset& data, const WindowSet& ws, const LogisticFit& null_fit,
                                Sided k, unsigned threads) {
  return refit_window_scores(data, data.cases(), ws, null_fit, k, threads);
}

ScoreVector refit_window_scores(const PointDataset& data, std::span<const std::uint8_t> labels,
                                const WindowSet& ws, const LogisticFit& null_fit, Sided k, unsigned threads) {
  if (!null_fit.converged) throw InputError("refit requires a converged null fit");
  if (ws.subjects() != data.subjects()) throw InputError("window set was built for a different dataset");
  const QuadraticParts parts = quadratic_parts(data, labels, ws, null_fit);

  // one fit per distinct membership
  std::map<std::vector<std::size_t>, std::size_t> first_of;
  std::vector<std::size_t> representative(ws.size());
  std::vector<std::size_t> unique;
  for (std::size_t w = 0; w < ws.size(); ++w) {
    auto [it, inserted] = first_of.try_emplace(ws.cell_membership(w), w);
    if (inserted) unique.push_back(w);
    representative[w] = it->second;
  }

  ScoreVector sv;
  sv.sided = k;
  sv.baseline = "logistic refit";
  sv.scores.assign(ws.size(), 0.0);
  sv.status.assign(ws.size(), WindowStatus::Ok);
  const std::size_t J = data.subjects();
  parallel_for(unique.size(), threads, [&](std::size_t u) {
    const std::size_t w = unique[u];
    if (degenerate(parts, w)) {
      sv.status[w] = WindowStatus::Degenerate;
      return;
    }
    std::vector<std::uint8_t> indicator(J, 0);
    for (std::size_t i : ws.membership(w)) indicator[i] = 1;
    try {
      sv.scores[w] = refit_window(data, labels, null_fit, indicator, k).score;
    } catch (const NumericError&) {
      sv.scores[w] = quadratic_value(parts, w, k);
      sv.status[w] = WindowStatus::QuadraticFallback;
    }
  });
  for (std::size_t w = 0; w < ws.size(); ++w) {
    sv.scores[w] = sv.scores[representative[w]];
    sv.status[w] = sv.status[representative[w]];
  }
  if (sv.count(WindowStatus::Ok) == ws.size()) sv.status.clear();
  return sv;
}

ScoreVector quadratic_window_scores(const PointDataset& data, const WindowSet& ws, const LogisticFit& null_fit,
                                    Sided k) {
  return quadratic_window_scores(data, data.cases(), ws, null_fit, k);
}

ScoreVector quadratic_window_scores(const PointDataset& data, std::span<const std::uint8_t> labels,
                                    const WindowSet& ws, const LogisticFit& null_fit, Sided k) {
  if (!null_fit.converged) throw InputError("quadratic scores require a converged null fit");
  if (ws.subjects() != data.subjects()) throw InputError("window set was built for a different dataset");
  const QuadraticParts parts = quadratic_parts(data, labels, ws, null_fit);
  ScoreVector sv;
  sv.sided = k;
  sv.baseline = "logistic quadratic";
  sv.scores.assign(ws.size(), 0.0);
  sv.status.assign(ws.size(), WindowStatus::Ok);
  for (std::size_t w = 0; w < ws.size(); ++w) {
    if (degenerate(parts, w)) {
      sv.status[w] = WindowStatus::Degenerate;
      continue;
    }
    sv.scores[w] = quadratic_value(parts, w, k);
  }
  if (sv.count(WindowStatus::Ok) == ws.size()) sv.status.clear();
  return sv;
}

}  // namespace scanalr
