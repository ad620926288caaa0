#include "scanalr/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "scanalr/error.hpp"
#include "scanalr/simd/kernels.hpp"

namespace scanalr {

Sided sided_from_int(int k) {
  if (k == 1) return Sided::One;
  if (k == 2) return Sided::Two;
  throw InputError("sidedness must be 1 or 2, got " + std::to_string(k));
}

std::size_t ScoreVector::count(WindowStatus s) const noexcept {
  if (status.empty()) return s == WindowStatus::Ok ? scores.size() : 0;
  return static_cast<std::size_t>(std::count(status.begin(), status.end(), s));
}

double phi(double p, double p0) {
  if (!(p0 > 0.0 && p0 < 1.0)) throw InputError("phi: baseline proportion must lie in (0, 1)");
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("phi: proportion must lie in [0, 1]");
  double value = 0.0;
  if (p > 0.0) value += p * std::log(p / p0);
  if (p < 1.0) value += (1.0 - p) * std::log((1.0 - p) / (1.0 - p0));
  return value;
}

void glr_scores(std::span<const double> n, std::span<const double> m, std::size_t cases,
                std::size_t subjects, Sided k, std::span<double> out) {
  if (cases == 0 || cases >= subjects)
    throw InputError("GLR scores need 0 < I < J (got I = " + std::to_string(cases) +
                     ", J = " + std::to_string(subjects) + ")");
  if (n.size() != m.size() || out.size() != n.size()) throw InputError("GLR scores: length mismatch");
  simd::kernels().glr_scores(n.data(), m.data(), n.size(), static_cast<double>(cases),
                             static_cast<double>(subjects), as_int(k), out.data());
}

ScoreVector glr_scores(const WindowSet& ws, std::size_t cases, std::size_t subjects, Sided k) {
  ScoreVector sv;
  sv.sided = k;
  sv.scores.resize(ws.size());
  glr_scores(ws.subject_counts(), ws.case_counts(), cases, subjects, k, sv.scores);
  std::ostringstream b;
  b << "p0=" << static_cast<double>(cases) / static_cast<double>(subjects);
  sv.baseline = b.str();
  return sv;
}

double adjusted_score(double m, double eta, double cases) {
  const double rest_m = cases - m;
  const double rest_eta = cases - eta;
  if ((m > 0.0 && !(eta > 0.0)) || (rest_m > 0.0 && !(rest_eta > 0.0)))
    throw NumericError("adjusted score: degenerate baseline (eta_B = " + std::to_string(eta) +
                       ", m_B = " + std::to_string(m) + ", I = " + std::to_string(cases) + ")");
  double s = 0.0;
  if (m > 0.0) s += m * std::log(m / eta);
  if (rest_m > 0.0) s += rest_m * std::log(rest_m / rest_eta);
  return std::max(s, 0.0);
}

ScoreVector adjusted_scores(const WindowSet& ws, std::span<const double> cell_risks,
                            std::span<const double> case_counts, std::size_t cases) {
  if (cell_risks.size() != ws.cells()) throw InputError("adjusted scores: one risk per cell expected");
  if (case_counts.size() != ws.size()) throw InputError("adjusted scores: one count per window expected");
  for (double e : cell_risks)
    if (!(e >= 0.0) || !std::isfinite(e)) throw InputError("adjusted scores: risks must be finite and >= 0");
  const double I = static_cast<double>(cases);
  const double total = std::accumulate(cell_risks.begin(), cell_risks.end(), 0.0);
  if (std::abs(total - I) > 1e-6 * I)
    throw InputError("adjusted scores: expected risks sum to " + std::to_string(total) + ", not I = " +
                     std::to_string(cases));
  const auto eta = ws.window_sums(cell_risks);
  ScoreVector sv;
  sv.sided = Sided::Two;
  sv.baseline = "fitted risks";
  sv.scores.resize(ws.size());
  for (std::size_t w = 0; w < ws.size(); ++w) sv.scores[w] = adjusted_score(case_counts[w], eta[w], I);
  return sv;
}

}  // namespace scanalr
