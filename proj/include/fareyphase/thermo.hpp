#ifndef FAREYPHASE_THERMO_HPP
#define FAREYPHASE_THERMO_HPP

// Thermodynamics from the leading eigenvalue.
//
// Conventions: phi(b) = b f(b) = -ln lambda(b) for 0 < b < 1 and 0 for
// b >= 1. The internal energy is d phi/d b and the specific heat is
// -b^2 d^2 phi / d b^2 (temperature T = 1/b). The spin chains see the same
// curve at doubled inverse temperature: f_chain(b) = f(b/2).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "partition.hpp"
#include "summation.hpp"
#include "transfer.hpp"

namespace fareyphase {

enum class LambdaSource { matrix, ratio };

constexpr std::string_view to_string(LambdaSource s) noexcept {
  return s == LambdaSource::matrix ? "matrix" : "ratio";
}

inline LambdaSource parse_lambda_source(std::string_view s) {
  if (s == "matrix") return LambdaSource::matrix;
  if (s == "ratio") return LambdaSource::ratio;
  throw domain_error("unknown lambda source '" + std::string(s) + "' (expected matrix or ratio)");
}

struct ThermoOptions {
  /// Truncation schedule; each step is compared with the previous one.
  std::vector<int> dims{256, 512, 1024, 2048};
  /// Accept a dimension once |d lambda| / lambda < this * |ln lambda|.
  double max_relative_uncertainty = 0.1;
  int ratio_level = 24;
  SpectralOptions spectral{1e-12, 100000, SpectralMethod::automatic, 500};
  EvalOptions eval{};
  unsigned threads = 1; ///< grid points evaluated concurrently
};

struct LambdaEstimate {
  double beta = 0.0;
  double lambda = 1.0;
  /// Matrix: |lambda(M) - lambda(previous M)|. Ratio: |ratio(k) - ratio(k-1)|.
  double uncertainty = 0.0;
  int dim = 0;   ///< truncation used (matrix source)
  int level = 0; ///< k used (ratio source)
  LambdaSource source = LambdaSource::matrix;
  bool resolved = true; ///< uncertainty within ThermoOptions::max_relative_uncertainty
  std::vector<double> eigvec;
};

namespace detail {

inline bool uncertainty_ok(double lambda, double unc, double max_rel) {
  return unc / lambda <= max_rel * std::abs(std::log(lambda));
}

inline std::vector<double> clamp_start(const std::vector<double>& v) {
  std::vector<double> s(v.size());
  std::transform(v.begin(), v.end(), s.begin(), [](double x) { return x > 0.0 ? x : 0.0; });
  return s;
}

/// Leading eigenvalue at a fixed dimension, warm-started when a vector of the
/// right length is available.
inline SpectralResult solve_at(double beta, int M, const SpectralOptions& sopts,
                               const std::vector<double>* warm) {
  const TransferMatrix C = build_matrix(beta, M);
  if (warm && static_cast<int>(warm->size()) == M) {
    const auto start = clamp_start(*warm);
    return leading_eigen(C, sopts, start);
  }
  return leading_eigen(C, sopts);
}

} // namespace detail

/// lambda(b) for 0 < b < 1 from the chosen source. The matrix source walks
/// the dimension schedule until the truncation uncertainty is below the
/// configured fraction of |ln lambda|; the last step is returned either way
/// with `resolved` telling which.
inline LambdaEstimate lambda_estimate(double beta, LambdaSource source,
                                      const ThermoOptions& opts = {}) {
  if (!(beta > 0.0 && beta < 1.0))
    throw domain_error("lambda_estimate: beta must lie in (0, 1), got " + std::to_string(beta));
  LambdaEstimate est;
  est.beta = beta;
  est.source = source;
  if (source == LambdaSource::ratio) {
    const int k = opts.ratio_level;
    const auto even = even_parts_by_level(k, 2.0 * beta, opts.eval);
    est.lambda = even[k] / even[k - 1];
    est.uncertainty = std::abs(est.lambda - even[k - 1] / even[k - 2]);
    est.level = k;
    est.resolved = detail::uncertainty_ok(est.lambda, est.uncertainty, opts.max_relative_uncertainty);
    return est;
  }

  if (opts.dims.empty())
    throw domain_error("lambda_estimate: empty dimension schedule");
  double previous = detail::solve_at(beta, std::max(2, opts.dims.front() / 2), opts.spectral, nullptr).lambda;
  for (int M : opts.dims) {
    SpectralResult r = detail::solve_at(beta, M, opts.spectral, nullptr);
    est.lambda = r.lambda;
    est.uncertainty = std::abs(r.lambda - previous);
    est.dim = M;
    est.eigvec = std::move(r.eigvec);
    est.resolved = detail::uncertainty_ok(est.lambda, est.uncertainty, opts.max_relative_uncertainty);
    if (est.resolved)
      break;
    previous = est.lambda;
  }
  return est;
}

/// phi(b) = -ln lambda(b) at a fixed truncation (no escalation).
inline double pressure_at_dim(double beta, int M, const ThermoOptions& opts,
                              const std::vector<double>* warm = nullptr) {
  return -std::log(detail::solve_at(beta, M, opts.spectral, warm).lambda);
}

enum class Convention { farey, spin_chain };

/// f(b) = -(1/b) ln lambda(b) for 0 < b < 1, 0 for b >= 1. In the spin-chain
/// convention the argument is a chain inverse temperature and f(b/2) is
/// returned, which puts the transition at b = 2.
inline double free_energy(double beta, LambdaSource source, const ThermoOptions& opts = {},
                          Convention conv = Convention::farey) {
  if (!(beta > 0.0))
    throw domain_error("free_energy: beta must be positive");
  const double b = conv == Convention::spin_chain ? 0.5 * beta : beta;
  if (b >= 1.0)
    return 0.0;
  return -std::log(lambda_estimate(b, source, opts).lambda) / b;
}

/// -ln Z_k(b) / (b k) for a single finite level.
inline double finite_size_free_energy(Model model, int k, double beta,
                                      const EvalOptions& eval = {}) {
  if (model == Model::knauf_even || model == Model::knauf_odd)
    throw domain_error("finite_size_free_energy: use farey-chain, knauf or farey-tree");
  if (beta == 0.0)
    throw domain_error("finite_size_free_energy: beta must be non-zero");
  if (k < 2)
    throw domain_error("finite_size_free_energy: k >= 2 required");
  const double z = evaluate(model, k, beta, eval).value;
  return -std::log(z) / (beta * k);
}

struct SpecificHeat {
  double beta = 0.0;
  double value = 0.0;             ///< Richardson-extrapolated C(b)
  double coarse = 0.0;            ///< C from step h alone
  double richardson_error = 0.0;  ///< |extrapolated - step h/2 value|
  double internal_energy = 0.0;   ///< d phi / d b, Richardson-extrapolated
  double h = 0.0;
  int dim = 0;
};

inline double default_step(double beta) {
  return std::min({(1.0 - beta) / 10.0, 1e-3, beta / 10.0});
}

/// C(b) = -b^2 phi''(b) from central differences at h and h/2, combined by
/// Richardson extrapolation. All five stencil points share one truncation.
inline SpecificHeat specific_heat(double beta, std::optional<double> step = std::nullopt,
                                  const ThermoOptions& opts = {}) {
  if (!(beta > 0.0 && beta < 1.0))
    throw domain_error("specific_heat: beta must lie in (0, 1)");
  const double h = step.value_or(default_step(beta));
  if (!(h > 0.0))
    throw domain_error("specific_heat: step must be positive");
  if (beta + h >= 1.0)
    throw domain_error("specific_heat: stencil beta + h = " + std::to_string(beta + h) +
                       " collides with the transition at beta = 1");
  if (beta - h <= 0.0)
    throw domain_error("specific_heat: stencil beta - h must stay positive");

  const LambdaEstimate centre = lambda_estimate(beta, LambdaSource::matrix, opts);
  const int M = centre.dim;
  const double p0 = -std::log(centre.lambda);
  const auto* warm = &centre.eigvec;
  const double pp = pressure_at_dim(beta + h, M, opts, warm);
  const double pm = pressure_at_dim(beta - h, M, opts, warm);
  const double qp = pressure_at_dim(beta + 0.5 * h, M, opts, warm);
  const double qm = pressure_at_dim(beta - 0.5 * h, M, opts, warm);

  const double d2_h = (pp - 2.0 * p0 + pm) / (h * h);
  const double d2_half = (qp - 2.0 * p0 + qm) / (0.25 * h * h);
  const double d2 = (4.0 * d2_half - d2_h) / 3.0;
  const double d1_h = (pp - pm) / (2.0 * h);
  const double d1_half = (qp - qm) / h;

  SpecificHeat out;
  out.beta = beta;
  out.h = h;
  out.dim = M;
  out.value = -beta * beta * d2;
  out.coarse = -beta * beta * d2_h;
  out.richardson_error = beta * beta * std::abs(d2 - d2_half);
  out.internal_energy = (4.0 * d1_half - d1_h) / 3.0;
  return out;
}

struct ThermoPoint {
  double beta = 0.0;
  double f = 0.0;
  double u = 0.0;
  double c = 0.0;
  double lambda = 1.0;
  LambdaSource source = LambdaSource::matrix;
  double uncertainty = 0.0;
  int dim = 0;
};

struct ThermoCurve {
  std::vector<ThermoPoint> points;
};

/// f, u and C on a grid of inverse temperatures (Farey convention). Points at
/// b >= 1 are exactly zero. Derivatives always use the matrix source.
inline ThermoCurve thermo_curve(const std::vector<double>& grid, LambdaSource source,
                                const ThermoOptions& opts = {}) {
  ThermoCurve curve;
  curve.points.resize(grid.size());
  parallel_for_index(grid.size(), opts.threads, [&](std::size_t i) {
    const double b = grid[i];
    if (!(b > 0.0))
      throw domain_error("thermo_curve: beta must be positive");
    ThermoPoint p;
    p.beta = b;
    p.source = source;
    if (b < 1.0) {
      const LambdaEstimate est = lambda_estimate(b, source, opts);
      p.lambda = est.lambda;
      p.f = -std::log(est.lambda) / b;
      p.uncertainty = est.uncertainty;
      p.dim = est.dim;
      const SpecificHeat c = specific_heat(b, std::nullopt, opts);
      p.u = c.internal_energy;
      p.c = c.value;
    }
    curve.points[i] = p;
  });
  return curve;
}

struct FitPoint {
  double eps = 0.0;
  double beta = 0.0;
  double beta_f = 0.0;         ///< phi = -ln lambda
  double c_eps = 0.0;          ///< beta f ln(eps) / eps
  double specific_heat = 0.0;
  double scaled_heat = 0.0;    ///< C eps ln^2 eps
  double uncertainty = 0.0;
  int dim = 0;
};

/// Fit of b f(b) = c (1-b)/ln(1-b) [1 + o(1)] near the transition.
struct TransitionFit {
  double c_hat = 0.0;
  double eps_min = 0.0;
  double eps_max = 0.0;
  double stability = 0.0;    ///< max |c(eps)/c_hat - 1|
  double heat_spread = 0.0;  ///< max/min of C eps ln^2 eps
  std::vector<FitPoint> points;
};

inline double median(std::vector<double> v) {
  if (v.empty())
    throw domain_error("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Refuses (throws) if any grid point cannot be resolved within the schedule;
/// the message names the truncation a geometric extrapolation of the last two
/// steps would need.
inline TransitionFit prellberg_fit(const std::vector<double>& eps_grid,
                                   const ThermoOptions& opts = {}) {
  if (eps_grid.empty())
    throw domain_error("prellberg_fit: empty grid");
  for (double e : eps_grid)
    if (!(e >= 1e-3 && e <= 1e-1))
      throw domain_error("prellberg_fit: eps values must lie in [1e-3, 1e-1]");

  TransitionFit fit;
  fit.points.resize(eps_grid.size());
  parallel_for_index(eps_grid.size(), opts.threads, [&](std::size_t i) {
    const double eps = eps_grid[i];
    const double beta = 1.0 - eps;
    const LambdaEstimate est = lambda_estimate(beta, LambdaSource::matrix, opts);
    if (!est.resolved) {
      const double target = opts.max_relative_uncertainty * std::abs(std::log(est.lambda)) * est.lambda;
      const int needed = est.dim * static_cast<int>(std::ceil(std::max(2.0, est.uncertainty / target)));
      throw convergence_error("prellberg_fit: truncation uncertainty " +
                                  std::to_string(est.uncertainty) + " at eps=" + std::to_string(eps) +
                                  " exceeds the fit tolerance at M=" + std::to_string(est.dim) +
                                  "; roughly M>=" + std::to_string(needed) + " required",
                              est.uncertainty);
    }
    FitPoint p;
    p.eps = eps;
    p.beta = beta;
    p.beta_f = -std::log(est.lambda);
    p.c_eps = p.beta_f * std::log(eps) / eps;
    p.uncertainty = est.uncertainty;
    p.dim = est.dim;
    const SpecificHeat c = specific_heat(beta, std::nullopt, opts);
    p.specific_heat = c.value;
    const double l = std::log(eps);
    p.scaled_heat = c.value * eps * l * l;
    fit.points[i] = p;
  });

  std::vector<double> cs;
  double hmin = std::numeric_limits<double>::infinity();
  double hmax = 0.0;
  for (const auto& p : fit.points) {
    cs.push_back(p.c_eps);
    hmin = std::min(hmin, p.scaled_heat);
    hmax = std::max(hmax, p.scaled_heat);
  }
  fit.c_hat = median(cs);
  for (double c : cs)
    fit.stability = std::max(fit.stability, std::abs(c / fit.c_hat - 1.0));
  fit.eps_min = *std::min_element(eps_grid.begin(), eps_grid.end());
  fit.eps_max = *std::max_element(eps_grid.begin(), eps_grid.end());
  fit.heat_spread = hmin > 0.0 ? hmax / hmin : std::numeric_limits<double>::infinity();
  return fit;
}

struct HausdorffRow {
  double beta = 0.0;
  int level = 0;
  double z = 0.0;
};

struct HausdorffReport {
  std::vector<HausdorffRow> rows;
  /// Z_k^F grows along the k grid for every b < 1, shrinks for every b > 1,
  /// and lies in (0, 1) at b = 1.
  bool consistent = true;
  std::vector<std::string> violations;
};

inline HausdorffReport hausdorff_check(const std::vector<double>& betas, std::vector<int> levels,
                                       const EvalOptions& eval = {}) {
  std::sort(levels.begin(), levels.end());
  HausdorffReport rep;
  for (double b : betas) {
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int k : levels) {
      const double z = z_farey_tree(k, b, eval).value;
      rep.rows.push_back({b, k, z});
      std::string bad;
      if (b == 1.0 && !(z > 0.0 && z < 1.0))
        bad = "Z^F outside (0,1)";
      else if (b < 1.0 && !std::isnan(prev) && !(z > prev))
        bad = "Z^F not growing";
      else if (b > 1.0 && !std::isnan(prev) && !(z < prev))
        bad = "Z^F not shrinking";
      if (!bad.empty()) {
        rep.consistent = false;
        rep.violations.push_back(bad + " at beta=" + std::to_string(b) + ", k=" + std::to_string(k));
      }
      prev = z;
    }
  }
  return rep;
}

} // namespace fareyphase

#endif
