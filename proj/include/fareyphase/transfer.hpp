#ifndef FAREYPHASE_TRANSFER_HPP
#define FAREYPHASE_TRANSFER_HPP

// Truncated transfer matrix of the Knauf chain and its leading eigenpair.
//
// Expanding phi(x) = sum_m a_m (1-x)^m about x = 1, the operator
//   (K phi)(x) = (1+x)^(-2b) [phi(x/(1+x)) + phi(1/(1+x))]
// acts on the coefficient vector a through the transpose of C(2b), where row
// i of C holds the Taylor coefficients (in y = 1-x) of
//   (2-y)^(-2b-i)  +  (1-y)^i (2-y)^(-2b-i).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "partition.hpp"
#include "summation.hpp"

namespace fareyphase {

inline constexpr int max_transfer_dim = 4096;

/// Generalized binomial a(a-1)...(a-b+1)/b!, zero for b < 0.
inline double gen_binomial(double a, long b) noexcept {
  if (b < 0)
    return 0.0;
  double c = 1.0;
  for (long t = 0; t < b; ++t)
    c *= (a - static_cast<double>(t)) / static_cast<double>(t + 1);
  return c;
}

/// Entry (i, j) straight from the closed form. The bracket alternates in sign
/// and cancels catastrophically once i + j reaches a few dozen, so this is
/// only a reference for small indices.
inline double transfer_entry_direct(double beta, int i, int j) {
  const double a = -2.0 * beta - i;
  compensated_sum bracket(gen_binomial(a, j));
  for (int s = 0; s <= i; ++s)
    bracket.add(std::ldexp(gen_binomial(static_cast<double>(i), s) * gen_binomial(a, j - s), s));
  const double sign = (j % 2 == 0) ? 1.0 : -1.0;
  return sign * std::pow(2.0, -2.0 * beta - i - j) * bracket.value();
}

struct TransferMatrix {
  double beta = 0.0;
  Eigen::MatrixXd entries; ///< row i, column j

  int dim() const noexcept { return static_cast<int>(entries.rows()); }
};

/// Builds C(2b) truncated to M x M, one row per step of the recurrences
///   f_{i+1} = f_i / (2-y),   g_{i+1} = g_i (1-y)/(2-y),
/// each of which maps the previous coefficient sequence with l1 gain <= 1.
inline TransferMatrix build_matrix(double beta, int M) {
  if (!std::isfinite(beta))
    throw domain_error("build_matrix: beta must be finite");
  if (M < 2 || M > max_transfer_dim)
    throw domain_error("build_matrix: dimension must lie in [2, " +
                       std::to_string(max_transfer_dim) + "], got " + std::to_string(M));
  const auto n = static_cast<std::size_t>(M);
  const double a = 2.0 * beta;

  // (2-y)^(-a) = 2^(-a) sum_j binom(a+j-1, j) (y/2)^j
  std::vector<double> f(n);
  f[0] = std::pow(2.0, -a);
  for (std::size_t j = 1; j < n; ++j)
    f[j] = f[j - 1] * (a + static_cast<double>(j) - 1.0) / (2.0 * static_cast<double>(j));
  std::vector<double> g = f;

  constexpr double tiny = 1e-300;
  auto flush = [](double x) { return std::abs(x) < tiny ? 0.0 : x; };

  TransferMatrix out{beta, Eigen::MatrixXd(M, M)};
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j)
      out.entries(i, j) = f[j] + g[j];
    if (i + 1 == M)
      break;
    double carry_f = 0.0;
    double carry_g = 0.0;
    double prev_g = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      carry_f = flush(0.5 * (f[j] + carry_f));
      const double h = g[j] - prev_g;
      prev_g = g[j];
      carry_g = flush(0.5 * (h + carry_g));
      f[j] = carry_f;
      g[j] = carry_g;
    }
  }
  return out;
}

enum class SpectralMethod { power, shift_invert, automatic };

struct SpectralOptions {
  double tol = 1e-10;
  int max_iter = 100000;
  SpectralMethod method = SpectralMethod::automatic;
  /// Power sweeps tried before automatic switches to shift-invert.
  int warmup = 500;
};

/// Leading eigenpair of C(2b)^T.
struct SpectralResult {
  double beta = 0.0;
  int dim = 0;
  double lambda = 0.0;
  std::vector<double> eigvec; ///< Taylor coefficients a_m, unit 2-norm, positive orientation
  double residual = 0.0;      ///< ||C^T v - lambda v|| / ||v||
  int iterations = 0;
  /// |lambda(M) - lambda(M/2)|; NaN when no halving comparison was made.
  double truncation_uncertainty = std::numeric_limits<double>::quiet_NaN();
};

/// True when every coefficient above the round-off floor is positive.
inline bool is_perron_vector(std::span<const double> v, double rel_floor = 1e-12) {
  double peak = 0.0;
  for (double x : v)
    peak = std::max(peak, std::abs(x));
  if (peak == 0.0)
    return false;
  return std::all_of(v.begin(), v.end(),
                     [&](double x) { return x > 0.0 || std::abs(x) <= rel_floor * peak; });
}

namespace detail {

inline void orient_and_normalize(Eigen::VectorXd& v) {
  if (v.sum() < 0.0)
    v = -v;
  v /= v.norm();
}

struct RayleighState {
  double lambda = 0.0;
  double residual = 0.0;
};

/// v must have unit norm; y receives A^T v.
inline RayleighState rayleigh(const Eigen::MatrixXd& A, const Eigen::VectorXd& v,
                              Eigen::VectorXd& y) {
  y.noalias() = A.transpose() * v;
  const double lambda = v.dot(y);
  return {lambda, (y - lambda * v).norm()};
}

inline void check_spectral_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw domain_error("leading_eigen: beta must lie in (0, 1), got " + std::to_string(beta));
}

} // namespace detail

/// Power iteration on C^T, optionally finished by inverse iteration with a
/// shift just above the power estimate (needed near b = 1, where the gap to
/// the rest of the truncated spectrum closes).
inline SpectralResult leading_eigen(const TransferMatrix& matrix, const SpectralOptions& opts = {},
                                    std::span<const double> start = {}) {
  detail::check_spectral_beta(matrix.beta);
  const Eigen::MatrixXd& A = matrix.entries;
  const int M = matrix.dim();

  Eigen::VectorXd v(M);
  if (start.empty()) {
    v.setOnes();
  } else {
    if (static_cast<int>(start.size()) != M)
      throw domain_error("leading_eigen: start vector has the wrong length");
    for (int m = 0; m < M; ++m)
      v[m] = start[static_cast<std::size_t>(m)];
    if (v.minCoeff() < 0.0 || v.maxCoeff() <= 0.0)
      throw domain_error("leading_eigen: start vector must be non-negative and non-zero");
  }
  v /= v.norm();

  Eigen::VectorXd y(M);
  detail::RayleighState st;
  int it = 0;
  const int power_budget = opts.method == SpectralMethod::power
                               ? opts.max_iter
                               : (opts.method == SpectralMethod::automatic
                                      ? std::min(opts.warmup, opts.max_iter)
                                      : std::min(50, opts.max_iter));
  // In automatic mode the warm-up is cut short once the observed residual
  // decay says power iteration cannot reach tol within the warm-up budget.
  constexpr int probe = 25;
  double probe_residual = 0.0;
  while (true) {
    st = detail::rayleigh(A, v, y);
    if (st.residual <= opts.tol || it >= power_budget)
      break;
    if (opts.method == SpectralMethod::automatic && it > 0 && it % probe == 0) {
      if (probe_residual > 0.0) {
        const double rate = std::pow(st.residual / probe_residual, 1.0 / probe);
        if (!(rate < 1.0) || std::log(opts.tol / st.residual) / std::log(rate) > power_budget - it)
          break;
      }
      probe_residual = st.residual;
    }
    v = y / y.norm();
    ++it;
  }

  auto finish = [&](Eigen::VectorXd vec, detail::RayleighState s, int iters) {
    detail::orient_and_normalize(vec);
    SpectralResult r;
    r.beta = matrix.beta;
    r.dim = M;
    r.lambda = s.lambda;
    r.residual = s.residual;
    r.iterations = iters;
    r.eigvec.assign(vec.data(), vec.data() + M);
    return r;
  };

  if (st.residual <= opts.tol)
    return finish(v, st, it);
  if (opts.method == SpectralMethod::power)
    throw convergence_error("power iteration did not converge in " + std::to_string(it) +
                                " iterations (residual " + std::to_string(st.residual) + ")",
                            st.residual);

  // Inverse iteration. The shift sits above the power estimate so that the
  // leading eigenvalue is the nearest one; a wrong pick shows up as a
  // non-Perron vector and falls back to plain power iteration.
  Eigen::VectorXd w = v;
  detail::RayleighState ws = st;
  int inv_it = 0;
  bool accepted = false;
  double shift = st.lambda + std::max(1e-3 * std::abs(st.lambda), 2.0 * st.residual);
  for (int factorizations = 0; factorizations < 4 && !accepted; ++factorizations) {
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(
        Eigen::MatrixXd(A.transpose()) - shift * Eigen::MatrixXd::Identity(M, M));
    double last = ws.residual;
    for (int inner = 0; inner < 200 && it + inv_it < opts.max_iter; ++inner) {
      Eigen::VectorXd z = lu.solve(w);
      detail::orient_and_normalize(z);
      w = std::move(z);
      ++inv_it;
      ws = detail::rayleigh(A, w, y);
      if (ws.residual <= opts.tol) {
        accepted = true;
        break;
      }
      // Slow contraction: the shift is too far away, move it in.
      if (inner >= 5 && ws.residual > 0.7 * last)
        break;
      last = ws.residual;
    }
    shift = ws.lambda + std::max(1e-9 * std::abs(ws.lambda), 2.0 * ws.residual);
  }
  if (accepted && ws.lambda >= st.lambda - 10.0 * st.residual &&
      is_perron_vector(std::span<const double>(w.data(), static_cast<std::size_t>(M))))
    return finish(w, ws, it + inv_it);

  // Fallback: keep power-iterating from where the warm-up stopped.
  st = detail::rayleigh(A, v, y);
  while (st.residual > opts.tol && it < opts.max_iter) {
    v = y / y.norm();
    ++it;
    st = detail::rayleigh(A, v, y);
  }
  if (st.residual > opts.tol)
    throw convergence_error("leading_eigen did not converge in " + std::to_string(it) +
                                " iterations (residual " + std::to_string(st.residual) + ")",
                            st.residual);
  return finish(v, st, it);
}

/// Leading eigenpair at dimension M with the truncation uncertainty
/// |lambda(M) - lambda(M/2)| filled in.
inline SpectralResult solve_spectrum(double beta, int M, const SpectralOptions& opts = {}) {
  SpectralResult r = leading_eigen(build_matrix(beta, M), opts);
  if (M / 2 >= 2) {
    const SpectralResult half = leading_eigen(build_matrix(beta, M / 2), opts);
    r.truncation_uncertainty = std::abs(r.lambda - half.lambda);
  }
  return r;
}

/// lambda(b) estimated as Z_{k,e}^K(2b) / Z_{k-1,e}^K(2b), without touching
/// the matrix.
inline double lambda_from_ratio(double beta, int k, const EvalOptions& opts = {}) {
  if (k < 3)
    throw domain_error("lambda_from_ratio: k >= 3 required");
  const double num = z_knauf_even(k, 2.0 * beta, opts).value;
  const double den = z_knauf_even(k - 1, 2.0 * beta, opts).value;
  return num / den;
}

struct FunctionalTrajectory {
  std::vector<std::vector<double>> vectors; ///< unit-norm iterates, vectors[0] = start
  std::vector<double> norm_ratios;          ///< ||C^T x_t|| / ||x_t||, one per step
};

/// Repeated application of C(2b)^T to a non-negative start vector.
inline FunctionalTrajectory iterate_functional(double beta, int M, int steps,
                                               std::span<const double> start) {
  if (steps < 0)
    throw domain_error("iterate_functional: steps must be non-negative");
  if (static_cast<int>(start.size()) != M)
    throw domain_error("iterate_functional: start vector has the wrong length");
  if (std::any_of(start.begin(), start.end(), [](double x) { return !(x >= 0.0); }) ||
      std::none_of(start.begin(), start.end(), [](double x) { return x > 0.0; }))
    throw domain_error("iterate_functional: start must be non-negative and not all zero");

  FunctionalTrajectory out;
  out.vectors.emplace_back(start.begin(), start.end());
  if (steps == 0)
    return out;

  const TransferMatrix C = build_matrix(beta, M);
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(start.data(), M);
  x /= x.norm();
  Eigen::VectorXd y(M);
  for (int t = 0; t < steps; ++t) {
    y.noalias() = C.entries.transpose() * x;
    const double growth = y.norm();
    out.norm_ratios.push_back(growth);
    x = y / growth;
    out.vectors.emplace_back(x.data(), x.data() + M);
  }
  return out;
}

/// phi(x) = sum_m a_m (1-x)^m, by Horner.
inline double eigenfunction_eval(const SpectralResult& r, double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw domain_error("eigenfunction_eval: x must lie in [0, 1]");
  const double y = 1.0 - x;
  double acc = 0.0;
  for (auto it = r.eigvec.rbegin(); it != r.eigvec.rend(); ++it)
    acc = acc * y + *it;
  return acc;
}

/// Relative residual of lambda phi(x) = (1+x)^(-2b) [phi(x/(1+x)) + phi(1/(1+x))].
inline double fixed_point_residual(const SpectralResult& r, double x) {
  const double lhs = r.lambda * eigenfunction_eval(r, x);
  const double rhs = std::pow(1.0 + x, -2.0 * r.beta) *
                     (eigenfunction_eval(r, x / (1.0 + x)) + eigenfunction_eval(r, 1.0 / (1.0 + x)));
  return std::abs(lhs - rhs) / std::abs(lhs);
}

} // namespace fareyphase

#endif
