#ifndef FAREYPHASE_PARTITION_HPP
#define FAREYPHASE_PARTITION_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "farey.hpp"
#include "summation.hpp"

namespace fareyphase {

enum class Model { farey_chain, knauf, knauf_even, knauf_odd, farey_tree };

constexpr std::string_view to_string(Model m) noexcept {
  switch (m) {
  case Model::farey_chain: return "farey-chain";
  case Model::knauf: return "knauf";
  case Model::knauf_even: return "knauf-even";
  case Model::knauf_odd: return "knauf-odd";
  case Model::farey_tree: return "farey-tree";
  }
  return "?";
}

inline Model parse_model(std::string_view s) {
  for (Model m : {Model::farey_chain, Model::knauf, Model::knauf_even, Model::knauf_odd,
                  Model::farey_tree})
    if (s == to_string(m))
      return m;
  throw domain_error("unknown model '" + std::string(s) +
                     "' (expected farey-chain, knauf, knauf-even, knauf-odd or farey-tree)");
}

/// One evaluation of a lattice partition function.
struct PartitionValue {
  Model model = Model::knauf;
  double beta = 0.0;
  int level = 0;
  double value = 0.0;
  std::uint64_t terms = 0;
};

struct EvalOptions {
  unsigned threads = 1;
  /// Runtime budget: sums cost 2^k terms, refuse anything deeper.
  int max_level = 40;
};

namespace detail {

/// d^(-beta), with exact fast paths for the exponents the checks use most.
inline double weight(std::uint64_t d, double beta) noexcept {
  const double x = static_cast<double>(d);
  if (beta == 0.0) return 1.0;
  if (beta == 1.0) return 1.0 / x;
  if (beta == 2.0) return 1.0 / (x * x);
  return std::pow(x, -beta);
}

inline void check_budget(int k, const EvalOptions& opts) {
  check_level(k);
  if (k > opts.max_level)
    throw level_too_large("level " + std::to_string(k) + " exceeds the runtime budget (max_level=" +
                          std::to_string(opts.max_level) + ")");
}

/// Sums term(prev, cur, index_of_prev) over consecutive pairs
/// (r_k^(n), r_k^(n+1)), n = 1..2^k, in ascending order.
template <class Term>
double reduce_level_pairs(int k, const EvalOptions& opts, Term&& term) {
  check_budget(k, opts);
  const int j = chunk_split_depth(k);
  const auto frames = split_frames(j);
  const std::uint64_t chunk_len = std::uint64_t{1} << (k - j);
  std::vector<compensated_sum> partial(frames.size());
  parallel_for_index(frames.size(), opts.threads, [&](std::size_t i) {
    compensated_sum acc;
    Fraction prev = frames[i].left;
    std::uint64_t index = 1 + i * chunk_len;
    for_each_in_chunk(frames[i], k, [&](const Fraction& cur) {
      acc.add(term(prev, cur, index));
      prev = cur;
      ++index;
    });
    partial[i] = acc;
  });
  compensated_sum total;
  for (const auto& p : partial)
    total.merge(p);
  return total.value();
}

/// Sums term(triple) over the new fractions of level k, ascending.
template <class Term>
double reduce_new_fractions(int k, const EvalOptions& opts, Term&& term) {
  check_budget(k, opts);
  if (k < 1)
    throw domain_error("level must be >= 1 for new-fraction sums");
  const int j = chunk_split_depth(k);
  const auto frames = split_frames(j);
  std::vector<compensated_sum> partial(frames.size());
  parallel_for_index(frames.size(), opts.threads, [&](std::size_t i) {
    compensated_sum acc;
    traverse_new_pairs(frames[i], k, [&](const MediantTriple& t) { acc.add(term(t)); });
    partial[i] = acc;
  });
  compensated_sum total;
  for (const auto& p : partial)
    total.merge(p);
  return total.value();
}

inline void require_level(int k, int min, const char* what) {
  if (k < min)
    throw domain_error(std::string(what) + " needs k >= " + std::to_string(min) + ", got " +
                       std::to_string(k));
}

} // namespace detail

/// Z_k^K(beta) = sum_{n=1}^{2^k} (d_k^(n))^-beta.
inline PartitionValue z_knauf(int k, double beta, const EvalOptions& opts = {}) {
  detail::require_level(k, 0, "z_knauf");
  const double v = detail::reduce_level_pairs(
      k, opts, [beta](const Fraction& prev, const Fraction&, std::uint64_t) {
        return detail::weight(prev.den, beta);
      });
  return {Model::knauf, beta, k, v, std::uint64_t{1} << k};
}

/// Even-index part of Z_k^K: the 2^(k-1) new fractions of level k.
inline PartitionValue z_knauf_even(int k, double beta, const EvalOptions& opts = {}) {
  detail::require_level(k, 1, "z_knauf_even");
  const double v = detail::reduce_new_fractions(
      k, opts, [beta](const MediantTriple& t) { return detail::weight(t.mid.den, beta); });
  return {Model::knauf_even, beta, k, v, std::uint64_t{1} << (k - 1)};
}

/// Odd-index part of Z_k^K, summed over the odd positions of level k itself
/// (not through Z_{k-1}^K, so the two can be compared).
inline PartitionValue z_knauf_odd(int k, double beta, const EvalOptions& opts = {}) {
  detail::require_level(k, 1, "z_knauf_odd");
  const double v = detail::reduce_level_pairs(
      k, opts, [beta](const Fraction& prev, const Fraction&, std::uint64_t index) {
        return (index & 1u) ? detail::weight(prev.den, beta) : 0.0;
      });
  return {Model::knauf_odd, beta, k, v, std::uint64_t{1} << (k - 1)};
}

/// Z_k^FC(beta) = sum_{n=1}^{2^k} (d_k^(n) + n_k^(n+1))^-beta.
inline PartitionValue z_farey_chain(int k, double beta, const EvalOptions& opts = {}) {
  detail::require_level(k, 1, "z_farey_chain");
  const double v = detail::reduce_level_pairs(
      k, opts, [beta](const Fraction& prev, const Fraction& cur, std::uint64_t) {
        return detail::weight(prev.den + cur.num, beta);
      });
  return {Model::farey_chain, beta, k, v, std::uint64_t{1} << k};
}

namespace detail {

/// Ball (r_k^(4n-2), r_k^(4n)) as the two children of a level-(k-1) new
/// fraction: returns its exact width from the integer cross product.
inline double ball_width_from_fractions(const MediantTriple& t) noexcept {
  using u128 = unsigned __int128;
  const Fraction lo = mediant(t.left, t.mid);
  const Fraction hi = mediant(t.mid, t.right);
  const u128 cross = u128(hi.num) * lo.den - u128(lo.num) * hi.den;
  return static_cast<double>(cross) /
         (static_cast<double>(lo.den) * static_cast<double>(hi.den));
}

/// Same width from denominators only: 3 / (d^(4n) d^(4n-2)).
inline double ball_width_from_denominators(const MediantTriple& t) noexcept {
  const double lo = static_cast<double>(t.left.den + t.mid.den);
  const double hi = static_cast<double>(t.mid.den + t.right.den);
  return 3.0 / (lo * hi);
}

inline double ball_term(double width, double beta) noexcept {
  if (beta == 0.0) return 1.0;
  if (beta == 1.0) return width;
  return std::pow(width, beta);
}

} // namespace detail

/// Z_k^F(beta) = sum_{n=1}^{2^(k-2)} (r_k^(4n) - r_k^(4n-2))^beta, with the
/// widths taken from exact numerator/denominator cross products.
inline PartitionValue z_farey_tree(int k, double beta, const EvalOptions& opts = {}) {
  detail::require_level(k, 2, "z_farey_tree");
  detail::check_budget(k, opts);
  const double v = detail::reduce_new_fractions(k - 1, opts, [beta](const MediantTriple& t) {
    return detail::ball_term(detail::ball_width_from_fractions(t), beta);
  });
  return {Model::farey_tree, beta, k, v, std::uint64_t{1} << (k - 2)};
}

/// Z_k^F through the denominator-only form sum (3/(d^(4n) d^(4n-2)))^beta.
inline PartitionValue z_farey_tree_denominator_form(int k, double beta,
                                                    const EvalOptions& opts = {}) {
  detail::require_level(k, 2, "z_farey_tree");
  detail::check_budget(k, opts);
  const double v = detail::reduce_new_fractions(k - 1, opts, [beta](const MediantTriple& t) {
    return detail::ball_term(detail::ball_width_from_denominators(t), beta);
  });
  return {Model::farey_tree, beta, k, v, std::uint64_t{1} << (k - 2)};
}

inline PartitionValue evaluate(Model m, int k, double beta, const EvalOptions& opts = {}) {
  switch (m) {
  case Model::farey_chain: return z_farey_chain(k, beta, opts);
  case Model::knauf: return z_knauf(k, beta, opts);
  case Model::knauf_even: return z_knauf_even(k, beta, opts);
  case Model::knauf_odd: return z_knauf_odd(k, beta, opts);
  case Model::farey_tree: return z_farey_tree(k, beta, opts);
  }
  throw domain_error("unknown model");
}

/// Z_{j,e}^K(beta) for every j in [1, kmax] from a single depth-first pass.
/// Entry 0 of the result is unused.
inline std::vector<double> even_parts_by_level(int kmax, double beta,
                                               const EvalOptions& opts = {}) {
  detail::require_level(kmax, 1, "even_parts_by_level");
  detail::check_budget(kmax, opts);
  const int j = chunk_split_depth(kmax);
  std::vector<compensated_sum> shallow(static_cast<std::size_t>(kmax) + 1);
  for (int depth = 1; depth <= j; ++depth)
    traverse_new_pairs(depth, [&](const MediantTriple& t) {
      shallow[depth].add(detail::weight(t.mid.den, beta));
    });

  const auto frames = split_frames(j);
  std::vector<std::vector<compensated_sum>> partial(
      frames.size(), std::vector<compensated_sum>(static_cast<std::size_t>(kmax) + 1));
  parallel_for_index(frames.size(), opts.threads, [&](std::size_t i) {
    auto& acc = partial[i];
    std::vector<MediantFrame> stack{frames[i]};
    while (!stack.empty()) {
      const MediantFrame f = stack.back();
      stack.pop_back();
      const Fraction m = f.mid();
      acc[f.depth].add(detail::weight(m.den, beta));
      if (f.depth < kmax) {
        stack.push_back({m, f.right, f.depth + 1});
        stack.push_back({f.left, m, f.depth + 1});
      }
    }
  });

  std::vector<double> out(static_cast<std::size_t>(kmax) + 1, 0.0);
  for (int depth = 1; depth <= kmax; ++depth) {
    compensated_sum total = shallow[depth];
    for (const auto& p : partial)
      total.merge(p[depth]);
    out[depth] = total.value();
  }
  return out;
}

/// Outcome of the Farey-tree sandwich check between even Knauf parts.
struct SandwichReport {
  int level = 0;
  double beta = 0.0;
  double lower = 0.0;
  double value = 0.0;
  double upper = 0.0;
  bool holds = false;
  std::string failure; ///< empty when holds
};

/// beta > 0:  Z_{k,e}^K(2b)/2 < Z_k^F(b) < 2^b Z_{k-1,e}^K(2b)
/// beta < 0:  2^b Z_{k-1,e}^K(2b) < Z_k^F(b) < Z_{k,e}^K(2b)/2
/// beta = 0:  Z_k^F = Z_k^K(0)/4 exactly.
inline SandwichReport verify_sandwich(int k, double beta, const EvalOptions& opts = {}) {
  detail::require_level(k, 2, "verify_sandwich");
  SandwichReport r;
  r.level = k;
  r.beta = beta;
  r.value = z_farey_tree(k, beta, opts).value;
  if (beta == 0.0) {
    r.lower = r.upper = 0.25 * z_knauf(k, 0.0, opts).value;
    r.holds = r.value == r.lower;
    if (!r.holds)
      r.failure = "Z^F(0)=" + std::to_string(r.value) + " != Z^K(0)/4=" + std::to_string(r.lower);
    return r;
  }
  const double half_even = 0.5 * z_knauf_even(k, 2.0 * beta, opts).value;
  const double scaled_prev = std::pow(2.0, beta) * z_knauf_even(k - 1, 2.0 * beta, opts).value;
  if (beta > 0.0) {
    r.lower = half_even;
    r.upper = scaled_prev;
  } else {
    r.lower = scaled_prev;
    r.upper = half_even;
  }
  const bool low_ok = r.lower < r.value;
  const bool high_ok = r.value < r.upper;
  r.holds = low_ok && high_ok;
  if (!low_ok)
    r.failure = "lower bound violated: " + std::to_string(r.lower) + " >= " + std::to_string(r.value);
  else if (!high_ok)
    r.failure = "upper bound violated: " + std::to_string(r.value) + " >= " + std::to_string(r.upper);
  return r;
}

struct TelescopeReport {
  int level = 0;
  double beta = 0.0;
  /// |Z_k^K(2b) - 1 - sum_j Z_{j,e}^K(2b)| / Z_k^K(2b)
  double residual = 0.0;
  /// Z_{j-1,e}^K(2b) / Z_{j,e}^K(2b) for j = 2..k (index 0 is j = 2).
  std::vector<double> ratios;
  /// For 0 < b < 1: Z_{j,e}(b) > 2^(1-b) Z_{j-1,e}(b) at every j (argument b,
  /// not 2b). For b <= 0: every ratio above <= 1/2. Otherwise true (no claim).
  bool growth_holds = true;
};

inline TelescopeReport verify_telescope(int k, double beta, const EvalOptions& opts = {}) {
  detail::require_level(k, 1, "verify_telescope");
  TelescopeReport r;
  r.level = k;
  r.beta = beta;
  std::vector<double> even(static_cast<std::size_t>(k) + 1);
  compensated_sum sum(1.0);
  for (int j = 1; j <= k; ++j) {
    even[j] = z_knauf_even(j, 2.0 * beta, opts).value;
    sum.add(even[j]);
  }
  const double full = z_knauf(k, 2.0 * beta, opts).value;
  r.residual = std::abs(full - sum.value()) / full;
  for (int j = 2; j <= k; ++j) {
    r.ratios.push_back(even[j - 1] / even[j]);
    if (beta <= 0.0 && !(even[j - 1] / even[j] <= 0.5))
      r.growth_holds = false;
  }
  if (beta > 0.0 && beta < 1.0 && k >= 2) {
    const double growth = std::pow(2.0, 1.0 - beta);
    double prev = z_knauf_even(1, beta, opts).value;
    for (int j = 2; j <= k; ++j) {
      const double cur = z_knauf_even(j, beta, opts).value;
      if (!(cur > growth * prev))
        r.growth_holds = false;
      prev = cur;
    }
  }
  return r;
}

/// phi_k(n): how many index positions n' in [1, 2^k] of level k carry
/// denominator n. Index 0 is unused.
struct DirichletTable {
  int level = 0;
  std::uint64_t n_max = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t operator()(std::uint64_t n) const { return counts.at(n); }
};

inline constexpr int max_dirichlet_level = 30;
inline constexpr std::uint64_t max_dirichlet_n = 1'000'000;

/// Pruned walk: every descendant of a node has a larger denominator, so
/// subtrees beyond n_max are skipped.
inline DirichletTable dirichlet_coefficients(int k, std::uint64_t n_max) {
  check_level(k);
  if (k > max_dirichlet_level)
    throw level_too_large("dirichlet_coefficients: k <= " +
                          std::to_string(max_dirichlet_level) + " required");
  if (n_max < 1 || n_max > max_dirichlet_n)
    throw domain_error("dirichlet_coefficients: n_max must lie in [1, " +
                       std::to_string(max_dirichlet_n) + "]");
  DirichletTable t{k, n_max, std::vector<std::uint64_t>(n_max + 1, 0)};
  t.counts[1] = 1; // 0/1; the closing 1/1 is outside the summation range
  if (k == 0)
    return t;
  std::vector<MediantFrame> stack{MediantFrame{}};
  while (!stack.empty()) {
    const MediantFrame f = stack.back();
    stack.pop_back();
    const Fraction m = f.mid();
    if (m.den > n_max)
      continue;
    ++t.counts[m.den];
    if (f.depth < k) {
      stack.push_back({m, f.right, f.depth + 1});
      stack.push_back({f.left, m, f.depth + 1});
    }
  }
  return t;
}

/// Euler's totient by trial factorization.
constexpr std::uint64_t euler_totient(std::uint64_t n) {
  if (n == 0)
    throw domain_error("euler_totient: n >= 1 required");
  std::uint64_t result = n;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p != 0)
      continue;
    while (n % p == 0)
      n /= p;
    result -= result / p;
  }
  if (n > 1)
    result -= result / n;
  return result;
}

/// Riemann zeta for real s > 1: direct sum over n < N plus an
/// Euler-Maclaurin tail starting at N.
inline double zeta(double s, std::uint64_t terms = 1'000'000) {
  if (!(s > 1.0))
    throw domain_error("zeta: s > 1 required");
  compensated_sum acc;
  // Smallest terms first.
  for (std::uint64_t n = terms - 1; n >= 1; --n)
    acc.add(std::pow(static_cast<double>(n), -s));
  const double N = static_cast<double>(terms);
  const double base = std::pow(N, -s);
  acc.add(N * base / (s - 1.0));
  acc.add(0.5 * base);
  acc.add(s * base / (12.0 * N));
  acc.add(-s * (s + 1.0) * (s + 2.0) * base / (720.0 * N * N * N));
  return acc.value();
}

/// zeta(2b - 1) / zeta(2b), the b > 1 limit of Z_k^K(2b).
inline double zeta_ratio(double beta) {
  if (!(beta > 1.0))
    throw domain_error("zeta_ratio: beta > 1 required");
  return zeta(2.0 * beta - 1.0) / zeta(2.0 * beta);
}

} // namespace fareyphase

#endif
