#ifndef FAREYPHASE_BALLS_HPP
#define FAREYPHASE_BALLS_HPP

// Farey-tree balls. The ball with index n at level k is the interval
// (r_k^(4n-2), r_k^(4n)) spanned by the two children of the n-th new
// fraction p of level k-1. Writing p = G(1/2) with
// G = F_e1 o F_e2 o ... o F_em (m = k-2), the ball is
// G([F_0(1/2), F_1(1/2)]) = G([1/3, 2/3]).
//
// The symbol string of p is read off by iterating the Farey map on p
// exactly: e_i is the branch p currently lies in.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "farey.hpp"
#include "summation.hpp"

namespace fareyphase {

inline constexpr int max_ball_level = 62;

struct BallRecord {
  int level = 0;
  std::uint64_t index = 0;
  double exact_diameter = 0.0;
  std::vector<int> symbols; ///< e_1 ... e_{k-2}, outermost map first
  double composed_diameter = 0.0;
  double approx_diameter = 0.0;
};

namespace detail {

inline void check_ball(int k, std::uint64_t n) {
  if (k < 2 || k > max_ball_level)
    throw domain_error("ball level must lie in [2, " + std::to_string(max_ball_level) +
                       "], got " + std::to_string(k));
  const std::uint64_t count = std::uint64_t{1} << (k - 2);
  if (n < 1 || n > count)
    throw domain_error("ball index " + std::to_string(n) + " out of range [1, " +
                       std::to_string(count) + "] at level " + std::to_string(k));
}

/// The n-th new fraction of level k-1 with its neighbours, found by walking
/// the binary expansion of n-1 down from 1/2.
inline MediantTriple ball_parent(int k, std::uint64_t n) {
  check_ball(k, n);
  MediantFrame f;
  for (int bit = k - 3; bit >= 0; --bit) {
    const Fraction m = f.mid();
    if (((n - 1) >> bit) & 1u)
      f = {m, f.right, f.depth + 1};
    else
      f = {f.left, m, f.depth + 1};
  }
  return {f.left, f.mid(), f.right};
}

/// F_0(p/q) = p/(p+q), F_1(p/q) = q/(p+q), exactly.
constexpr Fraction apply_presentation(int eps, const Fraction& x) noexcept {
  return eps == 0 ? Fraction{x.num, x.num + x.den} : Fraction{x.den, x.num + x.den};
}

inline void check_symbols(std::span<const int> symbols) {
  if (symbols.size() > static_cast<std::size_t>(max_ball_level - 2))
    throw domain_error("symbol string too long");
  for (int e : symbols)
    if (e != 0 && e != 1)
      throw domain_error("symbols must be 0 or 1");
}

} // namespace detail

/// r_k^(4n) - r_k^(4n-2) = 1/(d^(4n) d^(4n-1)) + 1/(d^(4n-1) d^(4n-2)).
inline double ball_exact(int k, std::uint64_t n) {
  const MediantTriple p = detail::ball_parent(k, n);
  const double d3 = static_cast<double>(p.mid.den);
  const double d2 = static_cast<double>(p.left.den + p.mid.den);
  const double d4 = static_cast<double>(p.mid.den + p.right.den);
  return 1.0 / (d4 * d3) + 1.0 / (d3 * d2);
}

/// Symbol string e_1 ... e_{k-2} of ball (k, n).
inline std::vector<int> ball_symbols(int k, std::uint64_t n) {
  Fraction p = detail::ball_parent(k, n).mid;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k - 2));
  while (!(p.num == 1 && p.den == 2)) {
    out.push_back(2 * p.num < p.den ? 0 : 1);
    p = farey_map(p);
  }
  return out;
}

/// |G(F_0(1/2)) - G(F_1(1/2))| with G composed from the symbols, in exact
/// rational arithmetic; only the final quotient is rounded.
inline double ball_by_composition(std::span<const int> symbols) {
  detail::check_symbols(symbols);
  Fraction a{1, 3};
  Fraction b{2, 3};
  for (auto it = symbols.rbegin(); it != symbols.rend(); ++it) {
    a = detail::apply_presentation(*it, a);
    b = detail::apply_presentation(*it, b);
  }
  using u128 = unsigned __int128;
  const u128 lhs = u128(a.num) * b.den;
  const u128 rhs = u128(b.num) * a.den;
  const u128 cross = lhs > rhs ? lhs - rhs : rhs - lhs;
  return static_cast<double>(cross) / (static_cast<double>(a.den) * static_cast<double>(b.den));
}

/// Chain-rule product prod_i |F'_{e_i}(x_i)|, x_i = F_{e_{i+1}} o ... o F_{e_m}(1/2).
inline double ball_derivative_approx(std::span<const int> symbols) {
  detail::check_symbols(symbols);
  double x = 0.5;
  double prod = 1.0;
  for (auto it = symbols.rbegin(); it != symbols.rend(); ++it) {
    prod *= std::abs(presentation_derivative(*it, x));
    x = presentation(*it, x);
  }
  return prod;
}

inline constexpr int max_approx_partition_level = 20;

/// Sum over all 2^(k-2) symbol strings of ball_derivative_approx^beta.
/// Strings are grown from the innermost symbol outwards, so every product is
/// built once.
inline double approx_partition(int k, double beta) {
  if (k < 2 || k > max_approx_partition_level)
    throw level_too_large("approx_partition: k must lie in [2, " +
                          std::to_string(max_approx_partition_level) + "]");
  struct Node {
    double x;
    double prod;
    int depth;
  };
  compensated_sum total;
  std::vector<Node> stack{{0.5, 1.0, 0}};
  while (!stack.empty()) {
    const Node nd = stack.back();
    stack.pop_back();
    if (nd.depth == k - 2) {
      total.add(beta == 0.0 ? 1.0 : std::pow(nd.prod, beta));
      continue;
    }
    const double s = 1.0 / ((1.0 + nd.x) * (1.0 + nd.x));
    stack.push_back({1.0 / (1.0 + nd.x), nd.prod * s, nd.depth + 1});
    stack.push_back({nd.x / (1.0 + nd.x), nd.prod * s, nd.depth + 1});
  }
  return total.value();
}

inline constexpr int max_ball_record_level = 20;

inline std::vector<BallRecord> ball_records(int k) {
  if (k < 2 || k > max_ball_record_level)
    throw level_too_large("ball_records: k must lie in [2, " +
                          std::to_string(max_ball_record_level) + "]");
  const std::uint64_t count = std::uint64_t{1} << (k - 2);
  std::vector<BallRecord> out;
  out.reserve(count);
  for (std::uint64_t n = 1; n <= count; ++n) {
    BallRecord r;
    r.level = k;
    r.index = n;
    r.exact_diameter = ball_exact(k, n);
    r.symbols = ball_symbols(k, n);
    r.composed_diameter = ball_by_composition(r.symbols);
    r.approx_diameter = ball_derivative_approx(r.symbols);
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace fareyphase

#endif
