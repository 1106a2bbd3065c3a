#ifndef FAREYPHASE_FAREY_HPP
#define FAREYPHASE_FAREY_HPP

// Farey-fraction levels built by repeated mediant insertion.
//
// Level 0 is {0/1, 1/1}; level k+1 keeps every fraction of level k and
// inserts the mediant between each adjacent pair. Level k therefore holds
// 2^k + 1 fractions, and the 2^(k-1) "new" ones sit at even indices. The
// new fractions of level k are exactly the nodes at depth k of the
// Stern-Brocot tree restricted to [0, 1], which is what the streaming
// traversals below walk.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"

namespace fareyphase {

/// Largest level whose denominators (bounded by Fibonacci(k+2)) fit in 64 bits
/// with headroom for one more mediant step.
inline constexpr int max_level = 88;

/// Largest level that level_fractions() will materialize (~16.7M entries).
inline constexpr int max_listed_level = 24;

struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  friend constexpr bool operator==(const Fraction&, const Fraction&) = default;
};

constexpr Fraction mediant(const Fraction& a, const Fraction& b) noexcept {
  return {a.num + b.num, a.den + b.den};
}

/// True when b.num*a.den - a.num*b.den == 1, i.e. a < b are Farey neighbours.
constexpr bool are_neighbors(const Fraction& a, const Fraction& b) noexcept {
  using u128 = unsigned __int128;
  return u128(b.num) * a.den == u128(a.num) * b.den + 1;
}

inline double to_double(const Fraction& f) noexcept {
  return static_cast<double>(f.num) / static_cast<double>(f.den);
}

/// r_k^(n) = numerator/denominator, with its level k and 1-based index n.
struct FareyFraction {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;
  int level = 0;
  std::uint64_t index = 1;

  Fraction value() const noexcept { return {numerator, denominator}; }
};

/// Interval (left, right) of Farey neighbours whose mediant is a new fraction
/// at level `depth`.
struct MediantFrame {
  Fraction left{0, 1};
  Fraction right{1, 1};
  int depth = 1;

  Fraction mid() const noexcept { return mediant(left, right); }
};

/// One new fraction together with the two neighbours it was built from.
struct MediantTriple {
  Fraction left;
  Fraction mid;
  Fraction right;
};

inline void check_level(int k) {
  if (k < 0)
    throw domain_error("level must be non-negative, got " + std::to_string(k));
  if (k > max_level)
    throw overflow_error("level " + std::to_string(k) +
                         " would overflow 64-bit denominators (max " +
                         std::to_string(max_level) + ")");
}

/// The 2^depth frames at depth `depth`+1, ascending. Traversing level k
/// (k > depth) through each of them in order reproduces the serial order.
inline std::vector<MediantFrame> split_frames(int depth) {
  if (depth < 0 || depth >= max_level)
    throw domain_error("split depth out of range: " + std::to_string(depth));
  std::vector<MediantFrame> frames{MediantFrame{}};
  for (int d = 0; d < depth; ++d) {
    std::vector<MediantFrame> next;
    next.reserve(frames.size() * 2);
    for (const auto& f : frames) {
      const Fraction m = f.mid();
      next.push_back({f.left, m, f.depth + 1});
      next.push_back({m, f.right, f.depth + 1});
    }
    frames = std::move(next);
  }
  return frames;
}

/// Split depth used by the parallel reductions. It depends on k only, never
/// on the thread count, so chunk boundaries (and therefore every rounded
/// partial sum) are identical for any number of workers.
constexpr int chunk_split_depth(int k) noexcept {
  if (k < 14)
    return 0;
  return k - 12 < 10 ? k - 12 : 10;
}

/// Visits the new fractions of level k that lie inside `root`, ascending.
/// Iterative, explicit stack of at most k - root.depth + 1 frames.
template <class Visitor>
void traverse_new_pairs(const MediantFrame& root, int k, Visitor&& visit) {
  check_level(k);
  if (root.depth > k)
    return;
  std::vector<MediantFrame> stack;
  stack.reserve(static_cast<std::size_t>(k - root.depth + 2));
  stack.push_back(root);
  while (!stack.empty()) {
    const MediantFrame f = stack.back();
    stack.pop_back();
    const Fraction m = f.mid();
    if (f.depth == k) {
      visit(MediantTriple{f.left, m, f.right});
      continue;
    }
    stack.push_back({m, f.right, f.depth + 1});
    stack.push_back({f.left, m, f.depth + 1});
  }
}

/// Visits the 2^(k-1) new fractions of level k in ascending order.
template <class Visitor>
void traverse_new_pairs(int k, Visitor&& visit) {
  if (k < 1)
    throw domain_error("traverse_new_pairs needs k >= 1, got " + std::to_string(k));
  traverse_new_pairs(MediantFrame{}, k, visit);
}

/// In-order walk of every tree node with depth in [frame.depth, k] under
/// `frame`, followed by frame.right. Concatenating 0/1 with this chunk for
/// each frame of split_frames(j) yields the whole level k, ascending.
template <class Visitor>
void for_each_in_chunk(const MediantFrame& frame, int k, Visitor&& visit) {
  check_level(k);
  std::vector<MediantFrame> stack;
  stack.reserve(static_cast<std::size_t>(k > frame.depth ? k - frame.depth + 2 : 2));
  MediantFrame cur = frame;
  bool have = frame.depth <= k;
  while (have || !stack.empty()) {
    while (have) {
      stack.push_back(cur);
      const Fraction m = cur.mid();
      have = cur.depth < k;
      cur = {cur.left, m, cur.depth + 1};
    }
    const MediantFrame top = stack.back();
    stack.pop_back();
    const Fraction m = top.mid();
    visit(m);
    have = top.depth < k;
    cur = {m, top.right, top.depth + 1};
  }
  visit(frame.right);
}

/// Visits all 2^k + 1 fractions of level k in ascending order.
template <class Visitor>
void for_each_level_fraction(int k, Visitor&& visit) {
  check_level(k);
  visit(Fraction{0, 1});
  for_each_in_chunk(MediantFrame{}, k, visit);
}

inline std::vector<FareyFraction> level_fractions(int k) {
  check_level(k);
  if (k > max_listed_level)
    throw level_too_large("level " + std::to_string(k) + " exceeds the listing cap of " +
                          std::to_string(max_listed_level) +
                          "; stream it with traverse_new_pairs instead");
  std::vector<FareyFraction> out;
  out.reserve((std::size_t{1} << k) + 1);
  std::uint64_t n = 0;
  for_each_level_fraction(k, [&](const Fraction& f) {
    out.push_back({f.num, f.den, k, ++n});
  });
  return out;
}

/// f(x) = x/(1-x) on [0, 1/2], (1-x)/x on (1/2, 1].
inline double farey_map(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw domain_error("farey_map: x must lie in [0, 1]");
  return x <= 0.5 ? x / (1.0 - x) : (1.0 - x) / x;
}

/// Inverse branches of the Farey map: F_0(x) = x/(1+x), F_1(x) = 1/(1+x).
inline double presentation(int eps, double x) {
  if (eps != 0 && eps != 1)
    throw domain_error("presentation: branch index must be 0 or 1");
  if (!(x >= 0.0 && x <= 1.0))
    throw domain_error("presentation: x must lie in [0, 1]");
  return eps == 0 ? x / (1.0 + x) : 1.0 / (1.0 + x);
}

/// F'_0(x) = 1/(1+x)^2, F'_1(x) = -1/(1+x)^2.
inline double presentation_derivative(int eps, double x) {
  if (eps != 0 && eps != 1)
    throw domain_error("presentation_derivative: branch index must be 0 or 1");
  const double s = 1.0 / ((1.0 + x) * (1.0 + x));
  return eps == 0 ? s : -s;
}

/// Exact branch of the Farey map on a rational argument.
constexpr Fraction farey_map(const Fraction& x) noexcept {
  return 2 * x.num <= x.den ? Fraction{x.num, x.den - x.num} : Fraction{x.den - x.num, x.num};
}

} // namespace fareyphase

#endif
