#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

namespace eigenflow {

// Exponent multi-index m = (m_1, ..., m_n), m_i >= 0.
using MultiIndex = std::vector<int>;

inline int degree(const MultiIndex& m) {
  return std::accumulate(m.begin(), m.end(), 0);
}

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& m) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (int v : m) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

// Visits every m in N^n with lo <= |m| <= hi, in graded lexicographic order.
template <typename F>
void for_each_multi_index(int n, int lo, int hi, F&& visit) {
  MultiIndex m(static_cast<std::size_t>(n), 0);
  for (int d = lo; d <= hi; ++d) {
    // enumerate compositions of d into n parts, lexicographically descending in m[0]
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
      if (pos == n - 1) {
        m[static_cast<std::size_t>(pos)] = remaining;
        visit(static_cast<const MultiIndex&>(m));
        return;
      }
      for (int v = remaining; v >= 0; --v) {
        m[static_cast<std::size_t>(pos)] = v;
        rec(pos + 1, remaining - v);
      }
    };
    if (n == 0) break;
    rec(0, d);
  }
}

inline std::vector<MultiIndex> all_multi_indices(int n, int lo, int hi) {
  std::vector<MultiIndex> out;
  for_each_multi_index(n, lo, hi, [&](const MultiIndex& m) { out.push_back(m); });
  return out;
}

}  // namespace eigenflow
