#pragma once

#include <algorithm>
#include <vector>

#include "density_lab/bignum.hpp"

namespace density_lab {

// Strictly increasing index grid.
using Schedule = std::vector<BigNat>;

// Integer-exact geometric grid: v' = max(v+1, v*num/den). Deterministic on
// every platform, no floating point involved.
inline Schedule geometric_schedule(const BigNat& horizon, unsigned num = 11, unsigned den = 10,
                                   const BigNat& start = BigNat(1u), std::size_t max_points = 200000) {
  if (den == 0 || num <= den) throw InvalidArgument("geometric_schedule: need num > den >= 1");
  if (horizon.is_huge())
    throw InvalidArgument("geometric_schedule: horizon beyond materializable range");
  Schedule out;
  cpp_int v = start.is_zero() ? cpp_int(1) : start.exact();
  const cpp_int h = horizon.exact();
  while (v <= h) {
    out.emplace_back(v);
    if (out.size() > max_points) throw InvalidArgument("geometric_schedule: too many points");
    cpp_int next = v * num / den;
    v = next > v ? next : v + 1;
  }
  return out;
}

inline Schedule merge_schedules(Schedule a, const Schedule& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

inline Schedule clip_schedule(Schedule s, const BigNat& horizon) {
  s.erase(std::remove_if(s.begin(), s.end(), [&](const BigNat& v) { return v > horizon; }),
          s.end());
  return s;
}

inline Schedule pow2_schedule(unsigned m_max) {
  Schedule out;
  for (unsigned m = 0; m <= m_max; ++m) out.push_back(BigNat::pow2(m));
  return out;
}

// Block boundaries of the 4^m < k <= 4^(m+1) weight: 4^m and 4^m + 1.
inline Schedule pow4_block_schedule(unsigned m_max) {
  Schedule out;
  for (unsigned m = 1; m <= m_max; ++m) {
    out.push_back(BigNat::pow2(2 * m));
    out.push_back(BigNat::pow2(2 * m) + BigNat(1u));
  }
  return merge_schedules(std::move(out), {});
}

inline Schedule factorial_schedule(unsigned m_max) {
  Schedule out;
  for (unsigned m = 2; m <= m_max; ++m) {
    cpp_int f = factorial(m);
    out.push_back(BigNat(f - 1));
    out.push_back(BigNat(f));
  }
  return merge_schedules(std::move(out), {});
}

// Points just below and at the block starts 2^(m!) of the ES1 weight.
inline Schedule es1_anchor_schedule(unsigned m_max) {
  Schedule out;
  for (unsigned m = 1; m <= m_max; ++m) {
    cpp_int e = factorial(m);
    out.push_back(BigNat::pow2_offset(e, -1));
    out.push_back(BigNat::pow2(e));
  }
  return merge_schedules(std::move(out), {});
}

}  // namespace density_lab
