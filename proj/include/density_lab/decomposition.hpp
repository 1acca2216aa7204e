#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "density_lab/density.hpp"
#include "density_lab/functions.hpp"
#include "density_lab/omega_sets.hpp"

namespace density_lab {

// floor(2^(ip+frac)); granularity 2^(ip-52) once past the double range.
inline BigNat floor_from_log2(Log2Parts p) {
  p.normalize();
  if (p.ip < 0) return BigNat(0u);
  if (p.ip <= 52) {
    double v = std::exp2(p.ip.convert_to<double>() + p.frac);
    return BigNat(static_cast<std::uint64_t>(v));
  }
  auto scaled = static_cast<std::uint64_t>(std::ldexp(std::exp2(p.frac), 52));  // [2^52, 2^53)
  return BigNat(cpp_int(scaled)).mul_pow2(p.ip - 52);
}

// floor(c * f(x) / 2^pow2_shift), routed through log2 parts so ES1-scale
// values stay usable; the shift is exact even where 2^-shift underflows.
inline BigNat floor_scaled_modulus(const ModulusFunction& f, const BigNat& x, double c,
                                   const cpp_int& pow2_shift = 0) {
  if (x.is_zero() || c <= 0) return BigNat(0u);
  Log2Parts p = f.eval_log2(x);
  p.frac += std::log2(c);
  p.ip -= pow2_shift;
  return floor_from_log2(p);
}

// Smallest k with g(k) > 0 (g nondecreasing), or nullopt below the ceiling.
inline std::optional<BigNat> first_positive_index(const WeightFunction& g, const BigNat& ceiling) {
  if (!g.eval(BigNat(0u)).is_zero()) return BigNat(0u);
  if (g.eval(ceiling).is_zero()) return std::nullopt;
  BigNat lo(0u), hi(1u);
  while (g.eval(hi).is_zero()) {
    lo = hi;
    hi = hi.times2();
    if (hi > ceiling) {
      hi = ceiling;
      break;
    }
  }
  while (hi - lo > BigNat(1u)) {
    BigNat mid = lo + (hi - lo).div_floor(2);
    if (g.eval(mid).is_zero())
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

struct SubmeasureValue {
  unsigned m = 0;
  double value = 0;  // f(|C ∩ [k_m, k_{m+1})|) / f(g(k_m))
};

// The interval decomposition k_m = min{k : f(g(k)) >= 2^m} with k_0 = 0, and
// the submeasures phi_m concentrated on [k_m, k_{m+1}).
class Decomposition {
 public:
  Decomposition(ModulusFunction f, WeightFunction g, std::vector<BigNat> k_seq, unsigned start_m,
                unsigned requested_m_max, bool truncated, std::string truncation_reason)
      : f_(std::move(f)),
        g_(std::move(g)),
        k_seq_(std::move(k_seq)),
        start_m_(start_m),
        requested_m_max_(requested_m_max),
        truncated_(truncated),
        truncation_reason_(std::move(truncation_reason)) {}

  const ModulusFunction& modulus() const { return f_; }
  const WeightFunction& weight() const { return g_; }
  const std::vector<BigNat>& k_seq() const { return k_seq_; }
  const BigNat& k(unsigned m) const {
    if (m >= k_seq_.size()) throw IndexOutOfRange("k_" + std::to_string(m) + " not stored");
    return k_seq_[m];
  }
  // Largest m with both k_m and k_{m+1} stored is stored_m_max()-1.
  unsigned stored_m_max() const { return static_cast<unsigned>(k_seq_.size()) - 1; }
  unsigned start_m() const { return start_m_; }
  unsigned requested_m_max() const { return requested_m_max_; }
  bool truncated() const { return truncated_; }
  const std::string& truncation_reason() const { return truncation_reason_; }

  bool index_valid(unsigned m) const { return m >= start_m_ && m + 1 <= stored_m_max(); }

  SubmeasureValue phi(unsigned m, const OmegaSet& C) const {
    if (!index_valid(m))
      throw IndexOutOfRange("phi_" + std::to_string(m) + ": valid range is [" +
                            std::to_string(start_m_) + ", " + std::to_string(stored_m_max()) +
                            ")");
    BigNat inside = C.count(k_seq_[m + 1]) - C.count(k_seq_[m]);
    return {m, modulus_ratio(f_, inside, g_.eval(k_seq_[m]))};
  }

  SubmeasureValue phi_omega(unsigned m) const {
    if (!index_valid(m))
      throw IndexOutOfRange("phi_" + std::to_string(m) + ": valid range is [" +
                            std::to_string(start_m_) + ", " + std::to_string(stored_m_max()) +
                            ")");
    return {m, modulus_ratio(f_, k_seq_[m + 1] - k_seq_[m], g_.eval(k_seq_[m]))};
  }

 private:
  ModulusFunction f_;
  WeightFunction g_;
  std::vector<BigNat> k_seq_;
  unsigned start_m_;
  unsigned requested_m_max_;
  bool truncated_;
  std::string truncation_reason_;
};

inline Decomposition build_decomposition(const ModulusFunction& f, const WeightFunction& g,
                                         unsigned m_max,
                                         const BigNat& index_ceiling = BigNat::pow2(256)) {
  if (!f.is_unbounded())
    throw BoundedModulus("build_decomposition: modulus '" + f.name() + "' is bounded");
  if (!g.is_nondecreasing())
    throw NotMonotone("build_decomposition: weight '" + g.name() + "' is not nondecreasing");
  if (m_max < 1) throw InvalidArgument("build_decomposition: m_max must be >= 1");

  std::vector<BigNat> k_seq{BigNat(0u)};
  bool truncated = false;
  std::string reason;

  BigNat g_at_ceiling = g.eval(index_ceiling);
  BigNat prev(0u);
  BigNat g_prev = g.eval(prev);
  for (unsigned m = 1; m <= m_max; ++m) {
    if (!modulus_geq_pow2(f, g_at_ceiling, m)) {
      truncated = true;
      reason = "k_" + std::to_string(m) + " exceeds the index ceiling " + index_ceiling.str();
      break;
    }
    if (modulus_geq_pow2(f, g_prev, m)) {
      k_seq.push_back(prev);  // threshold already passed: empty interval upstream
      continue;
    }
    BigNat lo = prev;
    BigNat step(1u);
    BigNat hi = prev + step;
    while (true) {
      if (hi > index_ceiling) hi = index_ceiling;
      BigNat g_hi = g.eval(hi);
      if (g_hi < g.eval(lo))
        throw NotMonotone("build_decomposition: '" + g.name() + "' decreases between " +
                          lo.str() + " and " + hi.str());
      if (modulus_geq_pow2(f, g_hi, m)) break;
      lo = hi;
      step = step.times2();
      hi = prev + step;
    }
    while (hi - lo > BigNat(1u)) {
      BigNat mid = lo + (hi - lo).div_floor(2);
      if (modulus_geq_pow2(f, g.eval(mid), m))
        hi = mid;
      else
        lo = mid;
    }
    k_seq.push_back(hi);
    prev = hi;
    g_prev = g.eval(prev);
  }
  if (k_seq.size() == 1) throw EmptyRange("build_decomposition: no k_m below the ceiling");

  unsigned start_m = 0;
  while (start_m < k_seq.size() && g.eval(k_seq[start_m]).is_zero()) ++start_m;
  // f(g(0)) > 0 can fail (e.g. g = identity); the first submeasures are then
  // dropped, which no density verdict can see.
  return Decomposition(f, g, std::move(k_seq), start_m, m_max, truncated, std::move(reason));
}

// Index grid aligned with a decomposition: block boundaries, block midpoints
// and last-in-block points, joined with the usual geometric grid. Using it
// for the direct verdict keeps both sides of the equivalence looking at the
// same range.
inline Schedule decomposition_schedule(const Decomposition& d, const BigNat& geometric_horizon) {
  Schedule s;
  for (unsigned m = d.start_m(); m <= d.stored_m_max(); ++m) {
    const BigNat& km = d.k(m);
    if (!km.is_zero()) s.push_back(km);
    if (m + 1 <= d.stored_m_max()) {
      const BigNat& kn = d.k(m + 1);
      if (kn > km + BigNat(1u)) {
        s.push_back(km + (kn - km).div_floor(2));
        s.push_back(kn - BigNat(1u));
      }
    }
  }
  s = merge_schedules(std::move(s), d.weight().breakpoints(d.k(d.stored_m_max())));
  if (!geometric_horizon.is_huge())
    s = merge_schedules(std::move(s), geometric_schedule(geometric_horizon));
  return s;
}

// Verdict from the phi_m sequence, with the same tail semantics as the
// direct-definition verdict (the asymptotic variable here is m).
inline MembershipVerdict decomposition_verdict(const Decomposition& d, const OmegaSet& C,
                                               double eps = 0.05, double delta = 0.25) {
  std::vector<BigNat> ms;
  std::vector<double> values;
  for (unsigned m = d.start_m(); m + 1 <= d.stored_m_max(); ++m) {
    ms.push_back(BigNat(m));
    values.push_back(d.phi(m, C).value);
  }
  if (values.empty()) throw EmptyRange("decomposition_verdict: no stored submeasures");
  return detail::verdict_from_ratios(ms, values, eps, delta, TailMode::LimSup);
}

inline std::pair<double, unsigned> sup_phi_omega(const Decomposition& d) {
  double best = -1;
  unsigned arg = 0;
  for (unsigned m = d.start_m(); m + 1 <= d.stored_m_max(); ++m) {
    double v = d.phi_omega(m).value;
    if (v > best) {
      best = v;
      arg = m;
    }
  }
  if (best < 0) throw EmptyRange("sup_phi_omega: no stored submeasures");
  return {best, arg};
}

// f(|(f∘g)^{-1}([2^m, 2^{m+1}))|) / 2^m. Monotonicity of f and g makes the
// preimage exactly [k_m, k_{m+1}).
inline double preimage_count_criterion(const Decomposition& d, unsigned m) {
  if (!d.index_valid(m))
    throw IndexOutOfRange("preimage_count_criterion: m = " + std::to_string(m));
  BigNat width = d.k(m + 1) - d.k(m);
  if (width.is_zero()) return 0.0;
  Log2Parts p = d.modulus().eval_log2(width);
  p.ip -= m;
  return std::exp2(p.to_double());
}

// sup of f(k)/f(g(k)) over the grid (geometric plus breakpoints plus any
// extra anchor points), with the argmax index.
inline std::pair<double, BigNat> ratio_bounded_criterion(const ModulusFunction& f,
                                                         const WeightFunction& g,
                                                         const BigNat& horizon,
                                                         const Schedule& extra = {}) {
  if (horizon < BigNat(1u)) throw InvalidArgument("ratio_bounded_criterion: horizon >= 1");
  Schedule grid = merge_schedules(default_schedule(g, horizon), extra);
  double best = -1;
  BigNat arg(0u);
  for (const BigNat& k : grid) {
    if (k.is_zero()) continue;
    BigNat gk = g.eval(k);
    if (gk.is_zero()) continue;
    double r = modulus_ratio(f, k, gk);
    if (r > best) {
      best = r;
      arg = k;
    }
  }
  if (best < 0) throw EmptyRange("ratio_bounded_criterion: no evaluable grid points");
  return {best, arg};
}

// Grid points where f(g(k + floor(L f(g(k))))) / f(g(k)) fails to exceed M.
// An empty list is finite-horizon evidence for "> M for all but finitely many".
inline std::vector<BigNat> growth_criterion_pd3(const ModulusFunction& f, const WeightFunction& g,
                                                double M, double L, const BigNat& horizon) {
  if (!(M > 0)) throw InvalidArgument("growth_criterion_pd3: M must be > 0");
  if (!(L > 0)) throw InvalidArgument("growth_criterion_pd3: L must be > 0");
  std::vector<BigNat> violations;
  for (const BigNat& k : default_schedule(g, horizon)) {
    BigNat gk = g.eval(k);
    if (gk.is_zero()) continue;
    BigNat shifted = k + floor_scaled_modulus(f, gk, L);
    double ratio = modulus_ratio(f, g.eval(shifted), gk);
    if (!(ratio > M)) violations.push_back(k);
  }
  return violations;
}

// Grid points where f(g(k + floor(eps f(g(k))))) / f(g(k)) exceeds M: the
// boundedness test from the one-or-continuum dichotomy.
inline std::vector<BigNat> ts1_boundedness_test(const ModulusFunction& f, const WeightFunction& g,
                                                double M, double eps, const BigNat& horizon) {
  if (!(M > 0)) throw InvalidArgument("ts1_boundedness_test: M must be > 0");
  if (!(eps > 0)) throw InvalidArgument("ts1_boundedness_test: eps must be > 0");
  std::vector<BigNat> violations;
  for (const BigNat& k : default_schedule(g, horizon)) {
    BigNat gk = g.eval(k);
    if (gk.is_zero()) continue;
    BigNat shifted = k + floor_scaled_modulus(f, gk, eps);
    double ratio = modulus_ratio(f, g.eval(shifted), gk);
    if (ratio > M) violations.push_back(k);
  }
  return violations;
}

}  // namespace density_lab
