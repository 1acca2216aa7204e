#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "density_lab/functions.hpp"
#include "density_lab/omega_sets.hpp"
#include "density_lab/schedules.hpp"

namespace density_lab {

// ---------------------------------------------------------------------------
// Ratio traces: r_k = f(|C ∩ [0,k-1]|) / f(g(k)) along an index schedule.
// ---------------------------------------------------------------------------

struct RatioTrace {
  std::string f_name, g_name, set_name;
  std::vector<BigNat> indices;
  std::vector<BigNat> counts;
  std::vector<double> f_counts;   // f(count); may be inf at extreme scales
  std::vector<double> f_weights;  // f(g(k)); may be inf at extreme scales
  std::vector<double> ratios;     // always finite, computed via exact log2 parts
  std::vector<BigNat> skipped;    // schedule points with f(g(k)) = 0
  std::optional<BigNat> first_valid;  // first index past the skipped prefix
};

inline RatioTrace ratio_trace(const ModulusFunction& f, const WeightFunction& g,
                              const OmegaSet& C, const Schedule& schedule) {
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i - 1] < schedule[i]))
      throw InvalidArgument("ratio_trace: schedule must be strictly increasing");
  RatioTrace t;
  t.f_name = f.name();
  t.g_name = g.name();
  t.set_name = C.name();
  for (const BigNat& k : schedule) {
    BigNat gk = g.eval(k);
    if (gk.is_zero()) {  // finitely many such indices cannot affect a density
      t.skipped.push_back(k);
      continue;
    }
    if (!t.first_valid) t.first_valid = k;
    BigNat cnt = C.count(k);
    t.indices.push_back(k);
    t.counts.push_back(cnt);
    t.f_counts.push_back(f.eval_big(cnt));
    t.f_weights.push_back(f.eval_big(gk));
    t.ratios.push_back(modulus_ratio(f, cnt, gk));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Finite-horizon membership verdicts. These are explicitly proxies for the
// limit statements: LIKELY_IN / LIKELY_OUT / UNDECIDED over the schedule tail.
// ---------------------------------------------------------------------------

enum class Verdict { LikelyIn, LikelyOut, Undecided };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::LikelyIn: return "LIKELY_IN";
    case Verdict::LikelyOut: return "LIKELY_OUT";
    case Verdict::Undecided: return "UNDECIDED";
  }
  return "?";
}

enum class TailMode { LimSup, LimInf };

struct OutWitness {
  std::vector<BigNat> indices;
  double delta = 0;
};

struct MembershipVerdict {
  Verdict verdict = Verdict::Undecided;
  TailMode mode = TailMode::LimSup;
  BigNat horizon;
  double tail_sup = 0;
  double tail_inf = 0;
  std::optional<OutWitness> out_witness;
  double epsilon = 0;
  double delta = 0;
};

namespace detail {

// The verdict tail covers the upper half of the index range (where the
// asymptotics live), widened to at least four samples so the out-fraction
// rule has something to count.
inline std::size_t tail_start_index(const std::vector<BigNat>& indices) {
  std::size_t n = indices.size();
  std::size_t range_start = 0;
  while (range_start + 1 < n && indices[range_start].times2() < indices.back()) ++range_start;
  std::size_t min_samples = std::min<std::size_t>(n, 4);
  return std::min(range_start, n - min_samples);
}

inline MembershipVerdict verdict_from_ratios(const std::vector<BigNat>& indices,
                                             const std::vector<double>& ratios, double eps,
                                             double delta, TailMode mode) {
  if (!(eps > 0) || !(delta > eps))
    throw InvalidArgument("membership verdict: need 0 < epsilon < delta");
  if (ratios.empty()) throw InvalidArgument("membership verdict: empty trace");

  MembershipVerdict v;
  v.mode = mode;
  v.horizon = indices.back();
  v.epsilon = eps;
  v.delta = delta;

  std::size_t tail_start = tail_start_index(indices);
  double sup = 0, inf = std::numeric_limits<double>::infinity();
  std::vector<BigNat> high;
  for (std::size_t i = tail_start; i < ratios.size(); ++i) {
    sup = std::max(sup, ratios[i]);
    inf = std::min(inf, ratios[i]);
    if (ratios[i] >= delta) high.push_back(indices[i]);
  }
  v.tail_sup = sup;
  v.tail_inf = inf;
  std::size_t tail_size = ratios.size() - tail_start;

  if (mode == TailMode::LimSup) {
    if (sup < eps) {
      v.verdict = Verdict::LikelyIn;
    } else if (4 * high.size() >= tail_size) {  // >= 25% of the tail above delta
      v.verdict = Verdict::LikelyOut;
      v.out_witness = OutWitness{std::move(high), delta};
    }
  } else {
    if (inf < eps) {
      v.verdict = Verdict::LikelyIn;
    } else if (inf >= delta) {  // the whole tail is bounded away from zero
      v.verdict = Verdict::LikelyOut;
      v.out_witness = OutWitness{std::move(high), delta};
    }
  }
  return v;
}

}  // namespace detail

inline MembershipVerdict membership_verdict(const RatioTrace& trace, double eps = 0.05,
                                            double delta = 0.25) {
  return detail::verdict_from_ratios(trace.indices, trace.ratios, eps, delta, TailMode::LimSup);
}

inline MembershipVerdict membership_verdict_liminf(const RatioTrace& trace, double eps = 0.05,
                                                   double delta = 0.25) {
  return detail::verdict_from_ratios(trace.indices, trace.ratios, eps, delta, TailMode::LimInf);
}

// Minimum of f(k)/f(g(k)) over the tail of the schedule, with its index.
inline std::pair<double, BigNat> liminf_ratio(const ModulusFunction& f, const WeightFunction& g,
                                              const Schedule& schedule) {
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i - 1] < schedule[i]))
      throw InvalidArgument("liminf_ratio: schedule must be strictly increasing");
  std::vector<BigNat> valid;
  std::vector<double> vals;
  for (const BigNat& k : schedule) {
    if (k.is_zero()) continue;
    BigNat gk = g.eval(k);
    if (gk.is_zero()) continue;
    valid.push_back(k);
    vals.push_back(modulus_ratio(f, k, gk));
  }
  if (vals.empty()) throw InvalidArgument("liminf_ratio: no valid schedule points");
  std::size_t tail_start = detail::tail_start_index(valid);
  double best = vals[tail_start];
  BigNat arg = valid[tail_start];
  for (std::size_t i = tail_start; i < vals.size(); ++i) {
    if (vals[i] < best) {
      best = vals[i];
      arg = valid[i];
    }
  }
  return {best, arg};
}

// Membership verdict evaluated only along C's own enumeration c_0 < c_1 < ...
// (the subsequence criterion for nondecreasing g). The count below c_m is m
// exactly. Finite sets are padded past their last element with a doubling
// tail where the count stays frozen, since f(g) -> infinity decides them.
inline MembershipVerdict membership_on_enumeration(const ModulusFunction& f,
                                                   const WeightFunction& g, const OmegaSet& C,
                                                   std::size_t m_max, double eps = 0.05,
                                                   double delta = 0.25) {
  if (!g.is_nondecreasing())
    throw InvalidArgument("membership_on_enumeration: g must be nondecreasing");
  if (m_max < 2) throw InvalidArgument("membership_on_enumeration: m_max must be >= 2");

  OmegaSet::Enumeration e = C.enumerate(m_max);
  if (e.elements.empty() && !e.complete)
    throw RepresentationTooWeak("membership_on_enumeration: cannot enumerate '" + C.name() + "'");

  std::vector<BigNat> indices;
  std::vector<double> ratios;
  for (std::size_t m = 0; m < e.elements.size(); ++m) {
    const BigNat& c = e.elements[m];
    BigNat gc = g.eval(c);
    if (gc.is_zero()) continue;
    indices.push_back(c);
    ratios.push_back(modulus_ratio(f, BigNat(m), gc));
  }
  if (e.complete) {
    // Squaring the padding index drives f(g) up fast enough that even log1p
    // ratios flush below epsilon; keep going until the judged tail (at least
    // four samples) consists of comfortably small ratios.
    BigNat size(e.elements.size());
    BigNat c = e.elements.empty() ? BigNat(2u) : e.elements.back() + BigNat(2u);
    int small_run = 0;
    for (int pad = 0; pad < 80 && small_run < 4; ++pad) {
      try {
        BigNat gc = g.eval(c);
        if (!gc.is_zero()) {
          double r = size.is_zero() ? 0.0 : modulus_ratio(f, size, gc);
          indices.push_back(c);
          ratios.push_back(r);
          small_run = r < eps / 4 ? small_run + 1 : 0;
        }
        if (bit_length(c.exact()) > (1u << 20)) break;
        c = BigNat(c.exact() * c.exact());
      } catch (const MagnitudeOverflow&) {
        break;  // weight cannot be evaluated further out; keep what we have
      }
    }
  }
  if (ratios.empty())
    throw RepresentationTooWeak("membership_on_enumeration: no evaluable points for '" +
                                C.name() + "'");
  return detail::verdict_from_ratios(indices, ratios, eps, delta, TailMode::LimSup);
}

// Default index grid for verdicts: a geometric schedule joined with the
// weight's own breakpoints, where density extremes live.
inline Schedule default_schedule(const WeightFunction& g, const BigNat& horizon) {
  Schedule s = g.breakpoints(horizon);
  if (!horizon.is_huge()) s = merge_schedules(std::move(s), geometric_schedule(horizon));
  if (s.empty()) throw InvalidArgument("default_schedule: empty grid");
  return s;
}

inline MembershipVerdict zgf_verdict(const ModulusFunction& f, const WeightFunction& g,
                                     const OmegaSet& C, const BigNat& horizon, double eps = 0.05,
                                     double delta = 0.25) {
  return membership_verdict(ratio_trace(f, g, C, default_schedule(g, horizon)), eps, delta);
}

// ---------------------------------------------------------------------------
// Classical verdicts: Z, Z_lower, Z(f), Z_lower(f), all with g = identity.
// ---------------------------------------------------------------------------

struct ClassicalVerdicts {
  MembershipVerdict z;          // upper natural density zero
  MembershipVerdict z_lower;    // lower natural density zero
  MembershipVerdict z_f;        // upper f-density zero
  MembershipVerdict z_lower_f;  // lower f-density zero
};

inline ClassicalVerdicts classical_verdicts(const OmegaSet& C, const BigNat& horizon,
                                            const ModulusFunction& f, double eps = 0.05,
                                            double delta = 0.25) {
  if (horizon < BigNat(100u)) throw InvalidArgument("classical_verdicts: horizon must be >= 100");
  WeightFunction id = WeightFunction::identity();
  Schedule s = default_schedule(id, horizon);
  RatioTrace plain = ratio_trace(ModulusFunction::identity(), id, C, s);
  RatioTrace modular = ratio_trace(f, id, C, s);
  ClassicalVerdicts v;
  v.z = membership_verdict(plain, eps, delta);
  v.z_lower = membership_verdict_liminf(plain, eps, delta);
  v.z_f = membership_verdict(modular, eps, delta);
  v.z_lower_f = membership_verdict_liminf(modular, eps, delta);
  return v;
}

}  // namespace density_lab
