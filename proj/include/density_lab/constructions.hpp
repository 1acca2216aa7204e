#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "density_lab/decomposition.hpp"
#include "density_lab/density.hpp"
#include "density_lab/functions.hpp"
#include "density_lab/omega_sets.hpp"

namespace density_lab {

// The set with exactly floor(sqrt(m)) elements below every m.
inline OmegaSet example_e_set() { return profile_sqrt_set("example_e"); }

// |C ∩ [0,k-1]| = floor(k^(alpha/2)); alpha is taken as an exact rational so
// the profile is integer-exact.
inline OmegaSet eec_case1_set(const cpp_rational& alpha) {
  if (!(alpha > 0 && alpha < 1))
    throw InvalidArgument("eec_case1_set: alpha must lie in (0,1)");
  cpp_int num = boost::multiprecision::numerator(alpha);
  cpp_int den = boost::multiprecision::denominator(alpha) * 2;
  return profile_rational_pow_set(num.convert_to<unsigned>(), den.convert_to<unsigned>(),
                                  "eec1(" + alpha.str() + ")");
}

// ---------------------------------------------------------------------------
// Witness for the inclusion criterion: C = union of [k_m, 2 k_m) along a
// subsequence where f(k)/f(g(k)) vanishes.
// ---------------------------------------------------------------------------

struct Lo1Witness {
  OmegaSet set;
  std::vector<BigNat> anchors;
  std::vector<double> anchor_ratios;  // f(k_m)/f(g(k_m)) at each anchor
};

inline Lo1Witness lo1_witness(const ModulusFunction& f, const WeightFunction& g, unsigned m_max,
                              double vanish_threshold = 0.45,
                              std::optional<BigNat> scan_horizon = std::nullopt) {
  if (m_max < 2) throw InvalidArgument("lo1_witness: m_max must be >= 2");
  if (!scan_horizon)  // deep enough that the anchor count, not magnitude, binds
    scan_horizon = BigNat::pow2(factorial_cached(std::min(m_max + 6, 64u)));
  Schedule grid = g.breakpoints(*scan_horizon, 4 * m_max + 64);
  if (grid.empty()) {
    BigNat h = scan_horizon->is_huge() ? BigNat(1000000u) : *scan_horizon;
    grid = geometric_schedule(h < BigNat(1000000u) ? h : BigNat(1000000u));
  }

  std::vector<BigNat> ks;
  std::vector<double> ratios;
  for (const BigNat& k : grid) {
    if (k.is_zero()) continue;
    BigNat gk = g.eval(k);
    if (gk.is_zero()) continue;
    ks.push_back(k);
    ratios.push_back(modulus_ratio(f, k, gk));
  }
  if (ks.empty()) throw NoVanishingSubsequence("lo1_witness: empty scan grid");

  double inf_estimate = *std::min_element(ratios.begin(), ratios.end());
  if (inf_estimate >= vanish_threshold)
    throw NoVanishingSubsequence("lo1_witness: liminf estimate " +
                                 format_double17(inf_estimate) + " >= threshold " +
                                 format_double17(vanish_threshold) + " on the scan grid");

  // Local minima of the ratio along the grid, thinned greedily so that each
  // new anchor strictly lowers the ratio and satisfies k_{m+1} > 2 k_m.
  Lo1Witness w{empty_set(), {}, {}};
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    bool local_min = (i == 0 || ratios[i] < ratios[i - 1]) &&
                     (i + 1 == ks.size() || ratios[i] < ratios[i + 1]);
    if (!local_min) continue;
    if (!w.anchors.empty() && !(ks[i] > w.anchors.back().times2())) continue;
    if (!(ratios[i] < best)) continue;
    w.anchors.push_back(ks[i]);
    w.anchor_ratios.push_back(ratios[i]);
    best = ratios[i];
    if (w.anchors.size() == m_max) break;
  }
  if (w.anchors.size() < 2)
    throw NoVanishingSubsequence("lo1_witness: fewer than two anchors found");

  auto anchors = w.anchors;
  w.set = interval_union(
      [anchors](std::size_t i) -> std::optional<Segment> {
        if (i >= anchors.size()) return std::nullopt;
        return Segment{anchors[i], anchors[i].times2()};
      },
      "lo1(" + f.name() + "," + g.name() + ")");
  return w;
}

// Step weight from the union proof: g(k) = min{k_m : k <= k_m}, so every
// anchor has k/g(k) = 1.
inline WeightFunction p1_weight(std::vector<BigNat> anchors) {
  return WeightFunction::step_from_anchors(std::move(anchors), "p1_step");
}

// ---------------------------------------------------------------------------
// The h construction showing |S_f(g)| > 1: h agrees with g except on short
// closed intervals I_m = [k_m, k_m + floor(f(g(k_m))/2^m)] where it jumps to
// the value at the interval's right end.
// ---------------------------------------------------------------------------

struct Ts1Anchor {
  BigNat k;      // k_m
  BigNat i_end;  // right end of I_m
  BigNat value;  // h on I_m = g(i_end)
  double ratio;  // f(value)/f(g(k_m)), required > m (1-based index)
};

namespace detail {

struct Ts1WeightImpl final : WeightImpl {
  std::shared_ptr<const WeightImpl> base;
  std::vector<Ts1Anchor> anchors;  // sorted by k, pairwise disjoint intervals
  Ts1WeightImpl(std::shared_ptr<const WeightImpl> g, std::vector<Ts1Anchor> a)
      : base(std::move(g)), anchors(std::move(a)) {
    name = "ts1(" + base->name + ")";
    nondecreasing = base->nondecreasing;
    integer_valued = base->integer_valued;
  }
  const Ts1Anchor* find(const BigNat& k) const {
    auto it = std::upper_bound(anchors.begin(), anchors.end(), k,
                               [](const BigNat& v, const Ts1Anchor& a) { return v < a.k; });
    if (it == anchors.begin()) return nullptr;
    --it;
    return k <= it->i_end ? &*it : nullptr;
  }
  BigNat eval(const BigNat& k) const override {
    if (const Ts1Anchor* a = find(k)) return a->value;
    return base->eval(k);
  }
  void breakpoints(const BigNat& horizon, std::size_t max_count,
                   std::vector<BigNat>& out) const override {
    base->breakpoints(horizon, max_count, out);
    for (const Ts1Anchor& a : anchors) {
      if (a.k > horizon || out.size() + 3 > max_count) break;
      out.push_back(a.k);
      if (a.i_end <= horizon) out.push_back(a.i_end);
      if (a.i_end + BigNat(1u) <= horizon) out.push_back(a.i_end + BigNat(1u));
    }
  }
};

}  // namespace detail

struct Ts1Weight {
  WeightFunction h;
  WeightFunction g;
  std::vector<Ts1Anchor> anchors;
};

inline Ts1Weight ts1_weight(const ModulusFunction& f, const WeightFunction& g,
                            unsigned anchor_count, std::size_t scan_blocks = 0) {
  if (!g.is_nondecreasing()) throw NotMonotone("ts1_weight: g must be nondecreasing");
  if (anchor_count < 1) throw InvalidArgument("ts1_weight: anchor_count must be >= 1");
  if (scan_blocks == 0) scan_blocks = 8 * static_cast<std::size_t>(anchor_count) + 64;

  // A horizon generous enough that max_count, not magnitude, limits the scan.
  BigNat scan_horizon = BigNat::pow2(
      boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(4 * scan_blocks + 100)));
  Schedule grid = g.breakpoints(scan_horizon, scan_blocks);
  if (grid.empty()) grid = geometric_schedule(BigNat(1000000u));

  std::vector<Ts1Anchor> anchors;
  std::size_t pos = 0;
  for (unsigned m = 1; m <= anchor_count; ++m) {
    bool found = false;
    for (; pos < grid.size(); ++pos) {
      const BigNat& k = grid[pos];
      if (k.is_zero()) continue;
      if (!anchors.empty() && !(k > anchors.back().i_end + BigNat(1u))) continue;
      BigNat gk = g.eval(k);
      if (gk.is_zero()) continue;
      BigNat delta = floor_scaled_modulus(f, gk, 1.0, m);
      if (delta.is_zero()) continue;  // I_m would be a point and the ratio 1
      BigNat i_end = k + delta;
      BigNat value = g.eval(i_end);
      double ratio = modulus_ratio(f, value, gk);
      if (!(ratio > static_cast<double>(m))) continue;
      anchors.push_back({k, i_end, value, ratio});
      ++pos;
      found = true;
      break;
    }
    if (!found)
      throw AnchorsNotFound("ts1_weight: growth condition not met for anchor " +
                            std::to_string(m) + " on the scan grid (" + f.name() + ", " +
                            g.name() + ")");
  }

  auto impl = std::make_shared<detail::Ts1WeightImpl>(g.impl(), anchors);
  return Ts1Weight{WeightFunction::from_impl(std::move(impl)), g, std::move(anchors)};
}

// ---------------------------------------------------------------------------
// The g_alpha family: g on blocks with alpha_m = 0, max{g,h} where alpha_m = 1.
// Finite bit vectors stand in for 2^omega; only finitely many blocks are ever
// evaluated.
// ---------------------------------------------------------------------------

namespace detail {

struct Ps1WeightImpl final : WeightImpl {
  std::shared_ptr<const WeightImpl> base;
  std::shared_ptr<const WeightImpl> high;  // max{g,h}
  std::vector<BigNat> block_starts;        // ts1 anchor positions
  std::vector<int> alpha;
  Ps1WeightImpl(std::shared_ptr<const WeightImpl> g, std::shared_ptr<const WeightImpl> mgh,
                std::vector<BigNat> starts, std::vector<int> a)
      : base(std::move(g)), high(std::move(mgh)), block_starts(std::move(starts)), alpha(std::move(a)) {
    std::string bits;
    for (int b : alpha) bits += b ? '1' : '0';
    name = "ps1[" + bits + "](" + base->name + ")";
    nondecreasing = base->nondecreasing;
    integer_valued = base->integer_valued;
  }
  BigNat eval(const BigNat& k) const override {
    auto it = std::upper_bound(block_starts.begin(), block_starts.end(), k);
    if (it == block_starts.begin()) return base->eval(k);  // k < k_0
    std::size_t block = static_cast<std::size_t>(it - block_starts.begin()) - 1;
    if (block + 1 >= block_starts.size()) return base->eval(k);  // past the last block
    bool on = block < alpha.size() && alpha[block] != 0;
    return on ? high->eval(k) : base->eval(k);
  }
  void breakpoints(const BigNat& horizon, std::size_t max_count,
                   std::vector<BigNat>& out) const override {
    high->breakpoints(horizon, max_count, out);
    for (const BigNat& s : block_starts) {
      if (s > horizon || out.size() + 1 > max_count) break;
      out.push_back(s);
    }
  }
};

}  // namespace detail

inline std::vector<WeightFunction> ps1_family(const ModulusFunction& f, const WeightFunction& g,
                                              const Ts1Weight& ts1,
                                              const std::vector<std::vector<int>>& bit_vectors) {
  (void)f;  // the construction itself is modulus-free; f shaped the anchors
  if (ts1.anchors.size() < 2) throw EmptyAnchors("ps1_family: need at least two ts1 anchors");
  std::vector<BigNat> starts;
  starts.reserve(ts1.anchors.size());
  for (const Ts1Anchor& a : ts1.anchors) starts.push_back(a.k);
  WeightFunction mgh = pointwise_max(g, ts1.h);
  std::vector<WeightFunction> family;
  family.reserve(bit_vectors.size());
  for (const auto& alpha : bit_vectors) {
    family.push_back(WeightFunction::from_impl(std::make_shared<detail::Ps1WeightImpl>(
        g.impl(), mgh.impl(), starts, alpha)));
  }
  return family;
}

// ---------------------------------------------------------------------------
// Erdos-Ulam style measure ideals: probability measures on disjoint finite
// supports, membership via the exhaustive tail sup.
// ---------------------------------------------------------------------------

class MeasureIdealSpec {
 public:
  struct SupportInterval {
    BigNat lo, hi;       // D_j = [lo, hi)
    cpp_rational atom;   // per-element mass; atom * |D_j| = 1 exactly
  };

  MeasureIdealSpec(std::string name, unsigned first_index,
                   std::function<SupportInterval(unsigned)> support,
                   std::optional<std::vector<unsigned>> selector = std::nullopt)
      : name_(std::move(name)),
        first_index_(first_index),
        support_(std::move(support)),
        selector_(std::move(selector)) {
    if (selector_) std::sort(selector_->begin(), selector_->end());
    for (unsigned j = first_index_; j < first_index_ + 24; ++j) {
      SupportInterval d = support_(j);
      if (!(d.lo < d.hi) || d.atom * cpp_rational((d.hi - d.lo).exact()) != 1)
        throw InvalidArgument("MeasureIdealSpec '" + name_ + "': mu_" + std::to_string(j) +
                              " is not a probability measure on its support");
      if (j > first_index_ && support_(j - 1).hi > d.lo)
        throw OverlapDetected("MeasureIdealSpec '" + name_ + "': supports overlap at j = " +
                              std::to_string(j));
    }
  }

  const std::string& name() const { return name_; }
  unsigned first_index() const { return first_index_; }
  SupportInterval support(unsigned j) const {
    if (j < first_index_) throw IndexOutOfRange("mu_" + std::to_string(j) + " undefined");
    return support_(j);
  }
  const std::optional<std::vector<unsigned>>& selector() const { return selector_; }

  bool selected(unsigned j) const {
    if (!selector_) return true;
    return std::binary_search(selector_->begin(), selector_->end(), j);
  }

  // mu_j(C) = atom_j * |C ∩ D_j|, exact rational.
  cpp_rational mu(unsigned j, const OmegaSet& C) const {
    SupportInterval d = support(j);
    BigNat inside = C.count(d.hi) - C.count(d.lo);
    return d.atom * cpp_rational(inside.exact());
  }

  static MeasureIdealSpec eeu4() {
    return MeasureIdealSpec("eeu4", 1, [](unsigned j) {
      return SupportInterval{BigNat::pow2(j), BigNat::pow2(j) + BigNat(j), cpp_rational(1, j)};
    });
  }

  // Supports [2^j, 2^j + j^2) are pairwise disjoint only from j = 4 on; the
  // atoms are normalized to keep each mu_j a probability measure.
  static MeasureIdealSpec eeu5() {
    return MeasureIdealSpec("eeu5", 4, [](unsigned j) {
      return SupportInterval{BigNat::pow2(j), BigNat::pow2(j) + BigNat(j) * j,
                             cpp_rational(1, cpp_int(j) * j)};
    });
  }

  static MeasureIdealSpec pd6(std::vector<unsigned> L) {
    if (L.empty()) throw InvalidArgument("pd6 measure ideal: selector must be nonempty");
    return MeasureIdealSpec(
        "pd6", 0,
        [](unsigned j) {
          // k_0 = 1, k_{j+1} = k_j + j! + (j+1)!; D_j = [k_j, k_j + j!).
          cpp_int kj = 1;
          for (unsigned i = 0; i < j; ++i) kj += factorial(i) + factorial(i + 1);
          return SupportInterval{BigNat(kj), BigNat(kj + factorial(j)),
                                 cpp_rational(1, factorial(j))};
        },
        std::move(L));
  }

 private:
  std::string name_;
  unsigned first_index_;
  std::function<SupportInterval(unsigned)> support_;
  std::optional<std::vector<unsigned>> selector_;
};

// Verdict for C in Exh(sup_j mu_j): s_j = sup over selected l in [j, j_max]
// of mu_l(C), judged with the usual tail semantics.
inline MembershipVerdict exh_verdict(const MeasureIdealSpec& spec, const OmegaSet& C,
                                     unsigned j_max, double eps = 0.05, double delta = 0.25) {
  if (j_max < 2) throw InvalidArgument("exh_verdict: j_max must be >= 2");
  if (j_max < spec.first_index()) throw InvalidArgument("exh_verdict: j_max below first index");
  std::vector<double> mus(j_max + 1, 0.0);
  for (unsigned l = spec.first_index(); l <= j_max; ++l)
    if (spec.selected(l)) mus[l] = spec.mu(l, C).convert_to<double>();
  std::vector<BigNat> indices;
  std::vector<double> tails;
  double running = 0;
  for (unsigned j = j_max + 1; j-- > spec.first_index();) {
    running = std::max(running, mus[j]);
    indices.push_back(BigNat(j));
    tails.push_back(running);
  }
  std::reverse(indices.begin(), indices.end());
  std::reverse(tails.begin(), tails.end());
  return detail::verdict_from_ratios(indices, tails, eps, delta, TailMode::LimSup);
}

// ---------------------------------------------------------------------------
// Increasing-invariance: prefix-count dominance checked exactly for all
// k <= horizon via one boundary sweep.
// ---------------------------------------------------------------------------

struct DominanceResult {
  bool holds = true;
  std::optional<BigNat> first_violation;
};

inline DominanceResult increasing_dominance_check(const OmegaSet& B, const OmegaSet& C,
                                                  const BigNat& horizon) {
  std::vector<Segment> sb = B.segments(horizon + BigNat(1u));
  std::vector<Segment> sc = C.segments(horizon + BigNat(1u));
  std::vector<BigNat> cuts{BigNat(0u), horizon + BigNat(1u)};
  for (const auto& s : sb) {
    cuts.push_back(s.lo);
    cuts.push_back(s.hi);
  }
  for (const auto& s : sc) {
    cuts.push_back(s.lo);
    cuts.push_back(s.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto covered = [](const std::vector<Segment>& segs, const BigNat& x) {
    auto it = std::upper_bound(segs.begin(), segs.end(), x,
                               [](const BigNat& v, const Segment& s) { return v < s.lo; });
    if (it == segs.begin()) return false;
    --it;
    return x < it->hi;
  };

  // diff(k) = |B ∩ [0,k)| - |C ∩ [0,k)| is piecewise linear with slopes in
  // {-1,0,1}; it suffices to track it across the cut regions.
  cpp_int diff = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const BigNat& x = cuts[i];
    if (x > horizon) break;
    BigNat y = cuts[i + 1] < horizon + BigNat(1u) ? cuts[i + 1] : horizon + BigNat(1u);
    int slope = (covered(sb, x) ? 1 : 0) - (covered(sc, x) ? 1 : 0);
    cpp_int width = (y - x).exact();
    if (slope > 0 && diff + width > 0) {
      // first k with diff(x) + (k - x) > 0, i.e. k = x + (1 - diff(x)).
      cpp_int steps = 1 - diff;
      return {false, BigNat(x.exact() + steps)};
    }
    diff += slope * width;
  }
  return {true, std::nullopt};
}

// ---------------------------------------------------------------------------
// Catalog witness sets for the increasing-invariance examples.
// ---------------------------------------------------------------------------

inline OmegaSet eeu4_c_set() {
  return interval_union(
      [](std::size_t i) -> std::optional<Segment> {
        unsigned m = static_cast<unsigned>(i) + 1;
        return Segment{BigNat::pow2(m), BigNat::pow2(m) + BigNat(m)};
      },
      "eeu4_c");
}

inline OmegaSet eeu4_d_set() {
  return interval_union(
      [](std::size_t i) -> std::optional<Segment> {
        unsigned m = static_cast<unsigned>(i) + 1;
        return Segment{BigNat::pow2(m) - BigNat(m), BigNat::pow2(m)};
      },
      "eeu4_d");
}

// The m^2-width analogues start at m = 7, where both block families are
// pairwise disjoint and the D blocks complete before the C blocks begin.
inline OmegaSet eeu5_c_set() {
  return interval_union(
      [](std::size_t i) -> std::optional<Segment> {
        unsigned m = static_cast<unsigned>(i) + 7;
        return Segment{BigNat::pow2(m), BigNat::pow2(m) + BigNat(m) * m};
      },
      "eeu5_c");
}

inline OmegaSet eeu5_d_set() {
  return interval_union(
      [](std::size_t i) -> std::optional<Segment> {
        unsigned m = static_cast<unsigned>(i) + 7;
        return Segment{BigNat::pow2(m) - BigNat(m) * m, BigNat::pow2(m)};
      },
      "eeu5_d");
}

// ---------------------------------------------------------------------------
// Case-2 separation set: the maximal profile with increments in {0,1} meeting
// |C ∩ [0,k-1]| <= k^(1/(m+1)) - 1 between anchors, pinned to the anchor
// values floor(k_m^(1/(m+1)) - 1).
// ---------------------------------------------------------------------------

struct Eec2Set {
  OmegaSet set;
  std::vector<BigNat> anchors;
};

inline Eec2Set eec_case2_set(const WeightFunction& h, unsigned block_count,
                             unsigned scan_pow2_max = 128) {
  if (block_count < 2) throw InvalidArgument("eec_case2_set: need at least two blocks");
  std::vector<BigNat> anchors;
  Schedule grid = pow2_schedule(scan_pow2_max);
  std::size_t pos = 0;
  for (unsigned m = 0; m < block_count; ++m) {
    bool found = false;
    for (; pos < grid.size(); ++pos) {
      const BigNat& k = grid[pos];
      if (k < BigNat(2u)) continue;
      // 1 + h(k) <= k^(1/(m+1))  <=>  (1 + h(k))^(m+1) <= k, checked exactly.
      cpp_int lhs = boost::multiprecision::pow(h.eval(k).exact() + 1, m + 1);
      if (lhs > k.exact()) continue;
      if (!anchors.empty()) {
        // k_{m-1}^(1/m) < k^(1/(m+1))  <=>  k_{m-1}^(m+1) < k^m.
        cpp_int prev = boost::multiprecision::pow(anchors.back().exact(), m + 1);
        cpp_int cur = boost::multiprecision::pow(k.exact(), m);
        if (!(prev < cur)) continue;
      }
      anchors.push_back(k);
      ++pos;
      found = true;
      break;
    }
    if (!found)
      throw AnchorsNotFound("eec_case2_set: no anchor for block " + std::to_string(m) +
                            " below 2^" + std::to_string(scan_pow2_max));
  }

  auto anchor_copy = anchors;
  auto profile = [anchor_copy](const BigNat& k) -> BigNat {
    if (k.is_zero()) return BigNat(0u);
    const cpp_int& kv = k.exact();
    // Locate the block: anchors[m] <= k < anchors[m+1].
    std::size_t m = 0;
    if (kv < anchor_copy.front().exact()) {
      cpp_int head = kv - 1;
      cpp_int cap = anchor_copy.front().exact() - 1;
      return BigNat(head < 0 ? cpp_int(0) : (head < cap ? head : cap));
    }
    while (m + 1 < anchor_copy.size() && anchor_copy[m + 1].exact() <= kv) ++m;
    cpp_int val = iroot(kv, static_cast<unsigned>(m) + 1) - 1;
    if (m + 1 < anchor_copy.size()) {
      cpp_int cap = iroot(anchor_copy[m + 1].exact(), static_cast<unsigned>(m) + 2) - 1;
      if (cap < val) val = cap;
    }
    return BigNat(val < 0 ? cpp_int(0) : val);
  };
  return Eec2Set{profile_set(profile, "eec2"), std::move(anchors)};
}

}  // namespace density_lab
