#pragma once

#include <json.hpp>

#include <chrono>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "density_lab/constructions.hpp"
#include "density_lab/decomposition.hpp"
#include "density_lab/density.hpp"

namespace density_lab {

using json = nlohmann::json;

enum class CheckStatus { Pass, Fail, Inconclusive };

inline const char* check_status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

struct ClaimCheck {
  std::string claim_id;
  json parameters;
  CheckStatus status = CheckStatus::Inconclusive;
  std::vector<std::pair<std::string, double>> evidence;
  double runtime_seconds = 0;

  void note(const std::string& what, double value) { evidence.emplace_back(what, value); }
  void require(bool ok, const std::string& what, double value) {
    evidence.emplace_back((ok ? what : "VIOLATION: " + what), value);
    if (!ok) status = CheckStatus::Fail;
  }
};

struct SuiteReport {
  std::string suite;
  // Checks that stay INCONCLUSIVE at any finite horizon, by design.
  std::vector<std::string> horizon_limited;
  std::vector<ClaimCheck> checks;
  bool all_ok() const {
    for (const auto& c : checks)
      if (c.status == CheckStatus::Fail) return false;
    return true;
  }
};

namespace verify_detail {

inline std::vector<OmegaSet> catalog_test_sets() {
  std::vector<BigNat> f100;
  for (unsigned i = 0; i < 100; ++i) f100.push_back(BigNat(i));
  return {empty_set(), finite_set(std::move(f100), "finite100"), example_e_set(), eeu4_c_set(),
          omega_set()};
}

// A very sparse set: towers 2^(2^j). Its f-density vanishes quickly under
// every unbounded catalog modulus.
inline OmegaSet tower_set() {
  return finite_set({BigNat(2u), BigNat(4u), BigNat(16u), BigNat(256u), BigNat(65536u),
                     BigNat::pow2(32), BigNat::pow2(64)},
                    "towers");
}

inline unsigned get_unsigned(const json& p, const char* key) { return p.at(key).get<unsigned>(); }
inline double get_double(const json& p, const char* key) { return p.at(key).get<double>(); }
inline std::string get_string(const json& p, const char* key) {
  return p.at(key).get<std::string>();
}

// --- LO1: Z_g(f) included in Z(f)  <=>  liminf f(k)/f(g(k)) > 0 ------------

inline void check_lo1(ClaimCheck& c, const json& p) {
  ModulusFunction f = catalog_modulus(get_string(p, "f"));

  // Positive-liminf side: the identity weight has ratio 1 and the witness
  // builder must refuse.
  WeightFunction id = WeightFunction::identity();
  auto [inf_id, at_id] = liminf_ratio(f, id, geometric_schedule(BigNat(100000u)));
  (void)at_id;
  c.require(inf_id > 0.5, "identity-weight liminf estimate > 1/2", inf_id);
  bool refused = false;
  try {
    lo1_witness(f, id, 4);
  } catch (const NoVanishingSubsequence&) {
    refused = true;
  }
  c.require(refused, "witness builder refuses the identity weight", refused ? 1 : 0);

  // Vanishing side: es1 admits the witness union of [k_m, 2k_m).
  WeightFunction g = catalog_weight(get_string(p, "g"));
  unsigned m_max = get_unsigned(p, "m_max");
  Lo1Witness w = lo1_witness(f, g, m_max);
  c.note("witness anchors", static_cast<double>(w.anchors.size()));
  c.note("smallest anchor ratio", w.anchor_ratios.back());
  for (std::size_t i = 0; i < w.anchors.size(); ++i) {
    BigNat two_k = w.anchors[i].times2();
    c.require(modulus_ratio(f, w.set.count(two_k), two_k) >= 0.5 - 1e-9,
              "f(count(2k))/f(2k) >= 1/2 at anchor " + std::to_string(i),
              modulus_ratio(f, w.set.count(two_k), two_k));
  }
  Schedule anchors(w.anchors.begin(), w.anchors.end());
  MembershipVerdict in_g = membership_verdict(ratio_trace(f, g, w.set, anchors));
  Schedule doubled;
  for (const BigNat& a : w.anchors) {
    doubled.push_back(a);
    doubled.push_back(a.times2());
  }
  MembershipVerdict out_f = membership_verdict(
      ratio_trace(f, id, w.set, merge_schedules(std::move(doubled), {})));
  c.require(in_g.verdict == Verdict::LikelyIn, "witness LIKELY_IN for Z_g(f)", in_g.tail_sup);
  c.require(out_f.verdict == Verdict::LikelyOut, "witness LIKELY_OUT for Z(f)", out_f.tail_sup);
}

// --- LS1: dense-grid and own-enumeration verdicts agree --------------------

inline void check_ls1(ClaimCheck& c, const json& p) {
  unsigned n = get_unsigned(p, "N");
  struct Combo {
    const char* f;
    WeightFunction g;
    OmegaSet set;
  };
  std::vector<Combo> combos = {
      {"log1p", WeightFunction::identity(), example_e_set()},
      {"log1p", WeightFunction::identity(), eeu4_c_set()},
      {"log1p", catalog_weight("eeu"), example_e_set()},
      {"identity", WeightFunction::identity(), example_e_set()},
      {"identity", catalog_weight("eeu"), eeu4_c_set()},
      {"log1p", catalog_weight("eeu"), tower_set()},
  };
  unsigned decided = 0, agreed = 0;
  for (auto& combo : combos) {
    ModulusFunction f = catalog_modulus(combo.f);
    MembershipVerdict dense = membership_verdict(
        ratio_trace(f, combo.g, combo.set, default_schedule(combo.g, BigNat(n))));
    MembershipVerdict along = membership_on_enumeration(f, combo.g, combo.set, 1500);
    if (dense.verdict != Verdict::Undecided && along.verdict != Verdict::Undecided) {
      ++decided;
      if (dense.verdict == along.verdict) ++agreed;
    }
  }
  c.note("combos", static_cast<double>(combos.size()));
  c.note("both decided", decided);
  c.require(decided >= 3, "enough decided combos", decided);
  c.require(agreed == decided, "dense grid and enumeration agree", agreed);
}

// --- LS2: Z_g(f) = Z_h(f) implies Z_g(f) = Z_max{g,h}(f) --------------------

inline void check_ls2(ClaimCheck& c, const json& p) {
  ModulusFunction f = catalog_modulus(get_string(p, "f"));
  WeightFunction g = catalog_weight(get_string(p, "g"));
  // h generates the same ideal: floor(a g) with a >= 1.
  WeightFunction h = WeightFunction::floor_composed(get_double(p, "a"), g);
  WeightFunction mx = pointwise_max(g, h);
  unsigned n = get_unsigned(p, "N");
  Schedule s = default_schedule(g, BigNat(n));
  unsigned matches = 0, total = 0;
  for (const OmegaSet& set : catalog_test_sets()) {
    MembershipVerdict vg = membership_verdict(ratio_trace(f, g, set, s));
    MembershipVerdict vm = membership_verdict(ratio_trace(f, mx, set, s));
    ++total;
    if (vg.verdict == vm.verdict) ++matches;
    // The proof identity f(max{g,h}) = max{f(g), f(h)} on sampled indices.
    for (const BigNat& k : {BigNat(17u), BigNat(1000u), BigNat(65536u)}) {
      double lhs = f.eval_big(mx.eval(k));
      double rhs = std::max(f.eval_big(g.eval(k)), f.eval_big(h.eval(k)));
      c.require(lhs == rhs, "f(max{g,h}) = max{f g, f h} at " + k.str(), lhs - rhs);
    }
  }
  c.require(matches == total, "verdicts under max{g,h} match g", matches);
}

// --- P1: intersection over g of Z_g(f) = Fin (one direction checkable) -----

inline void check_p1_cap(ClaimCheck& c, const json& p) {
  ModulusFunction f = catalog_modulus(get_string(p, "f"));
  unsigned n = get_unsigned(p, "N");
  // Finite sets belong to every Z_g(f).
  std::vector<BigNat> elems;
  for (unsigned i = 0; i < 50; ++i) elems.push_back(BigNat(3 * i + 1));
  OmegaSet fin = finite_set(std::move(elems), "finite50");
  for (const char* gname : {"identity", "eeu", "eeu3", "es1"}) {
    WeightFunction g = catalog_weight(gname);
    MembershipVerdict v = membership_on_enumeration(f, g, fin, 64);
    c.require(v.verdict == Verdict::LikelyIn,
              std::string("finite set LIKELY_IN for g = ") + gname, v.tail_sup);
  }
  // Adversarial direction for one infinite set: weigh by its own prefix
  // counts, so the ratio cannot vanish.
  OmegaSet inf_set = example_e_set();
  WeightFunction adv = WeightFunction::custom(
      "prefix_count(example_e)+1",
      [inf_set](const BigNat& k) { return inf_set.count(k) + BigNat(1u); }, true, true);
  MembershipVerdict v = membership_verdict(
      ratio_trace(f, adv, inf_set, geometric_schedule(BigNat(n))));
  c.require(v.verdict == Verdict::LikelyOut, "infinite set LIKELY_OUT under adversarial g",
            v.tail_inf);
  // The containment over all of G is not decidable at any horizon.
  if (c.status != CheckStatus::Fail) c.status = CheckStatus::Inconclusive;
  c.note("subset direction quantifies over all of G (horizon-limited)", 0);
}

// --- P1: union over g of Z_g(f) = Z_lower(f) --------------------------------

inline void check_p1_cup(ClaimCheck& c, const json& p) {
  ModulusFunction f = catalog_modulus(get_string(p, "f"));
  WeightFunction id = WeightFunction::identity();
  // A set with vanishing lower f-density along the es1 anchors.
  Lo1Witness w = lo1_witness(f, catalog_weight("es1"), get_unsigned(p, "m_max"));
  Schedule anchors(w.anchors.begin(), w.anchors.end());
  MembershipVerdict lower = membership_verdict_liminf(ratio_trace(f, id, w.set, anchors));
  c.require(lower.verdict == Verdict::LikelyIn, "witness in Z_lower(f)", lower.tail_inf);

  // The union proof's weight: the step function through the anchors.
  WeightFunction step = p1_weight(w.anchors);
  Schedule doubled;
  for (const BigNat& a : w.anchors) {
    doubled.push_back(a);
    if (a.times2() < w.anchors.back()) doubled.push_back(a.times2());
  }
  MembershipVerdict in_step = membership_verdict(
      ratio_trace(f, step, w.set, merge_schedules(std::move(doubled), {})));
  c.require(in_step.verdict == Verdict::LikelyIn, "witness in Z_step(f)", in_step.tail_sup);

  // Converse side: example E has positive lower f-density, and stays out of
  // Z_g(f) for every catalog g.
  OmegaSet e = example_e_set();
  MembershipVerdict e_lower = membership_verdict_liminf(
      ratio_trace(f, id, e, geometric_schedule(BigNat(1000000u))));
  c.require(e_lower.verdict == Verdict::LikelyOut, "example E out of Z_lower(f)", e_lower.tail_inf);
  for (const char* gname : {"identity", "eeu", "eeu3"}) {
    WeightFunction g = catalog_weight(gname);
    MembershipVerdict v = membership_verdict(
        ratio_trace(f, g, e, default_schedule(g, BigNat(1000000u))));
    c.require(v.verdict != Verdict::LikelyIn, std::string("example E not in Z_g(f), g = ") + gname,
              v.tail_sup);
  }
}

// --- Example E: Z_lower(f) strictly below Z_lower ---------------------------

inline void check_exe(ClaimCheck& c, const json& p) {
  ModulusFunction f = catalog_modulus(get_string(p, "f"));
  unsigned n = get_unsigned(p, "N");
  OmegaSet e = example_e_set();
  // count(k)^2 <= k exactly along the grid.
  for (const BigNat& k : geometric_schedule(BigNat(n))) {
    cpp_int cnt = e.count(k).exact();
    c.status = c.status;  // keep linear flow; the require below records failures
    if (cnt * cnt > k.exact()) {
      c.require(false, "count(k)^2 <= k at k = " + k.str(), cnt.convert_to<double>());
      return;
    }
  }
  c.note("count(k)^2 <= k on the whole grid", 1);
  ClassicalVerdicts v = classical_verdicts(e, BigNat(n), f);
  c.require(v.z.verdict == Verdict::LikelyIn, "Z: LIKELY_IN", v.z.tail_sup);
  c.require(v.z_lower.verdict == Verdict::LikelyIn, "Z_lower: LIKELY_IN", v.z_lower.tail_inf);
  c.require(v.z_lower_f.verdict == Verdict::LikelyOut, "Z_lower(f): LIKELY_OUT",
            v.z_lower_f.tail_inf);
  c.require(v.z_f.verdict == Verdict::LikelyOut, "Z(f): LIKELY_OUT", v.z_f.tail_sup);
}

// --- PS1: a finite family of weights generating the same ideal -------------

inline void check_ps1(ClaimCheck& c, const json& p) {
  ModulusFunction f = catalog_modulus(get_string(p, "f"));
  WeightFunction g = catalog_weight(get_string(p, "g"));
  unsigned members = get_unsigned(p, "members");
  unsigned anchors = get_unsigned(p, "anchors");
  double witness_floor = get_double(p, "witness_floor");

  Ts1Weight t = ts1_weight(f, g, anchors);
  std::vector<std::vector<int>> alphas(members);
  for (unsigned i = 0; i < members; ++i) {
    alphas[i].resize(t.anchors.size() - 1);
    for (std::size_t b = 0; b < alphas[i].size(); ++b)
      alphas[i][b] = (b % members == i) ? 1 : 0;  // pairwise almost disagreeing
  }
  std::vector<WeightFunction> family = ps1_family(f, g, t, alphas);

  // Same membership verdicts as g on the catalog sets, judged along the
  // peak subsequence p_m = 2^(m!) - 1 indexed by m. A range-based tail would
  // collapse onto one or two peaks, which a single masked interval can flip;
  // the m-indexed sequence keeps half the peaks in view.
  std::vector<BigNat> peaks, peak_ms;
  for (unsigned m = 2; m <= 7; ++m) {  // catalog counts stay cheap up to 2^(7!)
    peaks.push_back(BigNat::pow2_offset(factorial_cached(m), -1));
    peak_ms.push_back(BigNat(m));
  }
  // Judge on the last three peaks with the single largest ratio dropped:
  // the family masks at most one peak per period, and the drop makes the
  // statistic insensitive to that mask.
  auto peak_verdict = [&](const WeightFunction& w, const OmegaSet& set) {
    std::vector<double> tail;
    for (std::size_t i = peaks.size() - 3; i < peaks.size(); ++i)
      tail.push_back(modulus_ratio(f, set.count(peaks[i]), w.eval(peaks[i])));
    std::sort(tail.begin(), tail.end());
    double stat = tail[tail.size() - 2];
    if (stat < 0.05) return Verdict::LikelyIn;
    if (stat >= 0.25) return Verdict::LikelyOut;
    return Verdict::Undecided;
  };
  unsigned matches = 0, total = 0;
  for (const OmegaSet& set : catalog_test_sets()) {
    Verdict vg = peak_verdict(g, set);
    for (const WeightFunction& ga : family) {
      ++total;
      if (peak_verdict(ga, set) == vg) ++matches;
    }
  }
  c.require(matches == total, "family verdicts match g on catalog sets", matches);

  // Pairwise divergence witnesses: on a block where alpha_i = 1, alpha_j = 0
  // the ratio f(g_i(k))/f(g_j(k)) at the anchor exceeds the block index.
  double min_witness = std::numeric_limits<double>::infinity();
  for (unsigned i = 0; i < members; ++i) {
    for (unsigned j = 0; j < members; ++j) {
      if (i == j) continue;
      std::size_t b = t.anchors.size() - 2;
      while (b % members != i) --b;
      double r = modulus_ratio(f, family[i].eval(t.anchors[b].k), family[j].eval(t.anchors[b].k));
      min_witness = std::min(min_witness, r);
    }
  }
  c.require(min_witness > witness_floor, "min pairwise divergence witness", min_witness);
}

// --- TS1: the boundedness criterion and its failure for es1 ----------------

inline void check_ts1(ClaimCheck& c, const json& p) {
  ModulusFunction f = catalog_modulus(get_string(p, "f"));
  WeightFunction g = catalog_weight(get_string(p, "g"));
  // es1 violates the bound at every (M, eps): Cor. evidence at three pairs.
  struct Pair {
    double M, eps;
    unsigned blocks;
  };
  for (const Pair& me : {Pair{10, 1.0, 22}, Pair{100, 0.5, 130}, Pair{1000, 2.0, 1030}}) {
    BigNat horizon = BigNat::pow2(factorial_cached(me.blocks) + 1);
    auto viol = ts1_boundedness_test(f, g, me.M, me.eps, horizon);
    c.require(!viol.empty(),
              "violations at M = " + format_double17(me.M) + ", eps = " + format_double17(me.eps),
              static_cast<double>(viol.size()));
  }
  // The identity pair satisfies a bound (ratio 2 <= 3) everywhere.
  auto quiet = ts1_boundedness_test(catalog_modulus("identity"), WeightFunction::identity(), 3.0,
                                    1.0, BigNat(100000u));
  c.require(quiet.empty(), "identity/identity bounded with M = 3", static_cast<double>(quiet.size()));
}

// --- CS1: f(g(k_m + 1))/f(g(k_m)) diverging forces the continuum ------------

inline void check_cs1(ClaimCheck& c, const json& p) {
  ModulusFunction f = catalog_modulus(get_string(p, "f"));
  WeightFunction g = catalog_weight(get_string(p, "g"));
  unsigned m_hi = get_unsigned(p, "m_max");
  double prev = 0;
  for (unsigned m = 2; m <= m_hi; ++m) {
    BigNat km = BigNat::pow2_offset(factorial_cached(m), -1);
    double r = modulus_ratio(f, g.eval(km + BigNat(1u)), g.eval(km));
    c.status = c.status;
    if (!(r > prev)) {
      c.require(false, "ratio not increasing at m = " + std::to_string(m), r);
      return;
    }
    prev = r;
  }
  c.note("largest sampled shift ratio", prev);
  c.require(prev > static_cast<double>(m_hi), "ratio exceeds every fixed bound on samples", prev);
  // The consequence: a nontrivial family exists (light ps1 run).
  Ts1Weight t = ts1_weight(f, g, 5);
  c.require(t.anchors.size() == 5, "ts1 anchors exist", static_cast<double>(t.anchors.size()));
}

// --- PD1: decomposition verdict equals the direct verdict ------------------

inline void check_pd1(ClaimCheck& c, const json& p) {
  unsigned m_max = get_unsigned(p, "m_max");
  unsigned n = get_unsigned(p, "N");
  unsigned combos = 0, decided = 0, disagreements = 0;
  for (const char* fname : {"identity", "log1p", "power(0.5)"}) {
    for (const char* gname : {"identity", "eeu", "eeu3"}) {
      ModulusFunction f = catalog_modulus(fname);
      WeightFunction g = catalog_weight(gname);
      Decomposition d = build_decomposition(f, g, m_max);
      // Both proxies must examine the same window: the geometric part stops
      // at min(N, k_stored) and the block-aligned points carry the tail.
      BigNat geo = BigNat(n) < d.k(d.stored_m_max()) ? BigNat(n) : d.k(d.stored_m_max());
      Schedule s = decomposition_schedule(d, geo);
      for (const OmegaSet& set : catalog_test_sets()) {
        ++combos;
        MembershipVerdict direct = membership_verdict(ratio_trace(f, g, set, s));
        MembershipVerdict via_phi = decomposition_verdict(d, set);
        if (direct.verdict == Verdict::Undecided || via_phi.verdict == Verdict::Undecided)
          continue;
        ++decided;
        if (direct.verdict != via_phi.verdict) ++disagreements;
      }
    }
  }
  c.note("combos", combos);
  c.note("both decided", decided);
  c.require(combos >= 45, ">= 45 combos", combos);
  c.require(decided >= combos / 2, "most combos decided", decided);
  c.require(disagreements == 0, "zero disagreements", disagreements);
}

// --- TD1: submeasure axioms on random finite pairs --------------------------

inline void check_td1(ClaimCheck& c, const json& p) {
  unsigned trials = get_unsigned(p, "trials");
  std::mt19937_64 rng(p.at("seed").get<std::uint64_t>());
  unsigned violations = 0;
  double worst_slack = 0;
  for (const char* fname : {"identity", "log1p", "power(0.5)"}) {
    for (const char* gname : {"identity", "eeu", "eeu3"}) {
      Decomposition d = build_decomposition(catalog_modulus(fname), catalog_weight(gname), 8);
      unsigned m = d.start_m() + 2;
      if (!d.index_valid(m)) m = d.start_m();
      std::uint64_t span = d.k(m + 1).fits_uint64() ? d.k(m + 1).to_uint64() : (1ull << 24);
      for (unsigned t = 0; t < trials; ++t) {
        std::vector<BigNat> ea, eb;
        for (int i = 0; i < 24; ++i) {
          std::uint64_t x = rng() % span;
          eb.push_back(BigNat(x));
          if (rng() % 2) ea.push_back(BigNat(x));
        }
        OmegaSet a = finite_set(ea, "a"), b = finite_set(eb, "b");
        double pa = d.phi(m, a).value;
        double pb = d.phi(m, b).value;
        double pu = d.phi(m, boolean_combo(SetOp::Union, a, b)).value;
        if (d.phi(m, empty_set()).value != 0.0) ++violations;
        if (!(pa <= pb)) ++violations;                  // monotone, exactly
        if (!(pu <= pa + pb + 1e-9)) ++violations;      // subadditive
        worst_slack = std::max(worst_slack, pu - pa - pb);
      }
    }
  }
  c.note("worst subadditivity slack", worst_slack);
  c.require(violations == 0, "submeasure axiom violations", violations);
}

// --- PD2: sup phi(omega) finite <=> preimage-count criterion bounded --------

inline void check_pd2(ClaimCheck& c, const json& p) {
  ModulusFunction f = catalog_modulus(get_string(p, "f"));
  WeightFunction g = catalog_weight(get_string(p, "g"));
  Decomposition d = build_decomposition(f, g, get_unsigned(p, "m_max"));
  auto [sup_phi, arg] = sup_phi_omega(d);
  (void)arg;
  double sup_crit = 0;
  for (unsigned m = std::max(1u, d.start_m()); m + 1 <= d.stored_m_max(); ++m) {
    double phi = d.phi_omega(m).value;
    double crit = preimage_count_criterion(d, m);
    sup_crit = std::max(sup_crit, crit);
    // |omega ∩ [k_m, k_{m+1})| = |(f∘g)^{-1}([2^m, 2^{m+1}))| pins the two
    // quantities within a factor of two of each other.
    c.require(crit <= 2 * phi + 1e-9 && crit >= phi - 1e-9,
              "criterion within [phi, 2 phi] at m = " + std::to_string(m), crit);
  }
  c.note("sup phi(omega)", sup_phi);
  c.note("sup criterion", sup_crit);
  c.require(sup_phi <= 2 * sup_crit + 1e-9 && sup_crit <= 2 * sup_phi + 1e-9,
            "both sups finite together", sup_crit);
}

// --- PD3: uniform growth forces bounded submeasures (and its converse fails)

inline void check_pd3(ClaimCheck& c, const json& p) {
  unsigned n = get_unsigned(p, "N");
  auto none = growth_criterion_pd3(catalog_modulus("identity"), WeightFunction::identity(),
                                   get_double(p, "M"), get_double(p, "L"), BigNat(n));
  c.require(none.empty(), "identity/identity satisfies the growth hypothesis",
            static_cast<double>(none.size()));
  Decomposition d = build_decomposition(catalog_modulus("identity"), WeightFunction::identity(), 12);
  auto [sup_id, arg_id] = sup_phi_omega(d);
  (void)arg_id;
  c.require(sup_id < 2.0, "sup phi bounded for identity/identity", sup_id);

  // Converse failure: (log1p, eeu) has bounded submeasures yet violates the
  // growth hypothesis at every factorial block start.
  auto viol = growth_criterion_pd3(catalog_modulus("log1p"), catalog_weight("eeu"),
                                   get_double(p, "M"), get_double(p, "L"), BigNat(n));
  c.require(!viol.empty(), "(log1p, eeu) violates the growth hypothesis",
            static_cast<double>(viol.size()));
  Decomposition de = build_decomposition(catalog_modulus("log1p"), catalog_weight("eeu"), 7,
                                         BigNat::pow2(1024));
  auto [sup_eeu, arg_eeu] = sup_phi_omega(de);
  (void)arg_eeu;
  c.require(sup_eeu < 4.0, "sup phi still bounded for (log1p, eeu)", sup_eeu);
}

// --- PD4 forward: sup phi <= 2 supRatio + 2 f(1)/f(g(k0')) ------------------

inline void pd4_components(const json& p, double& sup_phi, double& sup_ratio, double& f1_term,
                           double& k0_term) {
  ModulusFunction f = catalog_modulus(get_string(p, "f"));
  WeightFunction g = catalog_weight(get_string(p, "g"));
  unsigned m_max = get_unsigned(p, "m_max");
  unsigned n = get_unsigned(p, "N");
  BigNat ceiling = BigNat::pow2(get_unsigned(p, "ceiling_log2"));
  Decomposition d = build_decomposition(f, g, m_max, ceiling);
  auto [sp, arg] = sup_phi_omega(d);
  (void)arg;
  sup_phi = sp;
  Schedule extra;
  for (unsigned m = std::max(1u, d.start_m()); m <= d.stored_m_max(); ++m) {
    extra.push_back(d.k(m));
    if (!d.k(m).is_zero()) extra.push_back(d.k(m) - BigNat(1u));
  }
  auto [sr, at] = ratio_bounded_criterion(f, g, BigNat(n), merge_schedules(std::move(extra), {}));
  (void)at;
  sup_ratio = sr;
  BigNat k0 = *first_positive_index(g, ceiling);
  f1_term = f.eval_big(BigNat(1u)) / f.eval_big(g.eval(k0));
  k0_term = k0.is_zero() ? 0.0 : modulus_ratio(f, k0, g.eval(k0));
}

inline void check_pd4_forward(ClaimCheck& c, const json& p) {
  double sup_phi, sup_ratio, f1_term, k0_term;
  pd4_components(p, sup_phi, sup_ratio, f1_term, k0_term);
  double bound = 2 * sup_ratio + 2 * f1_term;
  c.note("sup phi(omega)", sup_phi);
  c.note("2 supRatio + 2 f(1)/f(g(k0'))", bound);
  c.require(sup_phi <= bound + 1e-9, "forward bound holds (slack reported)", bound - sup_phi);
}

inline void check_pd4_reverse(ClaimCheck& c, const json& p) {
  double sup_phi, sup_ratio, f1_term, k0_term;
  pd4_components(p, sup_phi, sup_ratio, f1_term, k0_term);
  double bound = k0_term + 2 * sup_phi;
  c.note("sup f(k)/f(g(k)) over grid", sup_ratio);
  c.note("f(k0')/f(g(k0')) + 2 sup phi", bound);
  c.require(sup_ratio <= bound + 1e-9, "reverse bound holds (slack reported)", bound - sup_ratio);
}

// --- PD4-1: bounded f-ratio implies Z(f) inside Z_g(f) -----------------------

inline void check_pd4_1(ClaimCheck& c, const json& p) {
  ModulusFunction f = catalog_modulus(get_string(p, "f"));
  WeightFunction g = catalog_weight(get_string(p, "g"));
  unsigned n = get_unsigned(p, "N");
  auto [sup, at] = ratio_bounded_criterion(f, g, BigNat(n));
  (void)at;
  c.require(sup <= get_double(p, "ratio_bound"), "f(k)/f(g(k)) bounded on the grid", sup);

  // The proof's factorization, checked pointwise on every catalog set:
  // f(count)/f(g(k)) = [f(count)/f(k)] * [f(k)/f(g(k))] <= supRatio * f-trace.
  WeightFunction id = WeightFunction::identity();
  Schedule s = default_schedule(g, BigNat(n));
  double worst = 0;
  for (const OmegaSet& set : catalog_test_sets()) {
    RatioTrace tg = ratio_trace(f, g, set, s);
    RatioTrace ti = ratio_trace(f, id, set, s);
    for (std::size_t i = 0; i < tg.indices.size(); ++i) {
      double point = modulus_ratio(f, tg.indices[i], g.eval(tg.indices[i]));
      worst = std::max(worst, tg.ratios[i] - ti.ratios[i] * point);
    }
  }
  c.require(worst <= 1e-9, "pointwise factorization ratio_g = ratio_f * f(k)/f(g(k))", worst);

  // Membership transfer on sets the horizon can actually decide.
  for (const OmegaSet& set :
       {finite_set({BigNat(7u), BigNat(100u), BigNat(5000u)}, "f3"), tower_set()}) {
    MembershipVerdict in_f = membership_on_enumeration(f, id, set, 64);
    MembershipVerdict in_g = membership_on_enumeration(f, g, set, 64);
    c.require(in_f.verdict == Verdict::LikelyIn, set.name() + " in Z(f)", in_f.tail_sup);
    c.require(in_g.verdict == Verdict::LikelyIn, set.name() + " in Z_g(f)", in_g.tail_sup);
  }
}

// --- PD4-2: bounded k/g(k) implies bounded f(k)/f(g(k)) ---------------------

inline void check_pd4_2(ClaimCheck& c, const json& p) {
  unsigned n = get_unsigned(p, "N");
  for (const char* gname : {"identity", "eeu"}) {
    WeightFunction g = catalog_weight(gname);
    double sup_plain = 0;
    Schedule s = default_schedule(g, BigNat(n));
    for (const BigNat& k : s) {
      if (k.is_zero() || g.eval(k).is_zero()) continue;
      sup_plain = std::max(sup_plain, big_ratio(k, g.eval(k)));
    }
    double m_bound = std::ceil(sup_plain);
    c.note(std::string("sup k/g(k) for ") + gname, sup_plain);
    for (const char* fname : {"identity", "log1p", "power(0.5)"}) {
      auto [supf, at] = ratio_bounded_criterion(catalog_modulus(fname), g, BigNat(n));
      (void)at;
      c.require(supf <= m_bound + 1e-9,
                std::string(fname) + "-ratio bounded by the same M for " + gname, supf);
    }
  }
  // eeu3 is the converse failure: k/g(k) unbounded while the log1p ratio
  // stays below 4 (recorded as evidence, not an assertion of a limit).
  WeightFunction e3 = catalog_weight("eeu3");
  double plain_at_top = big_ratio(BigNat::pow2(20), e3.eval(BigNat::pow2(20)));
  auto [supf3, at3] = ratio_bounded_criterion(catalog_modulus("log1p"), e3, BigNat(n));
  (void)at3;
  c.note("eeu3: k/g(k) at 4^10", plain_at_top);
  c.require(plain_at_top >= 2048, "eeu3 plain ratio grows", plain_at_top);
  c.require(supf3 <= 4.0, "eeu3 log1p ratio <= 4", supf3);
}

// --- LZ: Z(f) inside Z, strictly -------------------------------------------

inline void check_lz(ClaimCheck& c, const json& p) {
  ModulusFunction f = catalog_modulus(get_string(p, "f"));
  unsigned n = get_unsigned(p, "N");
  WeightFunction id = WeightFunction::identity();
  unsigned implications = 0;
  for (const OmegaSet& set : {tower_set(), finite_set({BigNat(5u)}, "f1"),
                              finite_set({BigNat(0u), BigNat(9u), BigNat(64u)}, "f3")}) {
    MembershipVerdict in_f = membership_on_enumeration(f, id, set, 64);
    MembershipVerdict in_plain =
        membership_on_enumeration(catalog_modulus("identity"), id, set, 64);
    if (in_f.verdict == Verdict::LikelyIn) {
      ++implications;
      c.require(in_plain.verdict == Verdict::LikelyIn, set.name() + ": Z(f) in implies Z in",
                in_plain.tail_sup);
    }
  }
  c.require(implications >= 2, "enough decided inclusion instances", implications);
  // Example E shows the converse fails: Z in, Z(f) out.
  ClassicalVerdicts e = classical_verdicts(example_e_set(), BigNat(n), f);
  c.require(e.z.verdict == Verdict::LikelyIn, "example E in Z", e.z.tail_sup);
  c.require(e.z_f.verdict == Verdict::LikelyOut, "example E out of Z(f)", e.z_f.tail_sup);
}

// --- EEU4 / EEU5: increasing-invariance fails for these EU ideals -----------

inline void check_eeu_invariance(ClaimCheck& c, const MeasureIdealSpec& spec, const OmegaSet& cset,
                                 const OmegaSet& dset, unsigned mu_lo, unsigned mu_hi,
                                 unsigned zero_lo, const json& p) {
  unsigned n = get_unsigned(p, "N");
  DominanceResult dom = increasing_dominance_check(cset, dset, BigNat(n));
  c.require(dom.holds, "prefix dominance |C| <= |D| up to N", dom.holds ? 1 : 0);
  for (unsigned m = mu_lo; m <= mu_hi; ++m) {
    c.status = c.status;
    if (spec.mu(m, cset) != 1) {
      c.require(false, "mu_m(C) = 1 exactly at m = " + std::to_string(m),
                spec.mu(m, cset).convert_to<double>());
      return;
    }
    if (m >= zero_lo && spec.mu(m, dset) != 0) {
      c.require(false, "mu_m(D) = 0 exactly at m = " + std::to_string(m),
                spec.mu(m, dset).convert_to<double>());
      return;
    }
  }
  c.note("mu_m(C) = 1 exactly on [" + std::to_string(mu_lo) + "," + std::to_string(mu_hi) + "]", 1);
  c.note("mu_m(D) = 0 exactly from m = " + std::to_string(zero_lo), 0);
  MembershipVerdict out = exh_verdict(spec, cset, mu_hi + 4);
  MembershipVerdict in = exh_verdict(spec, dset, mu_hi + 4);
  c.require(out.verdict == Verdict::LikelyOut, "C out of the ideal", out.tail_sup);
  c.require(in.verdict == Verdict::LikelyIn, "D in the ideal", in.tail_sup);
}

inline void check_eeu4(ClaimCheck& c, const json& p) {
  check_eeu_invariance(c, MeasureIdealSpec::eeu4(), eeu4_c_set(), eeu4_d_set(), 1, 16, 3, p);
}

inline void check_eeu5(ClaimCheck& c, const json& p) {
  check_eeu_invariance(c, MeasureIdealSpec::eeu5(), eeu5_c_set(), eeu5_d_set(), 7, 16, 7, p);
}

// --- ES1: the factorial-block growth inequality -----------------------------

inline void check_es1(ClaimCheck& c, const json& p) {
  ModulusFunction f = catalog_modulus(get_string(p, "f"));
  WeightFunction g = catalog_weight(get_string(p, "g"));
  unsigned m_hi = get_unsigned(p, "m_max");
  for (unsigned m = 2; m <= m_hi; ++m) {
    BigNat km = BigNat::pow2_offset(factorial_cached(m), -1);
    double r = modulus_ratio(f, g.eval(km + BigNat(1u)), g.eval(km));
    c.status = c.status;
    if (!(r > (m + 1) / 2.0)) {
      c.require(false, "growth ratio > (m+1)/2 at m = " + std::to_string(m), r);
      return;
    }
    if (m == m_hi) c.note("ratio at m = " + std::to_string(m), r);
  }
  c.require(true, "f(g(k_m + 1))/f(g(k_m)) > (m+1)/2 for m in [2, " + std::to_string(m_hi) + "]",
            m_hi);
}

// --- EEU3: ratio bounded under f but not without f --------------------------

inline void check_eeu3(ClaimCheck& c, const json& p) {
  ModulusFunction f = catalog_modulus(get_string(p, "f"));
  WeightFunction g = catalog_weight("eeu3");
  unsigned n = get_unsigned(p, "N");
  auto [sup, at] = ratio_bounded_criterion(f, g, BigNat(n));
  (void)at;
  c.require(sup <= 4.0, "sup ln(1+k)/ln(1+g(k)) <= 4 on the grid", sup);
  for (unsigned m = 0; m <= 9; ++m) {
    BigNat k = BigNat::pow2(2 * (m + 1));  // 4^(m+1), last index of block m
    double plain = big_ratio(k, g.eval(k));
    double expected = std::ldexp(1.0, static_cast<int>(m) + 2);
    c.status = c.status;
    if (plain != expected) {
      c.require(false, "k/g(k) = 2^(m+2) exactly at m = " + std::to_string(m), plain);
      return;
    }
  }
  c.require(true, "k/g(k) = 2^(m+2) exactly at k = 4^(m+1) for m <= 9", 1);
}

struct ClaimRecipe {
  json defaults;
  std::function<void(ClaimCheck&, const json&)> run;
};

inline const std::map<std::string, ClaimRecipe>& claim_registry() {
  static const std::map<std::string, ClaimRecipe> registry = {
      {"LO1-equiv", {{{"f", "log1p"}, {"g", "es1"}, {"m_max", 8}}, check_lo1}},
      {"LS1", {{{"N", 1000000}}, check_ls1}},
      {"LS2", {{{"f", "log1p"}, {"g", "eeu3"}, {"a", 1.5}, {"N", 100000}}, check_ls2}},
      {"P1-cap", {{{"f", "log1p"}, {"N", 1000000}}, check_p1_cap}},
      {"P1-cup", {{{"f", "log1p"}, {"m_max", 24}}, check_p1_cup}},
      {"ExE", {{{"f", "log1p"}, {"N", 1000000}}, check_exe}},
      {"PS1",
       {{{"f", "log1p"}, {"g", "es1"}, {"members", 8}, {"anchors", 1104}, {"witness_floor", 1000.0}},
        check_ps1}},
      {"TS1", {{{"f", "log1p"}, {"g", "es1"}}, check_ts1}},
      {"CS1", {{{"f", "log1p"}, {"g", "es1"}, {"m_max", 20}}, check_cs1}},
      {"PD1", {{{"m_max", 12}, {"N", 1000000}}, check_pd1}},
      {"TD1", {{{"trials", 100}, {"seed", 0}}, check_td1}},
      {"PD2", {{{"f", "log1p"}, {"g", "eeu3"}, {"m_max", 8}}, check_pd2}},
      {"PD3", {{{"M", 2.0}, {"L", 3.0}, {"N", 1000000}}, check_pd3}},
      {"PD4-forward",
       {{{"f", "log1p"}, {"g", "eeu"}, {"m_max", 12}, {"N", 1000000}, {"ceiling_log2", 8192}},
        check_pd4_forward}},
      {"PD4-reverse",
       {{{"f", "log1p"}, {"g", "eeu"}, {"m_max", 12}, {"N", 1000000}, {"ceiling_log2", 8192}},
        check_pd4_reverse}},
      {"PD4-1", {{{"f", "log1p"}, {"g", "eeu3"}, {"N", 1000000}, {"ratio_bound", 4.0}}, check_pd4_1}},
      {"PD4-2", {{{"N", 1000000}}, check_pd4_2}},
      {"LZ", {{{"f", "log1p"}, {"N", 1000000}}, check_lz}},
      {"EEU4", {{{"N", 100000}}, check_eeu4}},
      {"EEU5", {{{"N", 100000}}, check_eeu5}},
      {"ES1", {{{"f", "log1p"}, {"g", "es1"}, {"m_max", 20}}, check_es1}},
      {"EEU3", {{{"f", "log1p"}, {"N", 1000000}}, check_eeu3}},
  };
  return registry;
}

inline const std::map<std::string, std::string>& claim_aliases() {
  static const std::map<std::string, std::string> aliases = {{"LO1", "LO1-equiv"},
                                                             {"PD4", "PD4-forward"}};
  return aliases;
}

}  // namespace verify_detail

inline std::vector<std::string> known_claims() {
  std::vector<std::string> out;
  for (const auto& [id, recipe] : verify_detail::claim_registry()) out.push_back(id);
  return out;
}

inline ClaimCheck run_check(const std::string& claim_id, json params = json::object()) {
  std::string id = claim_id;
  if (auto alias = verify_detail::claim_aliases().find(id);
      alias != verify_detail::claim_aliases().end())
    id = alias->second;
  auto it = verify_detail::claim_registry().find(id);
  if (it == verify_detail::claim_registry().end())
    throw UnknownClaim("unknown claim id: " + claim_id);
  json merged = it->second.defaults;
  for (auto& [key, value] : params.items()) {
    if (!merged.contains(key))
      throw InvalidArgument("claim " + id + ": unknown parameter '" + key + "'");
    merged[key] = value;
  }
  ClaimCheck check;
  check.claim_id = id;
  check.parameters = merged;
  check.status = CheckStatus::Pass;  // require() downgrades on violation
  auto t0 = std::chrono::steady_clock::now();
  it->second.run(check, merged);
  check.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return check;
}

inline SuiteReport run_suite(const std::string& suite_name) {
  SuiteReport report;
  report.suite = suite_name;
  report.horizon_limited = {"P1-cap"};
  std::vector<std::pair<std::string, json>> plan;
  if (suite_name == "smoke") {
    // Light horizons; every member must PASS on the shipped catalog.
    plan = {{"LO1-equiv", json::object()},
            {"LS1", {{"N", 100000}}},
            {"LS2", json::object()},
            {"ExE", {{"N", 100000}}},
            {"PD1", {{"N", 100000}}},
            {"TD1", {{"trials", 40}}},
            {"PD2", json::object()},
            {"PD3", {{"N", 100000}}},
            {"PD4-forward", json::object()},
            {"PD4-reverse", json::object()},
            {"PD4-1", {{"N", 100000}}},
            {"PD4-2", {{"N", 100000}}},
            {"LZ", {{"N", 100000}}},
            {"EEU4", {{"N", 20000}}}};
  } else if (suite_name == "full") {
    for (const auto& [id, recipe] : verify_detail::claim_registry())
      plan.emplace_back(id, json::object());
  } else {
    throw InvalidArgument("unknown suite: " + suite_name + " (expected smoke or full)");
  }
  for (const auto& [id, params] : plan) report.checks.push_back(run_check(id, params));
  std::sort(report.checks.begin(), report.checks.end(),
            [](const ClaimCheck& a, const ClaimCheck& b) { return a.claim_id < b.claim_id; });
  return report;
}

}  // namespace density_lab
