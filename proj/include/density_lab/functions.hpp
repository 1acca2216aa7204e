#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "density_lab/bignum.hpp"
#include "density_lab/errors.hpp"
#include "density_lab/schedules.hpp"

namespace density_lab {

// ---------------------------------------------------------------------------
// Modulus functions f: [0,inf) -> [0,inf), f(x)=0 iff x=0, subadditive,
// increasing, right continuous at 0.
// ---------------------------------------------------------------------------

class ModulusFunction {
 public:
  enum class Kind { Identity, Log1p, Power, BoundedRatio, Custom };

  double eval_real(double x) const {
    if (!(x >= 0)) throw InvalidArgument("ModulusFunction: negative argument");
    switch (kind_) {
      case Kind::Identity: return x;
      case Kind::Log1p: return std::log1p(x);
      case Kind::Power: return std::pow(x, beta_);
      case Kind::BoundedRatio: return x / (1.0 + x);
      case Kind::Custom: return custom_(x);
    }
    return 0.0;
  }

  // f at an arbitrary-precision integer argument. For log1p the value is
  // computed from the bit length of n+1 plus a mantissa correction, so the
  // relative error stays near machine precision at any magnitude.
  double eval_big(const BigNat& n) const {
    if (n.is_zero()) return 0.0;
    switch (kind_) {
      case Kind::Identity: return n.to_double();
      case Kind::Log1p: {
        Log2Parts p = (n + BigNat(1u)).log2_parts();
        return p.to_double() * std::numbers::ln2;
      }
      case Kind::Power: return std::exp2(n.log2_parts().scaled(beta_).to_double());
      case Kind::BoundedRatio: {
        if (n.is_huge()) return 1.0;
        return cpp_rational(n.exact(), n.exact() + 1).convert_to<double>();
      }
      case Kind::Custom: return custom_(n.to_double());
    }
    return 0.0;
  }

  // log2(f(n)) with the integer component exact; requires n > 0. This is what
  // ratio and threshold computations use at ES1 scales where f(n) itself
  // overflows a double.
  Log2Parts eval_log2(const BigNat& n) const {
    if (n.is_zero()) throw InvalidArgument("ModulusFunction::eval_log2: f(0) = 0");
    switch (kind_) {
      case Kind::Identity: return n.log2_parts();
      case Kind::Power: return n.log2_parts().scaled(beta_);
      case Kind::Log1p: {
        Log2Parts L = (n + BigNat(1u)).log2_parts();  // log2(1+n)
        Log2Parts r;
        if (bit_length(L.ip) <= 50) {
          double v = L.ip.convert_to<double>() + L.frac;
          r = {0, std::log2(v)};
        } else {
          r = BigNat(cpp_int(L.ip)).log2_parts();
          r.frac += L.frac / (L.ip.convert_to<double>() * std::numbers::ln2);
        }
        r.frac += std::log2(std::numbers::ln2);
        r.normalize();
        return r;
      }
      case Kind::BoundedRatio: {
        if (n.is_huge()) return {0, 0.0};
        return {0, std::log2(eval_big(n))};
      }
      case Kind::Custom: {
        double v = custom_(n.to_double());
        if (!(v > 0)) throw InvalidArgument("ModulusFunction::eval_log2: nonpositive value");
        return {0, std::log2(v)};
      }
    }
    return {0, 0.0};
  }

  bool is_unbounded() const { return unbounded_; }
  const std::string& name() const { return name_; }
  Kind kind() const { return kind_; }
  double power_beta() const { return beta_; }

  static ModulusFunction identity() { return ModulusFunction(Kind::Identity, "identity", true); }
  static ModulusFunction log1p() { return ModulusFunction(Kind::Log1p, "log1p", true); }
  static ModulusFunction power(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw NotInCatalog("power modulus needs beta in (0,1)");
    ModulusFunction f(Kind::Power, "power(" + format_double17(beta) + ")", true);
    f.beta_ = beta;
    return f;
  }
  static ModulusFunction bounded_ratio() {
    return ModulusFunction(Kind::BoundedRatio, "bounded_ratio", false);
  }
  static ModulusFunction custom(std::string name, std::function<double(double)> fn,
                                bool unbounded) {
    ModulusFunction f(Kind::Custom, std::move(name), unbounded);
    f.custom_ = std::move(fn);
    return f;
  }

 private:
  ModulusFunction(Kind k, std::string name, bool unbounded)
      : kind_(k), unbounded_(unbounded), name_(std::move(name)) {}

  Kind kind_;
  double beta_ = 0.0;
  bool unbounded_ = true;
  std::string name_;
  std::function<double(double)> custom_;
};

// f(a)/f(b), routed through exact log2 parts whenever plain doubles overflow.
inline double modulus_ratio(const ModulusFunction& f, const BigNat& a, const BigNat& b) {
  if (b.is_zero()) throw InvalidArgument("modulus_ratio: f(b) = 0");
  if (a.is_zero()) return 0.0;
  double da = f.eval_big(a);
  double db = f.eval_big(b);
  if (std::isfinite(da) && std::isfinite(db) && db > 0.0) return da / db;
  return std::exp2(log2_diff(f.eval_log2(a), f.eval_log2(b)));
}

// Decides f(x) >= 2^m. Exact for the identity modulus; for log1p/power the
// comparison happens in the log2 domain where the catalog thresholds are far
// from any sampled value.
inline bool modulus_geq_pow2(const ModulusFunction& f, const BigNat& x, unsigned m) {
  if (x.is_zero()) return false;
  switch (f.kind()) {
    case ModulusFunction::Kind::Identity:
      return x >= BigNat::pow2(m);
    case ModulusFunction::Kind::Power: {
      // After normalize() the fractional part sits in [0,1), so f(x) >= 2^m
      // reduces to the exact integer comparison; dyadic boundaries (e.g.
      // beta = 0.5 at x = 2^(2m)) land on ip == m with frac exactly 0.
      return x.log2_parts().scaled(f.power_beta()).ip >= cpp_int(m);
    }
    case ModulusFunction::Kind::Log1p: {
      Log2Parts L = (x + BigNat(1u)).log2_parts();  // ln(1+x) = (ip+frac)*ln2
      if (bit_length(L.ip) > 900) return true;
      const long double ln2l = 0.69314718055994530941723212145818L;
      long double lhs = (static_cast<long double>(L.ip.convert_to<double>()) +
                         static_cast<long double>(L.frac)) *
                        ln2l;
      return lhs >= std::ldexp(1.0L, static_cast<int>(m));
    }
    default:
      return f.eval_big(x) >= std::ldexp(1.0, static_cast<int>(m));
  }
}

// ---------------------------------------------------------------------------
// Weight functions g: omega -> [0,inf) with g(k) -> inf and k/g(k) not -> 0.
// ---------------------------------------------------------------------------

namespace detail {

struct WeightImpl {
  virtual ~WeightImpl() = default;
  virtual BigNat eval(const BigNat& k) const = 0;
  // Indices where the weight jumps or a ratio k/g(k) peaks; used to seed scan
  // grids. Default: none.
  virtual void breakpoints(const BigNat& horizon, std::size_t max_count,
                           std::vector<BigNat>& out) const {
    (void)horizon;
    (void)max_count;
    (void)out;
  }
  bool nondecreasing = true;
  bool integer_valued = true;
  std::string name;
};

}  // namespace detail

class WeightFunction {
 public:
  BigNat eval(const BigNat& k) const { return impl_->eval(k); }
  bool is_nondecreasing() const { return impl_->nondecreasing; }
  bool is_integer_valued() const { return impl_->integer_valued; }
  const std::string& name() const { return impl_->name; }

  Schedule breakpoints(const BigNat& horizon, std::size_t max_count = 4096) const {
    std::vector<BigNat> out;
    impl_->breakpoints(horizon, max_count, out);
    return merge_schedules(std::move(out), {});
  }

  static WeightFunction identity();
  static WeightFunction es1();
  static WeightFunction eeu();
  static WeightFunction eeu3();
  // Real-valued a*g evaluated as its exact dyadic floor; the fractional part
  // is below 1 and no density quantity resolves it.
  static WeightFunction scaled(double a, WeightFunction inner);
  static WeightFunction floor_composed(double a, WeightFunction inner);
  static WeightFunction step_from_anchors(std::vector<BigNat> anchors, std::string name = "");
  static WeightFunction custom(std::string name, std::function<BigNat(const BigNat&)> fn,
                               bool nondecreasing, bool integer_valued);
  static WeightFunction from_impl(std::shared_ptr<const detail::WeightImpl> impl) {
    return WeightFunction(std::move(impl));
  }
  std::shared_ptr<const detail::WeightImpl> impl() const { return impl_; }

 private:
  explicit WeightFunction(std::shared_ptr<const detail::WeightImpl> impl)
      : impl_(std::move(impl)) {}
  std::shared_ptr<const detail::WeightImpl> impl_;
};

namespace detail {

struct IdentityWeight final : WeightImpl {
  IdentityWeight() { name = "identity"; }
  BigNat eval(const BigNat& k) const override { return k; }
};

// g(0)=0, g(1)=1, g(k) = 2^((m+1)!) for k in [2^(m!), 2^((m+1)!)).
struct Es1Weight final : WeightImpl {
  Es1Weight() { name = "es1"; }
  BigNat eval(const BigNat& k) const override {
    if (k.is_zero()) return BigNat(0u);
    if (k == BigNat(1u)) return BigNat(1u);
    cpp_int b = k.floor_log2();  // 2^b <= k
    unsigned m = std::max(1u, factorial_floor_index(b));
    return BigNat::pow2(factorial_cached(m + 1));
  }
  void breakpoints(const BigNat& horizon, std::size_t max_count,
                   std::vector<BigNat>& out) const override {
    for (unsigned m = 1; out.size() + 2 <= max_count; ++m) {
      BigNat lo = BigNat::pow2_offset(factorial(m), -1);
      if (lo > horizon) break;
      out.push_back(lo);
      BigNat hi = lo + BigNat(1u);
      if (hi <= horizon) out.push_back(hi);
    }
  }
};

// g(0)=0, g(k) = (m+1)! for k in [m!, (m+1)!).
struct EeuWeight final : WeightImpl {
  EeuWeight() { name = "eeu"; }
  BigNat eval(const BigNat& k) const override {
    if (k.is_zero()) return BigNat(0u);
    const cpp_int& v = k.exact();  // factorial blocks need the exact value
    unsigned m = std::max(1u, factorial_floor_index(v));
    return BigNat(factorial_cached(m + 1));
  }
  void breakpoints(const BigNat& horizon, std::size_t max_count,
                   std::vector<BigNat>& out) const override {
    for (unsigned m = 2; out.size() + 2 <= max_count; ++m) {
      BigNat f(factorial(m));
      if (f > horizon) break;
      out.push_back(f - BigNat(1u));
      out.push_back(f);
    }
  }
};

// g(k)=1 for k<=4, g(k)=2^m for 4^m < k <= 4^(m+1). The paper writes the
// second clause for m>1, leaving (4,16] uncovered; taking m>=1 makes g total.
struct Eeu3Weight final : WeightImpl {
  Eeu3Weight() { name = "eeu3"; }
  BigNat eval(const BigNat& k) const override {
    if (k <= BigNat(4u)) return BigNat(1u);
    cpp_int b = k.floor_log2();
    cpp_int m = (b - 1) / 2;
    while (!(k > BigNat::pow2(2 * m))) --m;
    while (k > BigNat::pow2(2 * (m + 1))) ++m;
    return BigNat::pow2(m);
  }
  void breakpoints(const BigNat& horizon, std::size_t max_count,
                   std::vector<BigNat>& out) const override {
    for (unsigned m = 1; out.size() + 2 <= max_count; ++m) {
      BigNat p = BigNat::pow2(2 * m);
      if (p > horizon) break;
      out.push_back(p);
      BigNat q = p + BigNat(1u);
      if (q <= horizon) out.push_back(q);
    }
  }
};

struct ScaledWeight final : WeightImpl {
  double factor;
  std::shared_ptr<const WeightImpl> inner;
  ScaledWeight(double a, std::shared_ptr<const WeightImpl> g, bool floored) : factor(a), inner(std::move(g)) {
    name = (floored ? "floor_composed(" : "scaled(") + format_double17(a) + "," + inner->name + ")";
    nondecreasing = inner->nondecreasing && a >= 0;
    integer_valued = floored;  // the abstract scaled weight is real-valued
  }
  BigNat eval(const BigNat& k) const override {
    cpp_int v = inner->eval(k).exact();
    if (v == 0) return BigNat(0u);
    int e = 0;
    double sig = std::frexp(factor, &e);
    auto msig = static_cast<long long>(std::ldexp(sig, 53));
    int shift = 53 - e;
    cpp_int q = v * msig;
    return BigNat(shift >= 0 ? cpp_int(q >> shift) : cpp_int(q << (-shift)));
  }
  void breakpoints(const BigNat& horizon, std::size_t max_count,
                   std::vector<BigNat>& out) const override {
    inner->breakpoints(horizon, max_count, out);
  }
};

struct MaxWeight final : WeightImpl {
  std::shared_ptr<const WeightImpl> g, h;
  MaxWeight(std::shared_ptr<const WeightImpl> a, std::shared_ptr<const WeightImpl> b)
      : g(std::move(a)), h(std::move(b)) {
    name = "max(" + g->name + "," + h->name + ")";
    nondecreasing = g->nondecreasing && h->nondecreasing;
    integer_valued = g->integer_valued && h->integer_valued;
  }
  BigNat eval(const BigNat& k) const override {
    BigNat a = g->eval(k), b = h->eval(k);
    return a >= b ? a : b;
  }
  void breakpoints(const BigNat& horizon, std::size_t max_count,
                   std::vector<BigNat>& out) const override {
    g->breakpoints(horizon, max_count, out);
    h->breakpoints(horizon, max_count, out);
  }
};

// g(k) = min{a in anchors : k <= a}; the step weight from the union proof.
// Past the last anchor the weight continues as the identity.
struct StepWeight final : WeightImpl {
  std::vector<BigNat> anchors;
  explicit StepWeight(std::vector<BigNat> a) : anchors(std::move(a)) {
    name = "step[" + std::to_string(anchors.size()) + " anchors]";
  }
  BigNat eval(const BigNat& k) const override {
    auto it = std::lower_bound(anchors.begin(), anchors.end(), k);
    if (it == anchors.end()) return k;
    return *it;
  }
  void breakpoints(const BigNat& horizon, std::size_t max_count,
                   std::vector<BigNat>& out) const override {
    for (const BigNat& a : anchors) {
      if (a > horizon || out.size() + 2 > max_count) break;
      out.push_back(a);
      out.push_back(a + BigNat(1u));
    }
  }
};

struct CustomWeight final : WeightImpl {
  std::function<BigNat(const BigNat&)> fn;
  CustomWeight(std::string n, std::function<BigNat(const BigNat&)> f, bool nd, bool iv)
      : fn(std::move(f)) {
    name = std::move(n);
    nondecreasing = nd;
    integer_valued = iv;
  }
  BigNat eval(const BigNat& k) const override { return fn(k); }
};

}  // namespace detail

inline WeightFunction WeightFunction::identity() {
  return from_impl(std::make_shared<detail::IdentityWeight>());
}
inline WeightFunction WeightFunction::es1() {
  return from_impl(std::make_shared<detail::Es1Weight>());
}
inline WeightFunction WeightFunction::eeu() {
  return from_impl(std::make_shared<detail::EeuWeight>());
}
inline WeightFunction WeightFunction::eeu3() {
  return from_impl(std::make_shared<detail::Eeu3Weight>());
}
inline WeightFunction WeightFunction::scaled(double a, WeightFunction inner) {
  if (!(a > 0)) throw InvalidArgument("scaled weight: factor must be > 0");
  return from_impl(std::make_shared<detail::ScaledWeight>(a, inner.impl(), false));
}
inline WeightFunction WeightFunction::floor_composed(double a, WeightFunction inner) {
  if (!(a > 0)) throw InvalidArgument("floor_composed weight: factor must be > 0");
  return from_impl(std::make_shared<detail::ScaledWeight>(a, inner.impl(), true));
}
inline WeightFunction WeightFunction::step_from_anchors(std::vector<BigNat> anchors,
                                                        std::string name) {
  if (anchors.empty()) throw EmptyAnchors("step weight needs at least one anchor");
  for (std::size_t i = 1; i < anchors.size(); ++i)
    if (!(anchors[i - 1] < anchors[i]))
      throw InvalidArgument("step weight anchors must be strictly increasing");
  auto impl = std::make_shared<detail::StepWeight>(std::move(anchors));
  if (!name.empty()) impl->name = std::move(name);
  return from_impl(impl);
}
inline WeightFunction WeightFunction::custom(std::string name,
                                             std::function<BigNat(const BigNat&)> fn,
                                             bool nondecreasing, bool integer_valued) {
  return from_impl(
      std::make_shared<detail::CustomWeight>(std::move(name), std::move(fn), nondecreasing, integer_valued));
}

inline WeightFunction pointwise_max(const WeightFunction& g, const WeightFunction& h) {
  return WeightFunction::from_impl(std::make_shared<detail::MaxWeight>(g.impl(), h.impl()));
}

// f(g(k)) with full precision at any scale.
inline double f_of_g(const ModulusFunction& f, const WeightFunction& g, const BigNat& k) {
  return f.eval_big(g.eval(k));
}

// ---------------------------------------------------------------------------
// Catalogs
// ---------------------------------------------------------------------------

inline ModulusFunction catalog_modulus(const std::string& name) {
  if (name == "identity") return ModulusFunction::identity();
  if (name == "log1p") return ModulusFunction::log1p();
  if (name == "bounded_ratio") return ModulusFunction::bounded_ratio();
  if (name.rfind("power(", 0) == 0 && name.back() == ')') {
    double beta = 0;
    try {
      beta = std::stod(name.substr(6, name.size() - 7));
    } catch (const std::exception&) {
      throw NotInCatalog("bad power modulus spec: " + name);
    }
    return ModulusFunction::power(beta);
  }
  throw NotInCatalog("unknown modulus function: " + name);
}

inline WeightFunction catalog_weight(const std::string& name) {
  if (name == "identity") return WeightFunction::identity();
  if (name == "es1") return WeightFunction::es1();
  if (name == "eeu") return WeightFunction::eeu();
  if (name == "eeu3") return WeightFunction::eeu3();
  for (const char* prefix : {"scaled(", "floor_composed("}) {
    std::string p = prefix;
    if (name.rfind(p, 0) == 0 && name.back() == ')') {
      std::string body = name.substr(p.size(), name.size() - p.size() - 1);
      auto comma = body.find(',');
      if (comma == std::string::npos) throw NotInCatalog("bad weight spec: " + name);
      double a = 0;
      try {
        a = std::stod(body.substr(0, comma));
      } catch (const std::exception&) {
        throw NotInCatalog("bad weight spec: " + name);
      }
      WeightFunction inner = catalog_weight(body.substr(comma + 1));
      return p == "scaled(" ? WeightFunction::scaled(a, inner)
                            : WeightFunction::floor_composed(a, inner);
    }
  }
  throw NotInCatalog("unknown weight function: " + name);
}

// ---------------------------------------------------------------------------
// Modulus validation (sampled: the axioms quantify over the reals)
// ---------------------------------------------------------------------------

struct AxiomCheck {
  std::string axiom;
  bool pass;
  std::string detail;
};

struct ValidationReport {
  std::vector<AxiomCheck> checks;
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.pass; });
  }
};

inline std::vector<double> default_modulus_samples() {
  return {0.0, 1e-6, 0.01, 0.1, 0.5, 1.0,    1.5,  2.0,    3.0,     5.0,
          8.0, 13.0, 21.0, 47.0, 100.0, 361.0, 1e3, 12345.678, 1e6, 9.5e7};
}

inline ValidationReport validate_modulus(const ModulusFunction& f,
                                         const std::vector<double>& samples) {
  if (samples.empty()) throw InvalidArgument("validate_modulus: empty sample schedule");
  for (double s : samples)
    if (!(s >= 0)) throw InvalidArgument("validate_modulus: negative sample");

  ValidationReport report;
  std::vector<double> xs = samples;
  std::sort(xs.begin(), xs.end());

  {
    AxiomCheck c{"zero_only_at_zero", true, ""};
    if (f.eval_real(0.0) != 0.0) {
      c.pass = false;
      c.detail = "f(0) = " + format_double17(f.eval_real(0.0));
    }
    for (double x : xs)
      if (x > 0 && !(f.eval_real(x) > 0)) {
        c.pass = false;
        c.detail = "f(" + format_double17(x) + ") = 0";
        break;
      }
    report.checks.push_back(c);
  }
  {
    AxiomCheck c{"subadditive", true, ""};
    for (double x : xs) {
      for (double y : xs) {
        if (f.eval_real(x + y) > f.eval_real(x) + f.eval_real(y) + 1e-9) {
          c.pass = false;
          c.detail = "witness (" + format_double17(x) + "," + format_double17(y) + "): " +
                     format_double17(f.eval_real(x + y)) + " > " +
                     format_double17(f.eval_real(x) + f.eval_real(y));
          break;
        }
      }
      if (!c.pass) break;
    }
    report.checks.push_back(c);
  }
  {
    AxiomCheck c{"monotone", true, ""};
    for (std::size_t i = 1; i < xs.size(); ++i) {
      if (f.eval_real(xs[i - 1]) > f.eval_real(xs[i]) + 1e-12) {
        c.pass = false;
        c.detail = "decreases between " + format_double17(xs[i - 1]) + " and " +
                   format_double17(xs[i]);
        break;
      }
    }
    report.checks.push_back(c);
  }
  {
    AxiomCheck c{"right_continuous_at_0", true, ""};
    double prev = f.eval_real(0.1);
    for (int j = 2; j <= 12; ++j) {
      double v = f.eval_real(std::pow(10.0, -j));
      if (v > prev + 1e-15) {
        c.pass = false;
        c.detail = "not monotone toward 0 at 1e-" + std::to_string(j);
        break;
      }
      prev = v;
    }
    if (c.pass && !(f.eval_real(1e-12) <= 0.9 * f.eval_real(0.1) + 1e-15)) {
      c.pass = false;
      c.detail = "f(1e-12) = " + format_double17(f.eval_real(1e-12)) +
                 " does not approach 0";
    }
    report.checks.push_back(c);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Finite membership evidence for g in G. The limit conditions are undecidable
// from finitely many values; this records witnesses up to a horizon.
// ---------------------------------------------------------------------------

struct GMembershipEvidence {
  double delta = 0;
  BigNat horizon;
  std::vector<std::pair<BigNat, BigNat>> divergence_witnesses;  // (bound, index with g > bound)
  std::vector<std::pair<BigNat, double>> ratio_witnesses;       // (k, k/g(k) >= delta)
  bool certified() const { return !divergence_witnesses.empty() && !ratio_witnesses.empty(); }
};

inline GMembershipEvidence g_membership_evidence(const WeightFunction& g, const BigNat& horizon,
                                                 double delta,
                                                 std::size_t max_witnesses = 512) {
  if (horizon < BigNat(1u)) throw InvalidArgument("g_membership_evidence: horizon must be >= 1");
  if (!(delta > 0)) throw InvalidArgument("g_membership_evidence: delta must be > 0");

  Schedule grid = g.breakpoints(horizon);
  if (!horizon.is_huge()) grid = merge_schedules(std::move(grid), geometric_schedule(horizon));

  GMembershipEvidence ev;
  ev.delta = delta;
  ev.horizon = horizon;

  std::vector<std::pair<BigNat, BigNat>> values;  // (k, g(k)) in grid order
  values.reserve(grid.size());
  for (const BigNat& k : grid) values.emplace_back(k, g.eval(k));

  BigNat bound(1u);
  for (int j = 0; j < 512; ++j) {
    auto it = std::find_if(values.begin(), values.end(),
                           [&](const auto& kv) { return kv.second > bound; });
    if (it == values.end()) break;
    ev.divergence_witnesses.emplace_back(bound, it->first);
    BigNat next = bound.times2();
    bound = next;
  }

  for (const auto& [k, gk] : values) {
    if (gk.is_zero() || k.is_zero()) continue;
    if (big_ratio_geq(k, gk, delta)) {
      ev.ratio_witnesses.emplace_back(k, big_ratio(k, gk));
      if (ev.ratio_witnesses.size() >= max_witnesses) break;
    }
  }
  return ev;
}

}  // namespace density_lab
