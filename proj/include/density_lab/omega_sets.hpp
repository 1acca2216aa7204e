#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "density_lab/bignum.hpp"
#include "density_lab/errors.hpp"

namespace density_lab {

// Half-open interval [lo, hi).
struct Segment {
  BigNat lo, hi;
  BigNat length() const { return hi - lo; }
};

// Guard for sweeps and element enumerations; closed-form count paths are
// exempt. Overridable via DENSITY_LAB_BUDGET.
inline std::atomic<std::uint64_t>& enumeration_budget_ref() {
  static std::atomic<std::uint64_t> budget{[] {
    if (const char* env = std::getenv("DENSITY_LAB_BUDGET")) {
      char* end = nullptr;
      unsigned long long v = std::strtoull(env, &end, 10);
      if (end && *end == '\0' && v > 0) return v;
    }
    return 10000000ull;
  }()};
  return budget;
}
inline std::uint64_t enumeration_budget() { return enumeration_budget_ref().load(); }
inline void set_enumeration_budget(std::uint64_t v) { enumeration_budget_ref().store(v); }

namespace detail {

struct SetRep {
  virtual ~SetRep() = default;
  virtual BigNat count(const BigNat& k) const = 0;
  // Disjoint increasing segments covering C ∩ [0, k); may cost an enumeration.
  virtual std::vector<Segment> segments(const BigNat& k) const = 0;
  // Appends elements in increasing order until max_total is reached; returns
  // true when the set is certainly exhausted.
  virtual bool enumerate_into(std::vector<BigNat>& out, std::size_t max_total) const = 0;
  virtual bool provably_finite() const { return false; }
  std::string name;
};

inline std::vector<Segment> merge_adjacent(std::vector<Segment> segs) {
  std::vector<Segment> out;
  for (auto& s : segs) {
    if (!(s.lo < s.hi)) continue;
    if (!out.empty() && out.back().hi == s.lo)
      out.back().hi = s.hi;
    else
      out.push_back(s);
  }
  return out;
}

struct FiniteRep final : SetRep {
  std::vector<BigNat> elems;  // sorted, unique
  explicit FiniteRep(std::vector<BigNat> e) : elems(std::move(e)) {
    std::sort(elems.begin(), elems.end());
    elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  }
  BigNat count(const BigNat& k) const override {
    auto it = std::lower_bound(elems.begin(), elems.end(), k);
    return BigNat(static_cast<std::uint64_t>(it - elems.begin()));
  }
  std::vector<Segment> segments(const BigNat& k) const override {
    std::vector<Segment> out;
    for (const BigNat& e : elems) {
      if (!(e < k)) break;
      out.push_back({e, e + BigNat(1u)});
    }
    return merge_adjacent(std::move(out));
  }
  bool enumerate_into(std::vector<BigNat>& out, std::size_t max_total) const override {
    for (const BigNat& e : elems) {
      if (out.size() >= max_total) return false;
      out.push_back(e);
    }
    return true;
  }
  bool provably_finite() const override { return true; }
};

using IntervalGenerator = std::function<std::optional<Segment>(std::size_t)>;

struct IntervalRep final : SetRep {
  IntervalGenerator gen;
  mutable std::mutex mu;
  mutable std::vector<Segment> cache;
  mutable bool exhausted = false;

  explicit IntervalRep(IntervalGenerator g) : gen(std::move(g)) {}

  // Pulls one more interval from the generator; caller holds mu.
  bool extend_one_locked() const {
    if (exhausted) return false;
    if (cache.size() >= enumeration_budget())
      throw RepresentationTooWeak("interval stream for '" + name +
                                  "' exceeded the enumeration budget");
    auto next = gen(cache.size());
    if (!next) {
      exhausted = true;
      return false;
    }
    if (!(next->lo < next->hi))
      throw InvalidArgument("interval stream '" + name + "' emitted an empty interval");
    if (!cache.empty() && next->lo < cache.back().hi)
      throw OverlapDetected("interval stream '" + name + "' emitted interval starting at " +
                            next->lo.str() + " before previous end " + cache.back().hi.str());
    cache.push_back(*next);
    return true;
  }

  // Generates intervals until the next one starts at or past k. Caller holds mu.
  void ensure_locked(const BigNat& k) const {
    while (!exhausted && (cache.empty() || cache.back().lo < k)) {
      if (!extend_one_locked()) break;
    }
  }

  BigNat count(const BigNat& k) const override {
    std::lock_guard<std::mutex> lock(mu);
    ensure_locked(k);
    BigNat total(0u);
    for (const Segment& s : cache) {
      if (!(s.lo < k)) break;
      total += (s.hi < k ? s.hi : k) - s.lo;
    }
    return total;
  }

  std::vector<Segment> segments(const BigNat& k) const override {
    std::lock_guard<std::mutex> lock(mu);
    ensure_locked(k);
    std::vector<Segment> out;
    for (const Segment& s : cache) {
      if (!(s.lo < k)) break;
      out.push_back({s.lo, s.hi < k ? s.hi : k});
    }
    return out;
  }

  bool enumerate_into(std::vector<BigNat>& out, std::size_t max_total) const override {
    std::lock_guard<std::mutex> lock(mu);
    std::size_t i = 0;
    while (true) {
      if (i == cache.size() && !extend_one_locked()) return true;
      for (BigNat n = cache[i].lo; n < cache[i].hi; n += BigNat(1u)) {
        if (out.size() >= max_total) return false;
        out.push_back(n);
      }
      ++i;
    }
  }

  bool provably_finite() const override {
    std::lock_guard<std::mutex> lock(mu);
    // Probe a bounded number of intervals; infinite streams stay "unknown".
    while (!exhausted && cache.size() < 1000) {
      if (!extend_one_locked()) break;
    }
    return exhausted;
  }
};

struct ProfileRep final : SetRep {
  enum class Kind { Generic, Linear };
  Kind kind = Kind::Generic;
  std::function<BigNat(const BigNat&)> p;
  // Closed form for the j-th element (0-based), when the profile admits one.
  std::function<BigNat(const cpp_int&)> element_at;

  BigNat count(const BigNat& k) const override {
    return kind == Kind::Linear ? k : p(k);
  }

  // Smallest n with p(n+1) >= j+1, by doubling plus binary search.
  BigNat nth_element(const cpp_int& j) const {
    if (element_at) return element_at(j);
    BigNat target(j + 1);
    BigNat hi(1u);
    int rounds = 0;
    while (p(hi) < target) {
      hi = hi.times2();
      if (++rounds > 1 << 20)
        throw RepresentationTooWeak("profile set '" + name + "': element " + target.str() +
                                    " not found below 2^(2^20)");
    }
    // invariant: p(lo) < target <= p(hi)
    BigNat lo(0u);
    while (hi - lo > BigNat(1u)) {
      BigNat mid = lo + (hi - lo).div_floor(2);
      if (p(mid) < target)
        lo = mid;
      else
        hi = mid;
    }
    return hi - BigNat(1u);  // p(n+1) hits target first at n+1 = hi
  }

  std::vector<Segment> segments(const BigNat& k) const override {
    if (kind == Kind::Linear) return k.is_zero() ? std::vector<Segment>{} : std::vector<Segment>{{BigNat(0u), k}};
    BigNat cnt = p(k);
    if (BigNat(enumeration_budget()) < cnt)
      throw RepresentationTooWeak("profile set '" + name + "': " + cnt.str() +
                                  " elements below " + k.str() + " exceed the budget");
    std::vector<Segment> out;
    for (cpp_int j = 0; BigNat(j) < cnt; ++j) {
      BigNat e = nth_element(j);
      out.push_back({e, e + BigNat(1u)});
    }
    return merge_adjacent(std::move(out));
  }

  bool enumerate_into(std::vector<BigNat>& out, std::size_t max_total) const override {
    if (kind == Kind::Linear) {
      for (BigNat n(0u); out.size() < max_total; n += BigNat(1u)) out.push_back(n);
      return false;
    }
    for (cpp_int j = 0; out.size() < max_total; ++j) out.push_back(nth_element(j));
    return false;  // a profile alone cannot certify exhaustion
  }
};

enum class SetOp { Union, Intersection, Difference };

struct BooleanRep final : SetRep {
  SetOp op;
  std::shared_ptr<const SetRep> a, b;
  BooleanRep(SetOp o, std::shared_ptr<const SetRep> x, std::shared_ptr<const SetRep> y)
      : op(o), a(std::move(x)), b(std::move(y)) {}

  static bool covered(const std::vector<Segment>& segs, const BigNat& x) {
    // segs sorted; is x inside some [lo, hi)?
    auto it = std::upper_bound(segs.begin(), segs.end(), x,
                               [](const BigNat& v, const Segment& s) { return v < s.lo; });
    if (it == segs.begin()) return false;
    --it;
    return x < it->hi;
  }

  std::vector<Segment> segments(const BigNat& k) const override {
    std::vector<Segment> sa = a->segments(k);
    std::vector<Segment> sb = b->segments(k);
    std::vector<BigNat> cuts;
    cuts.reserve(2 * (sa.size() + sb.size()));
    for (const auto& s : sa) {
      cuts.push_back(s.lo);
      cuts.push_back(s.hi);
    }
    for (const auto& s : sb) {
      cuts.push_back(s.lo);
      cuts.push_back(s.hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    if (cuts.size() > enumeration_budget())
      throw RepresentationTooWeak("boolean combo '" + name + "' sweep exceeded the budget");
    std::vector<Segment> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      bool in_a = covered(sa, cuts[i]);
      bool in_b = covered(sb, cuts[i]);
      bool keep = op == SetOp::Union ? (in_a || in_b)
                  : op == SetOp::Intersection ? (in_a && in_b)
                                              : (in_a && !in_b);
      if (keep) out.push_back({cuts[i], cuts[i + 1]});
    }
    return merge_adjacent(std::move(out));
  }

  BigNat count(const BigNat& k) const override {
    BigNat total(0u);
    for (const Segment& s : segments(k)) total += s.length();
    return total;
  }

  bool enumerate_into(std::vector<BigNat>& out, std::size_t max_total) const override {
    if (provably_finite()) {
      // A finite operand bounds the result, so one exact sweep suffices.
      std::vector<BigNat> bound;
      if (op == SetOp::Union) {
        a->enumerate_into(bound, enumeration_budget());
        b->enumerate_into(bound, enumeration_budget());
      } else if (op == SetOp::Intersection) {
        (a->provably_finite() ? a : b)->enumerate_into(bound, enumeration_budget());
      } else {
        a->enumerate_into(bound, enumeration_budget());
      }
      BigNat cap(1u);
      for (const auto& e : bound) {
        BigNat next = e + BigNat(1u);
        if (cap < next) cap = next;
      }
      for (const Segment& s : segments(cap))
        for (BigNat n = s.lo; n < s.hi; n += BigNat(1u)) {
          if (out.size() >= max_total) return false;
          out.push_back(n);
        }
      return true;
    }
    BigNat cap(65536u);
    std::size_t start = out.size();
    for (int round = 0; round < 320; ++round) {
      out.resize(start);
      for (const Segment& s : segments(cap)) {
        for (BigNat n = s.lo; n < s.hi; n += BigNat(1u)) {
          if (out.size() >= max_total) return false;
          out.push_back(n);
        }
      }
      cap = cap.mul_pow2(16);
    }
    throw RepresentationTooWeak("boolean combo '" + name + "' cannot enumerate " +
                                std::to_string(max_total) + " elements");
  }

  bool provably_finite() const override {
    switch (op) {
      case SetOp::Union: return a->provably_finite() && b->provably_finite();
      case SetOp::Intersection: return a->provably_finite() || b->provably_finite();
      case SetOp::Difference: return a->provably_finite();
    }
    return false;
  }
};

}  // namespace detail

using detail::IntervalGenerator;
using detail::SetOp;

// A subset of omega exposing the exact prefix-count oracle |C ∩ [0, k-1]|.
// Immutable; count queries are safe from any number of threads.
class OmegaSet {
 public:
  BigNat count(const BigNat& k) const { return rep_->count(k); }

  bool contains(const BigNat& n) const {
    return rep_->count(n + BigNat(1u)) == rep_->count(n) + BigNat(1u);
  }

  std::vector<Segment> segments(const BigNat& k) const { return rep_->segments(k); }

  struct Enumeration {
    std::vector<BigNat> elements;
    bool complete;  // true when the set certainly has no further elements
  };

  Enumeration enumerate(std::size_t max_elements) const {
    Enumeration e;
    e.complete = rep_->enumerate_into(e.elements, max_elements);
    return e;
  }

  bool provably_finite() const { return rep_->provably_finite(); }
  const std::string& name() const { return rep_->name; }
  std::shared_ptr<const detail::SetRep> rep() const { return rep_; }

  static OmegaSet from_rep(std::shared_ptr<detail::SetRep> rep, std::string name) {
    rep->name = std::move(name);
    return OmegaSet(std::move(rep));
  }

 private:
  explicit OmegaSet(std::shared_ptr<const detail::SetRep> rep) : rep_(std::move(rep)) {}
  std::shared_ptr<const detail::SetRep> rep_;
};

inline BigNat count(const OmegaSet& C, const BigNat& k) { return C.count(k); }
inline bool membership(const OmegaSet& C, const BigNat& n) { return C.contains(n); }

inline OmegaSet finite_set(std::vector<BigNat> elements, std::string name = "finite") {
  return OmegaSet::from_rep(std::make_shared<detail::FiniteRep>(std::move(elements)),
                            std::move(name));
}

inline OmegaSet empty_set() { return finite_set({}, "empty"); }

inline OmegaSet interval_union(IntervalGenerator gen, std::string name) {
  return OmegaSet::from_rep(std::make_shared<detail::IntervalRep>(std::move(gen)),
                            std::move(name));
}

inline OmegaSet interval_union(std::vector<Segment> fixed, std::string name) {
  auto gen = [segs = std::move(fixed)](std::size_t i) -> std::optional<Segment> {
    if (i >= segs.size()) return std::nullopt;
    return segs[i];
  };
  return interval_union(IntervalGenerator(gen), std::move(name));
}

// Canonical realization of a profile: an element sits at every k with
// p(k+1) = p(k) + 1, so count(k) = p(k) exactly.
inline OmegaSet profile_set(std::function<BigNat(const BigNat&)> p, std::string name,
                            std::function<BigNat(const cpp_int&)> element_at = nullptr) {
  if (!p(BigNat(0u)).is_zero())
    throw InvalidProfile("profile '" + name + "': p(0) must be 0");
  BigNat prev_k(0u), prev_v(0u);
  for (cpp_int step = 1, k = 1; k <= (cpp_int(1) << 20); k += step) {
    if (k > 4096) step = k / 3;
    BigNat kk((cpp_int(k)));
    BigNat v = p(kk);
    if (v < prev_v)
      throw InvalidProfile("profile '" + name + "': decreases before " + kk.str());
    BigNat d = p(kk + BigNat(1u)) - v;
    if (!(d == BigNat(0u) || d == BigNat(1u)))
      throw InvalidProfile("profile '" + name + "': increment at " + kk.str() + " is " + d.str());
    if (v - prev_v > kk - prev_k)
      throw InvalidProfile("profile '" + name + "': grows faster than 1 per step near " + kk.str());
    prev_k = kk;
    prev_v = v;
  }
  auto rep = std::make_shared<detail::ProfileRep>();
  rep->p = std::move(p);
  rep->element_at = std::move(element_at);
  return OmegaSet::from_rep(std::move(rep), std::move(name));
}

inline OmegaSet omega_set() {
  auto rep = std::make_shared<detail::ProfileRep>();
  rep->kind = detail::ProfileRep::Kind::Linear;
  rep->p = [](const BigNat& k) { return k; };
  rep->element_at = [](const cpp_int& j) { return BigNat(j); };
  return OmegaSet::from_rep(std::move(rep), "omega");
}

// floor(sqrt k); elements are s^2 - 1 for s >= 1.
inline OmegaSet profile_sqrt_set(std::string name = "sqrt") {
  return profile_set(
      [](const BigNat& k) { return BigNat(boost::multiprecision::sqrt(k.exact())); },
      std::move(name),
      [](const cpp_int& j) { return BigNat(cpp_int((j + 1) * (j + 1) - 1)); });
}

// floor(k^(p/q)) for p < q; elements are ceil((j+1)^(q/p)) - 1.
inline OmegaSet profile_rational_pow_set(unsigned p, unsigned q, std::string name = "") {
  if (p == 0 || q == 0 || p >= q)
    throw InvalidArgument("profile_rational_pow_set: need 0 < p < q");
  if (name.empty()) name = "pow(" + std::to_string(p) + "/" + std::to_string(q) + ")";
  return profile_set(
      [p, q](const BigNat& k) { return floor_rational_pow(k, p, q); }, std::move(name),
      [p, q](const cpp_int& j) {
        cpp_int target = boost::multiprecision::pow(cpp_int(j + 1), q);
        cpp_int x = iroot(target, p);
        if (boost::multiprecision::pow(x, p) < target) ++x;
        return BigNat(x) - BigNat(1u);
      });
}

inline OmegaSet boolean_combo(SetOp op, const OmegaSet& a, const OmegaSet& b) {
  // Fin and omega short-circuits; these show up constantly in checks.
  auto is_empty = [](const OmegaSet& s) {
    auto f = std::dynamic_pointer_cast<const detail::FiniteRep>(s.rep());
    return f && f->elems.empty();
  };
  auto is_omega = [](const OmegaSet& s) {
    auto p = std::dynamic_pointer_cast<const detail::ProfileRep>(s.rep());
    return p && p->kind == detail::ProfileRep::Kind::Linear;
  };
  switch (op) {
    case SetOp::Union:
      if (is_empty(a)) return b;
      if (is_empty(b)) return a;
      if (is_omega(a) || is_omega(b)) return omega_set();
      break;
    case SetOp::Intersection:
      if (is_empty(a) || is_empty(b)) return empty_set();
      if (is_omega(a)) return b;
      if (is_omega(b)) return a;
      break;
    case SetOp::Difference:
      if (is_empty(a) || is_omega(b)) return empty_set();
      if (is_empty(b)) return a;
      break;
  }
  const char* opname = op == SetOp::Union ? "union" : op == SetOp::Intersection ? "intersection" : "difference";
  std::string name = std::string(opname) + "(" + a.name() + "," + b.name() + ")";
  return OmegaSet::from_rep(std::make_shared<detail::BooleanRep>(op, a.rep(), b.rep()),
                            std::move(name));
}

}  // namespace density_lab
