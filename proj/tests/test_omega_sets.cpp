#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <thread>
#include <vector>

#include "density_lab/omega_sets.hpp"

using namespace density_lab;

namespace {

// Independent oracle: explicit bit vector over [0, n).
std::vector<bool> brute_eeu4_supports(std::size_t n) {
  std::vector<bool> bits(n, false);
  for (unsigned m = 1;; ++m) {
    std::uint64_t lo = 1ull << m;
    if (lo >= n) break;
    for (std::uint64_t x = lo; x < lo + m && x < n; ++x) bits[x] = true;
  }
  return bits;
}

std::vector<bool> brute_sqrt_profile(std::size_t n) {
  // Canonical realization: element wherever floor(sqrt(k+1)) jumps.
  std::vector<bool> bits(n, false);
  auto isq = [](std::size_t v) {
    std::size_t a = static_cast<std::size_t>(std::sqrt(static_cast<double>(v)));
    while (a * a > v) --a;
    while ((a + 1) * (a + 1) <= v) ++a;
    return a;
  };
  for (std::size_t k = 0; k < n; ++k) bits[k] = isq(k + 1) == isq(k) + 1;
  return bits;
}

OmegaSet eeu4_supports_set() {
  return interval_union(
      [](std::size_t i) -> std::optional<Segment> {
        unsigned m = static_cast<unsigned>(i) + 1;
        return Segment{BigNat::pow2(m), BigNat::pow2(m) + BigNat(m)};
      },
      "eeu4_supports");
}

}  // namespace

TEST_CASE("counts of catalog representations") {
  CHECK(eeu4_supports_set().count(BigNat(20u)) == BigNat(10u));  // {2}u{4,5}u{8,9,10}u{16..19}
  CHECK(eeu4_supports_set().count(BigNat::pow2(5)) == BigNat(10u));
  CHECK(profile_sqrt_set().count(BigNat(100u)) == BigNat(10u));
  CHECK(profile_sqrt_set().count(BigNat(1000000u)) == BigNat(1000u));
  CHECK(profile_sqrt_set().count(BigNat(0u)) == BigNat(0u));
  CHECK(empty_set().count(BigNat(1000000000u)) == BigNat(0u));
  CHECK(omega_set().count(BigNat(123456u)) == BigNat(123456u));
}

TEST_CASE("membership") {
  // Canonical profile realization places an element at k when p(k+1) = p(k)+1,
  // so 0 is in the sqrt set (p(1) - p(0) = 1).
  OmegaSet sq = profile_sqrt_set();
  CHECK(sq.contains(BigNat(0u)));
  CHECK(sq.contains(BigNat(3u)));
  CHECK(sq.contains(BigNat(8u)));
  CHECK(sq.contains(BigNat(15u)));
  CHECK_FALSE(sq.contains(BigNat(1u)));
  CHECK_FALSE(sq.contains(BigNat(14u)));

  OmegaSet iv = interval_union({Segment{BigNat(5u), BigNat(9u)}}, "iv59");
  CHECK(iv.contains(BigNat(7u)));
  CHECK_FALSE(iv.contains(BigNat(9u)));
  CHECK_FALSE(iv.contains(BigNat(4u)));
}

TEST_CASE("interval unions") {
  OmegaSet c = interval_union(
      [](std::size_t i) -> std::optional<Segment> {
        unsigned m = static_cast<unsigned>(i) + 1;
        return Segment{BigNat::pow2(2 * m), BigNat::pow2(2 * m).times2()};  // [4^m, 2*4^m)
      },
      "lo1_pow4");
  CHECK(c.count(BigNat(32u)) == BigNat(20u));  // |[4,8)| + |[16,32)|

  OmegaSet single = interval_union({Segment{BigNat(0u), BigNat(1000u)}}, "[0,1000)");
  CHECK(single.count(BigNat(1000u)) == BigNat(1000u));

  // Emitted-interval identity: count(b) - count(a) = b - a.
  for (unsigned m = 1; m <= 10; ++m) {
    BigNat a = BigNat::pow2(m), b = BigNat::pow2(m) + BigNat(m);
    CHECK(eeu4_supports_set().count(b) - eeu4_supports_set().count(a) == b - a);
  }
}

TEST_CASE("interval union at huge indices uses clipped closed forms") {
  OmegaSet c = interval_union(
      [](std::size_t i) -> std::optional<Segment> {
        cpp_int e = factorial(static_cast<unsigned>(i) + 10);
        return Segment{BigNat::pow2(e), BigNat::pow2(e).times2()};
      },
      "huge_blocks");
  BigNat k = BigNat::pow2(factorial(12));  // clips inside the third block
  BigNat expected = BigNat::pow2(factorial(10)) + BigNat::pow2(factorial(11));
  CHECK(c.count(k) == expected);
}

TEST_CASE("overlapping generator is rejected") {
  OmegaSet bad = interval_union(
      [](std::size_t i) -> std::optional<Segment> {
        if (i == 0) return Segment{BigNat(0u), BigNat(10u)};
        if (i == 1) return Segment{BigNat(5u), BigNat(8u)};
        return std::nullopt;
      },
      "bad");
  CHECK_THROWS_AS(bad.count(BigNat(100u)), OverlapDetected);
}

TEST_CASE("profile sets") {
  OmegaSet all = profile_set([](const BigNat& k) { return k; }, "linear");
  CHECK(all.count(BigNat(500u)) == BigNat(500u));
  CHECK(all.contains(BigNat(0u)));
  CHECK(all.contains(BigNat(499u)));

  OmegaSet none = profile_set([](const BigNat&) { return BigNat(0u); }, "zero");
  CHECK(none.count(BigNat(100000u)) == BigNat(0u));
  CHECK_FALSE(none.contains(BigNat(17u)));

  CHECK_THROWS_AS(profile_set([](const BigNat& k) { return k + BigNat(1u); }, "shifted"),
                  InvalidProfile);
  CHECK_THROWS_AS(
      profile_set([](const BigNat& k) { return BigNat(k.exact() * k.exact()); }, "square"),
      InvalidProfile);
}

TEST_CASE("rational power profiles") {
  OmegaSet s = profile_rational_pow_set(1, 4);
  CHECK(s.count(BigNat::pow2(20)) == BigNat(32u));  // floor((2^20)^(1/4)) = 32
  CHECK(s.count(BigNat(1u)) == BigNat(1u));
  CHECK(s.count(BigNat(0u)) == BigNat(0u));
  // count(k) = p(k) exactly on queried points.
  for (std::uint64_t k : {2ull, 10ull, 81ull, 82ull, 4096ull, 65536ull}) {
    cpp_int expected = iroot(cpp_int(k), 4);
    CHECK(s.count(BigNat(k)) == BigNat(expected));
  }
}

TEST_CASE("boolean combos against brute force") {
  OmegaSet a = eeu4_supports_set();
  OmegaSet b = profile_sqrt_set();
  auto ba = brute_eeu4_supports(4097);
  auto bb = brute_sqrt_profile(4097);

  OmegaSet u = boolean_combo(SetOp::Union, a, b);
  OmegaSet i = boolean_combo(SetOp::Intersection, a, b);
  OmegaSet d = boolean_combo(SetOp::Difference, a, b);

  for (std::size_t k : {0ull, 1ull, 7ull, 40ull, 100ull, 1000ull, 4096ull}) {
    std::size_t cu = 0, ci = 0, cd = 0;
    for (std::size_t x = 0; x < k; ++x) {
      cu += (ba[x] || bb[x]) ? 1 : 0;
      ci += (ba[x] && bb[x]) ? 1 : 0;
      cd += (ba[x] && !bb[x]) ? 1 : 0;
    }
    CHECK(u.count(BigNat(k)) == BigNat(cu));
    CHECK(i.count(BigNat(k)) == BigNat(ci));
    CHECK(d.count(BigNat(k)) == BigNat(cd));
  }
}

TEST_CASE("boolean combo identities and short-circuits") {
  OmegaSet a = eeu4_supports_set();
  OmegaSet u = boolean_combo(SetOp::Union, a, empty_set());
  for (std::uint64_t k = 0; k <= 10000; k += 137) CHECK(u.count(BigNat(k)) == a.count(BigNat(k)));

  OmegaSet d = boolean_combo(SetOp::Difference,
                             interval_union({Segment{BigNat(0u), BigNat(10u)}}, "[0,10)"),
                             interval_union({Segment{BigNat(5u), BigNat(10u)}}, "[5,10)"));
  CHECK(d.count(BigNat(10u)) == BigNat(5u));

  CHECK(boolean_combo(SetOp::Intersection, a, omega_set()).name() == a.name());
  CHECK(boolean_combo(SetOp::Difference, a, omega_set()).count(BigNat(100u)) == BigNat(0u));
  CHECK(boolean_combo(SetOp::Union, a, omega_set()).count(BigNat(77u)) == BigNat(77u));
}

TEST_CASE("count is monotone with unit steps across representations") {
  std::vector<OmegaSet> sets = {
      eeu4_supports_set(), profile_sqrt_set(),
      finite_set({BigNat(3u), BigNat(5u), BigNat(100u), BigNat(5000u)}, "f4"),
      boolean_combo(SetOp::Union, eeu4_supports_set(), profile_sqrt_set())};
  for (const OmegaSet& s : sets) {
    BigNat prev = s.count(BigNat(0u));
    for (std::uint64_t k = 1; k <= 10000; ++k) {
      BigNat cur = s.count(BigNat(k));
      REQUIRE(cur >= prev);
      REQUIRE(cur <= prev + BigNat(1u));
      prev = cur;
    }
  }
}

TEST_CASE("membership and count agree with a brute-force oracle") {
  OmegaSet s = boolean_combo(SetOp::Difference, eeu4_supports_set(), profile_sqrt_set());
  std::size_t n = 2000;
  std::size_t seen = 0;
  for (std::size_t x = 0; x < n; ++x) seen += s.contains(BigNat(x)) ? 1 : 0;
  CHECK(BigNat(seen) == s.count(BigNat(n)));
}

TEST_CASE("enumeration") {
  auto e = profile_sqrt_set().enumerate(5);
  REQUIRE(e.elements.size() == 5);
  CHECK(e.elements[0] == BigNat(0u));
  CHECK(e.elements[1] == BigNat(3u));
  CHECK(e.elements[2] == BigNat(8u));
  CHECK(e.elements[3] == BigNat(15u));
  CHECK(e.elements[4] == BigNat(24u));
  CHECK_FALSE(e.complete);

  auto f = finite_set({BigNat(4u), BigNat(2u), BigNat(9u)}, "f3").enumerate(10);
  CHECK(f.complete);
  REQUIRE(f.elements.size() == 3);
  CHECK(f.elements[0] == BigNat(2u));

  auto g = eeu4_supports_set().enumerate(6);
  REQUIRE(g.elements.size() == 6);
  CHECK(g.elements[0] == BigNat(2u));
  CHECK(g.elements[5] == BigNat(10u));
}

TEST_CASE("enumeration budget guard") {
  std::uint64_t old = enumeration_budget();
  set_enumeration_budget(100);
  OmegaSet s = boolean_combo(SetOp::Union, profile_sqrt_set(), eeu4_supports_set());
  CHECK_THROWS_AS(s.count(BigNat(100000000u)), RepresentationTooWeak);
  set_enumeration_budget(old);
  CHECK_NOTHROW(s.count(BigNat(100000u)));
}

TEST_CASE("concurrent counts on a shared lazy stream are deterministic") {
  OmegaSet s = eeu4_supports_set();
  BigNat expected = s.count(BigNat(1000000u));
  std::vector<std::thread> threads;
  std::vector<int> ok(8, 0);
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      OmegaSet local = s;
      bool good = true;
      for (int i = 0; i < 50; ++i)
        good = good && local.count(BigNat(1000000u)) == expected &&
               local.count(BigNat(20u)) == BigNat(10u);
      ok[t] = good ? 1 : 0;
    });
  }
  for (auto& th : threads) th.join();
  for (int t = 0; t < 8; ++t) CHECK(ok[t] == 1);
}
