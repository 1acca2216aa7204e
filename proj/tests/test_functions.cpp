#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "density_lab/functions.hpp"

using namespace density_lab;

TEST_CASE("modulus catalog values") {
  CHECK(catalog_modulus("identity").eval_real(7.0) == 7.0);
  CHECK(catalog_modulus("power(0.5)").eval_real(4.0) == 2.0);
  CHECK(catalog_modulus("bounded_ratio").is_unbounded() == false);
  CHECK_THROWS_AS(catalog_modulus("sinh"), NotInCatalog);
  CHECK_THROWS_AS(catalog_modulus("power(1.5)"), NotInCatalog);
}

TEST_CASE("log1p eval_big matches a high-precision series oracle") {
  // ln(1 + 2^120) = 120 ln 2 + ln(1 + 2^-120); the second term is below 1e-36.
  const long double ln2l = 0.69314718055994530941723212145818L;
  long double expected = 120.0L * ln2l;
  double got = catalog_modulus("log1p").eval_big(BigNat::pow2(120));
  CHECK(std::abs(got - static_cast<double>(expected)) <=
        1e-12 * static_cast<double>(expected));

  // Mantissa correction path: ln(1 + 10^30).
  BigNat n(cpp_int("1000000000000000000000000000000"));
  long double expected2 = 30.0L * 2.30258509299404568401799145468L;  // 30 ln 10
  double got2 = catalog_modulus("log1p").eval_big(n);
  CHECK(std::abs(got2 - static_cast<double>(expected2)) <= 1e-12 * got2);
}

TEST_CASE("eval_big and eval_real agree on the overlap range") {
  for (const char* name : {"identity", "log1p", "power(0.5)", "bounded_ratio"}) {
    ModulusFunction f = catalog_modulus(name);
    for (std::uint64_t n : {1ull, 2ull, 7ull, 100ull, 12345ull, 1000000ull, 1ull << 40}) {
      double a = f.eval_big(BigNat(n));
      double b = f.eval_real(static_cast<double>(n));
      CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)));
    }
  }
}

TEST_CASE("weight catalog values") {
  CHECK(catalog_weight("eeu3").eval(BigNat(20u)) == BigNat(4u));   // 16 < 20 <= 64, m = 2
  CHECK(catalog_weight("eeu3").eval(BigNat(4u)) == BigNat(1u));
  CHECK(catalog_weight("eeu3").eval(BigNat(5u)) == BigNat(2u));    // repaired m = 1 clause
  CHECK(catalog_weight("eeu3").eval(BigNat(16u)) == BigNat(2u));
  CHECK(catalog_weight("eeu3").eval(BigNat(17u)) == BigNat(4u));
  CHECK(catalog_weight("identity").eval(BigNat(0u)) == BigNat(0u));
  CHECK(catalog_weight("es1").eval(BigNat::pow2(6)) == BigNat::pow2(24));  // k = 2^(3!)
  CHECK(catalog_weight("es1").eval(BigNat(1u)) == BigNat(1u));
  CHECK(catalog_weight("es1").eval(BigNat(3u)) == BigNat(4u));
  CHECK(catalog_weight("eeu").eval(BigNat(0u)) == BigNat(0u));
  CHECK(catalog_weight("eeu").eval(BigNat(1u)) == BigNat(2u));
  CHECK(catalog_weight("eeu").eval(BigNat(5u)) == BigNat(6u));
  CHECK(catalog_weight("eeu").eval(BigNat(6u)) == BigNat(24u));
  CHECK(catalog_weight("eeu").eval(BigNat(23u)) == BigNat(24u));
  CHECK_THROWS_AS(catalog_weight("zeta"), NotInCatalog);
}

TEST_CASE("es1 at huge arguments") {
  WeightFunction g = catalog_weight("es1");
  cpp_int e20 = factorial(20);
  CHECK(g.eval(BigNat::pow2_offset(e20, -1)) == BigNat::pow2(e20));
  CHECK(g.eval(BigNat::pow2(e20)) == BigNat::pow2(factorial(21)));
}

TEST_CASE("scaled and floor_composed weights") {
  WeightFunction g = catalog_weight("scaled(1.5,identity)");
  CHECK(g.eval(BigNat(10u)) == BigNat(15u));
  CHECK(g.eval(BigNat(7u)) == BigNat(10u));  // floor(10.5)
  CHECK_FALSE(g.is_integer_valued());
  WeightFunction h = catalog_weight("floor_composed(1.5,identity)");
  CHECK(h.eval(BigNat(7u)) == BigNat(10u));
  CHECK(h.is_integer_valued());
  CHECK(catalog_weight("scaled(2,eeu)").eval(BigNat(5u)) == BigNat(12u));
}

TEST_CASE("pointwise max") {
  WeightFunction id = catalog_weight("identity");
  WeightFunction m1 = pointwise_max(id, id);
  CHECK(m1.eval(BigNat(5u)) == BigNat(5u));

  WeightFunction m2 = pointwise_max(catalog_weight("eeu3"), id);
  CHECK(m2.eval(BigNat(20u)) == BigNat(20u));  // max(4, 20)
  CHECK(m2.is_nondecreasing());

  WeightFunction g = catalog_weight("eeu");
  WeightFunction mx = pointwise_max(g, id);
  std::mt19937_64 rng(0);
  for (int i = 0; i < 1000; ++i) {
    BigNat k(rng() % 1000000);
    BigNat v = mx.eval(k);
    CHECK(v >= g.eval(k));
    CHECK(v >= k);
  }
}

TEST_CASE("max commutes with every catalog modulus on samples") {
  // f(max{g,h}(k)) = max{f(g(k)), f(h(k))} since f is increasing.
  WeightFunction g = catalog_weight("eeu3");
  WeightFunction h = catalog_weight("identity");
  WeightFunction mx = pointwise_max(g, h);
  for (const char* name : {"identity", "log1p", "power(0.5)"}) {
    ModulusFunction f = catalog_modulus(name);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
      BigNat k(1 + rng() % 100000);
      double lhs = f.eval_big(mx.eval(k));
      double rhs = std::max(f.eval_big(g.eval(k)), f.eval_big(h.eval(k)));
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("catalog moduli satisfy sampled axioms") {
  for (const char* name : {"identity", "log1p", "power(0.5)", "power(0.25)", "bounded_ratio"}) {
    ValidationReport r = validate_modulus(catalog_modulus(name), default_modulus_samples());
    INFO(name);
    CHECK(r.all_pass());
  }
}

TEST_CASE("x^2 fails subadditivity with witness (1,1)") {
  ModulusFunction sq =
      ModulusFunction::custom("square", [](double x) { return x * x; }, true);
  ValidationReport r = validate_modulus(sq, {1.0});
  bool found = false;
  for (const auto& c : r.checks) {
    if (c.axiom == "subadditive") {
      found = true;
      CHECK_FALSE(c.pass);
      CHECK(c.detail.find("witness (1,1)") != std::string::npos);
    } else {
      CHECK(c.pass);
    }
  }
  CHECK(found);
  CHECK_FALSE(validate_modulus(sq, default_modulus_samples()).all_pass());
  CHECK_THROWS_AS(validate_modulus(sq, {}), InvalidArgument);
}

TEST_CASE("iterated subadditivity: f(M n) <= M f(n) on samples") {
  for (const char* name : {"identity", "log1p", "power(0.5)"}) {
    ModulusFunction f = catalog_modulus(name);
    for (std::uint64_t n : {1ull, 3ull, 10ull, 999ull, 65536ull}) {
      for (unsigned M = 2; M <= 16; ++M) {
        CHECK(f.eval_big(BigNat(n * M)) <= M * f.eval_big(BigNat(n)) + 1e-9 * M);
      }
    }
  }
}

TEST_CASE("monotone and subadditive on integer grid") {
  for (const char* name : {"identity", "log1p", "power(0.5)", "bounded_ratio"}) {
    ModulusFunction f = catalog_modulus(name);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
      std::uint64_t x = rng() % 1000000, y = rng() % 1000000;
      if (x > y) std::swap(x, y);
      CHECK(f.eval_big(BigNat(x)) <= f.eval_big(BigNat(y)) + 1e-12);
      CHECK(f.eval_big(BigNat(x + y)) <=
            f.eval_big(BigNat(x)) + f.eval_big(BigNat(y)) + 1e-9);
    }
  }
}

TEST_CASE("g membership evidence: es1") {
  GMembershipEvidence ev = g_membership_evidence(catalog_weight("es1"), BigNat::pow2(30), 0.5);
  CHECK(ev.certified());
  // Witnesses at k_m = 2^(m!) - 1 with k_m/g(k_m) = 1 - 2^(-m!); m >= 2 keeps
  // k_m inside a block (g(1) = 1 is the special prefix value).
  for (unsigned m = 2; m <= 4; ++m) {
    unsigned fm = factorial(m).convert_to<unsigned>();
    BigNat km = BigNat::pow2(fm) - BigNat(1u);
    bool seen = false;
    for (const auto& [k, ratio] : ev.ratio_witnesses) {
      if (k == km) {
        seen = true;
        double expected = 1.0 - std::ldexp(1.0, -static_cast<int>(fm));
        CHECK(ratio == Catch::Approx(expected).epsilon(1e-12));
      }
    }
    INFO("m = " << m);
    CHECK(seen);
  }
}

TEST_CASE("g membership evidence: identity has ratio 1 everywhere") {
  GMembershipEvidence ev = g_membership_evidence(catalog_weight("identity"), BigNat(100u), 0.5);
  CHECK(ev.certified());
  CHECK_FALSE(ev.ratio_witnesses.empty());
  for (const auto& [k, ratio] : ev.ratio_witnesses) CHECK(ratio == 1.0);
}

TEST_CASE("g membership evidence: eeu3 block starts") {
  GMembershipEvidence ev =
      g_membership_evidence(catalog_weight("eeu3"), BigNat(1000000u), 0.9);
  CHECK(ev.certified());
  for (unsigned m = 2; m <= 9; ++m) {
    BigNat k = BigNat::pow2(2 * m) + BigNat(1u);  // 4^m + 1, first index with g = 2^m
    bool seen = false;
    for (const auto& [w, ratio] : ev.ratio_witnesses) {
      if (w == k) {
        seen = true;
        double expected = (std::ldexp(1.0, 2 * static_cast<int>(m)) + 1.0) /
                          std::ldexp(1.0, static_cast<int>(m));
        CHECK(ratio == Catch::Approx(expected).epsilon(1e-12));
      }
    }
    INFO("m = " << m);
    CHECK(seen);
  }
}

TEST_CASE("modulus_geq_pow2 thresholds") {
  ModulusFunction id = catalog_modulus("identity");
  CHECK(modulus_geq_pow2(id, BigNat(8u), 3));
  CHECK_FALSE(modulus_geq_pow2(id, BigNat(7u), 3));
  ModulusFunction lg = catalog_modulus("log1p");
  CHECK(modulus_geq_pow2(lg, BigNat(7u), 1));        // ln 8 > 2
  CHECK_FALSE(modulus_geq_pow2(lg, BigNat(6u), 1));  // ln 7 < 2
  ModulusFunction pw = catalog_modulus("power(0.5)");
  CHECK(modulus_geq_pow2(pw, BigNat::pow2(6), 3));  // (2^6)^0.5 = 2^3
  CHECK_FALSE(modulus_geq_pow2(pw, BigNat::pow2(6) - BigNat(1u), 3));
}

TEST_CASE("modulus_ratio cancels at ES1 scales") {
  ModulusFunction f = catalog_modulus("log1p");
  WeightFunction g = catalog_weight("es1");
  // f(g(k_m + 1))/f(g(k_m)) = (m+1) up to a ln(1+2^-(m!)) correction for
  // k_m = 2^(m!) - 1; at m = 4 that correction is ~3.6e-9 and real.
  for (unsigned m : {4u, 10u, 20u}) {
    BigNat km = BigNat::pow2_offset(factorial(m), -1);
    double r = modulus_ratio(f, g.eval(km + BigNat(1u)), g.eval(km));
    double tol = m == 4 ? 1e-8 : 1e-12;
    CHECK(r == Catch::Approx(static_cast<double>(m + 1)).epsilon(tol));
  }
}
