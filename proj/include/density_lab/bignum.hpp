#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>
#include <type_traits>
#include <utility>

#include "density_lab/errors.hpp"

namespace density_lab {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

inline cpp_int factorial(unsigned n) {
  cpp_int r = 1;
  for (unsigned i = 2; i <= n; ++i) r *= i;
  return r;
}

namespace detail {

struct FactorialTable {
  std::mutex mu;
  std::vector<cpp_int> table{cpp_int(1), cpp_int(1)};  // 0!, 1!
  static FactorialTable& instance() {
    static FactorialTable t;
    return t;
  }
};

}  // namespace detail

// n!, memoized; thread-safe.
inline cpp_int factorial_cached(unsigned n) {
  auto& t = detail::FactorialTable::instance();
  std::lock_guard<std::mutex> lock(t.mu);
  while (t.table.size() <= n) t.table.push_back(t.table.back() * static_cast<unsigned>(t.table.size()));
  return t.table[n];
}

// Largest m with m! <= v, for v >= 1 (ties resolve upward: v = 1 gives 1).
inline unsigned factorial_floor_index(const cpp_int& v) {
  if (v < 1) throw InvalidArgument("factorial_floor_index: v must be >= 1");
  auto& t = detail::FactorialTable::instance();
  std::lock_guard<std::mutex> lock(t.mu);
  while (t.table.back() <= v) t.table.push_back(t.table.back() * static_cast<unsigned>(t.table.size()));
  std::size_t lo = 0, hi = t.table.size() - 1;  // table[hi] > v
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (t.table[mid] <= v)
      lo = mid;
    else
      hi = mid;
  }
  return static_cast<unsigned>(lo);
}

inline unsigned bit_length(const cpp_int& x) {
  if (x == 0) return 0;
  return static_cast<unsigned>(boost::multiprecision::msb(x)) + 1u;
}

// floor(x^(1/q)) for x >= 0, q >= 1.
inline cpp_int iroot(const cpp_int& x, unsigned q) {
  if (q == 0) throw InvalidArgument("iroot: q must be >= 1");
  if (q == 1 || x <= 1) return x;
  if (q == 2) return boost::multiprecision::sqrt(x);
  cpp_int lo = 0, hi = cpp_int(1) << (bit_length(x) / q + 1);
  while (hi - lo > 1) {
    cpp_int mid = (lo + hi) / 2;
    if (boost::multiprecision::pow(mid, q) <= x)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

// log2 of a positive quantity, split into an exact integer component plus a
// double remainder. Keeping the integer part exact is what lets ratios of
// astronomically large values cancel without losing precision.
struct Log2Parts {
  cpp_int ip;
  double frac = 0.0;  // value = ip + frac, |frac| < 2

  void normalize() {
    double fl = std::floor(frac);
    if (fl != 0.0) {
      ip += cpp_int(static_cast<long long>(fl));
      frac -= fl;
    }
  }

  double to_double() const {
    if (bit_length(boost::multiprecision::abs(ip)) > 1020)
      return ip < 0 ? -std::numeric_limits<double>::infinity()
                    : std::numeric_limits<double>::infinity();
    return ip.convert_to<double>() + frac;
  }

  // Exact-dyadic scaling: c is decomposed as m * 2^(e-53) so c*ip keeps its
  // integer component exact.
  Log2Parts scaled(double c) const {
    if (c == 0.0) return {0, 0.0};
    if (!(c > 0.0)) throw InvalidArgument("Log2Parts::scaled: c must be > 0");
    int e = 0;
    double sig = std::frexp(c, &e);                   // c = sig * 2^e, sig in [0.5,1)
    auto m = static_cast<long long>(std::ldexp(sig, 53));  // exact 53-bit significand
    int shift = 53 - e;
    cpp_int q = ip * m;
    Log2Parts out;
    if (shift >= 0) {
      cpp_int ipart = q >> shift;
      cpp_int rem = q - (ipart << shift);
      out.ip = ipart;
      out.frac = rem.convert_to<double>() * std::ldexp(1.0, -shift) + c * frac;
    } else {
      out.ip = q << (-shift);
      out.frac = c * frac;
    }
    out.normalize();
    return out;
  }
};

// (a - b) as a double, saturating when the exact integer difference is huge.
inline double log2_diff(const Log2Parts& a, const Log2Parts& b) {
  cpp_int d = a.ip - b.ip;
  if (bit_length(boost::multiprecision::abs(d)) > 1020)
    return d < 0 ? -std::numeric_limits<double>::infinity()
                 : std::numeric_limits<double>::infinity();
  return d.convert_to<double>() + (a.frac - b.frac);
}

// Nonnegative integer with two representations: an exact cpp_int, or a
// power-of-two form 2^exp + off for exponents too large to materialize
// (ES1-scale values such as 2^(20!)). The offset always stays many orders of
// magnitude below 2^exp, so comparisons across forms are decisive.
class BigNat {
 public:
  // Exponents at or below this materialize as exact integers (2^21 bits = 256 KiB).
  static constexpr unsigned kMaterializeBits = 1u << 21;

  BigNat() = default;
  template <typename T, typename = std::enable_if_t<std::is_integral_v<T>>>
  BigNat(T v) : exact_(v) {
    if constexpr (std::is_signed_v<T>) {
      if (v < 0) throw InvalidArgument("BigNat: negative value");
    }
  }
  BigNat(cpp_int v) : exact_(std::move(v)) {
    if (exact_ < 0) throw InvalidArgument("BigNat: negative value");
  }

  static BigNat pow2(const cpp_int& e) { return pow2_offset(e, 0); }

  static BigNat pow2_offset(const cpp_int& e, const cpp_int& off) {
    if (e < 0) throw InvalidArgument("BigNat::pow2_offset: negative exponent");
    if (e <= kMaterializeBits) {
      cpp_int v = (cpp_int(1) << e.convert_to<unsigned>()) + off;
      return BigNat(v);
    }
    BigNat r;
    r.huge_ = true;
    r.exp_ = e;
    r.off_ = off;
    r.check_huge_invariant();
    return r;
  }

  bool is_huge() const { return huge_; }
  bool is_zero() const { return !huge_ && exact_ == 0; }
  bool is_approx() const { return approx_; }

  const cpp_int& exact() const {
    if (huge_) throw MagnitudeOverflow("BigNat: value too large to materialize: " + str());
    return exact_;
  }
  const cpp_int& huge_exponent() const { return exp_; }
  const cpp_int& huge_offset() const { return off_; }

  bool fits_uint64() const { return !huge_ && exact_ <= std::numeric_limits<std::uint64_t>::max(); }
  std::uint64_t to_uint64() const { return exact().convert_to<std::uint64_t>(); }

  double to_double() const {
    if (huge_) return std::numeric_limits<double>::infinity();
    if (bit_length(exact_) > 1023) return std::numeric_limits<double>::infinity();
    return exact_.convert_to<double>();
  }

  // -1 / 0 / +1 ordering; exact for all representable values.
  static int compare(const BigNat& a, const BigNat& b) {
    if (!a.huge_ && !b.huge_) return a.exact_ < b.exact_ ? -1 : (a.exact_ == b.exact_ ? 0 : 1);
    if (a.huge_ && b.huge_) {
      if (a.exp_ != b.exp_) return a.exp_ < b.exp_ ? -1 : 1;
      return a.off_ < b.off_ ? -1 : (a.off_ == b.off_ ? 0 : 1);
    }
    const BigNat& h = a.huge_ ? a : b;
    const BigNat& x = a.huge_ ? b : a;
    int sign = a.huge_ ? 1 : -1;  // sign of (h - x) mapped back to (a - b)
    cpp_int xb = bit_length(x.exact_);
    if (h.exp_ >= xb + 1) return sign;    // 2^exp - |off| > 2^(xb) > x
    // exp <= xb: x has at least exp bits, so 2^exp is materializable next to it.
    cpp_int hv = (cpp_int(1) << h.exp_.convert_to<unsigned>()) + h.off_;
    int c = hv < x.exact_ ? -1 : (hv == x.exact_ ? 0 : 1);
    return sign * c;
  }

  friend bool operator==(const BigNat& a, const BigNat& b) { return compare(a, b) == 0; }
  friend bool operator!=(const BigNat& a, const BigNat& b) { return compare(a, b) != 0; }
  friend bool operator<(const BigNat& a, const BigNat& b) { return compare(a, b) < 0; }
  friend bool operator<=(const BigNat& a, const BigNat& b) { return compare(a, b) <= 0; }
  friend bool operator>(const BigNat& a, const BigNat& b) { return compare(a, b) > 0; }
  friend bool operator>=(const BigNat& a, const BigNat& b) { return compare(a, b) >= 0; }

  friend BigNat operator+(const BigNat& a, const BigNat& b) {
    if (!a.huge_ && !b.huge_) return BigNat(a.exact_ + b.exact_);
    if (a.huge_ && b.huge_) {
      if (a.exp_ == b.exp_) return pow2_offset(a.exp_ + 1, a.off_ + b.off_);
      const BigNat& big = a.exp_ > b.exp_ ? a : b;
      const BigNat& small = a.exp_ > b.exp_ ? b : a;
      if (small.exp_ + 64 <= big.exp_) {
        BigNat r = big;
        r.approx_ = true;  // dropped term is below 2^-64 of the result
        return r;
      }
      throw MagnitudeOverflow("BigNat: sum of comparable huge terms not representable");
    }
    const BigNat& h = a.huge_ ? a : b;
    const BigNat& x = a.huge_ ? b : a;
    BigNat r = h;
    r.off_ += x.exact_;
    r.approx_ = h.approx_ || x.approx_;
    r.check_huge_invariant();
    return r;
  }

  friend BigNat operator-(const BigNat& a, const BigNat& b) {
    int c = compare(a, b);
    if (c < 0) throw InvalidArgument("BigNat: negative difference");
    if (c == 0) return BigNat(0ull);
    if (!a.huge_ && !b.huge_) return BigNat(a.exact_ - b.exact_);
    if (a.huge_ && !b.huge_) {
      BigNat r = a;
      r.off_ -= b.exact_;
      r.check_huge_invariant();
      return r;
    }
    if (!a.huge_ && b.huge_) {
      // a > b forced exp <= bits(a); materialize b.
      cpp_int bv = (cpp_int(1) << b.exp_.convert_to<unsigned>()) + b.off_;
      return BigNat(a.exact_ - bv);
    }
    if (a.exp_ == b.exp_) return BigNat(a.off_ - b.off_);
    if (a.exp_ == b.exp_ + 1) return pow2_offset(b.exp_, a.off_ - b.off_);
    if (b.exp_ + 64 <= a.exp_) {
      BigNat r = a;
      r.approx_ = true;
      return r;
    }
    throw MagnitudeOverflow("BigNat: difference of comparable huge terms not representable");
  }

  BigNat& operator+=(const BigNat& o) { return *this = *this + o; }
  BigNat& operator-=(const BigNat& o) { return *this = *this - o; }

  BigNat mul_pow2(const cpp_int& j) const {
    if (j < 0) throw InvalidArgument("BigNat::mul_pow2: negative shift");
    if (huge_) {
      if (j > kMaterializeBits) throw MagnitudeOverflow("BigNat::mul_pow2: shift too large");
      BigNat r = *this;
      r.exp_ += j;
      r.off_ <<= j.convert_to<unsigned>();
      return r;
    }
    if (exact_ == 0) return *this;
    if (j > 4 * cpp_int(kMaterializeBits))
      throw MagnitudeOverflow("BigNat::mul_pow2: shift too large for exact value");
    return BigNat(exact_ << j.convert_to<unsigned>());
  }

  BigNat times2() const { return mul_pow2(1); }

  friend BigNat operator*(const BigNat& a, std::uint64_t c) {
    if (!a.huge_) return BigNat(a.exact_ * c);
    if (c != 0 && (c & (c - 1)) == 0) {
      unsigned j = 0;
      while ((c >> j) != 1) ++j;
      return a.mul_pow2(j);
    }
    throw MagnitudeOverflow("BigNat: huge value times non-power-of-two");
  }

  // floor(v / d); exact representation required.
  BigNat div_floor(std::uint64_t d) const {
    if (d == 0) throw InvalidArgument("BigNat::div_floor: zero divisor");
    return BigNat(exact() / d);
  }

  // Exponent of the leading bit: 2^floor_log2(v) <= v < 2^(floor_log2(v)+1).
  cpp_int floor_log2() const {
    if (is_zero()) throw InvalidArgument("BigNat::floor_log2: zero");
    if (!huge_) return cpp_int(boost::multiprecision::msb(exact_));
    return off_ >= 0 ? exp_ : exp_ - 1;
  }

  Log2Parts log2_parts() const {
    if (is_zero()) throw InvalidArgument("BigNat::log2_parts: log of zero");
    if (huge_) {
      // off / 2^exp is below 2^-64 by the class invariant.
      return {exp_, 0.0};
    }
    unsigned b = static_cast<unsigned>(boost::multiprecision::msb(exact_));
    if (b <= 63)
      return {cpp_int(b), std::log2(exact_.convert_to<double>()) - static_cast<double>(b)};
    cpp_int top = exact_ >> (b - 63);
    double t = top.convert_to<double>();  // in [2^63, 2^64)
    return {cpp_int(b), std::log2(t) - 63.0};
  }

  double log2() const { return log2_parts().to_double(); }

  std::string str() const {
    if (!huge_) {
      if (bit_length(exact_) <= 4096) return exact_.str();
      char buf[64];
      std::snprintf(buf, sizeof buf, "~2^%.6f", log2());
      return buf;
    }
    std::string s = "2^" + exp_.str();
    if (off_ != 0) {
      cpp_int a = boost::multiprecision::abs(off_);
      if (bit_length(a) <= 64)
        s += (off_ > 0 ? "+" : "-") + a.str();
      else {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%c~2^%.3f", off_ > 0 ? '+' : '-',
                      BigNat(a).log2());
        s += buf;
      }
    }
    return s;
  }

  // Accepts plain decimal or "2^<e>[±<off>]".
  static BigNat parse(const std::string& s) {
    if (s.empty()) throw InvalidArgument("BigNat::parse: empty string");
    if (s.rfind("2^", 0) == 0) {
      std::size_t pos = 2;
      std::size_t sep = s.find_first_of("+-", pos);
      cpp_int e(s.substr(pos, sep == std::string::npos ? std::string::npos : sep - pos));
      cpp_int off = 0;
      if (sep != std::string::npos) {
        off = cpp_int(s.substr(sep + 1));
        if (s[sep] == '-') off = -off;
      }
      return pow2_offset(e, off);
    }
    return BigNat(cpp_int(s));
  }

 private:
  void check_huge_invariant() const {
    if (!huge_) return;
    if (off_ != 0 && cpp_int(bit_length(boost::multiprecision::abs(off_))) + 64 > exp_)
      throw MagnitudeOverflow("BigNat: offset too large relative to 2^" + exp_.str());
  }

  cpp_int exact_{0};
  bool huge_ = false;
  cpp_int exp_{0};
  cpp_int off_{0};
  bool approx_ = false;
};

// a / b as a double. Exact rational rounding on the materializable path,
// log2-parts cancellation otherwise.
inline double big_ratio(const BigNat& a, const BigNat& b) {
  if (a.is_zero()) return 0.0;
  if (b.is_zero()) return std::numeric_limits<double>::infinity();
  if (!a.is_huge() && !b.is_huge() && bit_length(a.exact()) <= 4096 &&
      bit_length(b.exact()) <= 4096) {
    return cpp_rational(a.exact(), b.exact()).convert_to<double>();
  }
  return std::exp2(log2_diff(a.log2_parts(), b.log2_parts()));
}

// a / b >= thr, decided exactly whenever both sides materialize.
inline bool big_ratio_geq(const BigNat& a, const BigNat& b, double thr) {
  if (b.is_zero()) throw InvalidArgument("big_ratio_geq: zero denominator");
  if (a.is_zero()) return 0.0 >= thr;
  if (!a.is_huge() && !b.is_huge())
    return cpp_rational(a.exact(), b.exact()) >= cpp_rational(thr);
  if (thr <= 0) return true;
  return log2_diff(a.log2_parts(), b.log2_parts()) >= std::log2(thr) - 1e-12;
}

// Largest integer y with y^q <= k^p (that is, floor(k^(p/q))).
inline BigNat floor_rational_pow(const BigNat& k, unsigned p, unsigned q) {
  if (q == 0) throw InvalidArgument("floor_rational_pow: q must be >= 1");
  const cpp_int& x = k.exact();
  if (p == q) return k;
  if (x <= 1) return k;
  if (p == 1) return BigNat(iroot(x, q));
  return BigNat(iroot(boost::multiprecision::pow(x, p), q));
}

inline std::string format_double17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace density_lab
