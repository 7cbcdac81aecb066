#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>

#include "termgen/error.hpp"

namespace termgen {

// Exact nonnegative-or-signed fraction with a positive, reduced denominator.
// Used for test weights and partial-credit scores so that 2/3 stays 2/3.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(implicit)
  Rational(std::int64_t num, std::int64_t den) { assign(num, den); }

  [[nodiscard]] constexpr std::int64_t num() const noexcept { return num_; }
  [[nodiscard]] constexpr std::int64_t den() const noexcept { return den_; }
  [[nodiscard]] double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  // Parses "3", "-2", "0.25", "1e-3", "2/3".
  static Rational parse(std::string_view text) {
    auto fail = [&] {
      return Error(Errc::InvalidArgument, "not a rational number: '" + std::string(text) + "'");
    };
    if (text.empty()) throw fail();
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
      Rational n = parse(text.substr(0, slash));
      Rational d = parse(text.substr(slash + 1));
      if (n.den_ != 1 || d.den_ != 1 || d.num_ == 0) throw fail();
      return Rational(n.num_, d.num_);
    }
    bool negative = false;
    std::size_t i = 0;
    if (text[i] == '-' || text[i] == '+') {
      negative = text[i] == '-';
      ++i;
    }
    __int128 mantissa = 0;
    int scale = 0;
    bool seen_digit = false;
    bool seen_dot = false;
    for (; i < text.size(); ++i) {
      char c = text[i];
      if (c >= '0' && c <= '9') {
        mantissa = mantissa * 10 + (c - '0');
        if (seen_dot) ++scale;
        seen_digit = true;
        if (mantissa > kLimit) throw fail();
      } else if (c == '.' && !seen_dot) {
        seen_dot = true;
      } else {
        break;
      }
    }
    if (!seen_digit) throw fail();
    int exponent = 0;
    if (i < text.size()) {
      if (text[i] != 'e' && text[i] != 'E') throw fail();
      ++i;
      bool exp_negative = false;
      if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
        exp_negative = text[i] == '-';
        ++i;
      }
      if (i == text.size()) throw fail();
      for (; i < text.size(); ++i) {
        if (text[i] < '0' || text[i] > '9') throw fail();
        exponent = exponent * 10 + (text[i] - '0');
        if (exponent > 30) throw fail();
      }
      if (exp_negative) exponent = -exponent;
    }
    int power = exponent - scale;
    __int128 num = mantissa;
    __int128 den = 1;
    for (; power > 0; --power) num *= 10;
    for (; power < 0; ++power) den *= 10;
    if (negative) num = -num;
    return from_wide(num, den);
  }

  // Shortest exact decimal when the denominator is 2^a*5^b, else "p/q".
  [[nodiscard]] std::string to_string() const {
    if (den_ == 1) return std::to_string(num_);
    std::int64_t d = den_;
    int twos = 0;
    int fives = 0;
    while (d % 2 == 0) d /= 2, ++twos;
    while (d % 5 == 0) d /= 5, ++fives;
    if (d != 1) return std::to_string(num_) + "/" + std::to_string(den_);
    int digits = std::max(twos, fives);
    __int128 scaled = static_cast<__int128>(num_);
    __int128 pow10 = 1;
    for (int k = 0; k < digits; ++k) pow10 *= 10;
    scaled = scaled * (pow10 / den_);
    bool negative = scaled < 0;
    if (negative) scaled = -scaled;
    std::string whole = std::to_string(static_cast<std::int64_t>(scaled / pow10));
    std::string frac = std::to_string(static_cast<std::int64_t>(scaled % pow10));
    frac.insert(0, static_cast<std::size_t>(digits) - frac.size(), '0');
    return (negative ? "-" : "") + whole + "." + frac;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                     static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                     static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw Error(Errc::InvalidArgument, "division by zero");
    return from_wide(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
  }
  Rational& operator+=(const Rational& other) { return *this = *this + other; }

  friend constexpr bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

 private:
  static constexpr __int128 kLimit = static_cast<__int128>(1) << 62;

  static Rational from_wide(__int128 num, __int128 den) {
    if (den == 0) throw Error(Errc::InvalidArgument, "zero denominator");
    if (den < 0) num = -num, den = -den;
    __int128 a = num < 0 ? -num : num;
    __int128 b = den;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) num /= a, den /= a;
    if (num > kLimit || num < -kLimit || den > kLimit) {
      throw Error(Errc::InvalidArgument, "rational overflow");
    }
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    return r;
  }

  void assign(std::int64_t num, std::int64_t den) { *this = from_wide(num, den); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace termgen
