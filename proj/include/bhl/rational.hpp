// Exact rational numbers for the logic layer. p-value composition (sums,
// mins, comparisons) is done on these; floats are confined to numstat.
#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bhl {

using Rat = boost::rational<long long>;

inline Rat make_rat(long long num, long long den = 1) { return Rat(num, den); }

// Parses "3", "0.05", "3/100". Decimal literals become exact rationals.
inline Rat parse_rat(const std::string& s) {
  auto bad = [&] { throw std::invalid_argument("malformed rational literal: " + s); };
  if (s.empty()) bad();
  std::size_t i = 0;
  bool neg = false;
  if (s[i] == '-') { neg = true; ++i; }
  long long intpart = 0;
  std::size_t digits = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
    intpart = intpart * 10 + (s[i] - '0');
    ++i; ++digits;
  }
  if (digits == 0) bad();
  Rat r(intpart, 1);
  if (i < s.size() && s[i] == '.') {
    ++i;
    long long frac = 0, scale = 1;
    std::size_t fdigits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
      frac = frac * 10 + (s[i] - '0');
      scale *= 10;
      ++i; ++fdigits;
    }
    if (fdigits == 0) bad();
    r += Rat(frac, scale);
  } else if (i < s.size() && s[i] == '/') {
    ++i;
    long long den = 0;
    std::size_t ddigits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
      den = den * 10 + (s[i] - '0');
      ++i; ++ddigits;
    }
    if (ddigits == 0 || den == 0) bad();
    r = Rat(intpart, den);
  }
  if (i != s.size()) bad();
  return neg ? -r : r;
}

// Prints as a decimal when the denominator divides a power of ten (so 1/20
// renders as 0.05), otherwise as "num/den".
inline std::string rat_to_string(const Rat& r) {
  long long num = r.numerator(), den = r.denominator();
  bool neg = num < 0;
  if (neg) num = -num;
  long long scale = 1;
  for (int k = 0; k <= 18; ++k) {
    if (scale % den == 0) {
      long long scaled = num * (scale / den);
      std::string out = neg ? "-" : "";
      if (k == 0) return out + std::to_string(scaled);
      std::string ds = std::to_string(scaled);
      if (ds.size() <= static_cast<std::size_t>(k))
        ds.insert(0, static_cast<std::size_t>(k) + 1 - ds.size(), '0');
      ds.insert(ds.size() - static_cast<std::size_t>(k), 1, '.');
      return out + ds;
    }
    if (scale > 1000000000000000000LL / 10) break;
    scale *= 10;
  }
  return (neg ? "-" : "") + std::to_string(num) + "/" + std::to_string(den);
}

inline double rat_to_double(const Rat& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

}  // namespace bhl
