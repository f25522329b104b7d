#include "ergo/numeric.hpp"

#include <cctype>
#include <cstdlib>
#include <stdexcept>

namespace ergo {

Int floor_div(const Int& a, const Int& b) {
  if (b == 0) throw std::domain_error("floor_div by zero");
  Int q = a / b;  // cpp_int division truncates toward zero
  if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

Int ceil_div(const Int& a, const Int& b) {
  if (b == 0) throw std::domain_error("ceil_div by zero");
  Int q = a / b;
  if ((a % b) != 0 && ((a < 0) == (b < 0))) ++q;
  return q;
}

long ilog2(const Int& v) {
  if (v < 1) throw std::domain_error("ilog2 of non-positive value");
  return static_cast<long>(boost::multiprecision::msb(v));
}

bool is_integer(const Rat& r) { return boost::multiprecision::denominator(r) == 1; }

Int rat_floor(const Rat& r) {
  return floor_div(boost::multiprecision::numerator(r),
                   boost::multiprecision::denominator(r));
}

Int rat_ceil(const Rat& r) {
  return ceil_div(boost::multiprecision::numerator(r),
                  boost::multiprecision::denominator(r));
}

std::optional<Rat> parse_rat(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::size_t i = 0;
  bool neg = false;
  if (text[i] == '+' || text[i] == '-') {
    neg = text[i] == '-';
    ++i;
  }
  auto digits = [&](std::string& out) {
    std::size_t start = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) out += text[i++];
    return i > start;
  };
  std::string ipart;
  if (!digits(ipart)) return std::nullopt;
  Rat value;
  bool may_have_exponent = true;
  if (i < text.size() && text[i] == '/') {
    ++i;
    std::string den;
    if (!digits(den) || i != text.size()) return std::nullopt;
    Int d(den);
    if (d == 0) return std::nullopt;
    value = Rat(Int(ipart), d);
    may_have_exponent = false;
  } else if (i < text.size() && text[i] == '.') {
    ++i;
    std::string frac;
    if (!digits(frac)) return std::nullopt;
    Int scale = 1;
    for (std::size_t k = 0; k < frac.size(); ++k) scale *= 10;
    value = Rat(Int(ipart) * scale + Int(frac), scale);
  } else {
    value = Rat(Int(ipart));
  }
  if (may_have_exponent && i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      eneg = text[i] == '-';
      ++i;
    }
    std::string epart;
    if (!digits(epart) || epart.size() > 6) return std::nullopt;
    long e = std::strtol(epart.c_str(), nullptr, 10);
    Int pow10 = 1;
    for (long k = 0; k < e; ++k) pow10 *= 10;
    if (eneg)
      value /= pow10;
    else
      value *= pow10;
  }
  if (i != text.size()) return std::nullopt;
  if (neg) value = -value;
  return value;
}

std::string rat_string(const Rat& r) {
  if (is_integer(r)) return boost::multiprecision::numerator(r).str();
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

std::string rat_decimal_string(const Rat& r) {
  Int den = boost::multiprecision::denominator(r);
  Int scale = 1;
  int exp10 = 0;
  // den divides 10^k exactly when den factors into 2s and 5s
  Int d = den;
  while (d % 2 == 0) d /= 2;
  while (d % 5 == 0) d /= 5;
  if (d != 1) return rat_string(r);
  while (scale % den != 0) {
    scale *= 10;
    ++exp10;
  }
  if (exp10 == 0) return boost::multiprecision::numerator(r).str();
  Int scaled = boost::multiprecision::numerator(r) * (scale / den);
  bool neg = scaled < 0;
  Int mag = neg ? Int(-scaled) : scaled;
  std::string body = mag.str();
  while (static_cast<int>(body.size()) <= exp10) body.insert(body.begin(), '0');
  body.insert(body.end() - exp10, '.');
  return (neg ? "-" : "") + body;
}

}  // namespace ergo
