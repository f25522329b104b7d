#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

namespace ergo {

/// Width-less signed integers: the IR has no fixed bit widths, and exact
/// arithmetic keeps the interpreter oracle deterministic.
using Int = boost::multiprecision::cpp_int;

/// Exact rationals for energy values (nanojoules) and formula coefficients.
/// No floating point anywhere in the analysis pipeline.
using Rat = boost::multiprecision::cpp_rational;

/// Division rounding toward -infinity. b must be nonzero.
Int floor_div(const Int& a, const Int& b);

/// Division rounding toward +infinity. b must be nonzero.
Int ceil_div(const Int& a, const Int& b);

/// floor(log2(v)) for v >= 1.
long ilog2(const Int& v);

bool is_integer(const Rat& r);

/// Largest integer <= r.
Int rat_floor(const Rat& r);

/// Smallest integer >= r.
Int rat_ceil(const Rat& r);

/// Parses "7", "-3", "7/2", "-7/2", "7.1", "-0.25" into an exact rational.
/// Returns nullopt on malformed input.
std::optional<Rat> parse_rat(const std::string& text);

/// Canonical text: integers without denominator ("7"), otherwise "num/den".
std::string rat_string(const Rat& r);

/// Decimal text when the denominator is a product of 2s and 5s ("7.1"),
/// otherwise falls back to rat_string. Used for human-facing tables.
std::string rat_decimal_string(const Rat& r);

}  // namespace ergo
