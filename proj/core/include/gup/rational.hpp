#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

namespace gup {

// Exact rational scalar. Used wherever floating point would silently destroy
// an identity: expression constants, polynomial coefficients, the operator
// algebra. Arbitrary precision, so coefficient growth is never a correctness
// concern.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline bool is_integer(const Rational& r) { return denominator(r) == 1; }

// Accepts "3", "-7/2" and decimal literals like "0.125". Decimals are read as
// exact rationals; there is no intermediate floating-point step.
std::optional<Rational> parse_rational(const std::string& text);

// "3", "-7/2". Round-trips through parse_rational.
std::string rational_to_string(const Rational& r);

}  // namespace gup
