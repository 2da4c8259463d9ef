#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>

namespace treecut {

using Rational = mpq_class;

Rational rat(long num, long den = 1);
Rational rat_from_int64(int64_t v);

// Parses "3", "-3/4" or a plain decimal such as "0.25".
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& q);
std::string to_string(const std::optional<Rational>& q);

// Nearest multiple of 1/den. Used wherever a logarithm enters exact arithmetic.
Rational approx(double x, long den = 1024);
Rational log2_approx(double x);
// max(1, log2(log2 n)), the clamped double logarithm.
Rational loglog_approx(double n);

Rational floor_q(const Rational& q);
Rational ceil_q(const Rational& q);
double to_double(const Rational& q);
int64_t to_int64(const Rational& q);  // q must be an integer fitting int64

}  // namespace treecut
