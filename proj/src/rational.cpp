#include "treecut/rational.hpp"

#include "treecut/errors.hpp"

#include <cmath>

namespace treecut {

Rational rat(long num, long den) {
  if (den == 0) throw ArgumentError("zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Rational rat_from_int64(int64_t v) {
  mpz_class z;
  mpz_set_si(z.get_mpz_t(), static_cast<long>(v));
  return Rational(z);
}

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw InputError("empty rational");
  auto dot = text.find('.');
  if (dot != std::string::npos) {
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    size_t frac = text.size() - dot - 1;
    mpz_class num;
    if (num.set_str(digits, 10) != 0) throw InputError("bad number '" + text + "'");
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac);
    Rational q(num, den);
    q.canonicalize();
    return q;
  }
  Rational q;
  if (q.set_str(text, 10) != 0) throw InputError("bad number '" + text + "'");
  if (q.get_den() == 0) throw InputError("zero denominator in '" + text + "'");
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

std::string to_string(const std::optional<Rational>& q) {
  return q ? q->get_str() : std::string("undefined");
}

Rational approx(double x, long den) {
  double scaled = std::nearbyint(x * static_cast<double>(den));
  return rat(static_cast<long>(scaled), den);
}

Rational log2_approx(double x) { return approx(std::log2(x)); }

Rational loglog_approx(double n) {
  double l = n > 1 ? std::log2(std::log2(n)) : 0.0;
  return l < 1 ? Rational(1) : approx(l);
}

Rational floor_q(const Rational& q) {
  mpz_class z;
  mpz_fdiv_q(z.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return Rational(z);
}

Rational ceil_q(const Rational& q) {
  mpz_class z;
  mpz_cdiv_q(z.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return Rational(z);
}

double to_double(const Rational& q) { return q.get_d(); }

int64_t to_int64(const Rational& q) {
  if (q.get_den() != 1 || !q.get_num().fits_slong_p())
    throw ContractError("rational " + q.get_str() + " is not a 64-bit integer");
  return q.get_num().get_si();
}

}  // namespace treecut
