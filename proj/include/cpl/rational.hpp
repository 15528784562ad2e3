#ifndef CPL_RATIONAL_HPP
#define CPL_RATIONAL_HPP

#include <gmpxx.h>
#include <optional>
#include <stdexcept>
#include <string>

namespace cpl {

// Exact rational arithmetic. All probabilities and residual masses in the
// interpreter are Rats; no floating point anywhere in a verdict path.
using Rat = mpq_class;

inline Rat ratOfLong(long n) { return Rat(n); }

inline Rat ratOfParts(const std::string& num, const std::string& den) {
  mpz_class n(num), d(den);
  if (d == 0) throw std::invalid_argument("rational with zero denominator");
  Rat r(n, d);
  r.canonicalize();
  return r;
}

// Accepts "3", "-3", "2/5", "-2/5".
inline std::optional<Rat> ratParse(const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      mpz_class n(s);
      return Rat(n);
    }
    return ratOfParts(s.substr(0, slash), s.substr(slash + 1));
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

// Canonical "n" / "n/d" form used in JSON reports and test goldens.
inline std::string ratStr(const Rat& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline Rat ratPow(const Rat& base, unsigned long e) {
  Rat out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num().get_mpz_t(), e);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den().get_mpz_t(), e);
  out.canonicalize();
  return out;
}

inline bool ratIsInt(const Rat& r) { return r.get_den() == 1; }

inline long ratToLong(const Rat& r) {
  if (!ratIsInt(r)) throw std::domain_error("rational is not integral");
  if (!r.get_num().fits_slong_p()) throw std::domain_error("integer too large");
  return r.get_num().get_si();
}

inline mpz_class ratFloor(const Rat& r) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
  return q;
}

inline mpz_class ratCeil(const Rat& r) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
  return q;
}

}  // namespace cpl

#endif
