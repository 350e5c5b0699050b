#include "shiftdom/rational.hpp"

#include "shiftdom/errors.hpp"

namespace shiftdom {

Rat rat_from_string(const std::string& text) {
  if (text.empty()) throw Error("rational: empty string");
  // mpq set_str tolerates whitespace and leading '+'; we do not, so the
  // canonical form round-trips byte for byte.
  for (char c : text)
    if (!(c == '-' || c == '/' || (c >= '0' && c <= '9')))
      throw Error("rational: bad character in '" + text + "'");
  Rat r;
  if (mpq_set_str(r.get_mpq_t(), text.c_str(), 10) != 0)
    throw Error("rational: unparsable '" + text + "'");
  if (mpz_sgn(mpq_denref(r.get_mpq_t())) == 0)
    throw Error("rational: zero denominator in '" + text + "'");
  r.canonicalize();
  return r;
}

std::string rat_to_string(const Rat& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

} // namespace shiftdom
