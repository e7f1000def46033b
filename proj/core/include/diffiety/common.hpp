#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace diffiety {

// Exact rational scalar. All expression coefficients are rationals;
// floating point appears only in the numeric evaluation oracle.
using Rat = mpq_class;
using Int = mpz_class;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string to_string(const Rat& q) { return q.get_str(); }

inline Rat rat(long num, long den = 1) {
  Rat q(num, den);
  q.canonicalize();
  return q;
}

}  // namespace diffiety
