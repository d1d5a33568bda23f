#pragma once

#include <gmpxx.h>

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "haarbridge/ensembles.hpp"

namespace haarbridge {

// Exact entry moments of the Haar ensembles, as rationals.  Everything here
// is a finite product of small integers, so mpq keeps it exact for any n.

// E |U_11|^(2k) for Haar unitary:  prod_{j=1..k} j / (n - 1 + j).
mpq_class m2k_unitary(unsigned long n, unsigned k);

// E O_11^(2k) for Haar orthogonal:  prod_{j=0..k-1} (2j + 1) / (n + 2j).
mpq_class m2k_orthogonal(unsigned long n, unsigned k);

// n^2 * Var(w_11) for the centered weight entry v = w - 1/n:
// (n-1)/(n+1) unitary, 2(n-1)/(n+2) orthogonal.  Tends to 1/beta'.
// Only the two Haar ensembles are supported.
mpq_class scaled_var_v(unsigned long n, EnsembleKind kind);

// Mixed fourth-power moments of pairs of entries.  Only the leading term in
// 1/n is tracked: value = coefficient * n^-power * (1 + O(1/n)).
enum class MixedMoment {
  U44,    // E |U_11|^4 |U_22|^4          -> 4  n^-4
  U2222,  // E |U_11 U_12 U_21 U_22|^2    -> 1  n^-4
  U24,    // E |U_11|^2 |U_22|^4          -> 2  n^-3
  U224,   // E |U_11|^2 |U_12|^2 |U_22|^2 -> 1  n^-3
  O44,    // E O_11^4 O_22^4              -> 9  n^-4
  O2222,  // E O_11^2 O_12^2 O_21^2 O_22^2-> 1  n^-4
  O24,    // E O_11^2 O_22^4              -> 3  n^-3
  O224,   // E O_11^2 O_12^2 O_22^2       -> 1  n^-3
};

struct LeadingTerm {
  long coefficient;
  int power;  // moment ~ coefficient / n^power
};

LeadingTerm mixed_moment_leading(MixedMoment item);

// Exponents (a, b, c, d) of E( U_11^a U_12^b U_21^c U_22^d ) in modulus (or
// the real entries for the orthogonal group), for Monte Carlo estimation.
std::array<int, 4> mixed_moment_exponents(MixedMoment item);

// Closed-form joint moments of four entries of a Haar orthogonal matrix,
// E( O_11^a O_12^b O_21^c O_22^d ), for the four exponent patterns below.
enum class IPattern {
  I24,    // (2,0,0,4)
  I44,    // (4,0,0,4)
  I2222,  // (2,2,2,2)
  I224,   // (2,2,0,2)
};

mpq_class orthogonal_I_exact(IPattern pattern, unsigned long n);
std::array<int, 4> i_pattern_exponents(IPattern pattern);
LeadingTerm i_pattern_leading(IPattern pattern);

// Limits of the quartic cross moments of centered weights:
//   n^2 (n-1)^2 E(V_11^2 V_22^2)        -> 1/beta'^2  (1 unitary, 4 orthogonal)
//   n^2 (n-1)^2 E(V_11 V_12 V_21 V_22)  -> 0
std::pair<double, double> centered_quartic_limits(EnsembleKind kind);

// One row of the verify-moments report.
struct MomentRow {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double exact = 0.0;
  double z = 0.0;
};

struct MomentReport {
  EnsembleKind kind;
  std::size_t n = 0;
  std::size_t replicas = 0;
  std::vector<MomentRow> rows;
  bool all_within(double z_max) const;
};

}  // namespace haarbridge
