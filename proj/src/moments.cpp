#include "haarbridge/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace haarbridge {

mpq_class m2k_unitary(unsigned long n, unsigned k) {
  if (n == 0) throw std::invalid_argument("n must be positive");
  mpq_class r(1);
  for (unsigned j = 1; j <= k; ++j) {
    r *= mpq_class(j, n - 1 + j);
  }
  r.canonicalize();
  return r;
}

mpq_class m2k_orthogonal(unsigned long n, unsigned k) {
  if (n == 0) throw std::invalid_argument("n must be positive");
  mpq_class r(1);
  for (unsigned j = 0; j < k; ++j) {
    r *= mpq_class(2 * j + 1, n + 2 * j);
  }
  r.canonicalize();
  return r;
}

mpq_class scaled_var_v(unsigned long n, EnsembleKind kind) {
  if (n < 2) throw std::invalid_argument("n must be at least 2");
  mpq_class r;
  switch (kind) {
    case EnsembleKind::HaarUnitary:
      r = mpq_class(n - 1, n + 1);
      break;
    case EnsembleKind::HaarOrthogonal:
      r = mpq_class(2 * (n - 1), n + 2);
      break;
    default:
      throw std::invalid_argument("scaled_var_v is defined for the Haar ensembles only");
  }
  r.canonicalize();
  return r;
}

LeadingTerm mixed_moment_leading(MixedMoment item) {
  switch (item) {
    case MixedMoment::U44: return {4, 4};
    case MixedMoment::U2222: return {1, 4};
    case MixedMoment::U24: return {2, 3};
    case MixedMoment::U224: return {1, 3};
    case MixedMoment::O44: return {9, 4};
    case MixedMoment::O2222: return {1, 4};
    case MixedMoment::O24: return {3, 3};
    case MixedMoment::O224: return {1, 3};
  }
  throw std::invalid_argument("unknown item");
}

std::array<int, 4> mixed_moment_exponents(MixedMoment item) {
  switch (item) {
    case MixedMoment::U44:
    case MixedMoment::O44: return {4, 0, 0, 4};
    case MixedMoment::U2222:
    case MixedMoment::O2222: return {2, 2, 2, 2};
    case MixedMoment::U24:
    case MixedMoment::O24: return {2, 0, 0, 4};
    case MixedMoment::U224:
    case MixedMoment::O224: return {2, 2, 0, 2};
  }
  throw std::invalid_argument("unknown item");
}

namespace {
mpq_class poch(unsigned long n, std::initializer_list<long> offsets) {
  mpq_class r(1);
  for (long o : offsets) r *= mpq_class(static_cast<long>(n) + o, 1);
  return r;
}
}  // namespace

mpq_class orthogonal_I_exact(IPattern pattern, unsigned long n) {
  if (n < 2) throw std::invalid_argument("n must be at least 2");
  mpq_class num, den;
  switch (pattern) {
    case IPattern::I24:
      num = 3 * poch(n, {3});
      den = poch(n, {0, -1, 2, 4});
      break;
    case IPattern::I44:
      num = 9 * poch(n, {3, 5});
      den = poch(n, {6, 4, 2, 1, 0, -1});
      break;
    case IPattern::I2222:
      num = mpq_class(static_cast<long>(n), 1) * static_cast<long>(n) + 4 * static_cast<long>(n) + 15;
      den = poch(n, {6, 4, 2, 1, 0, -1});
      break;
    case IPattern::I224:
      num = poch(n, {1});
      den = poch(n, {-1, 0, 4, 2});
      break;
    default:
      throw std::invalid_argument("unknown pattern");
  }
  mpq_class r = num / den;
  r.canonicalize();
  return r;
}

std::array<int, 4> i_pattern_exponents(IPattern pattern) {
  switch (pattern) {
    case IPattern::I24: return {2, 0, 0, 4};
    case IPattern::I44: return {4, 0, 0, 4};
    case IPattern::I2222: return {2, 2, 2, 2};
    case IPattern::I224: return {2, 2, 0, 2};
  }
  throw std::invalid_argument("unknown pattern");
}

LeadingTerm i_pattern_leading(IPattern pattern) {
  switch (pattern) {
    case IPattern::I24: return {3, 3};
    case IPattern::I44: return {9, 4};
    case IPattern::I2222: return {1, 4};
    case IPattern::I224: return {1, 3};
  }
  throw std::invalid_argument("unknown pattern");
}

std::pair<double, double> centered_quartic_limits(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::HaarUnitary: return {1.0, 0.0};
    case EnsembleKind::HaarOrthogonal: return {4.0, 0.0};
    default: throw std::invalid_argument("limits defined for the Haar ensembles only");
  }
}

bool MomentReport::all_within(double z_max) const {
  for (const auto& row : rows) {
    if (!(std::fabs(row.z) <= z_max)) return false;
  }
  return true;
}

}  // namespace haarbridge
