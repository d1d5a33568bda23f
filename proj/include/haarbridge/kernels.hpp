#pragma once

#include <cstddef>
#include <utility>

// Small fixed-order vector kernels for the dense linear algebra hot loops.
// Reductions use explicit lane accumulators with a fixed combine order, so
// results are bit-reproducible run to run and independent of threading.

namespace haarbridge {

namespace detail {
typedef double v4d __attribute__((vector_size(32), aligned(8)));

inline v4d loadu(const double* p) {
  return v4d{p[0], p[1], p[2], p[3]};
}
inline void storeu(double* p, v4d v) {
  p[0] = v[0]; p[1] = v[1]; p[2] = v[2]; p[3] = v[3];
}
inline double hsum(v4d v) { return (v[0] + v[1]) + (v[2] + v[3]); }
}  // namespace detail

// sum_i conj(v_i) * a_i over split re/im arrays.
inline std::pair<double, double> cdotc(std::size_t m, const double* vre, const double* vim,
                                       const double* are, const double* aim) {
  using detail::v4d;
  v4d sr0{0, 0, 0, 0}, sr1{0, 0, 0, 0}, si0{0, 0, 0, 0}, si1{0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= m; i += 8) {
    v4d vr0 = detail::loadu(vre + i), vr1 = detail::loadu(vre + i + 4);
    v4d vi0 = detail::loadu(vim + i), vi1 = detail::loadu(vim + i + 4);
    v4d ar0 = detail::loadu(are + i), ar1 = detail::loadu(are + i + 4);
    v4d ai0 = detail::loadu(aim + i), ai1 = detail::loadu(aim + i + 4);
    sr0 += vr0 * ar0 + vi0 * ai0;
    sr1 += vr1 * ar1 + vi1 * ai1;
    si0 += vr0 * ai0 - vi0 * ar0;
    si1 += vr1 * ai1 - vi1 * ar1;
  }
  double re = detail::hsum(sr0) + detail::hsum(sr1);
  double im = detail::hsum(si0) + detail::hsum(si1);
  for (; i < m; ++i) {
    re += vre[i] * are[i] + vim[i] * aim[i];
    im += vre[i] * aim[i] - vim[i] * are[i];
  }
  return {re, im};
}

// a -= c * v on split re/im arrays.
inline void caxpy(std::size_t m, double cre, double cim, const double* vre, const double* vim,
                  double* are, double* aim) {
  using detail::v4d;
  const v4d cr = {cre, cre, cre, cre}, ci = {cim, cim, cim, cim};
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    v4d vr = detail::loadu(vre + i), vi = detail::loadu(vim + i);
    v4d ar = detail::loadu(are + i), ai = detail::loadu(aim + i);
    detail::storeu(are + i, ar - (cr * vr - ci * vi));
    detail::storeu(aim + i, ai - (cr * vi + ci * vr));
  }
  for (; i < m; ++i) {
    are[i] -= cre * vre[i] - cim * vim[i];
    aim[i] -= cre * vim[i] + cim * vre[i];
  }
}

inline double rdot(std::size_t m, const double* x, const double* y) {
  using detail::v4d;
  v4d s0{0, 0, 0, 0}, s1{0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= m; i += 8) {
    s0 += detail::loadu(x + i) * detail::loadu(y + i);
    s1 += detail::loadu(x + i + 4) * detail::loadu(y + i + 4);
  }
  double s = detail::hsum(s0) + detail::hsum(s1);
  for (; i < m; ++i) s += x[i] * y[i];
  return s;
}

// y -= c * x.
inline void raxpy(std::size_t m, double c, const double* x, double* y) {
  using detail::v4d;
  const v4d cc = {c, c, c, c};
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    detail::storeu(y + i, detail::loadu(y + i) - cc * detail::loadu(x + i));
  }
  for (; i < m; ++i) y[i] -= c * x[i];
}

inline double sumsq(std::size_t m, const double* x) { return rdot(m, x, x); }

}  // namespace haarbridge
