#include "haarbridge/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "haarbridge/kernels.hpp"

namespace haarbridge {

HaarUnitarySampler::HaarUnitarySampler(std::size_t n) : n_(n), a_(n) {
  if (n == 0) throw std::invalid_argument("matrix dimension must be positive");
  tau_.assign(n, 0.0);
  phase_re_.assign(n, 1.0);
  phase_im_.assign(n, 0.0);
}

// Householder vectors are stored below the diagonal of a_, normalized so the
// pivot component is 1; tau_[k] holds the (real) reflector coefficient and
// the diagonal keeps R_kk, whose phase feeds the final column correction.
void HaarUnitarySampler::sample(RngStream& rng, ComplexMatrix& out) {
  const std::size_t n = n_;
  fill_gaussian(rng, a_.re.data(), n * n);
  fill_gaussian(rng, a_.im.data(), n * n);

  for (std::size_t k = 0; k < n; ++k) {
    double* cre = a_.re.data() + k * n + k;
    double* cim = a_.im.data() + k * n + k;
    const std::size_t m = n - k;

    double nrm2 = sumsq(m, cre) + sumsq(m, cim);
    double normx = std::sqrt(nrm2);
    double ar = cre[0], ai = cim[0];
    double aa = std::sqrt(ar * ar + ai * ai);
    if (normx == 0.0) {  // cannot happen for Ginibre input, kept for safety
      tau_[k] = 0.0;
      phase_re_[k] = 1.0;
      phase_im_[k] = 0.0;
      continue;
    }
    double pr = aa > 0.0 ? ar / aa : 1.0;
    double pi = aa > 0.0 ? ai / aa : 0.0;

    // v = x + phase*|x|*e1, giving R_kk = -phase*|x| with no cancellation.
    double v0r = ar + pr * normx;
    double v0i = ai + pi * normx;
    double v0n2 = v0r * v0r + v0i * v0i;
    // After scaling v by 1/v0, the reflector coefficient is real:
    // tau = 2|v0|^2 / ||v||^2 = 1 + |a|/|x|.
    tau_[k] = 1.0 + aa / normx;
    phase_re_[k] = -pr;
    phase_im_[k] = -pi;
    cre[0] = -pr * normx;
    cim[0] = -pi * normx;
    double inv_r = v0r / v0n2, inv_i = -v0i / v0n2;
    for (std::size_t i = 1; i < m; ++i) {
      double xr = cre[i], xi = cim[i];
      cre[i] = xr * inv_r - xi * inv_i;
      cim[i] = xr * inv_i + xi * inv_r;
    }
    if (m == 1) continue;

    for (std::size_t j = k + 1; j < n; ++j) {
      double* bre = a_.re.data() + j * n + k;
      double* bim = a_.im.data() + j * n + k;
      auto [wr, wi] = cdotc(m - 1, cre + 1, cim + 1, bre + 1, bim + 1);
      wr += bre[0];
      wi += bim[0];
      wr *= tau_[k];
      wi *= tau_[k];
      bre[0] -= wr;
      bim[0] -= wi;
      caxpy(m - 1, wr, wi, cre + 1, cim + 1, bre + 1, bim + 1);
    }
  }

  // Backward accumulation of Q.
  out.resize(n);
  out.re_at(n - 1, n - 1) = 1.0;
  for (std::size_t k = n - 1; k-- > 0;) {
    const std::size_t m = n - k;
    const double t = tau_[k];
    const double* vre = a_.re.data() + k * n + k + 1;
    const double* vim = a_.im.data() + k * n + k + 1;
    for (std::size_t j = k + 1; j < n; ++j) {
      double* qre = out.re.data() + j * n + k;
      double* qim = out.im.data() + j * n + k;
      auto [wr, wi] = cdotc(m - 1, vre, vim, qre + 1, qim + 1);
      wr *= t;
      wi *= t;
      qre[0] = -wr;
      qim[0] = -wi;
      caxpy(m - 1, wr, wi, vre, vim, qre + 1, qim + 1);
    }
    double* qre = out.re.data() + k * n + k;
    double* qim = out.im.data() + k * n + k;
    qre[0] = 1.0 - t;
    qim[0] = 0.0;
    for (std::size_t i = 1; i < m; ++i) {
      qre[i] = -t * vre[i - 1];
      qim[i] = -t * vim[i - 1];
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    double lr = phase_re_[k], li = phase_im_[k];
    double* qre = out.re.data() + k * n;
    double* qim = out.im.data() + k * n;
    for (std::size_t i = 0; i < n; ++i) {
      double xr = qre[i], xi = qim[i];
      qre[i] = xr * lr - xi * li;
      qim[i] = xr * li + xi * lr;
    }
  }
}

HaarOrthogonalSampler::HaarOrthogonalSampler(std::size_t n) : n_(n), a_(n) {
  if (n == 0) throw std::invalid_argument("matrix dimension must be positive");
  tau_.assign(n, 0.0);
  sign_.assign(n, 1.0);
}

void HaarOrthogonalSampler::sample(RngStream& rng, RealMatrix& out) {
  const std::size_t n = n_;
  fill_gaussian(rng, a_.a.data(), n * n);

  for (std::size_t k = 0; k < n; ++k) {
    double* c = a_.a.data() + k * n + k;
    const std::size_t m = n - k;

    double normx = std::sqrt(sumsq(m, c));
    double alpha = c[0];
    double aa = std::fabs(alpha);
    if (normx == 0.0) {
      tau_[k] = 0.0;
      sign_[k] = 1.0;
      continue;
    }
    double s = alpha >= 0.0 ? 1.0 : -1.0;
    double v0 = alpha + s * normx;
    tau_[k] = 1.0 + aa / normx;
    sign_[k] = -s;
    c[0] = -s * normx;
    double inv = 1.0 / v0;
    for (std::size_t i = 1; i < m; ++i) c[i] *= inv;
    if (m == 1) continue;

    for (std::size_t j = k + 1; j < n; ++j) {
      double* b = a_.a.data() + j * n + k;
      double w = tau_[k] * (b[0] + rdot(m - 1, c + 1, b + 1));
      b[0] -= w;
      raxpy(m - 1, w, c + 1, b + 1);
    }
  }

  out.resize(n);
  out.at(n - 1, n - 1) = 1.0;
  for (std::size_t k = n - 1; k-- > 0;) {
    const std::size_t m = n - k;
    const double t = tau_[k];
    const double* v = a_.a.data() + k * n + k + 1;
    for (std::size_t j = k + 1; j < n; ++j) {
      double* q = out.a.data() + j * n + k;
      double w = t * rdot(m - 1, v, q + 1);
      q[0] = -w;
      raxpy(m - 1, w, v, q + 1);
    }
    double* q = out.a.data() + k * n + k;
    q[0] = 1.0 - t;
    for (std::size_t i = 1; i < m; ++i) q[i] = -t * v[i - 1];
  }

  for (std::size_t k = 0; k < n; ++k) {
    if (sign_[k] < 0.0) {
      double* q = out.a.data() + k * n;
      for (std::size_t i = 0; i < n; ++i) q[i] = -q[i];
    }
  }
}

double unitarity_residual(const ComplexMatrix& q) {
  const std::size_t n = q.n;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double sr = 0.0, si = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        double xr = q.re_at(i, k), xi = q.im_at(i, k);
        double yr = q.re_at(j, k), yi = q.im_at(j, k);
        sr += xr * yr + xi * yi;  // row_i . conj(row_j)
        si += xi * yr - xr * yi;
      }
      if (i == j) sr -= 1.0;
      double mag = std::sqrt(sr * sr + si * si);
      if (mag > worst) worst = mag;
    }
  }
  return worst;
}

double orthogonality_residual(const RealMatrix& q) {
  const std::size_t n = q.n;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q.at(i, k) * q.at(j, k);
      if (i == j) s -= 1.0;
      s = std::fabs(s);
      if (s > worst) worst = s;
    }
  }
  return worst;
}

}  // namespace haarbridge
