#pragma once

#include <cstddef>
#include <vector>

#include "haarbridge/rng.hpp"

namespace haarbridge {

// Dense square matrices in column-major order.  Complex matrices keep real
// and imaginary parts in separate arrays; the sampling hot loops vectorize
// much better that way than with std::complex.
struct ComplexMatrix {
  std::size_t n = 0;
  std::vector<double> re, im;

  explicit ComplexMatrix(std::size_t dim = 0) { resize(dim); }
  void resize(std::size_t dim) {
    n = dim;
    re.assign(dim * dim, 0.0);
    im.assign(dim * dim, 0.0);
  }
  double& re_at(std::size_t i, std::size_t j) { return re[j * n + i]; }
  double& im_at(std::size_t i, std::size_t j) { return im[j * n + i]; }
  double re_at(std::size_t i, std::size_t j) const { return re[j * n + i]; }
  double im_at(std::size_t i, std::size_t j) const { return im[j * n + i]; }
};

struct RealMatrix {
  std::size_t n = 0;
  std::vector<double> a;

  explicit RealMatrix(std::size_t dim = 0) { resize(dim); }
  void resize(std::size_t dim) {
    n = dim;
    a.assign(dim * dim, 0.0);
  }
  double& at(std::size_t i, std::size_t j) { return a[j * n + i]; }
  double at(std::size_t i, std::size_t j) const { return a[j * n + i]; }
};

// Haar-distributed unitary sampler: complex Ginibre matrix, in-place
// Householder QR, then each Q column is scaled by the phase of the matching
// diagonal entry of R.  That last step makes the factorization the one with
// positive diagonal R, whose Q factor carries exactly Haar measure; plain
// QR without it does not.  Buffers are reused across calls, so keep one
// sampler per thread.
class HaarUnitarySampler {
public:
  explicit HaarUnitarySampler(std::size_t n);
  void sample(RngStream& rng, ComplexMatrix& out);
  std::size_t dim() const { return n_; }

private:
  std::size_t n_;
  ComplexMatrix a_;
  std::vector<double> tau_;
  std::vector<double> phase_re_, phase_im_;
};

// Same construction over the reals: Ginibre, QR, then column sign fix.
class HaarOrthogonalSampler {
public:
  explicit HaarOrthogonalSampler(std::size_t n);
  void sample(RngStream& rng, RealMatrix& out);
  std::size_t dim() const { return n_; }

private:
  std::size_t n_;
  RealMatrix a_;
  std::vector<double> tau_;
  std::vector<double> sign_;
};

// max_ij |(Q Q^H - I)_ij|, the unitarity residual used by tests.
double unitarity_residual(const ComplexMatrix& q);
double orthogonality_residual(const RealMatrix& q);

}  // namespace haarbridge
