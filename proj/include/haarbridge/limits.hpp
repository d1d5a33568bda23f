#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "haarbridge/ensembles.hpp"

namespace haarbridge {

// Covariance of the Brownian bridge, g(s,s') = min(s,s') - s*s'.
double bridge_cov(double s, double sp);

// Covariance kernels of the two-parameter limit processes, as functions of
// ((s,t),(s',t')) on [0,1]^4.
enum class KernelKind {
  BivariateBridge,   // min(s,s')min(t,t') - ss'tt'
  TiedDownBridge,    // g(s,s') g(t,t')
  CalWInfinity,      // ss' min(t,t') + min(s,s') tt' - 2 ss'tt'
  ProductBridge,     // product of independent bridges; same kernel as TiedDownBridge
};

struct CovKernel2D {
  KernelKind kind = KernelKind::TiedDownBridge;
  double scale = 1.0;
};

double kernel_eval(const CovKernel2D& k, std::pair<double, double> p, std::pair<double, double> q);

// Exact finite-n covariance of the doubly centered process: for every
// ensemble, Cov(Z(s,t), Z(s',t')) = g(s,s') g(t,t') K_n where K_n is the sum
// of E|U_ij|^4 over one row and all columns times n, i.e. sum_ij E|U_ij|^4.
double finite_n_k(std::size_t n, EnsembleKind kind);
double finite_n_z_cov(std::size_t n, EnsembleKind kind, std::pair<double, double> p,
                      std::pair<double, double> q);

// CDF of the symmetric law a*N1 + N2*N3 with N1, N2, N3 independent standard
// normals.  For a > 0 the conditional normal CDF is integrated with tensor
// Gauss-Hermite quadrature; at a = 0 the product-normal CDF is used.
// Absolute accuracy is better than 1e-6 everywhere.
double marginal_limit_cdf(double x, double a);

struct MarginalLimitLaw {
  double a = 1.0;  // sqrt(1/beta'); 0 selects the pure product case
  double cdf(double x) const { return marginal_limit_cdf(x, a); }
  double variance() const { return a * a + 1.0; }
};

// Gauss-Hermite nodes/weights for weight exp(-x^2) (ascending nodes), and
// Gauss-Legendre on [-1,1].  Exposed for the quadrature self-tests.
std::pair<std::vector<double>, std::vector<double>> gauss_hermite(std::size_t order);
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t order);

// CDF of the product of two independent standard normals.
double product_normal_cdf(double x);

}  // namespace haarbridge
