#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "haarbridge/linalg.hpp"
#include "haarbridge/rng.hpp"

namespace haarbridge {

// The four matrix ensembles under study.  All of them are unitary, so the
// squared-modulus matrix below is doubly stochastic.
enum class EnsembleKind { HaarUnitary, HaarOrthogonal, Dft, Permutation };

const char* ensemble_name(EnsembleKind kind);
std::optional<EnsembleKind> parse_ensemble(const std::string& name);

// Dirichlet index: 1 for the complex ensembles, 1/2 for the real one.  The
// permutation ensemble has no Dirichlet description, hence no value.
std::optional<double> ensemble_beta_prime(EnsembleKind kind);

// A sampled (or deterministic) unitary matrix, complex entries.
struct SquareMatrix {
  EnsembleKind kind = EnsembleKind::HaarUnitary;
  std::size_t n = 0;
  std::vector<double> re, im;  // column-major

  std::complex<double> entry(std::size_t i, std::size_t j) const {
    return {re[j * n + i], im[j * n + i]};
  }
};

// Squared moduli w_ij = |U_ij|^2.  Every row and column sums to 1.
struct WeightMatrix {
  std::size_t n = 0;
  std::vector<double> w;  // column-major

  double at(std::size_t i, std::size_t j) const { return w[j * n + i]; }
  // Centered entry v_ij = w_ij - 1/n.
  double centered(std::size_t i, std::size_t j) const { return w[j * n + i] - 1.0 / static_cast<double>(n); }
  const double* col(std::size_t j) const { return w.data() + j * n; }
};

SquareMatrix sample_haar_unitary(std::size_t n, RngStream& rng);
SquareMatrix sample_haar_orthogonal(std::size_t n, RngStream& rng);
SquareMatrix dft_matrix(std::size_t n);
SquareMatrix sample_permutation_matrix(std::size_t n, RngStream& rng);
SquareMatrix sample_matrix(EnsembleKind kind, std::size_t n, RngStream& rng);

WeightMatrix weight_matrix(const SquareMatrix& u);

// Uniform random permutation (Fisher-Yates).  p[i] is the image of i.
std::vector<std::uint32_t> sample_permutation(std::size_t n, RngStream& rng);

// Dirichlet(beta', ..., beta') vector of length n via normalized gammas.
// 2*beta' must be a positive integer (the only orders that arise here).
std::vector<double> sample_dirichlet(std::size_t n, double beta_prime, RngStream& rng);

// Reusable sampler producing weight matrices directly; this is the hot path
// for the Monte Carlo experiments.  One instance per thread.
class WeightSampler {
public:
  WeightSampler(EnsembleKind kind, std::size_t n);
  void sample(RngStream& rng, WeightMatrix& out);
  EnsembleKind kind() const { return kind_; }
  std::size_t dim() const { return n_; }

private:
  EnsembleKind kind_;
  std::size_t n_;
  std::optional<HaarUnitarySampler> unitary_;
  std::optional<HaarOrthogonalSampler> orthogonal_;
  ComplexMatrix cbuf_;
  RealMatrix rbuf_;
};

}  // namespace haarbridge
