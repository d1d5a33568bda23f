#include "haarbridge/ensembles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace haarbridge {

const char* ensemble_name(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::HaarUnitary: return "unitary";
    case EnsembleKind::HaarOrthogonal: return "orthogonal";
    case EnsembleKind::Dft: return "dft";
    case EnsembleKind::Permutation: return "permutation";
  }
  return "?";
}

std::optional<EnsembleKind> parse_ensemble(const std::string& name) {
  if (name == "unitary") return EnsembleKind::HaarUnitary;
  if (name == "orthogonal") return EnsembleKind::HaarOrthogonal;
  if (name == "dft") return EnsembleKind::Dft;
  if (name == "permutation") return EnsembleKind::Permutation;
  return std::nullopt;
}

std::optional<double> ensemble_beta_prime(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::HaarUnitary: return 1.0;
    case EnsembleKind::HaarOrthogonal: return 0.5;
    case EnsembleKind::Dft: return 1.0;
    case EnsembleKind::Permutation: return std::nullopt;
  }
  return std::nullopt;
}

SquareMatrix sample_haar_unitary(std::size_t n, RngStream& rng) {
  HaarUnitarySampler sampler(n);
  ComplexMatrix q;
  sampler.sample(rng, q);
  SquareMatrix out;
  out.kind = EnsembleKind::HaarUnitary;
  out.n = n;
  out.re = std::move(q.re);
  out.im = std::move(q.im);
  return out;
}

SquareMatrix sample_haar_orthogonal(std::size_t n, RngStream& rng) {
  HaarOrthogonalSampler sampler(n);
  RealMatrix q;
  sampler.sample(rng, q);
  SquareMatrix out;
  out.kind = EnsembleKind::HaarOrthogonal;
  out.n = n;
  out.re = std::move(q.a);
  out.im.assign(n * n, 0.0);
  return out;
}

SquareMatrix dft_matrix(std::size_t n) {
  if (n == 0) throw std::invalid_argument("matrix dimension must be positive");
  SquareMatrix out;
  out.kind = EnsembleKind::Dft;
  out.n = n;
  out.re.assign(n * n, 0.0);
  out.im.assign(n * n, 0.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      // exponent -2*pi*i*j*k/n, reduced mod n to keep the angle small
      std::size_t e = (i * j) % n;
      double ang = -2.0 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(n);
      out.re[j * n + i] = scale * std::cos(ang);
      out.im[j * n + i] = scale * std::sin(ang);
    }
  }
  return out;
}

std::vector<std::uint32_t> sample_permutation(std::size_t n, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("permutation size must be positive");
  std::vector<std::uint32_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(rng.bounded(i + 1));
    std::swap(p[i], p[j]);
  }
  return p;
}

SquareMatrix sample_permutation_matrix(std::size_t n, RngStream& rng) {
  auto p = sample_permutation(n, rng);
  SquareMatrix out;
  out.kind = EnsembleKind::Permutation;
  out.n = n;
  out.re.assign(n * n, 0.0);
  out.im.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out.re[static_cast<std::size_t>(p[i]) * n + i] = 1.0;
  return out;
}

SquareMatrix sample_matrix(EnsembleKind kind, std::size_t n, RngStream& rng) {
  switch (kind) {
    case EnsembleKind::HaarUnitary: return sample_haar_unitary(n, rng);
    case EnsembleKind::HaarOrthogonal: return sample_haar_orthogonal(n, rng);
    case EnsembleKind::Dft: return dft_matrix(n);
    case EnsembleKind::Permutation: return sample_permutation_matrix(n, rng);
  }
  throw std::invalid_argument("unknown ensemble");
}

WeightMatrix weight_matrix(const SquareMatrix& u) {
  WeightMatrix w;
  w.n = u.n;
  w.w.resize(u.n * u.n);
  for (std::size_t idx = 0; idx < w.w.size(); ++idx) {
    w.w[idx] = u.re[idx] * u.re[idx] + u.im[idx] * u.im[idx];
  }
  return w;
}

std::vector<double> sample_dirichlet(std::size_t n, double beta_prime, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("dirichlet length must be positive");
  double twice = 2.0 * beta_prime;
  int twice_i = static_cast<int>(std::lround(twice));
  if (twice_i <= 0 || std::fabs(twice - twice_i) > 1e-12) {
    throw std::invalid_argument("beta' must be a positive half-integer");
  }
  std::vector<double> u(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = rng.gamma_half_integer(twice_i);
    total += u[i];
  }
  double inv = 1.0 / total;
  for (double& x : u) x *= inv;
  return u;
}

WeightSampler::WeightSampler(EnsembleKind kind, std::size_t n) : kind_(kind), n_(n) {
  if (n == 0) throw std::invalid_argument("matrix dimension must be positive");
  switch (kind) {
    case EnsembleKind::HaarUnitary:
      unitary_.emplace(n);
      break;
    case EnsembleKind::HaarOrthogonal:
      orthogonal_.emplace(n);
      break;
    case EnsembleKind::Dft:
    case EnsembleKind::Permutation:
      break;
  }
}

void WeightSampler::sample(RngStream& rng, WeightMatrix& out) {
  const std::size_t n = n_;
  out.n = n;
  out.w.resize(n * n);
  switch (kind_) {
    case EnsembleKind::HaarUnitary: {
      unitary_->sample(rng, cbuf_);
      for (std::size_t idx = 0; idx < n * n; ++idx) {
        out.w[idx] = cbuf_.re[idx] * cbuf_.re[idx] + cbuf_.im[idx] * cbuf_.im[idx];
      }
      break;
    }
    case EnsembleKind::HaarOrthogonal: {
      orthogonal_->sample(rng, rbuf_);
      for (std::size_t idx = 0; idx < n * n; ++idx) out.w[idx] = rbuf_.a[idx] * rbuf_.a[idx];
      break;
    }
    case EnsembleKind::Dft: {
      double v = 1.0 / static_cast<double>(n);
      for (std::size_t idx = 0; idx < n * n; ++idx) out.w[idx] = v;
      break;
    }
    case EnsembleKind::Permutation: {
      auto p = sample_permutation(n, rng);
      std::fill(out.w.begin(), out.w.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) out.w[static_cast<std::size_t>(p[i]) * n + i] = 1.0;
      break;
    }
  }
}

}  // namespace haarbridge
