#include "haarbridge/limits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "haarbridge/stats.hpp"

namespace haarbridge {

namespace {

void check_unit(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("argument outside [0,1]");
}

}  // namespace

double bridge_cov(double s, double sp) {
  check_unit(s);
  check_unit(sp);
  return std::min(s, sp) - s * sp;
}

double kernel_eval(const CovKernel2D& k, std::pair<double, double> p, std::pair<double, double> q) {
  if (!(k.scale >= 0.0)) throw std::invalid_argument("kernel scale must be nonnegative");
  auto [s, t] = p;
  auto [sp, tp] = q;
  check_unit(s); check_unit(t); check_unit(sp); check_unit(tp);
  double value = 0.0;
  switch (k.kind) {
    case KernelKind::BivariateBridge:
      value = std::min(s, sp) * std::min(t, tp) - s * sp * t * tp;
      break;
    case KernelKind::TiedDownBridge:
    case KernelKind::ProductBridge:
      value = (std::min(s, sp) - s * sp) * (std::min(t, tp) - t * tp);
      break;
    case KernelKind::CalWInfinity:
      value = s * sp * std::min(t, tp) + std::min(s, sp) * t * tp - 2.0 * s * sp * t * tp;
      break;
  }
  return k.scale * value;
}

double finite_n_k(std::size_t n, EnsembleKind kind) {
  if (n == 0) throw std::invalid_argument("n must be positive");
  double nd = static_cast<double>(n);
  switch (kind) {
    case EnsembleKind::HaarUnitary: return 2.0 * nd / (nd + 1.0);
    case EnsembleKind::HaarOrthogonal: return 3.0 * nd / (nd + 2.0);
    case EnsembleKind::Dft: return 1.0;
    case EnsembleKind::Permutation: return nd;
  }
  throw std::invalid_argument("unknown ensemble");
}

double finite_n_z_cov(std::size_t n, EnsembleKind kind, std::pair<double, double> p,
                      std::pair<double, double> q) {
  return bridge_cov(p.first, q.first) * bridge_cov(p.second, q.second) * finite_n_k(n, kind);
}

std::pair<std::vector<double>, std::vector<double>> gauss_hermite(std::size_t order) {
  if (order == 0) throw std::invalid_argument("order must be positive");
  const std::size_t n = order;
  std::vector<double> x(n), w(n);
  const double pim4 = 0.75112554446494248285870300477623;  // pi^(-1/4)
  const std::size_t half = (n + 1) / 2;
  double z = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    // Classic initial guesses for the largest roots, then inward recurrence.
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[n - 1];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[n - 2];
    } else {
      z = 2.0 * z - x[n - i + 1];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-15) break;
    }
    x[n - 1 - i] = z;
    x[i] = -z;
    w[n - 1 - i] = 2.0 / (pp * pp);
    w[i] = w[n - 1 - i];
  }
  return {x, w};
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t order) {
  if (order == 0) throw std::invalid_argument("order must be positive");
  const std::size_t n = order;
  std::vector<double> x(n), w(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
  return {x, w};
}

namespace {

// int_0^x K0(t) dt for small x via the ascending series of K0, integrated
// term by term.  Accurate to ~1e-16 for x <= 2.
double int_k0_series(double x) {
  const double egamma = 0.57721566490153286060651209008240;
  double lx = std::log(0.5 * x);
  double q = 0.25 * x * x;
  double ck = 1.0;   // (x^2/4)^k / (k!)^2
  double hk = 0.0;   // harmonic number
  double sum = 0.0;
  for (int k = 0; k < 40; ++k) {
    if (k > 0) {
      ck *= q / (static_cast<double>(k) * static_cast<double>(k));
      hk += 1.0 / static_cast<double>(k);
    }
    double inv = 1.0 / (2.0 * k + 1.0);
    double term = ck * x * inv * (hk - egamma - lx + inv);
    sum += term;
    if (k > 3 && std::fabs(term) < 1e-18 * std::fabs(sum)) break;
  }
  return sum;
}

const std::pair<std::vector<double>, std::vector<double>>& gl32() {
  static const auto nodes = gauss_legendre(32);
  return nodes;
}

double int_k0(double x) {
  if (x <= 0.0) return 0.0;
  if (x <= 2.0) return int_k0_series(x);
  double upper = std::min(x, 36.0);  // K0(36) ~ 5e-17, the tail is negligible
  const auto& [gx, gw] = gl32();
  double mid = 0.5 * (upper + 2.0);
  double rad = 0.5 * (upper - 2.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    acc += gw[i] * std::cyl_bessel_k(0.0, mid + rad * gx[i]);
  }
  return int_k0_series(2.0) + rad * acc;
}

const std::pair<std::vector<double>, std::vector<double>>& gh64() {
  static const auto nodes = gauss_hermite(64);
  return nodes;
}

}  // namespace

double product_normal_cdf(double x) {
  double tail = int_k0(std::fabs(x)) / std::numbers::pi;
  return x >= 0.0 ? 0.5 + tail : 0.5 - tail;
}

double marginal_limit_cdf(double x, double a) {
  if (a < 0.0) throw std::invalid_argument("a must be nonnegative");
  if (a < 1e-8) return product_normal_cdf(x);
  const auto& [z, w] = gh64();
  const std::size_t m = z.size();
  // E Phi((x - N2 N3)/a) over independent normals N2 = sqrt(2) z_i etc.
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      row += w[j] * normal_cdf((x - 2.0 * z[i] * z[j]) / a);
    }
    acc += w[i] * row;
  }
  return std::clamp(acc / std::numbers::pi, 0.0, 1.0);
}

}  // namespace haarbridge
