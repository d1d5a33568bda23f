#include "haarbridge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace haarbridge {

double pairwise_sum(const double* x, std::size_t m) {
  if (m <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += x[i];
    return s;
  }
  std::size_t half = m / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, m - half);
}

double EstimateWithCI::z_score(double oracle) const {
  if (std_error <= 0.0) return mean == oracle ? 0.0 : INFINITY;
  return (mean - oracle) / std_error;
}

EstimateWithCI mean_estimate(const std::vector<double>& x) {
  const std::size_t m = x.size();
  if (m < 2) throw std::invalid_argument("need at least two replicas");
  double mean = pairwise_sum(x) / static_cast<double>(m);
  std::vector<double> sq(m);
  for (std::size_t i = 0; i < m; ++i) {
    double d = x[i] - mean;
    sq[i] = d * d;
  }
  double var = pairwise_sum(sq) / static_cast<double>(m - 1);
  return {mean, std::sqrt(var / static_cast<double>(m)), m};
}

EstimateWithCI zero_mean_variance_estimate(const std::vector<double>& x) {
  const std::size_t m = x.size();
  if (m < 2) throw std::invalid_argument("need at least two replicas");
  std::vector<double> sq(m), qu(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = x[i] * x[i];
    sq[i] = s;
    qu[i] = s * s;
  }
  double m2 = pairwise_sum(sq) / static_cast<double>(m);
  double m4 = pairwise_sum(qu) / static_cast<double>(m);
  double var_of_var = (m4 - m2 * m2) / static_cast<double>(m);
  return {m2, std::sqrt(std::max(var_of_var, 0.0)), m};
}

double sample_variance(const std::vector<double>& x) {
  const std::size_t m = x.size();
  if (m < 2) throw std::invalid_argument("need at least two replicas");
  double mean = pairwise_sum(x) / static_cast<double>(m);
  std::vector<double> sq(m);
  for (std::size_t i = 0; i < m; ++i) {
    double d = x[i] - mean;
    sq[i] = d * d;
  }
  return pairwise_sum(sq) / static_cast<double>(m - 1);
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double q = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    q += sign * std::exp(-2.0 * k * k * lambda * lambda);
    sign = -sign;
  }
  q *= 2.0;
  return std::clamp(q, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  const std::size_t m = sample.size();
  if (m == 0) throw std::invalid_argument("empty sample");
  std::sort(sample.begin(), sample.end());
  double d = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double f = cdf(sample[i]);
    double lo = f - static_cast<double>(i) / static_cast<double>(m);
    double hi = static_cast<double>(i + 1) / static_cast<double>(m) - f;
    d = std::max({d, lo, hi});
  }
  double lambda = std::sqrt(static_cast<double>(m)) * d;
  return {d, kolmogorov_q(lambda), m};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    double gap = std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb);
    if (gap > d) d = gap;
  }
  double lambda = d * std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q(lambda), a.size() + b.size()};
}

namespace {

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x), modified Lentz.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int k = 1; k < 500; ++k) {
    double an = -k * (k - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_p domain");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_p_value(double stat, int dof) {
  if (dof <= 0) throw std::invalid_argument("dof must be positive");
  if (stat <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * stat);
}

double chi_square_gof(const std::vector<std::size_t>& counts, const std::vector<double>& probs) {
  if (counts.size() != probs.size() || counts.size() < 2) {
    throw std::invalid_argument("counts/probs size mismatch");
  }
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double expect = probs[i] * static_cast<double>(total);
    if (expect <= 0.0) throw std::invalid_argument("expected count must be positive");
    double d = static_cast<double>(counts[i]) - expect;
    stat += d * d / expect;
  }
  return chi_square_p_value(stat, static_cast<int>(counts.size()) - 1);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440084436210485);
}

std::vector<double> symmetric_eigenvalues(std::vector<double> m, std::size_t dim) {
  if (m.size() != dim * dim) throw std::invalid_argument("matrix size mismatch");
  auto at = [&](std::size_t i, std::size_t j) -> double& { return m[i * dim + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = i + 1; j < dim; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-28) break;
    for (std::size_t p = 0; p < dim; ++p) {
      for (std::size_t q = p + 1; q < dim; ++q) {
        double apq = at(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        double theta = 0.5 * (at(q, q) - at(p, p)) / apq;
        double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < dim; ++k) {
          double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < dim; ++k) {
          double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(dim);
  for (std::size_t i = 0; i < dim; ++i) ev[i] = at(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace haarbridge
