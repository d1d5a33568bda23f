#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace haarbridge {

// Pairwise summation with a shape that depends only on the length, so totals
// are bit-identical however the data was produced.
double pairwise_sum(const double* x, std::size_t m);
inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

struct EstimateWithCI {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;

  double z_score(double oracle) const;
};

// Sample mean with standard error of the mean.
EstimateWithCI mean_estimate(const std::vector<double>& x);

// Variance estimate for a statistic with known zero mean: mean of squares,
// with the standard error derived from the fourth moment.
EstimateWithCI zero_mean_variance_estimate(const std::vector<double>& x);

// Unbiased sample variance (mean unknown).
double sample_variance(const std::vector<double>& x);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
  std::size_t sample_size = 0;
};

// Kolmogorov tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2),
// truncated at 100 terms.
double kolmogorov_q(double lambda);

// One-sample KS against a continuous CDF; p-value from the asymptotic law.
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

// Two-sample KS; ties between the samples are handled by advancing both
// sides through equal values before the gap is measured.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Regularized incomplete gamma P(a, x) and its complement.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Upper-tail p-value of a chi-square statistic.
double chi_square_p_value(double stat, int dof);

// Pearson chi-square p-value for observed counts against expected
// probabilities (expected counts must all be positive).
double chi_square_gof(const std::vector<std::size_t>& counts, const std::vector<double>& probs);

// Standard normal CDF.
double normal_cdf(double x);

// Jacobi eigenvalue iteration for small symmetric matrices (row-major,
// dim*dim).  Returns eigenvalues in ascending order.
std::vector<double> symmetric_eigenvalues(std::vector<double> m, std::size_t dim);

}  // namespace haarbridge
