#pragma once

#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "haarbridge/ensembles.hpp"
#include "haarbridge/limits.hpp"
#include "haarbridge/moments.hpp"
#include "haarbridge/processes.hpp"
#include "haarbridge/rng.hpp"
#include "haarbridge/stats.hpp"

namespace haarbridge {

// Seed and worker count shared by every experiment.  Replica r of the
// experiment salted `salt` always draws from RngStream(seed,
// replica_stream(salt, r)), so results do not depend on scheduling.
struct RunContext {
  std::uint64_t seed = 7;
  int workers = 0;  // 0 = hardware concurrency

  int resolved_workers() const {
    if (workers > 0) return workers;
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
  }
};

struct ExperimentConfig {
  EnsembleKind ensemble = EnsembleKind::HaarUnitary;
  std::vector<std::size_t> n_values;
  std::size_t replicas = 1;
  GridSpec grid = GridSpec::default_grid();
  std::uint64_t seed = 7;
  int workers = 0;
  std::string output_path;

  void validate() const;
};

// Composite experiment salt; every (experiment, ensemble, n, extra)
// combination gets its own region of stream space.
std::uint64_t experiment_salt(std::uint64_t base, EnsembleKind kind, std::size_t n,
                              std::uint64_t extra = 0);

// Evaluates fn(replica, rng, out + replica * width) for every replica,
// statically partitioned over threads.  The worker factory is invoked once
// per thread so samplers can reuse buffers.  Output is indexed by replica,
// so any later reduction is independent of the thread count.
template <class MakeWorker>
std::vector<double> run_replicas_flat(const RunContext& ctx, std::uint64_t salt, std::size_t m,
                                      std::size_t width, MakeWorker make_worker) {
  std::vector<double> out(m * width);
  const int workers = std::min<std::size_t>(ctx.resolved_workers(), std::max<std::size_t>(m, 1));
  auto run_range = [&](std::size_t lo, std::size_t hi) {
    auto worker = make_worker();
    for (std::size_t r = lo; r < hi; ++r) {
      RngStream rng(ctx.seed, replica_stream(salt, r));
      worker(r, rng, out.data() + r * width);
    }
  };
  if (workers <= 1) {
    run_range(0, m);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
      std::size_t lo = m * t / workers;
      std::size_t hi = m * (t + 1) / workers;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

// Column `idx` of a flat replica-major result.
std::vector<double> column_of(const std::vector<double>& flat, std::size_t width, std::size_t idx);

struct AnovaCheckResult {
  EnsembleKind kind;
  std::size_t n = 0;
  std::size_t replicas = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;  // 1e-8 * n
  bool pass = false;
};

// Max over replicas and the default grid of the decomposition residual
// |(CalT - n s t) - CalZ - sqrt(n) CalW|; exact up to rounding for every
// doubly stochastic weight matrix.
AnovaCheckResult anova_check(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                             std::size_t m);

struct PointPair {
  double s = 0.5, t = 0.5, sp = 0.5, tp = 0.5;
};

struct CovariancePoint {
  PointPair points;
  EstimateWithCI estimate;
  double oracle = 0.0;
  double z = 0.0;
};

struct CovarianceResult {
  EnsembleKind kind;
  std::size_t n = 0;
  std::size_t replicas = 0;
  bool brute_force = false;
  std::vector<CovariancePoint> pairs;
  double max_abs_z() const;
};

// MC estimate of E[Z(s,t) Z(s',t')] against the exact finite-n kernel
// g(s,s')g(t,t')K_n.  With brute_force set, Z is evaluated by the direct
// O(n^2) double sum instead of the factored path (oracle validation mode).
CovarianceResult estimate_z_covariance(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                                       std::size_t m, const std::vector<PointPair>& pairs,
                                       bool brute_force = false);

// MC covariance of n^{-1/2}(CalT - n s t) against the exact finite-n kernel
// CalWInfinity + g g K_n / n; for permutations that expression collapses to
// the bivariate bridge kernel.
CovarianceResult estimate_calT_covariance(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                                          std::size_t m, const std::vector<PointPair>& pairs);

// Cross moments E[Z(s,t) W(s',t')], exactly zero at every finite n.
CovarianceResult cross_covariance_check(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                                        std::size_t m, const std::vector<PointPair>& pairs);

struct ShatResult {
  EnsembleKind kind;
  std::size_t n = 0;
  std::size_t replicas = 0;
  EstimateWithCI mean;
  double oracle = 0.0;
  double z = 0.0;
  double variance = 0.0;  // sample variance of the replicas
};

// Shat = sum_j (sum_i V_ij X_i)^2 with Gaussian X; mean tends to 1/beta'.
ShatResult shat_experiment(const RunContext& ctx, EnsembleKind kind, std::size_t n, std::size_t m);

struct CharFnPoint {
  double theta = 0.0;
  EstimateWithCI real_diff;  // cos(theta Sigma) - exp(-theta^2 q / 2)
  EstimateWithCI imag_part;  // sin(theta Sigma)
};

struct CharFnResult {
  EnsembleKind kind;
  std::size_t n = 0;
  std::size_t replicas = 0;
  std::vector<CharFnPoint> thetas;
  double max_abs_z() const;
};

// Characteristic-function identity E e^{i theta Sigma} =
// E e^{-theta^2/2 (n^{-1}(sum X)^2 + Shat)}; both sides share (w, X) per
// replica, the left side draws its own Y.
CharFnResult char_function_identity(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                                    std::size_t m, const std::vector<double>& thetas);

struct MarginalKsResult {
  EnsembleKind kind;
  std::size_t n = 0;
  std::size_t replicas = 0;
  double s = 0.5, t = 0.5;
  double a = 1.0;       // law parameter for the scaled-Z marginal
  KsResult z_ks;        // Z/sqrt(g(s,s)g(t,t)) vs the a-law (permutation:
                        // n^{-1/2} scaling vs standard normal)
  double t_sigma = 0.0; // comparator std dev for the T marginal
  KsResult t_ks;        // n^{-1/2}(CalT - n s t) vs N(0, t_sigma^2)
};

MarginalKsResult marginal_ks(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                             std::size_t m, double s, double t);

struct LindebergPoint {
  std::size_t n = 0;
  KsResult ab_ks;            // two-sample KS between A and B
  EstimateWithCI lambda3;    // E Lambda^3 of the swap coefficient
  double lambda3_scaled = 0.0;  // n^2 |mean|
  double lambda3_scaled_se = 0.0;
};

struct LindebergResult {
  EnsembleKind kind;
  std::size_t replicas = 0;
  double s = 0.5, t = 0.5;
  std::vector<LindebergPoint> sweep;
  bool ks_decreasing() const;
};

// A_n uses centered scaled Bernoulli selectors, B_n standard Gaussians; the
// two samples share the weight matrix per replica, so the KS statistic is a
// paired distance between the two designs.
LindebergResult lindeberg_compare(const RunContext& ctx, EnsembleKind kind,
                                  const std::vector<std::size_t>& ns, std::size_t m, double s,
                                  double t, std::size_t lambda_replicas = 200000);

// The (A, B) samples alone, with a caller-chosen extra salt (used by the
// independent-run self check).
std::pair<std::vector<double>, std::vector<double>> lindeberg_samples(
    const RunContext& ctx, std::uint64_t extra_salt, EnsembleKind kind, std::size_t n,
    std::size_t m, double s, double t);

struct SpacingsResult {
  std::size_t identity_n = 0, identity_k = 0, identity_r = 0;
  KsResult identity_ks;  // order-statistic gap vs normalized gamma sums
  struct WindowPoint {
    std::size_t n = 0;
    EstimateWithCI mean;           // of sup_t N_n(t, 1/n)
    double ratio_to_log_n = 0.0;
  };
  std::vector<WindowPoint> window;
  double window_ratio_spread = 0.0;  // max/min of the ratios
};

// Gap C_(k+r) - C_(k) of n uniform order statistics (with sentinels
// C_(0) = 0 and C_(n+1) = 1) against (g_1+...+g_r)/(g_1+...+g_{n+1}); plus
// the sup-window-count growth diagnostic.
SpacingsResult spacings_diagnostics(const RunContext& ctx, std::size_t id_n, std::size_t id_k,
                                    std::size_t id_r, std::size_t id_m,
                                    const std::vector<std::size_t>& window_ns,
                                    const std::vector<std::size_t>& window_ms);

struct OneDimResult {
  std::size_t n = 0;
  std::size_t replicas = 0;
  double beta_prime = 1.0;
  double s = 0.5;
  EstimateWithCI bridge_var;     // Var sqrt(n) B0(s), exact k(n-k)/(n(n b'+1))
  double bridge_oracle = 0.0, bridge_z = 0.0;
  EstimateWithCI weighted_var;   // Var sqrt(n) sum u_i (1_{R<=s} - s)
  double weighted_limit = 0.0;   // (1 + 1/b') s(1-s)
  double weighted_exact = 0.0;   // n (b'+1) s(1-s) / (n b'+1)
  double weighted_z = 0.0;       // against the limit (criterion form)
  EstimateWithCI weight_mean;    // n^{-1} sum (n u_i)^2
  double weight_exact = 0.0;     // n (b'+1)/(n b'+1); the comparison target
  double weight_limit = 0.0;     // 1 + 1/b'
  double weight_z = 0.0;         // against the exact finite-n mean
};

OneDimResult dirichlet_onedim_checks(const RunContext& ctx, std::size_t n, std::size_t m,
                                     double beta_prime, double s = 0.5);

struct IdentityCheck {
  std::string name;
  EstimateWithCI lhs, rhs;
  double z = 0.0;  // (lhs - rhs) / combined SE
};

struct HIdentityResult {
  EnsembleKind kind;
  std::size_t n = 0;
  std::size_t replicas = 0;
  std::vector<IdentityCheck> checks;  // h1, h2, h3, devhat
  double max_abs_z() const;
};

// Moment identities between two independent estimator batches: H-moment
// means on one side, V-moment combinations on the other, plus the
// recombination E Shat^2 = n(n-1)E(H11 H22) + 2n(n-1)E(H12^2) + 3n E(H11^2).
HIdentityResult h_identity_checks(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                                  std::size_t m);

struct QuarticLimitResult {
  EnsembleKind kind;
  std::size_t n = 0;
  std::size_t replicas = 0;
  EstimateWithCI scaled_square;  // n^2(n-1)^2 V_11^2 V_22^2
  EstimateWithCI scaled_cross;   // n^2(n-1)^2 V_11 V_12 V_21 V_22
  double square_limit = 0.0, cross_limit = 0.0;
  bool square_in_band = false;   // within 5 SE of [0.7, 1.3] * limit
  bool cross_near_zero = false;  // |mean| <= 5 SE + 0.3
};

QuarticLimitResult quartic_limit_check(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                                       std::size_t m);

struct ZeroTrendResult {
  EnsembleKind kind;
  std::size_t replicas = 0;
  struct Point {
    std::size_t n = 0;
    double median_max_abs = 0.0;  // median over replicas of max grid |n^{-1/2} Z|
  };
  std::vector<Point> sweep;
  bool strictly_decreasing = false;
};

ZeroTrendResult zero_trend(const RunContext& ctx, EnsembleKind kind,
                           const std::vector<std::size_t>& ns, std::size_t m);

// KS p-values are uniform under the null: chi-square p-value of the
// histogram of `batches` KS p-values of uniform samples of size batch_size.
double ks_uniformity_pvalue(const RunContext& ctx, std::size_t batches, std::size_t batch_size);

// One MC pass estimating every exact moment the `moments` module provides
// for the ensemble (|U_11|^{2k} for k=1..4, and the four joint I patterns
// for the orthogonal group).
MomentReport moment_mc_check(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                             std::size_t m);

// MC estimates of the four mixed fourth-power patterns against their
// leading-order values coefficient / n^power.
MomentReport mixed_moment_mc(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                             std::size_t m);

}  // namespace haarbridge
