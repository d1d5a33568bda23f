#include "haarbridge/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "haarbridge/kernels.hpp"

namespace haarbridge {

namespace {

// Base salts; each experiment owns a disjoint region of stream space.
constexpr std::uint64_t kSaltAnova = 1;
constexpr std::uint64_t kSaltMoments = 2;
constexpr std::uint64_t kSaltMixed = 3;
constexpr std::uint64_t kSaltShat = 4;
constexpr std::uint64_t kSaltCharFn = 5;
constexpr std::uint64_t kSaltZCov = 6;
constexpr std::uint64_t kSaltZCovBrute = 7;
constexpr std::uint64_t kSaltTCov = 8;
constexpr std::uint64_t kSaltCrossCov = 9;
constexpr std::uint64_t kSaltMarginal = 10;
constexpr std::uint64_t kSaltLindebergAB = 11;
constexpr std::uint64_t kSaltLindebergL3 = 12;
constexpr std::uint64_t kSaltSpacingsId = 13;
constexpr std::uint64_t kSaltSpacingsWin = 14;
constexpr std::uint64_t kSaltOneDim = 15;
constexpr std::uint64_t kSaltHIdentA = 16;
constexpr std::uint64_t kSaltHIdentB = 17;
constexpr std::uint64_t kSaltQuartic = 18;
constexpr std::uint64_t kSaltZeroTrend = 19;
constexpr std::uint64_t kSaltKsSelf = 20;

double safe_z(double lhs, double rhs, double se) {
  if (se > 0.0) return (lhs - rhs) / se;
  return lhs == rhs ? 0.0 : std::numeric_limits<double>::infinity();
}

// Distinct evaluation points of a pair list, as a grid plus flat indices.
struct PointGrid {
  GridSpec grid;
  std::vector<std::array<std::size_t, 2>> idx;  // per pair: flat s*nt+t of p, q
};

std::size_t axis_index(const std::vector<double>& axis, double v) {
  auto it = std::lower_bound(axis.begin(), axis.end(), v);
  return static_cast<std::size_t>(it - axis.begin());
}

PointGrid build_point_grid(const std::vector<PointPair>& pairs) {
  PointGrid pg;
  for (const auto& p : pairs) {
    pg.grid.s_points.push_back(p.s);
    pg.grid.s_points.push_back(p.sp);
    pg.grid.t_points.push_back(p.t);
    pg.grid.t_points.push_back(p.tp);
  }
  for (auto* axis : {&pg.grid.s_points, &pg.grid.t_points}) {
    std::sort(axis->begin(), axis->end());
    axis->erase(std::unique(axis->begin(), axis->end()), axis->end());
  }
  pg.grid.validate();
  const std::size_t nt = pg.grid.t_points.size();
  for (const auto& p : pairs) {
    pg.idx.push_back({axis_index(pg.grid.s_points, p.s) * nt + axis_index(pg.grid.t_points, p.t),
                      axis_index(pg.grid.s_points, p.sp) * nt +
                          axis_index(pg.grid.t_points, p.tp)});
  }
  return pg;
}

// Direct O(n^2) double sum for Z(s,t), used by the oracle-validation path.
double brute_force_z(const WeightMatrix& w, const TruncationDraw& d, double s, double t) {
  const std::size_t n = w.n;
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double b = (d.c[j] <= t ? 1.0 : 0.0) - t;
    const double* col = w.col(j);
    double colacc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = (d.r[i] <= s ? 1.0 : 0.0) - s;
      colacc += col[i] * a;
    }
    acc += colacc * b;
  }
  return acc;
}

// W(s,t) = s F(t) + t G(s) straight from the selector draws.
double eval_w_point(const TruncationDraw& d, double s, double t) {
  const std::size_t n = d.r.size();
  double f = 0.0, g = 0.0;
  for (std::size_t j = 0; j < n; ++j) f += (d.c[j] <= t ? 1.0 : 0.0) - t;
  for (std::size_t i = 0; i < n; ++i) g += (d.r[i] <= s ? 1.0 : 0.0) - s;
  const double root = std::sqrt(static_cast<double>(n));
  return s * f / root + t * g / root;
}

struct WeightWorkerState {
  WeightSampler sampler;
  WeightMatrix w;
  TruncationDraw d;
  WeightWorkerState(EnsembleKind kind, std::size_t n) : sampler(kind, n) {}
};

EstimateWithCI column_estimate(const std::vector<double>& flat, std::size_t width,
                               std::size_t idx) {
  return mean_estimate(column_of(flat, width, idx));
}

double median_of(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const std::size_t m = x.size();
  if (m == 0) return 0.0;
  if (m % 2 == 1) return x[m / 2];
  return 0.5 * (x[m / 2 - 1] + x[m / 2]);
}

double require_beta_prime(EnsembleKind kind) {
  auto bp = ensemble_beta_prime(kind);
  if (!bp) {
    throw std::invalid_argument(std::string("ensemble ") + ensemble_name(kind) +
                                " has no Dirichlet weight description");
  }
  return *bp;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n_values.empty()) throw std::invalid_argument("at least one matrix dimension is required");
  for (std::size_t n : n_values) {
    if (n == 0) throw std::invalid_argument("matrix dimension must be positive");
  }
  if (replicas == 0) throw std::invalid_argument("replica count must be positive");
  grid.validate();
}

std::uint64_t experiment_salt(std::uint64_t base, EnsembleKind kind, std::size_t n,
                              std::uint64_t extra) {
  return base | (static_cast<std::uint64_t>(kind) << 8) | (static_cast<std::uint64_t>(n) << 16) |
         (extra << 44);
}

std::vector<double> column_of(const std::vector<double>& flat, std::size_t width,
                              std::size_t idx) {
  const std::size_t m = flat.size() / width;
  std::vector<double> out(m);
  for (std::size_t r = 0; r < m; ++r) out[r] = flat[r * width + idx];
  return out;
}

double CovarianceResult::max_abs_z() const {
  double z = 0.0;
  for (const auto& p : pairs) z = std::max(z, std::abs(p.z));
  return z;
}

double CharFnResult::max_abs_z() const {
  double z = 0.0;
  for (const auto& p : thetas) {
    z = std::max(z, std::abs(p.real_diff.z_score(0.0)));
    z = std::max(z, std::abs(p.imag_part.z_score(0.0)));
  }
  return z;
}

bool LindebergResult::ks_decreasing() const {
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    if (!(sweep[i].ab_ks.statistic < sweep[i - 1].ab_ks.statistic)) return false;
  }
  return sweep.size() >= 2;
}

double HIdentityResult::max_abs_z() const {
  double z = 0.0;
  for (const auto& c : checks) z = std::max(z, std::abs(c.z));
  return z;
}

AnovaCheckResult anova_check(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                             std::size_t m) {
  const GridSpec grid = GridSpec::default_grid();
  auto flat = run_replicas_flat(ctx, experiment_salt(kSaltAnova, kind, n), m, 1, [&]() {
    auto st = std::make_shared<WeightWorkerState>(kind, n);
    return [st, &grid, n](std::size_t, RngStream& rng, double* out) {
      st->sampler.sample(rng, st->w);
      st->d = sample_truncation(n, rng);
      out[0] = check_anova_identity(st->w, st->d, grid);
    };
  });
  AnovaCheckResult res;
  res.kind = kind;
  res.n = n;
  res.replicas = m;
  res.max_residual = *std::max_element(flat.begin(), flat.end());
  res.tolerance = 1e-8 * static_cast<double>(n);
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

CovarianceResult estimate_z_covariance(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                                       std::size_t m, const std::vector<PointPair>& pairs,
                                       bool brute_force) {
  const PointGrid pg = build_point_grid(pairs);
  const std::size_t width = pairs.size();
  const std::uint64_t salt =
      experiment_salt(brute_force ? kSaltZCovBrute : kSaltZCov, kind, n);
  auto flat = run_replicas_flat(ctx, salt, m, width, [&]() {
    auto st = std::make_shared<WeightWorkerState>(kind, n);
    return [st, &pg, &pairs, n, brute_force](std::size_t, RngStream& rng, double* out) {
      st->sampler.sample(rng, st->w);
      st->d = sample_truncation(n, rng);
      if (brute_force) {
        for (std::size_t k = 0; k < pairs.size(); ++k) {
          const auto& p = pairs[k];
          out[k] = brute_force_z(st->w, st->d, p.s, p.t) * brute_force_z(st->w, st->d, p.sp, p.tp);
        }
      } else {
        ProcessSample zs = eval_calZ(st->w, st->d, pg.grid);
        for (std::size_t k = 0; k < pg.idx.size(); ++k) {
          out[k] = zs.at(pg.idx[k][0]) * zs.at(pg.idx[k][1]);
        }
      }
    };
  });

  CovarianceResult res{kind, n, m, brute_force, {}};
  for (std::size_t k = 0; k < width; ++k) {
    CovariancePoint pt;
    pt.points = pairs[k];
    pt.estimate = column_estimate(flat, width, k);
    pt.oracle = finite_n_z_cov(n, kind, {pairs[k].s, pairs[k].t}, {pairs[k].sp, pairs[k].tp});
    pt.z = safe_z(pt.estimate.mean, pt.oracle, pt.estimate.std_error);
    res.pairs.push_back(pt);
  }
  return res;
}

CovarianceResult estimate_calT_covariance(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                                          std::size_t m, const std::vector<PointPair>& pairs) {
  const PointGrid pg = build_point_grid(pairs);
  const std::size_t width = pairs.size();
  const double root_n = std::sqrt(static_cast<double>(n));
  auto flat = run_replicas_flat(ctx, experiment_salt(kSaltTCov, kind, n), m, width, [&]() {
    auto st = std::make_shared<WeightWorkerState>(kind, n);
    return [st, &pg, &pairs, n, root_n](std::size_t, RngStream& rng, double* out) {
      st->sampler.sample(rng, st->w);
      st->d = sample_truncation(n, rng);
      ProcessSample ts = eval_calT(st->w, st->d, pg.grid);
      for (std::size_t k = 0; k < pg.idx.size(); ++k) {
        const auto& p = pairs[k];
        const double x1 = (ts.at(pg.idx[k][0]) - static_cast<double>(n) * p.s * p.t) / root_n;
        const double x2 = (ts.at(pg.idx[k][1]) - static_cast<double>(n) * p.sp * p.tp) / root_n;
        out[k] = x1 * x2;
      }
    };
  });

  const CovKernel2D wkernel{KernelKind::CalWInfinity, 1.0};
  CovarianceResult res{kind, n, m, false, {}};
  for (std::size_t k = 0; k < width; ++k) {
    const auto& p = pairs[k];
    CovariancePoint pt;
    pt.points = p;
    pt.estimate = column_estimate(flat, width, k);
    pt.oracle = kernel_eval(wkernel, {p.s, p.t}, {p.sp, p.tp}) +
                finite_n_z_cov(n, kind, {p.s, p.t}, {p.sp, p.tp}) / static_cast<double>(n);
    pt.z = safe_z(pt.estimate.mean, pt.oracle, pt.estimate.std_error);
    res.pairs.push_back(pt);
  }
  return res;
}

CovarianceResult cross_covariance_check(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                                        std::size_t m, const std::vector<PointPair>& pairs) {
  const PointGrid pg = build_point_grid(pairs);
  const std::size_t width = pairs.size();
  auto flat = run_replicas_flat(ctx, experiment_salt(kSaltCrossCov, kind, n), m, width, [&]() {
    auto st = std::make_shared<WeightWorkerState>(kind, n);
    return [st, &pg, &pairs, n](std::size_t, RngStream& rng, double* out) {
      st->sampler.sample(rng, st->w);
      st->d = sample_truncation(n, rng);
      ProcessSample zs = eval_calZ(st->w, st->d, pg.grid);
      for (std::size_t k = 0; k < pg.idx.size(); ++k) {
        const auto& p = pairs[k];
        out[k] = zs.at(pg.idx[k][0]) * eval_w_point(st->d, p.sp, p.tp);
      }
    };
  });

  CovarianceResult res{kind, n, m, false, {}};
  for (std::size_t k = 0; k < width; ++k) {
    CovariancePoint pt;
    pt.points = pairs[k];
    pt.estimate = column_estimate(flat, width, k);
    pt.oracle = 0.0;
    pt.z = safe_z(pt.estimate.mean, 0.0, pt.estimate.std_error);
    res.pairs.push_back(pt);
  }
  return res;
}

ShatResult shat_experiment(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                           std::size_t m) {
  if (kind == EnsembleKind::Permutation) {
    throw std::invalid_argument("shat_experiment is defined for the unitary, orthogonal and dft "
                                "ensembles");
  }
  auto flat = run_replicas_flat(ctx, experiment_salt(kSaltShat, kind, n), m, 1, [&]() {
    auto st = std::make_shared<WeightWorkerState>(kind, n);
    auto x = std::make_shared<std::vector<double>>(n);
    return [st, x, n](std::size_t, RngStream& rng, double* out) {
      st->sampler.sample(rng, st->w);
      fill_gaussian(rng, x->data(), n);
      double sx = 0.0;
      for (std::size_t i = 0; i < n; ++i) sx += (*x)[i];
      const double mean = sx / static_cast<double>(n);
      double shat = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double c = rdot(n, st->w.col(j), x->data()) - mean;
        shat += c * c;
      }
      out[0] = shat;
    };
  });

  ShatResult res;
  res.kind = kind;
  res.n = n;
  res.replicas = m;
  const auto col = column_of(flat, 1, 0);
  res.mean = mean_estimate(col);
  res.variance = sample_variance(col);
  res.oracle = kind == EnsembleKind::Dft ? 0.0 : scaled_var_v(n, kind).get_d();
  res.z = safe_z(res.mean.mean, res.oracle, res.mean.std_error);
  return res;
}

CharFnResult char_function_identity(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                                    std::size_t m, const std::vector<double>& thetas) {
  const std::size_t width = 2 * thetas.size();
  auto flat = run_replicas_flat(ctx, experiment_salt(kSaltCharFn, kind, n), m, width, [&]() {
    auto st = std::make_shared<WeightWorkerState>(kind, n);
    auto x = std::make_shared<std::vector<double>>(n);
    auto y = std::make_shared<std::vector<double>>(n);
    return [st, x, y, &thetas, n](std::size_t, RngStream& rng, double* out) {
      st->sampler.sample(rng, st->w);
      fill_gaussian(rng, x->data(), n);
      fill_gaussian(rng, y->data(), n);
      double sx = 0.0;
      for (std::size_t i = 0; i < n; ++i) sx += (*x)[i];
      const double mean = sx / static_cast<double>(n);
      double sigma = 0.0, q = sx * sx / static_cast<double>(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double c = rdot(n, st->w.col(j), x->data());
        sigma += c * (*y)[j];
        const double dev = c - mean;
        q += dev * dev;
      }
      for (std::size_t k = 0; k < thetas.size(); ++k) {
        const double th = thetas[k];
        out[2 * k] = std::cos(th * sigma) - std::exp(-0.5 * th * th * q);
        out[2 * k + 1] = std::sin(th * sigma);
      }
    };
  });

  CharFnResult res;
  res.kind = kind;
  res.n = n;
  res.replicas = m;
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    CharFnPoint pt;
    pt.theta = thetas[k];
    pt.real_diff = column_estimate(flat, width, 2 * k);
    pt.imag_part = column_estimate(flat, width, 2 * k + 1);
    res.thetas.push_back(pt);
  }
  return res;
}

MarginalKsResult marginal_ks(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                             std::size_t m, double s, double t) {
  if (!(s > 0.0 && s < 1.0 && t > 0.0 && t < 1.0)) {
    throw std::invalid_argument("marginal point must be interior to the unit square");
  }
  const double gg = bridge_cov(s, s) * bridge_cov(t, t);
  const double scale = std::sqrt(gg);
  const double root_n = std::sqrt(static_cast<double>(n));
  const std::uint64_t salt = experiment_salt(kSaltMarginal, kind, n);

  std::vector<double> flat;
  if (kind == EnsembleKind::Dft) {
    // Constant weights: both statistics are functions of the two counts.
    flat = run_replicas_flat(ctx, salt, m, 2, [&]() {
      return [n, s, t, scale, root_n](std::size_t, RngStream& rng, double* out) {
        std::size_t cr = 0, cc = 0;
        for (std::size_t i = 0; i < n; ++i) cr += rng.uniform01() <= s ? 1 : 0;
        for (std::size_t j = 0; j < n; ++j) cc += rng.uniform01() <= t ? 1 : 0;
        const double suma = static_cast<double>(cr) - static_cast<double>(n) * s;
        const double sumb = static_cast<double>(cc) - static_cast<double>(n) * t;
        const double z = suma * sumb / static_cast<double>(n);
        const double bigt = static_cast<double>(cr) * static_cast<double>(cc) /
                            static_cast<double>(n);
        out[0] = z / scale;
        out[1] = (bigt - static_cast<double>(n) * s * t) / root_n;
      };
    });
  } else if (kind == EnsembleKind::Permutation) {
    flat = run_replicas_flat(ctx, salt, m, 2, [&]() {
      auto perm = std::make_shared<std::vector<std::uint32_t>>();
      return [perm, n, s, t, scale, root_n](std::size_t, RngStream& rng, double* out) {
        *perm = sample_permutation(n, rng);
        TruncationDraw d = sample_truncation(n, rng);
        double z = 0.0, bigt = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double a = (d.r[i] <= s ? 1.0 : 0.0) - s;
          const double b = (d.c[(*perm)[i]] <= t ? 1.0 : 0.0) - t;
          z += a * b;
          bigt += (d.r[i] <= s && d.c[(*perm)[i]] <= t) ? 1.0 : 0.0;
        }
        out[0] = z / root_n / scale;
        out[1] = (bigt - static_cast<double>(n) * s * t) / root_n;
      };
    });
  } else {
    flat = run_replicas_flat(ctx, salt, m, 2, [&]() {
      auto st = std::make_shared<WeightWorkerState>(kind, n);
      auto yrow = std::make_shared<std::vector<double>>(n);
      return [st, yrow, n, s, t, scale, root_n](std::size_t, RngStream& rng, double* out) {
        st->sampler.sample(rng, st->w);
        st->d = sample_truncation(n, rng);
        std::fill(yrow->begin(), yrow->end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
          if (st->d.c[j] <= t) raxpy(n, -1.0, st->w.col(j), yrow->data());
        }
        double za = 0.0, tot = 0.0;
        std::size_t cr = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const double v = (*yrow)[i] - t;
          tot += v;
          if (st->d.r[i] <= s) {
            za += v;
            ++cr;
          }
        }
        const double z = za - s * tot;
        const double bigt = za + t * static_cast<double>(cr);
        out[0] = z / scale;
        out[1] = (bigt - static_cast<double>(n) * s * t) / root_n;
      };
    });
  }

  MarginalKsResult res;
  res.kind = kind;
  res.n = n;
  res.replicas = m;
  res.s = s;
  res.t = t;
  if (kind == EnsembleKind::Permutation) {
    res.a = 0.0;
    res.z_ks = ks_test(column_of(flat, 2, 0), [](double x) { return normal_cdf(x); });
  } else {
    const double bp = require_beta_prime(kind);
    res.a = kind == EnsembleKind::Dft ? 0.0 : std::sqrt(1.0 / bp);
    const MarginalLimitLaw law{res.a};
    res.z_ks = ks_test(column_of(flat, 2, 0), [law](double x) { return law.cdf(x); });
  }
  const CovKernel2D wkernel{KernelKind::CalWInfinity, 1.0};
  res.t_sigma = std::sqrt(kernel_eval(wkernel, {s, t}, {s, t}) +
                          gg * finite_n_k(n, kind) / static_cast<double>(n));
  const double sigma = res.t_sigma;
  res.t_ks = ks_test(column_of(flat, 2, 1), [sigma](double x) { return normal_cdf(x / sigma); });
  return res;
}

std::pair<std::vector<double>, std::vector<double>> lindeberg_samples(
    const RunContext& ctx, std::uint64_t extra_salt, EnsembleKind kind, std::size_t n,
    std::size_t m, double s, double t) {
  const double rs = 1.0 / std::sqrt(s * (1.0 - s));
  const double rt = 1.0 / std::sqrt(t * (1.0 - t));
  auto flat = run_replicas_flat(
      ctx, experiment_salt(kSaltLindebergAB, kind, n, extra_salt), m, 2, [&]() {
        auto st = std::make_shared<WeightWorkerState>(kind, n);
        auto ra = std::make_shared<std::vector<double>>(n);
        auto ca = std::make_shared<std::vector<double>>(n);
        auto x = std::make_shared<std::vector<double>>(n);
        auto y = std::make_shared<std::vector<double>>(n);
        return [st, ra, ca, x, y, n, s, t, rs, rt](std::size_t, RngStream& rng, double* out) {
          st->sampler.sample(rng, st->w);
          for (std::size_t i = 0; i < n; ++i) {
            (*ra)[i] = ((rng.uniform01() <= s ? 1.0 : 0.0) - s) * rs;
          }
          for (std::size_t j = 0; j < n; ++j) {
            (*ca)[j] = ((rng.uniform01() <= t ? 1.0 : 0.0) - t) * rt;
          }
          fill_gaussian(rng, x->data(), n);
          fill_gaussian(rng, y->data(), n);
          double a = 0.0, b = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            a += rdot(n, st->w.col(j), ra->data()) * (*ca)[j];
            b += rdot(n, st->w.col(j), x->data()) * (*y)[j];
          }
          out[0] = a;
          out[1] = b;
        };
      });
  return {column_of(flat, 2, 0), column_of(flat, 2, 1)};
}

LindebergResult lindeberg_compare(const RunContext& ctx, EnsembleKind kind,
                                  const std::vector<std::size_t>& ns, std::size_t m, double s,
                                  double t, std::size_t lambda_replicas) {
  const double bp = require_beta_prime(kind);
  LindebergResult res;
  res.kind = kind;
  res.replicas = m;
  res.s = s;
  res.t = t;
  for (std::size_t n : ns) {
    LindebergPoint pt;
    pt.n = n;
    auto [a, b] = lindeberg_samples(ctx, 0, kind, n, m, s, t);
    pt.ab_ks = ks_two_sample(std::move(a), std::move(b));

    const double rs = 1.0 / std::sqrt(s * (1.0 - s));
    auto flat = run_replicas_flat(
        ctx, experiment_salt(kSaltLindebergL3, kind, n), lambda_replicas, 1, [&]() {
          return [n, s, rs, bp](std::size_t, RngStream& rng, double* out) {
            std::vector<double> u = sample_dirichlet(n, bp, rng);
            double lam = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              lam += u[i] * ((rng.uniform01() <= s ? 1.0 : 0.0) - s) * rs;
            }
            out[0] = lam * lam * lam;
          };
        });
    pt.lambda3 = mean_estimate(column_of(flat, 1, 0));
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    pt.lambda3_scaled = n2 * std::abs(pt.lambda3.mean);
    pt.lambda3_scaled_se = n2 * pt.lambda3.std_error;
    res.sweep.push_back(pt);
  }
  return res;
}

SpacingsResult spacings_diagnostics(const RunContext& ctx, std::size_t id_n, std::size_t id_k,
                                    std::size_t id_r, std::size_t id_m,
                                    const std::vector<std::size_t>& window_ns,
                                    const std::vector<std::size_t>& window_ms) {
  if (id_r == 0 || id_k + id_r > id_n + 1) {
    throw std::invalid_argument("spacing span must satisfy 1 <= r and k + r <= n + 1");
  }
  if (window_ns.size() != window_ms.size()) {
    throw std::invalid_argument("window sweep needs one replica count per dimension");
  }
  SpacingsResult res;
  res.identity_n = id_n;
  res.identity_k = id_k;
  res.identity_r = id_r;

  const EnsembleKind tag = EnsembleKind::HaarUnitary;  // salts only; no matrices here
  auto gaps = run_replicas_flat(ctx, experiment_salt(kSaltSpacingsId, tag, id_n), id_m, 1, [&]() {
    auto buf = std::make_shared<std::vector<double>>(id_n);
    return [buf, id_n, id_k, id_r](std::size_t, RngStream& rng, double* out) {
      for (std::size_t i = 0; i < id_n; ++i) (*buf)[i] = rng.uniform01();
      std::sort(buf->begin(), buf->end());
      auto order_stat = [&](std::size_t j) {
        if (j == 0) return 0.0;
        if (j == id_n + 1) return 1.0;
        return (*buf)[j - 1];
      };
      out[0] = order_stat(id_k + id_r) - order_stat(id_k);
    };
  });
  auto ratios =
      run_replicas_flat(ctx, experiment_salt(kSaltSpacingsId, tag, id_n, 1), id_m, 1, [&]() {
        return [id_n, id_r](std::size_t, RngStream& rng, double* out) {
          double head = 0.0, total = 0.0;
          for (std::size_t i = 0; i < id_n + 1; ++i) {
            const double g = rng.exponential();
            total += g;
            if (i < id_r) head += g;
          }
          out[0] = head / total;
        };
      });
  res.identity_ks = ks_two_sample(column_of(gaps, 1, 0), column_of(ratios, 1, 0));

  for (std::size_t k = 0; k < window_ns.size(); ++k) {
    const std::size_t n = window_ns[k];
    auto flat =
        run_replicas_flat(ctx, experiment_salt(kSaltSpacingsWin, tag, n), window_ms[k], 1, [&]() {
          auto buf = std::make_shared<std::vector<double>>(n);
          return [buf, n](std::size_t, RngStream& rng, double* out) {
            for (std::size_t i = 0; i < n; ++i) (*buf)[i] = rng.uniform01();
            std::sort(buf->begin(), buf->end());
            const double h = 1.0 / static_cast<double>(n);
            std::size_t best = 0, j = 0;
            for (std::size_t i = 0; i < n; ++i) {
              if (j < i) j = i;
              while (j < n && (*buf)[j] <= (*buf)[i] + h) ++j;
              best = std::max(best, j - i);
            }
            out[0] = static_cast<double>(best);
          };
        });
    SpacingsResult::WindowPoint pt;
    pt.n = n;
    pt.mean = mean_estimate(column_of(flat, 1, 0));
    pt.ratio_to_log_n = pt.mean.mean / std::log(static_cast<double>(n));
    res.window.push_back(pt);
  }
  if (!res.window.empty()) {
    double lo = res.window[0].ratio_to_log_n, hi = lo;
    for (const auto& pt : res.window) {
      lo = std::min(lo, pt.ratio_to_log_n);
      hi = std::max(hi, pt.ratio_to_log_n);
    }
    res.window_ratio_spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  }
  return res;
}

OneDimResult dirichlet_onedim_checks(const RunContext& ctx, std::size_t n, std::size_t m,
                                     double beta_prime, double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must be interior to (0,1)");
  const std::size_t k = truncation_rank(n, s);
  const double root_n = std::sqrt(static_cast<double>(n));
  const EnsembleKind tag =
      beta_prime == 0.5 ? EnsembleKind::HaarOrthogonal : EnsembleKind::HaarUnitary;
  auto flat = run_replicas_flat(ctx, experiment_salt(kSaltOneDim, tag, n), m, 3, [&]() {
    return [n, m, k, s, root_n, beta_prime](std::size_t, RngStream& rng, double* out) {
      (void)m;
      std::vector<double> u = sample_dirichlet(n, beta_prime, rng);
      double head = 0.0, wsum = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i < k) head += u[i];
        wsum += u[i] * ((rng.uniform01() <= s ? 1.0 : 0.0) - s);
        sq += u[i] * u[i];
      }
      out[0] = root_n * (head - static_cast<double>(k) / static_cast<double>(n));
      out[1] = root_n * wsum;
      out[2] = static_cast<double>(n) * sq;
    };
  });

  OneDimResult res;
  res.n = n;
  res.replicas = m;
  res.beta_prime = beta_prime;
  res.s = s;
  const double nb1 = static_cast<double>(n) * beta_prime + 1.0;
  res.bridge_var = zero_mean_variance_estimate(column_of(flat, 3, 0));
  res.bridge_oracle = static_cast<double>(k) * static_cast<double>(n - k) /
                      (static_cast<double>(n) * nb1);
  res.bridge_z = safe_z(res.bridge_var.mean, res.bridge_oracle, res.bridge_var.std_error);
  res.weighted_var = zero_mean_variance_estimate(column_of(flat, 3, 1));
  res.weighted_limit = (1.0 + 1.0 / beta_prime) * s * (1.0 - s);
  res.weighted_exact = static_cast<double>(n) * (beta_prime + 1.0) * s * (1.0 - s) / nb1;
  res.weighted_z = safe_z(res.weighted_var.mean, res.weighted_limit, res.weighted_var.std_error);
  res.weight_mean = mean_estimate(column_of(flat, 3, 2));
  res.weight_exact = static_cast<double>(n) * (beta_prime + 1.0) / nb1;
  res.weight_limit = 1.0 + 1.0 / beta_prime;
  res.weight_z = safe_z(res.weight_mean.mean, res.weight_exact, res.weight_mean.std_error);
  return res;
}

HIdentityResult h_identity_checks(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                                  std::size_t m) {
  if (n < 2) throw std::invalid_argument("the moment identities need n >= 2");
  auto h_block = [](const WeightMatrix& w, double& h11, double& h22, double& h12) {
    h11 = h22 = h12 = 0.0;
    for (std::size_t j = 0; j < w.n; ++j) {
      const double v1 = w.centered(0, j);
      const double v2 = w.centered(1, j);
      h11 += v1 * v1;
      h22 += v2 * v2;
      h12 += v1 * v2;
    }
  };

  auto flat_a = run_replicas_flat(ctx, experiment_salt(kSaltHIdentA, kind, n), m, 4, [&]() {
    auto st = std::make_shared<WeightWorkerState>(kind, n);
    auto x = std::make_shared<std::vector<double>>(n);
    return [st, x, n, h_block](std::size_t, RngStream& rng, double* out) {
      st->sampler.sample(rng, st->w);
      fill_gaussian(rng, x->data(), n);
      double h11, h22, h12;
      h_block(st->w, h11, h22, h12);
      double sx = 0.0;
      for (std::size_t i = 0; i < n; ++i) sx += (*x)[i];
      const double mean = sx / static_cast<double>(n);
      double shat = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double c = rdot(n, st->w.col(j), x->data()) - mean;
        shat += c * c;
      }
      out[0] = h11 * h11;
      out[1] = h11 * h22;
      out[2] = h12 * h12;
      out[3] = shat * shat;
    };
  });

  const double dn = static_cast<double>(n);
  auto flat_b = run_replicas_flat(ctx, experiment_salt(kSaltHIdentB, kind, n), m, 4, [&]() {
    auto st = std::make_shared<WeightWorkerState>(kind, n);
    return [st, n, dn, h_block](std::size_t, RngStream& rng, double* out) {
      st->sampler.sample(rng, st->w);
      double h11, h22, h12;
      h_block(st->w, h11, h22, h12);
      const double v11 = st->w.centered(0, 0);
      const double v12 = st->w.centered(0, 1);
      const double v21 = st->w.centered(1, 0);
      const double v22 = st->w.centered(1, 1);
      const double pairs = dn * (dn - 1.0);
      out[0] = dn * v11 * v11 * v11 * v11 + pairs * v11 * v11 * v12 * v12;
      out[1] = dn * v11 * v11 * v21 * v21 + pairs * v11 * v11 * v22 * v22;
      out[2] = dn * v11 * v11 * v21 * v21 + pairs * v11 * v12 * v21 * v22;
      out[3] = pairs * h11 * h22 + 2.0 * pairs * h12 * h12 + 3.0 * dn * h11 * h11;
    };
  });

  HIdentityResult res;
  res.kind = kind;
  res.n = n;
  res.replicas = m;
  const char* names[4] = {"h1_row_gram_square", "h2_diagonal_product", "h3_offdiag_square",
                          "devhat_second_moment"};
  for (std::size_t k = 0; k < 4; ++k) {
    IdentityCheck c;
    c.name = names[k];
    c.lhs = column_estimate(flat_a, 4, k);
    c.rhs = column_estimate(flat_b, 4, k);
    const double se = std::sqrt(c.lhs.std_error * c.lhs.std_error +
                                c.rhs.std_error * c.rhs.std_error);
    c.z = safe_z(c.lhs.mean, c.rhs.mean, se);
    res.checks.push_back(c);
  }
  return res;
}

QuarticLimitResult quartic_limit_check(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                                       std::size_t m) {
  const auto limits = centered_quartic_limits(kind);
  const double dn = static_cast<double>(n);
  const double scale = dn * dn * (dn - 1.0) * (dn - 1.0);
  auto flat = run_replicas_flat(ctx, experiment_salt(kSaltQuartic, kind, n), m, 2, [&]() {
    auto st = std::make_shared<WeightWorkerState>(kind, n);
    return [st, scale](std::size_t, RngStream& rng, double* out) {
      st->sampler.sample(rng, st->w);
      const double v11 = st->w.centered(0, 0);
      const double v12 = st->w.centered(0, 1);
      const double v21 = st->w.centered(1, 0);
      const double v22 = st->w.centered(1, 1);
      out[0] = scale * v11 * v11 * v22 * v22;
      out[1] = scale * v11 * v12 * v21 * v22;
    };
  });

  QuarticLimitResult res;
  res.kind = kind;
  res.n = n;
  res.replicas = m;
  res.scaled_square = column_estimate(flat, 2, 0);
  res.scaled_cross = column_estimate(flat, 2, 1);
  res.square_limit = limits.first;
  res.cross_limit = limits.second;
  const double band = 5.0 * res.scaled_square.std_error;
  res.square_in_band = res.scaled_square.mean >= 0.7 * res.square_limit - band &&
                       res.scaled_square.mean <= 1.3 * res.square_limit + band;
  res.cross_near_zero =
      std::abs(res.scaled_cross.mean) <= 5.0 * res.scaled_cross.std_error + 0.3;
  return res;
}

ZeroTrendResult zero_trend(const RunContext& ctx, EnsembleKind kind,
                           const std::vector<std::size_t>& ns, std::size_t m) {
  const GridSpec grid = GridSpec::interior_grid();
  ZeroTrendResult res;
  res.kind = kind;
  res.replicas = m;
  for (std::size_t n : ns) {
    const double root_n = std::sqrt(static_cast<double>(n));
    auto flat = run_replicas_flat(ctx, experiment_salt(kSaltZeroTrend, kind, n), m, 1, [&]() {
      auto st = std::make_shared<WeightWorkerState>(kind, n);
      return [st, &grid, n, root_n](std::size_t, RngStream& rng, double* out) {
        st->sampler.sample(rng, st->w);
        st->d = sample_truncation(n, rng);
        ProcessSample zs = eval_calZ(st->w, st->d, grid);
        double mx = 0.0;
        for (double v : zs.values) mx = std::max(mx, std::abs(v));
        out[0] = mx / root_n;
      };
    });
    res.sweep.push_back({n, median_of(column_of(flat, 1, 0))});
  }
  res.strictly_decreasing = res.sweep.size() >= 2;
  for (std::size_t i = 1; i < res.sweep.size(); ++i) {
    if (!(res.sweep[i].median_max_abs < res.sweep[i - 1].median_max_abs)) {
      res.strictly_decreasing = false;
    }
  }
  return res;
}

double ks_uniformity_pvalue(const RunContext& ctx, std::size_t batches, std::size_t batch_size) {
  const EnsembleKind tag = EnsembleKind::HaarUnitary;
  auto flat =
      run_replicas_flat(ctx, experiment_salt(kSaltKsSelf, tag, batch_size), batches, 1, [&]() {
        auto buf = std::make_shared<std::vector<double>>(batch_size);
        return [buf, batch_size](std::size_t, RngStream& rng, double* out) {
          for (std::size_t i = 0; i < batch_size; ++i) (*buf)[i] = rng.uniform01();
          KsResult ks = ks_test(*buf, [](double x) { return std::clamp(x, 0.0, 1.0); });
          out[0] = ks.p_value;
        };
      });
  std::vector<std::size_t> counts(10, 0);
  for (std::size_t r = 0; r < batches; ++r) {
    auto bin = static_cast<std::size_t>(flat[r] * 10.0);
    counts[std::min<std::size_t>(bin, 9)]++;
  }
  return chi_square_gof(counts, std::vector<double>(10, 0.1));
}

namespace {

std::string power_name(const char* base, int k) {
  return std::string(base) + "^" + std::to_string(2 * k);
}

std::string pattern_name(const char* prefix, const std::array<int, 4>& e) {
  std::string s(prefix);
  for (int v : e) {
    s += "_";
    s += std::to_string(v);
  }
  return s;
}

}  // namespace

MomentReport moment_mc_check(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                             std::size_t m) {
  if (kind != EnsembleKind::HaarUnitary && kind != EnsembleKind::HaarOrthogonal) {
    throw std::invalid_argument("exact moments are available for the Haar ensembles only");
  }
  const bool orth = kind == EnsembleKind::HaarOrthogonal;
  const std::array<IPattern, 4> ipat = {IPattern::I24, IPattern::I44, IPattern::I2222,
                                        IPattern::I224};
  const std::size_t width = orth ? 8 : 4;
  auto flat = run_replicas_flat(ctx, experiment_salt(kSaltMoments, kind, n), m, width, [&]() {
    auto st = std::make_shared<WeightWorkerState>(kind, n);
    return [st, orth, ipat](std::size_t, RngStream& rng, double* out) {
      st->sampler.sample(rng, st->w);
      const double w11 = st->w.at(0, 0);
      double p = 1.0;
      for (std::size_t k = 0; k < 4; ++k) {
        p *= w11;
        out[k] = p;
      }
      if (orth) {
        const double w12 = st->w.at(0, 1);
        const double w21 = st->w.at(1, 0);
        const double w22 = st->w.at(1, 1);
        for (std::size_t k = 0; k < 4; ++k) {
          const auto e = i_pattern_exponents(ipat[k]);
          out[4 + k] = std::pow(w11, e[0] / 2) * std::pow(w12, e[1] / 2) *
                       std::pow(w21, e[2] / 2) * std::pow(w22, e[3] / 2);
        }
      }
    };
  });

  MomentReport rep;
  rep.kind = kind;
  rep.n = n;
  rep.replicas = m;
  for (unsigned k = 1; k <= 4; ++k) {
    MomentRow row;
    row.name = power_name(orth ? "E_O11" : "E_absU11", static_cast<int>(k));
    const auto est = column_estimate(flat, width, k - 1);
    row.estimate = est.mean;
    row.std_error = est.std_error;
    row.exact = (orth ? m2k_orthogonal(n, k) : m2k_unitary(n, k)).get_d();
    row.z = safe_z(row.estimate, row.exact, row.std_error);
    rep.rows.push_back(row);
  }
  if (orth) {
    for (std::size_t k = 0; k < 4; ++k) {
      MomentRow row;
      row.name = pattern_name("I", i_pattern_exponents(ipat[k]));
      const auto est = column_estimate(flat, width, 4 + k);
      row.estimate = est.mean;
      row.std_error = est.std_error;
      row.exact = orthogonal_I_exact(ipat[k], n).get_d();
      row.z = safe_z(row.estimate, row.exact, row.std_error);
      rep.rows.push_back(row);
    }
  }
  return rep;
}

MomentReport mixed_moment_mc(const RunContext& ctx, EnsembleKind kind, std::size_t n,
                             std::size_t m) {
  std::array<MixedMoment, 4> items;
  if (kind == EnsembleKind::HaarUnitary) {
    items = {MixedMoment::U44, MixedMoment::U2222, MixedMoment::U24, MixedMoment::U224};
  } else if (kind == EnsembleKind::HaarOrthogonal) {
    items = {MixedMoment::O44, MixedMoment::O2222, MixedMoment::O24, MixedMoment::O224};
  } else {
    throw std::invalid_argument("mixed moments are available for the Haar ensembles only");
  }
  auto flat = run_replicas_flat(ctx, experiment_salt(kSaltMixed, kind, n), m, 4, [&]() {
    auto st = std::make_shared<WeightWorkerState>(kind, n);
    return [st, items](std::size_t, RngStream& rng, double* out) {
      st->sampler.sample(rng, st->w);
      const double w11 = st->w.at(0, 0);
      const double w12 = st->w.at(0, 1);
      const double w21 = st->w.at(1, 0);
      const double w22 = st->w.at(1, 1);
      for (std::size_t k = 0; k < 4; ++k) {
        const auto e = mixed_moment_exponents(items[k]);
        out[k] = std::pow(w11, e[0] / 2) * std::pow(w12, e[1] / 2) * std::pow(w21, e[2] / 2) *
                 std::pow(w22, e[3] / 2);
      }
    };
  });

  MomentReport rep;
  rep.kind = kind;
  rep.n = n;
  rep.replicas = m;
  for (std::size_t k = 0; k < 4; ++k) {
    const LeadingTerm lead = mixed_moment_leading(items[k]);
    MomentRow row;
    row.name = pattern_name("M", mixed_moment_exponents(items[k]));
    const auto est = column_estimate(flat, 4, k);
    row.estimate = est.mean;
    row.std_error = est.std_error;
    row.exact = static_cast<double>(lead.coefficient) /
                std::pow(static_cast<double>(n), lead.power);
    row.z = safe_z(row.estimate, row.exact, row.std_error);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace haarbridge
