#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <set>
#include <vector>

#include <json.hpp>

#include "haarbridge/ensembles.hpp"
#include "haarbridge/io.hpp"
#include "haarbridge/kernels.hpp"
#include "haarbridge/limits.hpp"
#include "haarbridge/linalg.hpp"
#include "haarbridge/moments.hpp"
#include "haarbridge/montecarlo.hpp"
#include "haarbridge/processes.hpp"
#include "haarbridge/rng.hpp"
#include "haarbridge/stats.hpp"

using namespace haarbridge;

namespace {

const EnsembleKind kAllKinds[] = {EnsembleKind::HaarUnitary, EnsembleKind::HaarOrthogonal,
                                  EnsembleKind::Dft, EnsembleKind::Permutation};

ComplexMatrix as_complex(const SquareMatrix& u) {
  ComplexMatrix c(u.n);
  c.re = u.re;
  c.im = u.im;
  return c;
}

mpq_class mpq(long num, unsigned long den) {
  mpq_class r(num, den);
  r.canonicalize();
  return r;
}

double selector(double draw, double level) { return draw <= level ? 1.0 : 0.0; }

}  // namespace

TEST_CASE("philox stream matches the reference vector") {
  // Zero key, zero counter known answer for the 10-round 4x32 generator.
  RngStream r(0, 0);
  CHECK(r.next_u64() == 0xe169c58d6627e8d5ull);
  CHECK(r.next_u64() == 0x9b00dbd8bc57ac4cull);
}

TEST_CASE("streams are pure functions of seed and id") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 100; ++i) {
    std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
    CHECK(va != d.next_u64());
  }
  RngStream e(42, 7);
  RngStream s1 = e.substream(1), s2 = e.substream(2);
  CHECK(s1.next_u64() != s2.next_u64());
  RngStream f(42, 7);
  (void)f.substream(9);
  RngStream g(42, 7);
  CHECK(f.next_u64() == g.next_u64());
}

TEST_CASE("uniform draws stay inside their ranges") {
  RngStream r(1, 2);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    double v = r.uniform_open();
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("gaussian moments are centered and unit scale") {
  RngStream r(3, 4);
  const int m = 40000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < m; ++i) {
    double z = r.gaussian();
    sum += z;
    sq += z * z;
  }
  double mean = sum / m;
  double var = sq / m - mean * mean;
  CHECK(std::fabs(mean) < 5.0 / std::sqrt(static_cast<double>(m)));
  CHECK(std::fabs(var - 1.0) < 5.0 * std::sqrt(2.0 / m));
}

TEST_CASE("half-integer gamma shapes have the right means") {
  RngStream r(5, 6);
  const int m = 30000;
  for (int twice = 1; twice <= 5; ++twice) {
    double shape = 0.5 * twice;
    double sum = 0.0;
    for (int i = 0; i < m; ++i) sum += r.gamma_half_integer(twice);
    double mean = sum / m;
    CHECK(std::fabs(mean - shape) < 5.0 * std::sqrt(shape / m));
  }
  CHECK_THROWS_AS(r.gamma_half_integer(0), std::invalid_argument);
  CHECK_THROWS_AS(r.gamma_half_integer(-2), std::invalid_argument);
}

TEST_CASE("bounded draws are uniform over the range") {
  RngStream r(7, 8);
  const std::size_t k = 6;
  std::vector<std::size_t> counts(k, 0);
  for (int i = 0; i < 60000; ++i) ++counts[r.bounded(k)];
  std::vector<double> probs(k, 1.0 / k);
  CHECK(chi_square_gof(counts, probs) > 0.001);
  CHECK_THROWS_AS(r.bounded(0), std::invalid_argument);
}

TEST_CASE("replica streams do not collide across experiments") {
  std::set<std::uint64_t> ids;
  for (std::uint64_t salt : {experiment_salt(1, EnsembleKind::HaarUnitary, 32),
                             experiment_salt(1, EnsembleKind::HaarUnitary, 64),
                             experiment_salt(2, EnsembleKind::Dft, 32),
                             experiment_salt(2, EnsembleKind::Dft, 32, 1)}) {
    for (std::uint64_t rep = 0; rep < 5000; ++rep) ids.insert(replica_stream(salt, rep));
  }
  CHECK(ids.size() == 4u * 5000u);
}

TEST_CASE("experiment salts are distinct") {
  std::set<std::uint64_t> salts;
  std::size_t count = 0;
  for (std::uint64_t base = 1; base <= 21; ++base) {
    for (EnsembleKind kind : kAllKinds) {
      for (std::size_t n : {8, 16, 32, 64, 128, 200, 256, 16384, 65536}) {
        for (std::uint64_t extra : {0, 1, 17}) {
          salts.insert(experiment_salt(base, kind, n, extra));
          ++count;
        }
      }
    }
  }
  CHECK(salts.size() == count);
}

TEST_CASE("householder q factors are unitary") {
  RngStream rng(11, replica_stream(900, 0));
  for (std::size_t n : {1, 2, 3, 17, 64}) {
    HaarUnitarySampler sampler(n);
    ComplexMatrix q;
    sampler.sample(rng, q);
    CHECK(unitarity_residual(q) <= 1e-12 * static_cast<double>(std::max<std::size_t>(n, 4)));
  }
  for (std::size_t n : {1, 2, 3, 17, 64}) {
    HaarOrthogonalSampler sampler(n);
    RealMatrix q;
    sampler.sample(rng, q);
    CHECK(orthogonality_residual(q) <= 1e-12 * static_cast<double>(std::max<std::size_t>(n, 4)));
  }
}

TEST_CASE("vector kernels match naive loops") {
  RngStream rng(13, 5);
  for (std::size_t m = 0; m <= 19; ++m) {
    std::vector<double> xr(m), xi(m), yr(m), yi(m);
    for (std::size_t i = 0; i < m; ++i) {
      xr[i] = rng.gaussian();
      xi[i] = rng.gaussian();
      yr[i] = rng.gaussian();
      yi[i] = rng.gaussian();
    }
    double dot_ref = 0.0;
    double cre_ref = 0.0, cim_ref = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      dot_ref += xr[i] * yr[i];
      cre_ref += xr[i] * yr[i] + xi[i] * yi[i];
      cim_ref += xr[i] * yi[i] - xi[i] * yr[i];
    }
    CHECK(rdot(m, xr.data(), yr.data()) == doctest::Approx(dot_ref).epsilon(1e-12));
    auto [cre, cim] = cdotc(m, xr.data(), xi.data(), yr.data(), yi.data());
    CHECK(cre == doctest::Approx(cre_ref).epsilon(1e-12));
    CHECK(cim == doctest::Approx(cim_ref).epsilon(1e-12));

    std::vector<double> ar = yr, ai = yi;
    caxpy(m, 0.7, -0.3, xr.data(), xi.data(), ar.data(), ai.data());
    std::vector<double> br = yr;
    raxpy(m, 0.7, xr.data(), br.data());
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(ar[i] == doctest::Approx(yr[i] - (0.7 * xr[i] + 0.3 * xi[i])).epsilon(1e-12));
      CHECK(ai[i] == doctest::Approx(yi[i] - (0.7 * xi[i] - 0.3 * xr[i])).epsilon(1e-12));
      CHECK(br[i] == doctest::Approx(yr[i] - 0.7 * xr[i]).epsilon(1e-12));
    }
    CHECK(sumsq(m, xr.data()) == doctest::Approx(rdot(m, xr.data(), xr.data())));
  }
}

TEST_CASE("pairwise sum matches a reference sum") {
  RngStream rng(17, 1);
  for (std::size_t m : {0, 1, 7, 8, 9, 1000, 4097}) {
    std::vector<double> x(m);
    long double ref = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      x[i] = rng.gaussian();
      ref += x[i];
    }
    double got = pairwise_sum(x);
    CHECK(std::fabs(got - static_cast<double>(ref)) <=
          1e-12 * (1.0 + std::fabs(static_cast<double>(ref))) + 1e-11);
  }
}

TEST_CASE("dft matrix is the reference transform") {
  SquareMatrix f = dft_matrix(4);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(f.entry(0, j).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(f.entry(0, j).imag() == doctest::Approx(0.0));
  }
  // entry (1,1): quarter turn clockwise, -i/2.
  CHECK(f.entry(1, 1).real() == doctest::Approx(0.0));
  CHECK(f.entry(1, 1).imag() == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(f.entry(1, 3).imag() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(unitarity_residual(as_complex(f)) < 1e-13);
  SquareMatrix f2 = dft_matrix(2);
  CHECK(f2.entry(1, 1).real() == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(dft_matrix(0), std::invalid_argument);
}

TEST_CASE("weight matrices are doubly stochastic") {
  for (EnsembleKind kind : kAllKinds) {
    RngStream rng(19, replica_stream(901, 3));
    WeightSampler sampler(kind, 16);
    WeightMatrix w;
    sampler.sample(rng, w);
    REQUIRE(w.n == 16);
    for (std::size_t j = 0; j < w.n; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < w.n; ++i) {
        CHECK(w.at(i, j) >= 0.0);
        col += w.at(i, j);
      }
      CHECK(col == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (std::size_t i = 0; i < w.n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < w.n; ++j) row += w.at(i, j);
      CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(w.centered(0, 0) == doctest::Approx(w.at(0, 0) - 1.0 / 16.0));
  }
}

TEST_CASE("permutation weights are 0-1 with one hit per line") {
  RngStream rng(23, 1);
  WeightSampler sampler(EnsembleKind::Permutation, 9);
  WeightMatrix w;
  sampler.sample(rng, w);
  for (std::size_t i = 0; i < 9; ++i) {
    int row_hits = 0, col_hits = 0;
    for (std::size_t j = 0; j < 9; ++j) {
      CHECK((w.at(i, j) == 0.0 || w.at(i, j) == 1.0));
      row_hits += w.at(i, j) == 1.0;
      col_hits += w.at(j, i) == 1.0;
    }
    CHECK(row_hits == 1);
    CHECK(col_hits == 1);
  }
}

TEST_CASE("dirichlet vectors are simplex points") {
  RngStream rng(29, 2);
  for (double bp : {0.5, 1.0, 1.5}) {
    auto u = sample_dirichlet(12, bp, rng);
    REQUIRE(u.size() == 12);
    double total = 0.0;
    for (double x : u) {
      CHECK(x > 0.0);
      total += x;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(sample_dirichlet(4, 0.3, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_dirichlet(0, 1.0, rng), std::invalid_argument);
}

TEST_CASE("ensemble names and parameters round trip") {
  for (EnsembleKind kind : kAllKinds) {
    auto parsed = parse_ensemble(ensemble_name(kind));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == kind);
  }
  CHECK(!parse_ensemble("circulant").has_value());
  CHECK(*ensemble_beta_prime(EnsembleKind::HaarUnitary) == 1.0);
  CHECK(*ensemble_beta_prime(EnsembleKind::HaarOrthogonal) == 0.5);
  CHECK(*ensemble_beta_prime(EnsembleKind::Dft) == 1.0);
  CHECK(!ensemble_beta_prime(EnsembleKind::Permutation).has_value());
}

TEST_CASE("grids validate and the interior grid avoids the boundary") {
  GridSpec g = GridSpec::default_grid();
  g.validate();
  CHECK(g.s_points.front() == 0.0);
  CHECK(g.s_points.back() == 1.0);
  GridSpec in = GridSpec::interior_grid();
  in.validate();
  for (double s : in.s_points) {
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }
  GridSpec bad;
  bad.s_points = {0.5, 0.25};
  bad.t_points = {0.5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  GridSpec out;
  out.s_points = {0.5};
  out.t_points = {1.5};
  CHECK_THROWS_AS(out.validate(), std::invalid_argument);
}

TEST_CASE("truncation rank clamps floor(n s)") {
  CHECK(truncation_rank(8, 0.0) == 0);
  CHECK(truncation_rank(8, 0.5) == 4);
  CHECK(truncation_rank(8, 0.9999) == 7);
  CHECK(truncation_rank(8, 1.0) == 8);
  CHECK(truncation_rank(5, 0.2) == 1);
  CHECK(truncation_rank(5, 0.199999) == 0);
}

TEST_CASE("block sums match a literal double loop") {
  RngStream rng(31, replica_stream(902, 0));
  WeightSampler sampler(EnsembleKind::HaarUnitary, 5);
  WeightMatrix w;
  sampler.sample(rng, w);
  GridSpec grid = GridSpec::default_grid();
  ProcessSample t = eval_T(w, grid);
  for (std::size_t si = 0; si < grid.s_points.size(); ++si) {
    for (std::size_t ti = 0; ti < grid.t_points.size(); ++ti) {
      std::size_t ks = truncation_rank(5, grid.s_points[si]);
      std::size_t kt = truncation_rank(5, grid.t_points[ti]);
      double ref = 0.0;
      for (std::size_t i = 0; i < ks; ++i)
        for (std::size_t j = 0; j < kt; ++j) ref += w.at(i, j);
      CHECK(t.at(si, ti) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("centered processes vanish on the whole boundary") {
  GridSpec grid;
  grid.s_points = {0.0, 0.37, 1.0};
  grid.t_points = {0.0, 0.61, 1.0};
  for (EnsembleKind kind : kAllKinds) {
    RngStream rng(37, replica_stream(903, 1));
    WeightSampler sampler(kind, 11);
    WeightMatrix w;
    sampler.sample(rng, w);
    TruncationDraw d = sample_truncation(11, rng);
    ProcessSample z = eval_calZ(w, d, grid);
    CalWFG cw = eval_calW_F_G(11, d, grid);
    for (std::size_t si = 0; si < 3; ++si) {
      for (std::size_t ti = 0; ti < 3; ++ti) {
        if (si == 1 && ti == 1) continue;
        CHECK(std::fabs(z.at(si, ti)) < 1e-12);
        // The selector field s F(t) + t G(s) is pinned only on the two
        // lower edges; at s = 1 it equals F(t).
        if (si == 0 || ti == 0) CHECK(std::fabs(cw.calw.at(si, ti)) < 1e-12);
      }
    }
    CHECK(cw.calw.at(2, 1) == doctest::Approx(cw.f.at(1) + 0.61 * cw.g.at(2)));
    ProcessSample b = eval_B0det(w, grid);
    CHECK(b.at(std::size_t{0}) == 0.0);
    ProcessSample cb = eval_calB0(w, d, grid);
    CHECK(cb.at(std::size_t{0}) == 0.0);
    CHECK(std::fabs(cb.at(std::size_t{2})) < 1e-12);
  }
}

TEST_CASE("truncated sums match the literal definition") {
  GridSpec grid = GridSpec::default_grid();
  for (EnsembleKind kind : kAllKinds) {
    RngStream rng(41, replica_stream(904, 2));
    WeightSampler sampler(kind, 12);
    WeightMatrix w;
    sampler.sample(rng, w);
    TruncationDraw d = sample_truncation(12, rng);
    ProcessSample ct = eval_calT(w, d, grid);
    ProcessSample cz = eval_calZ(w, d, grid);
    for (std::size_t si = 0; si < grid.s_points.size(); ++si) {
      for (std::size_t ti = 0; ti < grid.t_points.size(); ++ti) {
        double s = grid.s_points[si], t = grid.t_points[ti];
        double ref_t = 0.0, ref_z = 0.0;
        for (std::size_t i = 0; i < 12; ++i) {
          for (std::size_t j = 0; j < 12; ++j) {
            double a = selector(d.r[i], s), b = selector(d.c[j], t);
            ref_t += w.at(i, j) * a * b;
            ref_z += w.at(i, j) * (a - s) * (b - t);
          }
        }
        CHECK(ct.at(si, ti) == doctest::Approx(ref_t).epsilon(1e-11));
        CHECK(std::fabs(cz.at(si, ti) - ref_z) < 1e-11);
      }
    }
  }
}

TEST_CASE("the selector field splits into s F(t) + t G(s)") {
  const std::size_t n = 15;
  GridSpec grid = GridSpec::default_grid();
  RngStream rng(43, replica_stream(905, 0));
  TruncationDraw d = sample_truncation(n, rng);
  CalWFG cw = eval_calW_F_G(n, d, grid);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (std::size_t ti = 0; ti < grid.t_points.size(); ++ti) {
    double t = grid.t_points[ti];
    double ref = 0.0;
    for (std::size_t j = 0; j < n; ++j) ref += selector(d.c[j], t) - t;
    CHECK(cw.f.at(ti) == doctest::Approx(ref / root_n).epsilon(1e-12));
  }
  for (std::size_t si = 0; si < grid.s_points.size(); ++si) {
    double s = grid.s_points[si];
    double ref = 0.0;
    for (std::size_t i = 0; i < n; ++i) ref += selector(d.r[i], s) - s;
    CHECK(cw.g.at(si) == doctest::Approx(ref / root_n).epsilon(1e-12));
  }
  for (std::size_t si = 0; si < grid.s_points.size(); ++si) {
    for (std::size_t ti = 0; ti < grid.t_points.size(); ++ti) {
      double s = grid.s_points[si], t = grid.t_points[ti];
      double ref = s * cw.f.at(ti) + t * cw.g.at(si);
      CHECK(cw.calw.at(si, ti) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("first-column statistics match their definitions") {
  const std::size_t n = 13;
  RngStream rng(47, replica_stream(906, 4));
  WeightSampler sampler(EnsembleKind::HaarOrthogonal, n);
  WeightMatrix w;
  sampler.sample(rng, w);
  TruncationDraw d = sample_truncation(n, rng);
  GridSpec grid;
  grid.s_points = {0.0, 0.3, 0.72, 1.0};
  grid.t_points = {0.5};
  ProcessSample b = eval_B0det(w, grid);
  ProcessSample cb = eval_calB0(w, d, grid);
  for (std::size_t si = 0; si < grid.s_points.size(); ++si) {
    double s = grid.s_points[si];
    std::size_t k = truncation_rank(n, s);
    double ref_b = 0.0;
    for (std::size_t i = 0; i < k; ++i) ref_b += w.at(i, 0) - 1.0 / static_cast<double>(n);
    double ref_cb = 0.0, colsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      colsum += w.at(i, 0);
      ref_cb += w.at(i, 0) * selector(d.r[i], s);
    }
    ref_cb -= s * colsum;
    CHECK(std::fabs(b.at(si) - ref_b) < 1e-12);
    CHECK(std::fabs(cb.at(si) - ref_cb) < 1e-12);
  }
}

TEST_CASE("the decomposition residual is numerically zero") {
  GridSpec grid = GridSpec::default_grid();
  for (EnsembleKind kind : kAllKinds) {
    for (std::size_t n : {8, 32}) {
      RngStream rng(53, replica_stream(907, n));
      WeightSampler sampler(kind, n);
      WeightMatrix w;
      sampler.sample(rng, w);
      TruncationDraw d = sample_truncation(n, rng);
      CHECK(check_anova_identity(w, d, grid) <= 1e-8 * static_cast<double>(n));
    }
  }
}

TEST_CASE("bridge and kernel evaluations") {
  CHECK(bridge_cov(0.5, 0.5) == doctest::Approx(0.25));
  CHECK(bridge_cov(0.3, 0.7) == doctest::Approx(0.3 - 0.21));
  CHECK(bridge_cov(0.7, 0.3) == bridge_cov(0.3, 0.7));
  CHECK(bridge_cov(0.0, 0.4) == 0.0);
  CHECK(bridge_cov(1.0, 0.4) == 0.0);
  CHECK_THROWS_AS(bridge_cov(-0.1, 0.5), std::invalid_argument);

  std::pair<double, double> h{0.5, 0.5};
  CHECK(kernel_eval({KernelKind::CalWInfinity, 1.0}, h, h) == doctest::Approx(0.125));
  CHECK(kernel_eval({KernelKind::BivariateBridge, 1.0}, h, h) == doctest::Approx(3.0 / 16.0));
  CHECK(kernel_eval({KernelKind::TiedDownBridge, 1.0}, h, h) == doctest::Approx(1.0 / 16.0));
  CHECK(kernel_eval({KernelKind::TiedDownBridge, 2.0}, h, h) == doctest::Approx(1.0 / 8.0));

  RngStream rng(59, 3);
  for (int rep = 0; rep < 3; ++rep) {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 6; ++i) {
      pts.push_back({0.05 + 0.9 * rng.uniform01(), 0.05 + 0.9 * rng.uniform01()});
    }
    for (KernelKind kind : {KernelKind::BivariateBridge, KernelKind::TiedDownBridge,
                            KernelKind::CalWInfinity, KernelKind::ProductBridge}) {
      CovKernel2D k{kind, 1.0};
      std::vector<double> gram(36);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) gram[i * 6 + j] = kernel_eval(k, pts[i], pts[j]);
      auto ev = symmetric_eigenvalues(gram, 6);
      CHECK(ev.front() >= -1e-10);
    }
    CHECK(kernel_eval({KernelKind::TiedDownBridge, 1.0}, pts[0], pts[1]) ==
          doctest::Approx(kernel_eval({KernelKind::ProductBridge, 1.0}, pts[0], pts[1])));
  }
}

TEST_CASE("finite-n covariance constants") {
  CHECK(finite_n_k(32, EnsembleKind::HaarUnitary) == doctest::Approx(64.0 / 33.0));
  CHECK(finite_n_k(50, EnsembleKind::HaarOrthogonal) == doctest::Approx(150.0 / 52.0));
  CHECK(finite_n_k(17, EnsembleKind::Dft) == doctest::Approx(1.0));
  CHECK(finite_n_k(17, EnsembleKind::Permutation) == doctest::Approx(17.0));
  std::pair<double, double> h{0.5, 0.5};
  CHECK(finite_n_z_cov(32, EnsembleKind::HaarUnitary, h, h) ==
        doctest::Approx((1.0 / 16.0) * (64.0 / 33.0)));
  CHECK(finite_n_z_cov(8, EnsembleKind::Dft, h, h) == doctest::Approx(1.0 / 16.0));
  std::pair<double, double> p{0.3, 0.7}, q{0.6, 0.2};
  CHECK(finite_n_z_cov(10, EnsembleKind::Permutation, p, q) ==
        doctest::Approx(bridge_cov(0.3, 0.6) * bridge_cov(0.7, 0.2) * 10.0));
}

TEST_CASE("marginal law cdf behaves like a distribution") {
  for (double a : {0.0, 1.0, std::sqrt(2.0)}) {
    double prev = 0.0;
    for (double x = -10.0; x <= 10.0; x += 0.25) {
      double f = marginal_limit_cdf(x, a);
      CHECK(f >= prev - 1e-12);
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
      CHECK(f + marginal_limit_cdf(-x, a) == doctest::Approx(1.0).epsilon(1e-7));
      prev = f;
    }
    CHECK(marginal_limit_cdf(0.0, a) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(marginal_limit_cdf(-12.0, a) < 1e-5);
    CHECK(marginal_limit_cdf(12.0, a) > 1.0 - 1e-5);

    // Second moment by tail integration; the law has variance a^2 + 1.
    double h = 0.01;
    double second = 0.0;
    for (double x = 0.5 * h; x < 14.0; x += h) {
      second += 4.0 * x * (1.0 - marginal_limit_cdf(x, a)) * h;
    }
    CHECK(second == doctest::Approx(a * a + 1.0).epsilon(2e-3));
  }
  MarginalLimitLaw law{2.0};
  CHECK(law.variance() == doctest::Approx(5.0));
  CHECK(law.cdf(0.3) == doctest::Approx(marginal_limit_cdf(0.3, 2.0)));
}

TEST_CASE("product normal cdf is the a=0 marginal") {
  CHECK(product_normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-9));
  for (double x : {-3.0, -1.0, -0.25, 0.4, 1.7, 4.0}) {
    CHECK(product_normal_cdf(x) == doctest::Approx(marginal_limit_cdf(x, 0.0)).epsilon(1e-9));
    CHECK(product_normal_cdf(x) + product_normal_cdf(-x) == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(product_normal_cdf(6.0) > 0.997);
}

TEST_CASE("quadrature rules integrate polynomials exactly") {
  const double root_pi = std::sqrt(std::acos(-1.0));
  for (std::size_t order : {7, 21, 40}) {
    auto [x, w] = gauss_hermite(order);
    REQUIRE(x.size() == order);
    double s0 = 0.0, s2 = 0.0, s4 = 0.0;
    for (std::size_t i = 0; i < order; ++i) {
      if (i > 0) CHECK(x[i] > x[i - 1]);
      s0 += w[i];
      s2 += w[i] * x[i] * x[i];
      s4 += w[i] * x[i] * x[i] * x[i] * x[i];
    }
    CHECK(s0 == doctest::Approx(root_pi).epsilon(1e-12));
    CHECK(s2 == doctest::Approx(0.5 * root_pi).epsilon(1e-12));
    CHECK(s4 == doctest::Approx(0.75 * root_pi).epsilon(1e-12));
  }
  for (std::size_t order : {6, 20, 64}) {
    auto [x, w] = gauss_legendre(order);
    double s0 = 0.0, s2 = 0.0, s6 = 0.0;
    for (std::size_t i = 0; i < order; ++i) {
      if (i > 0) CHECK(x[i] > x[i - 1]);
      s0 += w[i];
      s2 += w[i] * x[i] * x[i];
      s6 += w[i] * std::pow(x[i], 6.0);
    }
    CHECK(s0 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s2 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(s6 == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(gauss_hermite(0), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
}

TEST_CASE("exact moment rationals") {
  for (unsigned long n = 2; n <= 64; ++n) {
    CHECK(m2k_unitary(n, 1) == mpq(1, n));
    CHECK(m2k_unitary(n, 2) == mpq(2, n * (n + 1)));
    CHECK(m2k_orthogonal(n, 1) == mpq(1, n));
    CHECK(m2k_orthogonal(n, 2) == mpq(3, n * (n + 2)));
  }
  CHECK(m2k_unitary(3, 3) == mpq(1, 10));
  CHECK(m2k_orthogonal(3, 2) == mpq(1, 5));
  CHECK(m2k_orthogonal(4, 3) == mpq(5, 64));
  CHECK(m2k_unitary(5, 0) == mpq(1, 1));
  CHECK_THROWS_AS(m2k_unitary(0, 1), std::invalid_argument);

  CHECK(scaled_var_v(50, EnsembleKind::HaarUnitary) == mpq(49, 51));
  CHECK(scaled_var_v(50, EnsembleKind::HaarOrthogonal) == mpq(98, 52));
  CHECK_THROWS_AS(scaled_var_v(50, EnsembleKind::Dft), std::invalid_argument);
  CHECK_THROWS_AS(scaled_var_v(50, EnsembleKind::Permutation), std::invalid_argument);
  CHECK_THROWS_AS(scaled_var_v(1, EnsembleKind::HaarUnitary), std::invalid_argument);
}

TEST_CASE("orthogonal joint moments at small orders") {
  // n = 2 values follow from a uniform rotation angle: entries are
  // (+-cos, +-sin), so each pattern reduces to a power of cos(theta).
  CHECK(orthogonal_I_exact(IPattern::I24, 2) == mpq(5, 16));
  CHECK(orthogonal_I_exact(IPattern::I44, 2) == mpq(35, 128));
  CHECK(orthogonal_I_exact(IPattern::I2222, 2) == mpq(3, 128));
  CHECK(orthogonal_I_exact(IPattern::I224, 2) == mpq(1, 16));
  CHECK(orthogonal_I_exact(IPattern::I24, 3) == mpq(3, 35));
  CHECK(orthogonal_I_exact(IPattern::I44, 3) == mpq(2, 35));
  CHECK(orthogonal_I_exact(IPattern::I2222, 3) == mpq(1, 210));
  CHECK(orthogonal_I_exact(IPattern::I224, 4) == mpq(5, 576));
  CHECK_THROWS_AS(orthogonal_I_exact(IPattern::I24, 1), std::invalid_argument);

  for (IPattern p : {IPattern::I24, IPattern::I44, IPattern::I2222, IPattern::I224}) {
    LeadingTerm lead = i_pattern_leading(p);
    double n = 4096.0;
    double exact = mpq_class(orthogonal_I_exact(p, 4096)).get_d();
    double approx = static_cast<double>(lead.coefficient) * std::pow(n, -lead.power);
    CHECK(exact == doctest::Approx(approx).epsilon(0.01));
  }
  CHECK(i_pattern_exponents(IPattern::I224) == std::array<int, 4>{2, 2, 0, 2});
}

TEST_CASE("mixed moment descriptors are consistent") {
  CHECK(mixed_moment_leading(MixedMoment::U44).coefficient == 4);
  CHECK(mixed_moment_leading(MixedMoment::O44).coefficient == 9);
  CHECK(mixed_moment_leading(MixedMoment::U224).power == 3);
  CHECK(mixed_moment_exponents(MixedMoment::U2222) == std::array<int, 4>{2, 2, 2, 2});
  CHECK(mixed_moment_exponents(MixedMoment::O24) == std::array<int, 4>{2, 0, 0, 4});
  auto [sq_u, cr_u] = centered_quartic_limits(EnsembleKind::HaarUnitary);
  auto [sq_o, cr_o] = centered_quartic_limits(EnsembleKind::HaarOrthogonal);
  CHECK(sq_u == 1.0);
  CHECK(cr_u == 0.0);
  CHECK(sq_o == 4.0);
  CHECK(cr_o == 0.0);
  CHECK_THROWS_AS(centered_quartic_limits(EnsembleKind::Dft), std::invalid_argument);
}

TEST_CASE("estimators report faithful summaries") {
  EstimateWithCI m = mean_estimate({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(m.replicas == 4);
  CHECK(m.z_score(2.5) == doctest::Approx(0.0));

  EstimateWithCI v = zero_mean_variance_estimate({1.0, -1.0, 1.0, -1.0});
  CHECK(v.mean == doctest::Approx(1.0));
  CHECK(v.std_error == doctest::Approx(0.0));
  CHECK(v.z_score(1.0) == 0.0);
  CHECK(std::isinf(v.z_score(0.9)));

  CHECK(sample_variance({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0}) == doctest::Approx(32.0 / 7.0));
  CHECK_THROWS_AS(mean_estimate({1.0}), std::invalid_argument);
}

TEST_CASE("kolmogorov tail and ks tests") {
  CHECK(kolmogorov_q(1.358) == doctest::Approx(0.05).epsilon(0.02));
  CHECK(kolmogorov_q(0.0) == 1.0);
  CHECK(kolmogorov_q(-1.0) == 1.0);
  CHECK(kolmogorov_q(3.0) < 1e-6);

  auto uniform_cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  KsResult k = ks_test({0.1, 0.5, 0.9}, uniform_cdf);
  CHECK(k.statistic == doctest::Approx(7.0 / 30.0).epsilon(1e-12));
  CHECK(k.sample_size == 3);
  CHECK_THROWS_AS(ks_test({}, uniform_cdf), std::invalid_argument);

  std::vector<double> a{0.1, 0.2, 0.3, 0.4}, b{0.1, 0.2, 0.3, 0.4};
  KsResult same = ks_two_sample(a, b);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);
  KsResult apart = ks_two_sample({1.0, 2.0}, {10.0, 11.0});
  CHECK(apart.statistic == doctest::Approx(1.0));
}

TEST_CASE("gamma and chi-square helpers") {
  CHECK(gamma_p(0.5, 1.0) == doctest::Approx(std::erf(1.0)).epsilon(1e-10));
  CHECK(gamma_p(2.5, 1.7) + gamma_q(2.5, 1.7) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gamma_p(1.0, 0.0) == 0.0);
  CHECK(chi_square_p_value(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-5));
  CHECK(chi_square_p_value(0.0, 5) == 1.0);
  CHECK_THROWS_AS(chi_square_p_value(1.0, 0), std::invalid_argument);
  CHECK(chi_square_gof({25, 25, 25, 25}, {0.25, 0.25, 0.25, 0.25}) == doctest::Approx(1.0));
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-9));
}

TEST_CASE("jacobi eigenvalues of small symmetric matrices") {
  auto ev = symmetric_eigenvalues({2.0, 1.0, 1.0, 2.0}, 2);
  CHECK(ev[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ev[1] == doctest::Approx(3.0).epsilon(1e-12));
  auto ev3 = symmetric_eigenvalues({4.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.5}, 3);
  CHECK(ev3[0] == doctest::Approx(-1.0));
  CHECK(ev3[1] == doctest::Approx(2.5));
  CHECK(ev3[2] == doctest::Approx(4.0));
  CHECK_THROWS_AS(symmetric_eigenvalues({1.0}, 2), std::invalid_argument);
}

TEST_CASE("replica runs are schedule independent") {
  auto make_worker = []() {
    return [](std::size_t r, RngStream& rng, double* out) {
      out[0] = rng.uniform01();
      out[1] = rng.gaussian();
      out[2] = static_cast<double>(r);
    };
  };
  RunContext one{99, 1};
  RunContext many{99, 5};
  auto a = run_replicas_flat(one, 1234, 101, 3, make_worker);
  auto b = run_replicas_flat(many, 1234, 101, 3, make_worker);
  REQUIRE(a.size() == b.size());
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  auto col = column_of(a, 3, 2);
  REQUIRE(col.size() == 101);
  CHECK(col[100] == 100.0);
  CHECK(RunContext{1, 3}.resolved_workers() == 3);
  CHECK(RunContext{1, 0}.resolved_workers() >= 1);
}

TEST_CASE("experiment configs validate") {
  ExperimentConfig cfg;
  cfg.n_values = {8};
  cfg.validate();
  ExperimentConfig empty = cfg;
  empty.n_values.clear();
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
  ExperimentConfig zero_n = cfg;
  zero_n.n_values = {0};
  CHECK_THROWS_AS(zero_n.validate(), std::invalid_argument);
  ExperimentConfig zero_m = cfg;
  zero_m.replicas = 0;
  CHECK_THROWS_AS(zero_m.validate(), std::invalid_argument);
}

TEST_CASE("interior marginal points are required") {
  RunContext ctx{7, 1};
  CHECK_THROWS_AS(marginal_ks(ctx, EnsembleKind::Dft, 16, 50, 0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(marginal_ks(ctx, EnsembleKind::Dft, 16, 50, 0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(dirichlet_onedim_checks(ctx, 16, 50, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(shat_experiment(ctx, EnsembleKind::Permutation, 16, 50), std::invalid_argument);
  CHECK_THROWS_AS(moment_mc_check(ctx, EnsembleKind::Dft, 8, 50), std::invalid_argument);
  CHECK_THROWS_AS(mixed_moment_mc(ctx, EnsembleKind::Permutation, 8, 50), std::invalid_argument);
}

TEST_CASE("degenerate spacing span is exactly one on both sides") {
  RunContext ctx{7, 2};
  SpacingsResult r = spacings_diagnostics(ctx, 10, 0, 11, 400, {100}, {200});
  CHECK(r.identity_ks.statistic == 0.0);
  CHECK(r.identity_ks.p_value == 1.0);
  CHECK_THROWS_AS(spacings_diagnostics(ctx, 10, 8, 4, 100, {100}, {100}), std::invalid_argument);
  CHECK_THROWS_AS(spacings_diagnostics(ctx, 10, 0, 11, 100, {100}, {100, 200}),
                  std::invalid_argument);
}

TEST_CASE("doubles survive the text round trip") {
  for (double x : {1.0 / 3.0, 0.1, -0.0, 1e300, 5e-324, 3.141592653589793, -2.5e-17}) {
    std::string s = format_double(x);
    double back = std::strtod(s.c_str(), nullptr);
    CHECK(std::memcmp(&back, &x, sizeof(double)) == 0);
  }
}

TEST_CASE("csv tables carry provenance comments") {
  ExperimentConfig cfg;
  cfg.ensemble = EnsembleKind::Dft;
  cfg.n_values = {8, 16};
  cfg.replicas = 100;
  cfg.seed = 12345;
  Provenance prov = provenance(cfg);
  bool saw_seed = false;
  for (const auto& [key, value] : prov) {
    CHECK(key != "workers");
    CHECK(key != "threads");
    if (key == "seed") {
      saw_seed = true;
      CHECK(value == "12345");
    }
  }
  CHECK(saw_seed);
  std::string csv = csv_table(prov, {"a", "b"}, {{"1", "2"}, {"3", "4"}});
  CHECK(csv.find("# seed=12345") != std::string::npos);
  CHECK(csv.find("# ensemble=dft") != std::string::npos);
  CHECK(csv.find("a,b\n1,2\n3,4\n") != std::string::npos);

  ordered_json cj = config_json(cfg);
  CHECK(cj["seed"] == 12345);
  CHECK(cj["ensemble"] == "dft");
  CHECK(!cj.contains("workers"));
}

TEST_CASE("text files round trip through nested directories") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "haarbridge_io_test";
  fs::remove_all(dir);
  std::string path = (dir / "deep" / "file.txt").string();
  write_text_file(path, "payload\nline2\n");
  CHECK(read_text_file(path) == "payload\nline2\n");
  CHECK_THROWS(read_text_file((dir / "missing.txt").string()));
  fs::remove_all(dir);
}

TEST_CASE("matrix serialization carries exact entries") {
  SquareMatrix f = dft_matrix(2);
  ExperimentConfig cfg;
  cfg.ensemble = EnsembleKind::Dft;
  cfg.n_values = {2};
  std::string csv = matrix_csv(f, provenance(cfg));
  CHECK(csv.find("col0_re") != std::string::npos);
  CHECK(csv.find("col1_im") != std::string::npos);
  CHECK(csv.find(format_double(-1.0 / std::sqrt(2.0))) != std::string::npos);

  ordered_json j = matrix_json(f);
  CHECK(j["n"] == 2);
  CHECK(j["ensemble"] == "dft");
  REQUIRE(j["entries"].size() == 2);
  CHECK(j["entries"][1][1][0].get<double>() == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(j["entries"][0][1][1].get<double>() == 0.0);
}

TEST_CASE("estimates serialize with their uncertainty") {
  EstimateWithCI e{1.5, 0.25, 400};
  ordered_json j = to_json(e);
  CHECK(j["mean"].get<double>() == 1.5);
  CHECK(j["std_error"].get<double>() == 0.25);
  CHECK(j["replicas"] == 400);
  KsResult k{0.02, 0.73, 5000};
  ordered_json jk = to_json(k);
  CHECK(jk["statistic"].get<double>() == 0.02);
  CHECK(jk["p_value"].get<double>() == 0.73);
}

TEST_CASE("anova wrapper aggregates the residual over replicas") {
  RunContext ctx{7, 2};
  AnovaCheckResult r = anova_check(ctx, EnsembleKind::Permutation, 16, 20);
  CHECK(r.pass);
  CHECK(r.tolerance == doctest::Approx(1.6e-7));
  CHECK(r.max_residual <= r.tolerance);
  CHECK(r.replicas == 20);
}
