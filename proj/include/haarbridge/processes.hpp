#pragma once

#include <cstddef>
#include <vector>

#include "haarbridge/ensembles.hpp"
#include "haarbridge/rng.hpp"

namespace haarbridge {

// Evaluation grid.  Both axes are sorted, strictly increasing, inside [0,1].
struct GridSpec {
  std::vector<double> s_points;
  std::vector<double> t_points;

  void validate() const;
  // Interior 5x5 grid plus the boundary points, on both axes.
  static GridSpec default_grid();
  // The same grid without 0 and 1 (where the centered processes vanish).
  static GridSpec interior_grid();
};

// Row and column selectors: R_i chooses whether row i survives a truncation
// to level s, C_j likewise for columns.
struct TruncationDraw {
  std::vector<double> r, c;
};

// Rows are drawn before columns; the order is part of the stream contract.
TruncationDraw sample_truncation(std::size_t n, RngStream& rng);

enum class ProcessKind { T, CalT, CalZ, CalW, F, G, B0det, CalB0 };

const char* process_kind_name(ProcessKind kind);
bool process_is_two_parameter(ProcessKind kind);

// A path evaluated on the grid.  Two-parameter kinds store values in s-major
// order (values[si * nt + ti]); one-parameter kinds use the axis they depend
// on: t_points for F, s_points for G, B0det and CalB0.
struct ProcessSample {
  ProcessKind kind = ProcessKind::T;
  GridSpec grid;
  std::vector<double> values;

  double at(std::size_t si, std::size_t ti) const { return values[si * grid.t_points.size() + ti]; }
  double at(std::size_t idx) const { return values[idx]; }
};

// Block sums T(s,t) = sum of w over the top-left floor(ns) x floor(nt) block.
ProcessSample eval_T(const WeightMatrix& w, const GridSpec& grid);

// Randomly truncated sum: sum of w_ij over {R_i <= s, C_j <= t}.
ProcessSample eval_calT(const WeightMatrix& w, const TruncationDraw& d, const GridSpec& grid);

// Doubly centered bilinear form sum_ij w_ij (1_{R_i<=s} - s)(1_{C_j<=t} - t),
// computed through the factored per-t column sums.
ProcessSample eval_calZ(const WeightMatrix& w, const TruncationDraw& d, const GridSpec& grid);

struct CalWFG {
  ProcessSample calw;  // s F(t) + t G(s)
  ProcessSample f;     // n^{-1/2} sum_j (1_{C_j<=t} - t)
  ProcessSample g;     // n^{-1/2} sum_i (1_{R_i<=s} - s)
};

CalWFG eval_calW_F_G(std::size_t n, const TruncationDraw& d, const GridSpec& grid);

// Max over the grid of |(CalT - n s t) - CalZ - sqrt(n) CalW|.  The identity
// is exact for any doubly stochastic weight matrix, so the residual is pure
// floating-point noise and must stay below 1e-8 * n.
double check_anova_identity(const WeightMatrix& w, const TruncationDraw& d, const GridSpec& grid);

// One-parameter statistics of the first column.
ProcessSample eval_B0det(const WeightMatrix& w, const GridSpec& grid);
ProcessSample eval_calB0(const WeightMatrix& w, const TruncationDraw& d, const GridSpec& grid);

// floor(n*s) clamped to [0, n], the truncation rank convention used by all
// deterministic-index processes.
std::size_t truncation_rank(std::size_t n, double s);

}  // namespace haarbridge
