#include "haarbridge/processes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace haarbridge {

void GridSpec::validate() const {
  auto check_axis = [](const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("grid axis is empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] >= 0.0 && v[i] <= 1.0)) throw std::invalid_argument("grid point outside [0,1]");
      if (i > 0 && !(v[i] > v[i - 1])) throw std::invalid_argument("grid must be strictly increasing");
    }
  };
  check_axis(s_points);
  check_axis(t_points);
}

GridSpec GridSpec::default_grid() {
  std::vector<double> pts = {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
  return {pts, pts};
}

GridSpec GridSpec::interior_grid() {
  std::vector<double> pts = {0.1, 0.3, 0.5, 0.7, 0.9};
  return {pts, pts};
}

TruncationDraw sample_truncation(std::size_t n, RngStream& rng) {
  TruncationDraw d;
  d.r.resize(n);
  d.c.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.r[i] = rng.uniform01();
  for (std::size_t j = 0; j < n; ++j) d.c[j] = rng.uniform01();
  return d;
}

const char* process_kind_name(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::T: return "T";
    case ProcessKind::CalT: return "calT";
    case ProcessKind::CalZ: return "calZ";
    case ProcessKind::CalW: return "calW";
    case ProcessKind::F: return "F";
    case ProcessKind::G: return "G";
    case ProcessKind::B0det: return "B0det";
    case ProcessKind::CalB0: return "calB0";
  }
  return "?";
}

bool process_is_two_parameter(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::T:
    case ProcessKind::CalT:
    case ProcessKind::CalZ:
    case ProcessKind::CalW:
      return true;
    default:
      return false;
  }
}

std::size_t truncation_rank(std::size_t n, double s) {
  double x = std::floor(static_cast<double>(n) * s);
  if (x <= 0.0) return 0;
  std::size_t k = static_cast<std::size_t>(x);
  return std::min(k, n);
}

namespace {

// Sorted index order of v (ascending, ties by index for determinism).
std::vector<std::uint32_t> sort_order(const std::vector<double>& v) {
  std::vector<std::uint32_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return v[a] < v[b]; });
  return idx;
}

void check_draw(const WeightMatrix& w, const TruncationDraw& d) {
  if (d.r.size() != w.n || d.c.size() != w.n) {
    throw std::invalid_argument("truncation draw length does not match matrix order");
  }
}

// Column accumulation snapshots: for each grid value t, the vector of row
// sums of w over the column set {j : key_c(j) <= t}.  Shared by the CalT and
// CalZ evaluations (key = C_j) and by eval_T (key = (j+1)/n).
std::vector<std::vector<double>> column_snapshots(const WeightMatrix& w,
                                                  const std::vector<std::uint32_t>& col_order,
                                                  const std::vector<double>& col_key,
                                                  const std::vector<double>& t_points) {
  const std::size_t n = w.n;
  std::vector<std::vector<double>> snap(t_points.size());
  std::vector<double> acc(n, 0.0);
  std::size_t pos = 0;
  for (std::size_t ti = 0; ti < t_points.size(); ++ti) {
    double t = t_points[ti];
    while (pos < n && col_key[col_order[pos]] <= t) {
      const double* col = w.col(col_order[pos]);
      for (std::size_t i = 0; i < n; ++i) acc[i] += col[i];
      ++pos;
    }
    snap[ti] = acc;
  }
  return snap;
}

}  // namespace

ProcessSample eval_T(const WeightMatrix& w, const GridSpec& grid) {
  grid.validate();
  const std::size_t n = w.n;
  const auto& sp = grid.s_points;
  const auto& tp = grid.t_points;
  // Running column prefix, snapshotted at each floor(n t) boundary.
  std::vector<double> acc(n, 0.0);
  std::vector<std::vector<double>> snap(tp.size());
  std::size_t col = 0;
  for (std::size_t ti = 0; ti < tp.size(); ++ti) {
    std::size_t upto = truncation_rank(n, tp[ti]);
    while (col < upto) {
      const double* c = w.col(col);
      for (std::size_t i = 0; i < n; ++i) acc[i] += c[i];
      ++col;
    }
    snap[ti] = acc;
  }
  ProcessSample out;
  out.kind = ProcessKind::T;
  out.grid = grid;
  out.values.assign(sp.size() * tp.size(), 0.0);
  for (std::size_t ti = 0; ti < tp.size(); ++ti) {
    const auto& y = snap[ti];
    double run = 0.0;
    std::size_t row = 0;
    for (std::size_t si = 0; si < sp.size(); ++si) {
      std::size_t upto = truncation_rank(n, sp[si]);
      while (row < upto) run += y[row++];
      out.values[si * tp.size() + ti] = run;
    }
  }
  return out;
}

ProcessSample eval_calT(const WeightMatrix& w, const TruncationDraw& d, const GridSpec& grid) {
  grid.validate();
  check_draw(w, d);
  const std::size_t n = w.n;
  const auto& sp = grid.s_points;
  const auto& tp = grid.t_points;
  auto col_order = sort_order(d.c);
  auto row_order = sort_order(d.r);
  auto snap = column_snapshots(w, col_order, d.c, tp);

  ProcessSample out;
  out.kind = ProcessKind::CalT;
  out.grid = grid;
  out.values.assign(sp.size() * tp.size(), 0.0);
  for (std::size_t ti = 0; ti < tp.size(); ++ti) {
    const auto& y = snap[ti];
    double run = 0.0;
    std::size_t pos = 0;
    for (std::size_t si = 0; si < sp.size(); ++si) {
      double s = sp[si];
      while (pos < n && d.r[row_order[pos]] <= s) {
        run += y[row_order[pos]];
        ++pos;
      }
      out.values[si * tp.size() + ti] = run;
    }
  }
  return out;
}

ProcessSample eval_calZ(const WeightMatrix& w, const TruncationDraw& d, const GridSpec& grid) {
  grid.validate();
  check_draw(w, d);
  const std::size_t n = w.n;
  const auto& sp = grid.s_points;
  const auto& tp = grid.t_points;
  auto col_order = sort_order(d.c);
  auto row_order = sort_order(d.r);
  // Row sums over selected columns; the centered version is p_t[i] - t
  // because every row of w sums to 1.
  auto snap = column_snapshots(w, col_order, d.c, tp);

  ProcessSample out;
  out.kind = ProcessKind::CalZ;
  out.grid = grid;
  out.values.assign(sp.size() * tp.size(), 0.0);
  for (std::size_t ti = 0; ti < tp.size(); ++ti) {
    double t = tp[ti];
    const auto& y = snap[ti];
    // total = sum_i p_t[i] with p_t[i] = y[i] - t
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += y[i] - t;
    double run = 0.0;
    std::size_t pos = 0;
    for (std::size_t si = 0; si < sp.size(); ++si) {
      double s = sp[si];
      while (pos < n && d.r[row_order[pos]] <= s) {
        run += y[row_order[pos]] - t;
        ++pos;
      }
      out.values[si * tp.size() + ti] = run - s * total;
    }
  }
  return out;
}

CalWFG eval_calW_F_G(std::size_t n, const TruncationDraw& d, const GridSpec& grid) {
  grid.validate();
  if (d.r.size() != n || d.c.size() != n) {
    throw std::invalid_argument("truncation draw length does not match order");
  }
  const auto& sp = grid.s_points;
  const auto& tp = grid.t_points;
  const double root_n = std::sqrt(static_cast<double>(n));

  auto empirical = [&](const std::vector<double>& u, const std::vector<double>& pts) {
    std::vector<double> sorted(u);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> vals(pts.size());
    std::size_t pos = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      while (pos < sorted.size() && sorted[pos] <= pts[i]) ++pos;
      vals[i] = (static_cast<double>(pos) - static_cast<double>(n) * pts[i]) / root_n;
    }
    return vals;
  };

  CalWFG out;
  out.f.kind = ProcessKind::F;
  out.f.grid = grid;
  out.f.values = empirical(d.c, tp);
  out.g.kind = ProcessKind::G;
  out.g.grid = grid;
  out.g.values = empirical(d.r, sp);
  out.calw.kind = ProcessKind::CalW;
  out.calw.grid = grid;
  out.calw.values.assign(sp.size() * tp.size(), 0.0);
  for (std::size_t si = 0; si < sp.size(); ++si) {
    for (std::size_t ti = 0; ti < tp.size(); ++ti) {
      out.calw.values[si * tp.size() + ti] = sp[si] * out.f.values[ti] + tp[ti] * out.g.values[si];
    }
  }
  return out;
}

double check_anova_identity(const WeightMatrix& w, const TruncationDraw& d, const GridSpec& grid) {
  const std::size_t n = w.n;
  auto calt = eval_calT(w, d, grid);
  auto calz = eval_calZ(w, d, grid);
  auto wfg = eval_calW_F_G(n, d, grid);
  const double root_n = std::sqrt(static_cast<double>(n));
  double worst = 0.0;
  for (std::size_t si = 0; si < grid.s_points.size(); ++si) {
    for (std::size_t ti = 0; ti < grid.t_points.size(); ++ti) {
      double s = grid.s_points[si];
      double t = grid.t_points[ti];
      double lhs = calt.at(si, ti) - static_cast<double>(n) * s * t;
      double rhs = calz.at(si, ti) + root_n * wfg.calw.at(si, ti);
      worst = std::max(worst, std::fabs(lhs - rhs));
    }
  }
  return worst;
}

ProcessSample eval_B0det(const WeightMatrix& w, const GridSpec& grid) {
  grid.validate();
  const std::size_t n = w.n;
  const double inv_n = 1.0 / static_cast<double>(n);
  const double* col = w.col(0);
  ProcessSample out;
  out.kind = ProcessKind::B0det;
  out.grid = grid;
  out.values.resize(grid.s_points.size());
  double run = 0.0;
  std::size_t row = 0;
  for (std::size_t si = 0; si < grid.s_points.size(); ++si) {
    std::size_t upto = truncation_rank(n, grid.s_points[si]);
    while (row < upto) run += col[row++] - inv_n;
    out.values[si] = run;
  }
  return out;
}

ProcessSample eval_calB0(const WeightMatrix& w, const TruncationDraw& d, const GridSpec& grid) {
  grid.validate();
  check_draw(w, d);
  const std::size_t n = w.n;
  const double* col = w.col(0);
  auto row_order = sort_order(d.r);
  double colsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) colsum += col[i];
  ProcessSample out;
  out.kind = ProcessKind::CalB0;
  out.grid = grid;
  out.values.resize(grid.s_points.size());
  double run = 0.0;
  std::size_t pos = 0;
  for (std::size_t si = 0; si < grid.s_points.size(); ++si) {
    double s = grid.s_points[si];
    while (pos < n && d.r[row_order[pos]] <= s) {
      run += col[row_order[pos]];
      ++pos;
    }
    out.values[si] = run - s * colsum;
  }
  return out;
}

}  // namespace haarbridge
