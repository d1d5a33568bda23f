#include "haarbridge/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace haarbridge {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string grid_to_string(const GridSpec& grid) {
  std::string s;
  for (std::size_t i = 0; i < grid.s_points.size(); ++i) {
    if (i) s += ",";
    s += format_double(grid.s_points[i]);
  }
  s += ";";
  for (std::size_t i = 0; i < grid.t_points.size(); ++i) {
    if (i) s += ",";
    s += format_double(grid.t_points[i]);
  }
  return s;
}

Provenance provenance(const ExperimentConfig& cfg) {
  Provenance p;
  p.emplace_back("ensemble", ensemble_name(cfg.ensemble));
  std::string ns;
  for (std::size_t i = 0; i < cfg.n_values.size(); ++i) {
    if (i) ns += ",";
    ns += std::to_string(cfg.n_values[i]);
  }
  p.emplace_back("n", ns);
  p.emplace_back("replicas", std::to_string(cfg.replicas));
  p.emplace_back("seed", std::to_string(cfg.seed));
  p.emplace_back("grid", grid_to_string(cfg.grid));
  return p;
}

std::string csv_table(const Provenance& prov, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& [k, v] : prov) {
    out += "# " + k + "=" + v + "\n";
  }
  auto emit_row = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ",";
      out += cells[i];
    }
    out += "\n";
  };
  emit_row(header);
  for (const auto& r : rows) emit_row(r);
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << content;
  if (!os) throw std::runtime_error("failed writing " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ordered_json config_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["ensemble"] = ensemble_name(cfg.ensemble);
  j["n"] = cfg.n_values;
  j["replicas"] = cfg.replicas;
  j["seed"] = cfg.seed;
  j["grid"]["s"] = cfg.grid.s_points;
  j["grid"]["t"] = cfg.grid.t_points;
  return j;
}

ordered_json to_json(const EstimateWithCI& e) {
  return ordered_json{{"mean", e.mean}, {"std_error", e.std_error}, {"replicas", e.replicas}};
}

ordered_json to_json(const KsResult& k) {
  return ordered_json{
      {"statistic", k.statistic}, {"p_value", k.p_value}, {"sample_size", k.sample_size}};
}

ordered_json to_json(const AnovaCheckResult& r) {
  ordered_json j;
  j["ensemble"] = ensemble_name(r.kind);
  j["n"] = r.n;
  j["replicas"] = r.replicas;
  j["max_residual"] = r.max_residual;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  return j;
}

ordered_json to_json(const CovarianceResult& r) {
  ordered_json j;
  j["ensemble"] = ensemble_name(r.kind);
  j["n"] = r.n;
  j["replicas"] = r.replicas;
  j["brute_force"] = r.brute_force;
  j["pairs"] = ordered_json::array();
  for (const auto& p : r.pairs) {
    ordered_json q;
    q["s"] = p.points.s;
    q["t"] = p.points.t;
    q["s_prime"] = p.points.sp;
    q["t_prime"] = p.points.tp;
    q["estimate"] = to_json(p.estimate);
    q["oracle"] = p.oracle;
    q["z"] = p.z;
    j["pairs"].push_back(q);
  }
  j["max_abs_z"] = r.max_abs_z();
  return j;
}

ordered_json to_json(const ShatResult& r) {
  ordered_json j;
  j["ensemble"] = ensemble_name(r.kind);
  j["n"] = r.n;
  j["replicas"] = r.replicas;
  j["mean"] = to_json(r.mean);
  j["oracle"] = r.oracle;
  j["z"] = r.z;
  j["variance"] = r.variance;
  return j;
}

ordered_json to_json(const CharFnResult& r) {
  ordered_json j;
  j["ensemble"] = ensemble_name(r.kind);
  j["n"] = r.n;
  j["replicas"] = r.replicas;
  j["thetas"] = ordered_json::array();
  for (const auto& p : r.thetas) {
    ordered_json q;
    q["theta"] = p.theta;
    q["real_diff"] = to_json(p.real_diff);
    q["imag_part"] = to_json(p.imag_part);
    j["thetas"].push_back(q);
  }
  j["max_abs_z"] = r.max_abs_z();
  return j;
}

ordered_json to_json(const MarginalKsResult& r) {
  ordered_json j;
  j["ensemble"] = ensemble_name(r.kind);
  j["n"] = r.n;
  j["replicas"] = r.replicas;
  j["s"] = r.s;
  j["t"] = r.t;
  j["a"] = r.a;
  j["z_ks"] = to_json(r.z_ks);
  j["t_sigma"] = r.t_sigma;
  j["t_ks"] = to_json(r.t_ks);
  return j;
}

ordered_json to_json(const LindebergResult& r) {
  ordered_json j;
  j["ensemble"] = ensemble_name(r.kind);
  j["replicas"] = r.replicas;
  j["s"] = r.s;
  j["t"] = r.t;
  j["sweep"] = ordered_json::array();
  for (const auto& p : r.sweep) {
    ordered_json q;
    q["n"] = p.n;
    q["ab_ks"] = to_json(p.ab_ks);
    q["lambda3"] = to_json(p.lambda3);
    q["lambda3_scaled"] = p.lambda3_scaled;
    q["lambda3_scaled_se"] = p.lambda3_scaled_se;
    j["sweep"].push_back(q);
  }
  j["ks_decreasing"] = r.ks_decreasing();
  return j;
}

ordered_json to_json(const SpacingsResult& r) {
  ordered_json j;
  j["identity"]["n"] = r.identity_n;
  j["identity"]["k"] = r.identity_k;
  j["identity"]["r"] = r.identity_r;
  j["identity"]["ks"] = to_json(r.identity_ks);
  j["window"] = ordered_json::array();
  for (const auto& p : r.window) {
    ordered_json q;
    q["n"] = p.n;
    q["mean"] = to_json(p.mean);
    q["ratio_to_log_n"] = p.ratio_to_log_n;
    j["window"].push_back(q);
  }
  j["window_ratio_spread"] = r.window_ratio_spread;
  return j;
}

ordered_json to_json(const OneDimResult& r) {
  ordered_json j;
  j["n"] = r.n;
  j["replicas"] = r.replicas;
  j["beta_prime"] = r.beta_prime;
  j["s"] = r.s;
  j["bridge_var"] = to_json(r.bridge_var);
  j["bridge_oracle"] = r.bridge_oracle;
  j["bridge_z"] = r.bridge_z;
  j["weighted_var"] = to_json(r.weighted_var);
  j["weighted_limit"] = r.weighted_limit;
  j["weighted_exact"] = r.weighted_exact;
  j["weighted_z"] = r.weighted_z;
  j["weight_mean"] = to_json(r.weight_mean);
  j["weight_exact"] = r.weight_exact;
  j["weight_limit"] = r.weight_limit;
  j["weight_z"] = r.weight_z;
  return j;
}

ordered_json to_json(const HIdentityResult& r) {
  ordered_json j;
  j["ensemble"] = ensemble_name(r.kind);
  j["n"] = r.n;
  j["replicas"] = r.replicas;
  j["checks"] = ordered_json::array();
  for (const auto& c : r.checks) {
    ordered_json q;
    q["name"] = c.name;
    q["lhs"] = to_json(c.lhs);
    q["rhs"] = to_json(c.rhs);
    q["z"] = c.z;
    j["checks"].push_back(q);
  }
  j["max_abs_z"] = r.max_abs_z();
  return j;
}

ordered_json to_json(const QuarticLimitResult& r) {
  ordered_json j;
  j["ensemble"] = ensemble_name(r.kind);
  j["n"] = r.n;
  j["replicas"] = r.replicas;
  j["scaled_square"] = to_json(r.scaled_square);
  j["square_limit"] = r.square_limit;
  j["square_in_band"] = r.square_in_band;
  j["scaled_cross"] = to_json(r.scaled_cross);
  j["cross_limit"] = r.cross_limit;
  j["cross_near_zero"] = r.cross_near_zero;
  return j;
}

ordered_json to_json(const ZeroTrendResult& r) {
  ordered_json j;
  j["ensemble"] = ensemble_name(r.kind);
  j["replicas"] = r.replicas;
  j["sweep"] = ordered_json::array();
  for (const auto& p : r.sweep) {
    j["sweep"].push_back(ordered_json{{"n", p.n}, {"median_max_abs", p.median_max_abs}});
  }
  j["strictly_decreasing"] = r.strictly_decreasing;
  return j;
}

ordered_json to_json(const MomentReport& r) {
  ordered_json j;
  j["ensemble"] = ensemble_name(r.kind);
  j["n"] = r.n;
  j["replicas"] = r.replicas;
  j["rows"] = ordered_json::array();
  for (const auto& row : r.rows) {
    ordered_json q;
    q["name"] = row.name;
    q["estimate"] = row.estimate;
    q["std_error"] = row.std_error;
    q["exact"] = row.exact;
    q["z"] = row.z;
    j["rows"].push_back(q);
  }
  return j;
}

std::string matrix_csv(const SquareMatrix& u, const Provenance& prov) {
  std::vector<std::string> header;
  for (std::size_t j = 0; j < u.n; ++j) {
    header.push_back("col" + std::to_string(j) + "_re");
    header.push_back("col" + std::to_string(j) + "_im");
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < u.n; ++i) {
    std::vector<std::string> row;
    for (std::size_t j = 0; j < u.n; ++j) {
      const auto e = u.entry(i, j);
      row.push_back(format_double(e.real()));
      row.push_back(format_double(e.imag()));
    }
    rows.push_back(std::move(row));
  }
  return csv_table(prov, header, rows);
}

ordered_json matrix_json(const SquareMatrix& u) {
  ordered_json j;
  j["ensemble"] = ensemble_name(u.kind);
  j["n"] = u.n;
  j["entries"] = ordered_json::array();
  for (std::size_t i = 0; i < u.n; ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t jj = 0; jj < u.n; ++jj) {
      const auto e = u.entry(i, jj);
      row.push_back(ordered_json::array({e.real(), e.imag()}));
    }
    j["entries"].push_back(row);
  }
  return j;
}

std::string covariance_csv(const CovarianceResult& r, const Provenance& prov) {
  const std::vector<std::string> header = {"n",        "s",          "t",      "s_prime",
                                           "t_prime",  "estimate",   "std_error", "oracle",
                                           "z"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : r.pairs) {
    rows.push_back({std::to_string(r.n), format_double(p.points.s), format_double(p.points.t),
                    format_double(p.points.sp), format_double(p.points.tp),
                    format_double(p.estimate.mean), format_double(p.estimate.std_error),
                    format_double(p.oracle), format_double(p.z)});
  }
  return csv_table(prov, header, rows);
}

std::string moments_csv(const MomentReport& r, const Provenance& prov) {
  const std::vector<std::string> header = {"name", "estimate", "std_error", "exact", "z"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : r.rows) {
    rows.push_back({row.name, format_double(row.estimate), format_double(row.std_error),
                    format_double(row.exact), format_double(row.z)});
  }
  return csv_table(prov, header, rows);
}

}  // namespace haarbridge
