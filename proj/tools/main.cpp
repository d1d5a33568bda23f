#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "haarbridge/acceptance.hpp"
#include "haarbridge/io.hpp"

namespace hb = haarbridge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitStatistical = 2;

struct CliOptions {
  std::string ensemble = "unitary";
  std::size_t n = 32;
  std::size_t replicas = 1000;
  std::uint64_t seed = 7;
  int threads = 0;
  std::string grid;
  std::string out;
  std::string format = "csv";
  std::string config;
};

hb::GridSpec parse_grid(const std::string& text) {
  if (text.empty()) return hb::GridSpec::default_grid();
  hb::GridSpec g;
  const auto semi = text.find(';');
  auto parse_axis = [](const std::string& part) {
    std::vector<double> axis;
    std::stringstream ss(part);
    std::string cell;
    while (std::getline(ss, cell, ',')) axis.push_back(std::stod(cell));
    return axis;
  };
  if (semi == std::string::npos) {
    g.s_points = parse_axis(text);
    g.t_points = g.s_points;
  } else {
    g.s_points = parse_axis(text.substr(0, semi));
    g.t_points = parse_axis(text.substr(semi + 1));
  }
  g.validate();
  return g;
}

// The config file takes precedence over flags; flags take precedence over
// the HAARBRIDGE_SEED environment variable.
void apply_config_file(CliOptions& o) {
  if (o.config.empty()) return;
  const auto j = hb::ordered_json::parse(hb::read_text_file(o.config));
  if (j.contains("ensemble")) o.ensemble = j["ensemble"].get<std::string>();
  if (j.contains("n")) o.n = j["n"].get<std::size_t>();
  if (j.contains("replicas")) o.replicas = j["replicas"].get<std::size_t>();
  if (j.contains("seed")) o.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) o.threads = j["threads"].get<int>();
  if (j.contains("out")) o.out = j["out"].get<std::string>();
  if (j.contains("format")) o.format = j["format"].get<std::string>();
  if (j.contains("grid")) {
    if (j["grid"].is_string()) {
      o.grid = j["grid"].get<std::string>();
    } else {
      std::string s;
      for (const auto& v : j["grid"]["s"]) {
        if (!s.empty()) s += ",";
        s += hb::format_double(v.get<double>());
      }
      s += ";";
      bool first = true;
      for (const auto& v : j["grid"]["t"]) {
        if (!first) s += ",";
        s += hb::format_double(v.get<double>());
        first = false;
      }
      o.grid = s;
    }
  }
}

hb::ExperimentConfig make_config(const CliOptions& o) {
  const auto kind = hb::parse_ensemble(o.ensemble);
  if (!kind) throw std::invalid_argument("unknown ensemble '" + o.ensemble + "'");
  hb::ExperimentConfig cfg;
  cfg.ensemble = *kind;
  cfg.n_values = {o.n};
  cfg.replicas = o.replicas;
  cfg.grid = parse_grid(o.grid);
  cfg.seed = o.seed;
  cfg.workers = o.threads;
  cfg.output_path = o.out;
  cfg.validate();
  return cfg;
}

void deliver(const CliOptions& o, const std::string& csv, const hb::ordered_json& json) {
  const std::string body = o.format == "json" ? json.dump(2) + "\n" : csv;
  if (o.out.empty()) {
    std::cout << body;
  } else {
    hb::write_text_file(o.out, body);
  }
}

void failure_report(const std::string& verb, const hb::ordered_json& detail) {
  hb::ordered_json j;
  j["status"] = "statistical_failure";
  j["verb"] = verb;
  j["detail"] = detail;
  std::cerr << j.dump(2) << "\n";
}

int cmd_sample(const CliOptions& o) {
  const auto cfg = make_config(o);
  hb::RngStream rng(cfg.seed, hb::replica_stream(21, 0));
  const hb::SquareMatrix u = hb::sample_matrix(cfg.ensemble, o.n, rng);
  hb::ordered_json j;
  j["config"] = hb::config_json(cfg);
  j["matrix"] = hb::matrix_json(u);
  deliver(o, hb::matrix_csv(u, hb::provenance(cfg)), j);
  return kExitOk;
}

int cmd_verify_moments(const CliOptions& o) {
  const auto cfg = make_config(o);
  const hb::RunContext ctx{cfg.seed, cfg.workers};
  const hb::MomentReport rep = hb::moment_mc_check(ctx, cfg.ensemble, o.n, cfg.replicas);
  hb::ordered_json j;
  j["config"] = hb::config_json(cfg);
  j["report"] = hb::to_json(rep);
  deliver(o, hb::moments_csv(rep, hb::provenance(cfg)), j);
  bool ok = true;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const double bound = i < 4 ? 4.0 : 5.0;  // exact moments, then joint patterns
    ok = ok && std::abs(rep.rows[i].z) <= bound;
  }
  if (!ok) {
    failure_report("verify-moments", hb::to_json(rep));
    return kExitStatistical;
  }
  return kExitOk;
}

int cmd_covariance(const CliOptions& o) {
  const auto cfg = make_config(o);
  const hb::RunContext ctx{cfg.seed, cfg.workers};
  std::vector<hb::PointPair> pairs;
  for (double s : cfg.grid.s_points) {
    for (double t : cfg.grid.t_points) pairs.push_back({s, t, s, t});
  }
  const hb::CovarianceResult r =
      hb::estimate_z_covariance(ctx, cfg.ensemble, o.n, cfg.replicas, pairs);
  hb::ordered_json j;
  j["config"] = hb::config_json(cfg);
  j["covariance"] = hb::to_json(r);
  deliver(o, hb::covariance_csv(r, hb::provenance(cfg)), j);
  if (r.max_abs_z() > 4.0) {
    failure_report("covariance", hb::to_json(r));
    return kExitStatistical;
  }
  return kExitOk;
}

int cmd_marginal(const CliOptions& o) {
  const auto cfg = make_config(o);
  const hb::RunContext ctx{cfg.seed, cfg.workers};
  const hb::MarginalKsResult r = hb::marginal_ks(ctx, cfg.ensemble, o.n, cfg.replicas, 0.5, 0.5);
  hb::ordered_json j;
  j["config"] = hb::config_json(cfg);
  j["marginal"] = hb::to_json(r);
  const std::vector<std::string> header = {"test", "statistic", "p_value", "sample_size"};
  const std::vector<std::vector<std::string>> rows = {
      {"z_marginal", hb::format_double(r.z_ks.statistic), hb::format_double(r.z_ks.p_value),
       std::to_string(r.z_ks.sample_size)},
      {"t_marginal", hb::format_double(r.t_ks.statistic), hb::format_double(r.t_ks.p_value),
       std::to_string(r.t_ks.sample_size)}};
  deliver(o, hb::csv_table(hb::provenance(cfg), header, rows), j);
  if (r.z_ks.p_value <= 0.001 || r.t_ks.p_value <= 0.001) {
    failure_report("marginal", hb::to_json(r));
    return kExitStatistical;
  }
  return kExitOk;
}

int cmd_lindeberg(const CliOptions& o) {
  const auto cfg = make_config(o);
  const hb::RunContext ctx{cfg.seed, cfg.workers};
  const hb::LindebergResult r =
      hb::lindeberg_compare(ctx, cfg.ensemble, {16, 64, 256}, cfg.replicas, 0.3, 0.3);
  hb::ordered_json j;
  j["config"] = hb::config_json(cfg);
  j["lindeberg"] = hb::to_json(r);
  std::vector<std::vector<std::string>> rows;
  for (const auto& pt : r.sweep) {
    rows.push_back({std::to_string(pt.n), hb::format_double(pt.ab_ks.statistic),
                    hb::format_double(pt.ab_ks.p_value), hb::format_double(pt.lambda3_scaled),
                    hb::format_double(pt.lambda3_scaled_se)});
  }
  deliver(o,
          hb::csv_table(hb::provenance(cfg),
                        {"n", "ks_statistic", "ks_p", "lambda3_scaled", "lambda3_scaled_se"},
                        rows),
          j);
  if (!r.ks_decreasing() || r.sweep.back().ab_ks.statistic >= 0.05) {
    failure_report("lindeberg", hb::to_json(r));
    return kExitStatistical;
  }
  return kExitOk;
}

int cmd_decompose_check(const CliOptions& o) {
  const auto cfg = make_config(o);
  const hb::RunContext ctx{cfg.seed, cfg.workers};
  const hb::AnovaCheckResult r = hb::anova_check(ctx, cfg.ensemble, o.n, cfg.replicas);
  hb::ordered_json j;
  j["config"] = hb::config_json(cfg);
  j["decomposition"] = hb::to_json(r);
  deliver(o,
          hb::csv_table(hb::provenance(cfg), {"n", "max_residual", "tolerance", "pass"},
                        {{std::to_string(r.n), hb::format_double(r.max_residual),
                          hb::format_double(r.tolerance), r.pass ? "1" : "0"}}),
          j);
  if (!r.pass) {
    failure_report("decompose-check", hb::to_json(r));
    return kExitStatistical;
  }
  return kExitOk;
}

int cmd_spacings(const CliOptions& o) {
  const auto cfg = make_config(o);
  const hb::RunContext ctx{cfg.seed, cfg.workers};
  const hb::SpacingsResult r = hb::spacings_diagnostics(ctx, o.n, 3, 4, cfg.replicas,
                                                        {100, 1000, 10000}, {20000, 20000, 20000});
  hb::ordered_json j;
  j["config"] = hb::config_json(cfg);
  j["spacings"] = hb::to_json(r);
  std::vector<std::vector<std::string>> rows;
  for (const auto& pt : r.window) {
    rows.push_back({std::to_string(pt.n), hb::format_double(pt.mean.mean),
                    hb::format_double(pt.mean.std_error),
                    hb::format_double(pt.ratio_to_log_n)});
  }
  deliver(o,
          hb::csv_table(hb::provenance(cfg), {"n", "window_mean", "window_se", "ratio_to_log_n"},
                        rows),
          j);
  if (r.identity_ks.p_value <= 0.001 || r.window_ratio_spread > 3.0) {
    failure_report("spacings", hb::to_json(r));
    return kExitStatistical;
  }
  return kExitOk;
}

int cmd_suite(const CliOptions& o) {
  make_config(o);  // shared flags must be coherent even where suite ignores them
  hb::SuiteOptions opts;
  opts.seed = o.seed;
  opts.threads = o.threads;
  opts.out_dir = o.out.empty() ? "suite_output" : o.out;
  const hb::SuiteResult res = hb::run_suite(opts, std::cout);
  if (!res.all_pass()) {
    hb::ordered_json j = hb::ordered_json::array();
    for (const auto& c : res.criteria) {
      if (!c.pass) j.push_back({{"index", c.index}, {"name", c.name}, {"detail", c.detail}});
    }
    failure_report("suite", j);
    return kExitStatistical;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo checks for randomly truncated doubly stochastic matrices"};
  app.require_subcommand(1);

  CliOptions o;
  if (const char* env = std::getenv("HAARBRIDGE_SEED")) {
    o.seed = std::strtoull(env, nullptr, 10);
  }

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--ensemble", o.ensemble, "unitary | orthogonal | dft | permutation");
    sub->add_option("--n", o.n, "matrix dimension");
    sub->add_option("--replicas", o.replicas, "Monte Carlo replicas");
    sub->add_option("--seed", o.seed, "RNG seed (default from HAARBRIDGE_SEED, then 7)");
    sub->add_option("--threads", o.threads, "worker threads, 0 = all cores");
    sub->add_option("--grid", o.grid, "grid as s1,s2,...;t1,t2,...");
    sub->add_option("--out", o.out, "output file (suite: output directory)");
    sub->add_option("--format", o.format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--config", o.config, "JSON config file; its values override flags");
  };

  CLI::App* sample = app.add_subcommand("sample", "draw one matrix and write it out");
  CLI::App* moments = app.add_subcommand("verify-moments", "MC vs exact entry moments");
  CLI::App* covariance = app.add_subcommand("covariance", "MC vs exact Z covariance on a grid");
  CLI::App* marginal = app.add_subcommand("marginal", "KS tests of the marginal limit laws");
  CLI::App* lindeberg = app.add_subcommand("lindeberg", "Bernoulli vs Gaussian design swap");
  CLI::App* decompose = app.add_subcommand("decompose-check", "exact decomposition residual");
  CLI::App* spacings = app.add_subcommand("spacings", "order-statistic spacings diagnostics");
  CLI::App* suite = app.add_subcommand("suite", "full verification battery (CI gate)");
  for (CLI::App* sub :
       {sample, moments, covariance, marginal, lindeberg, decompose, spacings, suite}) {
    add_common(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    apply_config_file(o);
    if (sample->parsed()) return cmd_sample(o);
    if (moments->parsed()) return cmd_verify_moments(o);
    if (covariance->parsed()) return cmd_covariance(o);
    if (marginal->parsed()) return cmd_marginal(o);
    if (lindeberg->parsed()) return cmd_lindeberg(o);
    if (decompose->parsed()) return cmd_decompose_check(o);
    if (spacings->parsed()) return cmd_spacings(o);
    if (suite->parsed()) return cmd_suite(o);
    std::cerr << "no subcommand given\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
