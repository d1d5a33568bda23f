#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "haarbridge/montecarlo.hpp"

namespace haarbridge {

using ordered_json = nlohmann::ordered_json;

// key=value pairs echoed at the top of every output file.
using Provenance = std::vector<std::pair<std::string, std::string>>;

// 17 significant digits; enough to reconstruct the double bit for bit.
std::string format_double(double x);

std::string grid_to_string(const GridSpec& grid);

// The resolved configuration a result was produced under.  The worker count
// is deliberately absent: outputs must not depend on it.
Provenance provenance(const ExperimentConfig& cfg);

// Provenance lines as "# key=value" comments, then the header row, then the
// data rows.
std::string csv_table(const Provenance& prov, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

// Creates parent directories as needed.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

ordered_json config_json(const ExperimentConfig& cfg);

ordered_json to_json(const EstimateWithCI& e);
ordered_json to_json(const KsResult& k);
ordered_json to_json(const AnovaCheckResult& r);
ordered_json to_json(const CovarianceResult& r);
ordered_json to_json(const ShatResult& r);
ordered_json to_json(const CharFnResult& r);
ordered_json to_json(const MarginalKsResult& r);
ordered_json to_json(const LindebergResult& r);
ordered_json to_json(const SpacingsResult& r);
ordered_json to_json(const OneDimResult& r);
ordered_json to_json(const HIdentityResult& r);
ordered_json to_json(const QuarticLimitResult& r);
ordered_json to_json(const ZeroTrendResult& r);
ordered_json to_json(const MomentReport& r);

// Complex matrix with paired re/im columns.
std::string matrix_csv(const SquareMatrix& u, const Provenance& prov);
ordered_json matrix_json(const SquareMatrix& u);

// Covariance rows: n, s, t, s_prime, t_prime, estimate, std_error, oracle, z.
std::string covariance_csv(const CovarianceResult& r, const Provenance& prov);
std::string moments_csv(const MomentReport& r, const Provenance& prov);

}  // namespace haarbridge
