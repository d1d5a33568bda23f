// Runs the full verification suite through the CLI twice, with different
// worker counts, checks every criterion in the summary, and confirms that the
// emitted artifacts are byte-identical across thread counts.
// Usage: acceptance_runner <path-to-haarbridge-cli>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const char* kArtifacts[] = {
    "c01_decomposition.json", "c02_exact_moments.json", "c03_closed_forms.json",
    "c04_shat.json",          "c05_charfn.json",        "c06_z_covariance.json",
    "c07_marginals.json",     "c08_lindeberg.json",     "c09_onedim.json",
    "c10_spacings.json",      "c11_zero_trend.json",    "summary.json"};

int run(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance_runner <path-to-haarbridge-cli>\n";
    return 2;
  }
  const std::string cli = std::string("\"") + argv[1] + "\"";
  const fs::path dir = fs::temp_directory_path() / "haarbridge_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path t1 = dir / "acc_t1";
  const fs::path t8 = dir / "acc_t8";

  std::cout << "running suite with --threads 1 (this is the long run)\n" << std::flush;
  const int rc1 = run(cli + " suite --seed 7 --threads 1 --out " + t1.string() + " > " +
                      (dir / "acc_t1.log").string() + " 2>&1");
  std::cout << slurp(dir / "acc_t1.log") << std::flush;
  if (rc1 != 0 && rc1 != 2) {
    std::cerr << "suite run with --threads 1 exited with unexpected code " << rc1 << "\n";
    return 1;
  }

  std::cout << "running suite with --threads 8\n" << std::flush;
  const int rc8 = run(cli + " suite --seed 7 --threads 8 --out " + t8.string() + " > " +
                      (dir / "acc_t8.log").string() + " 2>&1");
  if (rc8 != 0 && rc8 != 2) {
    std::cerr << "suite run with --threads 8 exited with unexpected code " << rc8 << "\n";
    return 1;
  }

  bool reproducible = true;
  for (const char* name : kArtifacts) {
    const std::string a = slurp(t1 / name);
    const std::string b = slurp(t8 / name);
    if (a.empty() || a != b) {
      reproducible = false;
      std::cerr << "artifact mismatch across thread counts: " << name << "\n";
    }
  }

  const std::string summary_text = slurp(t1 / "summary.json");
  if (summary_text.empty()) {
    std::cerr << "missing summary.json\n";
    return 1;
  }
  const ordered_json summary = ordered_json::parse(summary_text);

  int failures = 0;
  std::cout << "\nacceptance summary\n";
  for (const auto& c : summary["criteria"]) {
    const bool pass = c["pass"].get<bool>();
    if (!pass) ++failures;
    char head[64];
    std::snprintf(head, sizeof(head), "criterion %2d %s", c["index"].get<int>(),
                  pass ? "PASS" : "FAIL");
    std::cout << head << " " << c["name"].get<std::string>() << ": "
              << c["detail"].get<std::string>() << "\n";
  }
  if (!reproducible) ++failures;
  std::cout << "criterion 12 " << (reproducible ? "PASS" : "FAIL")
            << " thread_reproducibility: 12 artifacts byte-compared across --threads 1 and 8\n";

  if (summary["criteria"].size() != 11) {
    std::cerr << "expected 11 criteria in summary, found " << summary["criteria"].size() << "\n";
    return 1;
  }
  std::cout << (failures == 0 ? "all criteria pass\n" : "criteria failing: see above\n");
  return failures == 0 ? 0 : 1;
}
