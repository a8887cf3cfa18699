#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "contagion/experiment.hpp"

namespace contagion {

inline constexpr std::string_view kVersion = "0.1.0";

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

/// "start:stop:step" (inclusive, no accumulated drift) or a comma list.
std::vector<double> parse_degree_grid(const std::string& text);

/// Header `z,model,case,crisis_frequency,freq_ci,mean_crisis_size,n_runs,mismatches`.
/// Uses '.' as decimal separator regardless of locale; "NA" marks a point
/// without crises.
void write_stats_csv(std::ostream& out, const std::vector<CrisisStats>& stats, Case case_id);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Config echo, version, timestamp, seed and one entry per CSV row.
nlohmann::json make_manifest(const ExperimentConfig& cfg, const std::vector<CrisisStats>& stats,
                             const std::string& timestamp);

/// Subcommands. `args` excludes the program and subcommand names.
int cmd_sweep(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_check(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_trial(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Dispatches argv[1] to a subcommand.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace contagion
