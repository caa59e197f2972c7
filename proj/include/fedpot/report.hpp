#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "fedpot/config.hpp"
#include "fedpot/federation.hpp"

namespace fedpot::report {

using json = nlohmann::json;

json metrics_json(const learner::EvalMetrics& m);
json round_json(const federation::RoundReport& r);
json summary_json(const federation::ExperimentSummary& s);

// One CSV row per round; the first line is the header.
std::string summary_csv(const std::vector<federation::RoundReport>& reports);

// Writes rounds.jsonl, summary.csv, config.resolved and manifest.json into
// `dir`, returning the paths written.
std::vector<std::filesystem::path> write_bundle(const std::filesystem::path& dir,
                                                const config::ExperimentConfig& cfg,
                                                const federation::ExperimentResult& result);

}  // namespace fedpot::report
