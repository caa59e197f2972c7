#include "fedpot/report.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fedpot::report {

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_cell(const std::optional<double>& v) {
  if (!v) return "";
  return json(*v).dump();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

json metrics_json(const learner::EvalMetrics& m) {
  return json{{"accuracy", m.accuracy}, {"tprate", optional_json(m.tprate)}, {"tnr", optional_json(m.tnr)},
              {"f1", optional_json(m.f1)},  {"loss", m.loss},
              {"confusion", {{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}}}};
}

json round_json(const federation::RoundReport& r) {
  json clients = json::array();
  for (const auto& c : r.clients) {
    clients.push_back({
        {"id", c.id},
        {"malicious", c.malicious},
        {"claimed_phi", c.claimed_phi},
        {"type", c.type_index},
        {"theta", c.theta},
        {"required_reward", c.required_reward},
        {"weight", c.weight},
        {"G", c.revenue},
        {"reward", c.reward},
        {"accepted", c.accepted},
        {"distance_to_global", c.distance_to_global},
        {"cost",
         {{"rate", c.cost.rate},
          {"t_upload", c.cost.t_upload},
          {"t_compute", c.cost.t_compute},
          {"t_total", c.cost.t_total},
          {"c_upload", c.cost.c_upload},
          {"c_train", c.cost.c_train},
          {"c_total", c.cost.c_total}}},
        {"utility", optional_json(c.utility)},
    });
  }
  return json{
      {"round", r.round},
      {"selected", r.selected},
      {"clients", clients},
      {"metrics", metrics_json(r.metrics)},
      {"fairness", optional_json(r.fairness)},
      {"deviation", optional_json(r.deviation)},
      {"budget_round", r.budget_round},
      {"budget_spent", r.budget_spent},
      {"objective", r.objective},
      {"slowest_latency", r.slowest_latency},
      {"tpr_utility", r.tpr_utility},
      {"degenerate_weights", r.degenerate_weights},
  };
}

json summary_json(const federation::ExperimentSummary& s) {
  return json{{"rounds", s.rounds},
              {"initial_metrics", metrics_json(s.initial_metrics)},
              {"final_metrics", metrics_json(s.final_metrics)},
              {"total_budget", s.total_budget},
              {"total_spent", s.total_spent},
              {"mean_fairness", optional_json(s.mean_fairness)},
              {"final_deviation", optional_json(s.final_deviation)}};
}

std::string summary_csv(const std::vector<federation::RoundReport>& reports) {
  std::ostringstream out;
  out << "round,selected,accuracy,tprate,tnr,f1,loss,fairness,deviation,budget_round,budget_spent,objective,"
         "slowest_latency,tpr_utility\n";
  for (const auto& r : reports) {
    out << r.round << ',' << r.selected.size() << ',' << json(r.metrics.accuracy).dump() << ','
        << csv_cell(r.metrics.tprate) << ',' << csv_cell(r.metrics.tnr) << ',' << csv_cell(r.metrics.f1) << ','
        << json(r.metrics.loss).dump() << ',' << csv_cell(r.fairness) << ',' << csv_cell(r.deviation) << ','
        << json(r.budget_round).dump() << ',' << json(r.budget_spent).dump() << ',' << json(r.objective).dump()
        << ',' << json(r.slowest_latency).dump() << ',' << json(r.tpr_utility).dump() << '\n';
  }
  return out.str();
}

std::vector<std::filesystem::path> write_bundle(const std::filesystem::path& dir, const config::ExperimentConfig& cfg,
                                                const federation::ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;

  std::string lines;
  for (const auto& r : result.reports) lines += round_json(r).dump() + "\n";
  written.push_back(dir / "rounds.jsonl");
  write_file(written.back(), lines);

  written.push_back(dir / "summary.csv");
  write_file(written.back(), summary_csv(result.reports));

  written.push_back(dir / "config.resolved");
  write_file(written.back(), config::to_json(cfg).dump(2) + "\n");

  json files = json::array();
  for (const auto& p : written) files.push_back(p.filename().string());
  files.push_back("manifest.json");
  written.push_back(dir / "manifest.json");
  write_file(written.back(), json{{"files", files}, {"summary", summary_json(result.summary)}}.dump(2) + "\n");
  return written;
}

}  // namespace fedpot::report
