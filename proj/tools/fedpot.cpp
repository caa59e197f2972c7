// fedpot: command-line entry point for the federated honeypot simulator.
//
//   fedpot run     --config <path> [--out <dir>] [--seed <n>]
//   fedpot compare --config <path> [--out <dir>] [--seed <n>]
//   fedpot verify  --menu <path>
//
// Exit status: 0 success, 1 config/IO failure, 2 contract violations (verify).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "fedpot/config.hpp"
#include "fedpot/contract.hpp"
#include "fedpot/federation.hpp"
#include "fedpot/report.hpp"

namespace fs = std::filesystem;
using namespace fedpot;

namespace {

void flag_incomplete(const fs::path& dir, const std::string& why) {
  std::error_code ec;
  if (!fs::exists(dir, ec)) return;
  std::ofstream(dir / "INCOMPLETE") << why << "\n";
}

config::ExperimentConfig load(const std::string& path, const std::optional<std::uint64_t>& seed,
                              const std::string& out) {
  auto cfg = config::parse_config_file(path, seed);
  if (!out.empty()) cfg.output_dir = out;
  return cfg;
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

int cmd_run(const config::ExperimentConfig& cfg) {
  const fs::path dir = cfg.output_dir;
  try {
    const auto setup = config::build_setup(cfg);
    const auto result = federation::run_experiment(setup);
    report::write_bundle(dir, cfg, result);
    const auto& s = result.summary;
    std::cout << "scheme=" << cfg.scheme << " rounds=" << s.rounds << " accuracy=" << fmt(s.final_metrics.accuracy)
              << " tprate=" << fmt(s.final_metrics.tprate) << " tnr=" << fmt(s.final_metrics.tnr)
              << " f1=" << fmt(s.final_metrics.f1) << " fairness=" << fmt(s.mean_fairness)
              << " spent=" << fmt(s.total_spent) << "/" << fmt(s.total_budget) << "\n"
              << "outputs written to " << dir.string() << "\n";
  } catch (...) {
    flag_incomplete(dir, "run aborted before completion");
    throw;
  }
  return 0;
}

int cmd_compare(const config::ExperimentConfig& cfg) {
  const fs::path dir = cfg.output_dir;
  const federation::AggregationScheme schemes[] = {federation::AggregationScheme::ConventionalFedAvg,
                                                   federation::AggregationScheme::TrustBased,
                                                   federation::AggregationScheme::UntrustBased};
  try {
    const auto base = config::build_setup(cfg);
    std::vector<federation::ExperimentResult> results;
    for (auto scheme : schemes) {
      auto setup = base;
      setup.settings.scheme = scheme;
      auto scheme_cfg = cfg;
      scheme_cfg.scheme = config::scheme_name(scheme);
      scheme_cfg.output_dir = (dir / scheme_cfg.scheme).string();
      results.push_back(federation::run_experiment(setup));
      report::write_bundle(scheme_cfg.output_dir, scheme_cfg, results.back());
    }

    std::ofstream csv(dir / "compare.csv", std::ios::trunc);
    csv << "round,conventional_accuracy,trust_accuracy,untrust_accuracy\n";
    for (std::size_t z = 0; z < results.front().reports.size(); ++z) {
      csv << z + 1;
      for (const auto& r : results) csv << ',' << report::json(r.reports[z].metrics.accuracy).dump();
      csv << '\n';
    }

    std::printf("%-14s %10s %10s %10s %10s %10s\n", "scheme", "accuracy", "tprate", "tnr", "f1", "fairness");
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& s = results[i].summary;
      std::printf("%-14s %10s %10s %10s %10s %10s\n", config::scheme_name(schemes[i]).c_str(),
                  fmt(s.final_metrics.accuracy).c_str(), fmt(s.final_metrics.tprate).c_str(),
                  fmt(s.final_metrics.tnr).c_str(), fmt(s.final_metrics.f1).c_str(), fmt(s.mean_fairness).c_str());
    }
    std::cout << "outputs written to " << dir.string() << "\n";
  } catch (...) {
    flag_incomplete(dir, "compare aborted before completion");
    throw;
  }
  return 0;
}

int cmd_verify(const std::string& menu_path) {
  const auto menu = config::load_menu(menu_path);
  auto violations = contract::verify_monotonicity(menu);
  if (menu.items.size() >= 2) {
    const auto ic = contract::verify_ldic_luic(menu);
    violations.insert(violations.end(), ic.begin(), ic.end());
  }
  if (violations.empty()) {
    std::cout << "menu of " << menu.items.size() << " items: no violations\n";
    return 0;
  }
  for (const auto& v : violations) std::cout << contract::to_string(v) << "\n";
  std::cout << violations.size() << " violation(s)\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated honeypot-log learning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string menu_path;

  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_option("--seed", seed, "Top-level seed override");

  auto* compare = app.add_subcommand("compare", "Run the config under all three aggregation schemes");
  compare->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  compare->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  compare->add_option("--seed", seed, "Top-level seed override");

  auto* verify = app.add_subcommand("verify", "Check a contract menu for monotonicity and LDIC/LUIC");
  verify->add_option("--menu", menu_path, "Menu file (JSON)")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(load(config_path, seed, out_dir));
    if (*compare) return cmd_compare(load(config_path, seed, out_dir));
    if (*verify) return cmd_verify(menu_path);
  } catch (const std::exception& e) {
    std::cerr << "fedpot: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
