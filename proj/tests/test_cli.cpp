// Drives the fedpot binary end to end.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FEDPOT_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fedpot_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kConfig = R"({
  "num_sps": 3,
  "dataset": {"synthetic": {"dim": 4, "num_classes": 3, "per_class": 30}},
  "partition": {"mode": "iid"},
  "learner": {"epochs": 1, "hidden_sizes": [5]},
  "contract": {"rounds": 2, "budget": 20},
  "threads": 1
})";

}  // namespace

TEST_CASE("run twice gives byte-identical reports") {
  const auto dir = scratch("run");
  std::ofstream(dir / "cfg.json") << kConfig;
  const auto cfg = (dir / "cfg.json").string();
  REQUIRE(run_cli("run --config " + cfg + " --out " + (dir / "a").string()) == 0);
  REQUIRE(run_cli("run --config " + cfg + " --out " + (dir / "b").string()) == 0);
  for (const char* f : {"rounds.jsonl", "summary.csv", "manifest.json"}) {
    CHECK(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK_FALSE(fs::exists(dir / "a" / "INCOMPLETE"));

  // One JSON object per round.
  std::ifstream rounds(dir / "a" / "rounds.jsonl");
  std::string line;
  int n = 0;
  while (std::getline(rounds, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("metrics"));
    CHECK(j.contains("clients"));
    ++n;
  }
  CHECK(n == 2);

  // The resolved config reproduces the run.
  REQUIRE(run_cli("run --config " + (dir / "a" / "config.resolved").string() + " --out " + (dir / "c").string()) == 0);
  CHECK(slurp(dir / "a" / "rounds.jsonl") == slurp(dir / "c" / "rounds.jsonl"));

  // A different seed changes the run.
  REQUIRE(run_cli("run --config " + cfg + " --seed 7 --out " + (dir / "d").string()) == 0);
  CHECK(slurp(dir / "a" / "rounds.jsonl") != slurp(dir / "d" / "rounds.jsonl"));
}

TEST_CASE("FEDPOT_THREADS does not change results") {
  const auto dir = scratch("threads");
  auto cfg = nlohmann::json::parse(kConfig);
  cfg.erase("threads");
  std::ofstream(dir / "cfg.json") << cfg.dump();
  const auto path = (dir / "cfg.json").string();
  REQUIRE(run_cli("run --config " + path + " --out " + (dir / "a").string()) == 0);
  REQUIRE(std::system(("FEDPOT_THREADS=3 " + std::string(FEDPOT_BIN) + " run --config " + path + " --out " +
                       (dir / "b").string() + " > /dev/null 2>&1")
                          .c_str()) == 0);
  CHECK(slurp(dir / "a" / "rounds.jsonl") == slurp(dir / "b" / "rounds.jsonl"));
}

TEST_CASE("compare writes one bundle per scheme") {
  const auto dir = scratch("compare");
  std::ofstream(dir / "cfg.json") << kConfig;
  REQUIRE(run_cli("compare --config " + (dir / "cfg.json").string() + " --out " + (dir / "out").string()) == 0);
  for (const char* s : {"conventional", "trust", "untrust"}) CHECK(fs::exists(dir / "out" / s / "summary.csv"));
  const auto csv = slurp(dir / "out" / "compare.csv");
  CHECK(csv.rfind("round,conventional_accuracy,trust_accuracy,untrust_accuracy\n", 0) == 0);
}

TEST_CASE("verify exit codes") {
  const auto dir = scratch("verify");
  std::ofstream(dir / "good.json") << R"({"items": [{"theta": 1, "reward": 3}, {"theta": 2, "reward": 5}]})";
  std::ofstream(dir / "bad.json") << R"({"items": [{"theta": 1, "reward": 5}, {"theta": 2, "reward": 3}]})";
  CHECK(run_cli("verify --menu " + (dir / "good.json").string()) == 0);
  CHECK(run_cli("verify --menu " + (dir / "bad.json").string()) == 2);

  const std::string out = (dir / "verify.txt").string();
  std::system((std::string(FEDPOT_BIN) + " verify --menu " + (dir / "bad.json").string() + " > " + out).c_str());
  CHECK(slurp(out).find("monotonicity(1,2)") != std::string::npos);

  // The shipped example menu is clean.
  CHECK(run_cli("verify --menu " + std::string(FEDPOT_SOURCE_DIR) + "/configs/menu-example.json") == 0);
}

TEST_CASE("errors give a nonzero exit") {
  const auto dir = scratch("errors");
  CHECK(run_cli("run --config " + (dir / "missing.json").string()) != 0);
  std::ofstream(dir / "typo.json") << R"({"num_sps": 3, "learner": {"epoch": 2}})";
  CHECK(run_cli("run --config " + (dir / "typo.json").string() + " --out " + (dir / "o").string()) == 1);
  CHECK(run_cli("") != 0);

  // A run that fails after creating its directory leaves a marker.
  std::ofstream(dir / "nodata.json") << R"({"num_sps": 2, "dataset": {"source": "csv", "path": "/nonexistent.csv"}})";
  fs::create_directories(dir / "partial");
  CHECK(run_cli("run --config " + (dir / "nodata.json").string() + " --out " + (dir / "partial").string()) == 1);
  CHECK(fs::exists(dir / "partial" / "INCOMPLETE"));
}
