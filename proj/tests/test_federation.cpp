#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <cstdlib>
#include <string>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fedpot/federation.hpp"
#include "fedpot/quality.hpp"
#include "fedpot/rng.hpp"

using namespace fedpot;
using namespace fedpot::federation;
using doctest::Approx;

namespace {

ParameterVector vec(std::vector<double> v) {
  ParameterVector p;
  p.arch = {1, {}, static_cast<int>(v.size() / 2)};
  p.values = std::move(v);
  return p;
}

// Small scenario: d = 4, three classes, `clients` suppliers sharing one partition plan.
ExperimentSetup small_setup(std::size_t clients, std::size_t malicious, std::uint64_t seed, int rounds = 3) {
  const auto data = generate_synthetic({4, 3, 60, 0.1, seed});
  const auto split = holdout_split(data, 0.75, seed + 1);
  const auto parts = partition(split.train, {clients, PartitionMode::Iid, 2, 0, seed + 2});

  ExperimentSetup setup;
  setup.test_set = split.test;
  auto& s = setup.settings;
  s.arch = {4, {6}, 3};
  s.training = {2, 8, 0.1, 0};
  s.rounds = rounds;
  s.total_budget = 30.0 * rounds;
  s.deadline = 100.0;
  s.positive_labels = {1, 2};
  s.seed = seed;
  s.threads = 1;
  for (std::size_t i = 0; i < clients; ++i) {
    SpsProfile p;
    p.id = static_cast<int>(i);
    p.local_data = parts[i];
    p.true_phi = quality::vdd_quality(parts[i], split.train, 16).phi;
    p.claimed_phi = p.true_phi;
    p.seed = derive_seed(seed, {0x5b5, i});
    if (i < malicious) {
      p.honest = false;
      p.claimed_phi = 1.0;
      p.attack = {AttackKind::RandomParams, 0.0};
    }
    setup.profiles.push_back(p);
  }
  return setup;
}

}  // namespace

TEST_CASE("trust_weights") {
  const std::vector<double> a{0.2, 0.3, 0.5};
  const auto w = trust_weights(a);
  for (std::size_t i = 0; i < 3; ++i) CHECK(w[i] == Approx(a[i]).epsilon(1e-15));
  const auto eq = trust_weights(std::vector<double>{0.7, 0.7, 0.7, 0.7});
  for (double v : eq) CHECK(v == 0.25);
  const auto two = trust_weights(std::vector<double>{1.0, 3.0});
  CHECK(two[0] == 0.25);
  CHECK(two[1] == 0.75);
  CHECK_THROWS_AS(trust_weights(std::vector<double>{0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(trust_weights(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(trust_weights(std::vector<double>{-1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("conventional_weights") {
  const auto w = conventional_weights(std::vector<double>{100, 300});
  CHECK(w[0] == 0.25);
  CHECK(w[1] == 0.75);
  for (double v : conventional_weights(std::vector<double>{5, 5, 5})) CHECK(v == 1.0 / 3.0);
  CHECK(conventional_weights(std::vector<double>{42}) == std::vector<double>{1.0});
  CHECK_THROWS_AS(conventional_weights(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(conventional_weights(std::vector<double>{0, 1}), std::invalid_argument);
}

TEST_CASE("untrust_weights") {
  // Threshold models: class 1 iff x > 0.5, and its inverse.
  ParameterVector good;
  good.arch = {1, {}, 2};
  good.values = {0.0, 10.0, 0.0, -5.0};
  ParameterVector bad = good;
  bad.values = {0.0, -10.0, 0.0, 5.0};
  LabeledDataset test;
  test.num_classes = 2;
  test.dimension = 1;
  test.samples = {{{0.1}, 0}, {{0.2}, 0}, {{0.8}, 1}, {{0.9}, 1}};

  const std::vector<ParameterVector> models{good, good, bad};
  const auto r = untrust_weights(models, test);
  CHECK(r.revenues == std::vector<double>{1.0, 1.0, 0.0});
  CHECK(r.weights == std::vector<double>{0.5, 0.5, 0.0});
  CHECK_FALSE(r.degenerate);

  CHECK(untrust_weights(std::vector<ParameterVector>{bad}, test).weights == std::vector<double>{1.0});
  const auto same = untrust_weights(std::vector<ParameterVector>{good, good}, test);
  CHECK(same.weights[0] == same.weights[1]);

  const auto zero = untrust_weights(std::vector<ParameterVector>{bad, bad}, test);
  CHECK(zero.degenerate);
  CHECK(zero.weights == std::vector<double>{0.5, 0.5});

  const auto floored = untrust_weights(models, test, 0.6);
  CHECK(floored.revenues[0] == Approx(0.4).epsilon(1e-12));
  CHECK(floored.revenues[2] == 0.0);

  const auto screened = untrust_weights(models, test, 0.0, {true, false, true});
  CHECK(screened.weights == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("euclidean_screen") {
  const auto g = vec({0.0, 0.0});
  const std::vector<ParameterVector> same{g, g, g, g};
  CHECK(euclidean_screen(g, same, 3.0) == std::vector<bool>{true, true, true, true});

  const std::vector<ParameterVector> outlier{vec({1.0, 0.0}), vec({0.0, 1.0}), vec({-1.0, 0.0}), vec({100.0, 0.0})};
  CHECK(euclidean_screen(g, outlier, 3.0) == std::vector<bool>{true, true, true, false});

  const std::vector<ParameterVector> two{vec({1.0, 0.0}), vec({1000.0, 0.0})};
  CHECK(euclidean_screen(g, two, 3.0) == std::vector<bool>{true, true});

  const std::vector<ParameterVector> wrong{vec({1.0, 0.0, 0.0, 0.0})};
  CHECK_THROWS_AS(euclidean_screen(g, wrong, 3.0), std::invalid_argument);

  // An upload identical to the previous global is never rejected.
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<ParameterVector> ups{g};
    for (int k = 0; k < 5; ++k) ups.push_back(vec({n(rng), n(rng)}));
    CHECK(euclidean_screen(g, ups, 0.5)[0]);
  }
}

TEST_CASE("aggregate") {
  const std::vector<ParameterVector> ms{vec({1.0, 3.0}), vec({3.0, 5.0})};
  CHECK(aggregate(ms, std::vector<double>{0.5, 0.5}).values == std::vector<double>{2.0, 4.0});
  CHECK(aggregate(ms, std::vector<double>{1.0, 0.0}).values == ms[0].values);
  CHECK_THROWS_AS(aggregate(ms, std::vector<double>{0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(aggregate(ms, std::vector<double>{1.0}), std::invalid_argument);
  const std::vector<ParameterVector> mixed{vec({1.0, 3.0}), vec({1.0, 2.0, 3.0, 4.0})};
  CHECK_THROWS_AS(aggregate(mixed, std::vector<double>{0.5, 0.5}), std::invalid_argument);

  // Equal weights match conventional FedAvg with equal data sizes.
  const std::vector<ParameterVector> three{vec({1, 2}), vec({4, 8}), vec({7, 5})};
  const auto w = conventional_weights(std::vector<double>{10, 10, 10});
  CHECK(aggregate(three, w).values == aggregate(three, normalize_weights(std::vector<double>{1, 1, 1})).values);
}

TEST_CASE("softmax_rewards") {
  CHECK(softmax_rewards(std::vector<double>{0, 0, 0}, 30.0) == std::vector<double>{10.0, 10.0, 10.0});
  const auto r = softmax_rewards(std::vector<double>{std::log(2.0), 0.0}, 30.0);
  CHECK(r[0] == Approx(20.0).epsilon(1e-12));
  CHECK(r[1] == Approx(10.0).epsilon(1e-12));
  CHECK_THROWS_AS(softmax_rewards(std::vector<double>{}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(softmax_rewards(std::vector<double>{1.0}, -1.0), std::invalid_argument);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> w(1 + t % 9);
    for (auto& v : w) v = u(rng);
    const double budget = 100.0 * u(rng) + 0.1;
    const auto rw = softmax_rewards(w, budget);
    CHECK(std::accumulate(rw.begin(), rw.end(), 0.0) == Approx(budget).epsilon(1e-12));
    for (std::size_t i = 0; i < w.size(); ++i) {
      CHECK(rw[i] > 0.0);
      for (std::size_t j = 0; j < w.size(); ++j)
        if (w[i] > w[j]) CHECK(rw[i] > rw[j]);
    }
  }
}

TEST_CASE("fairness_index") {
  CHECK(fairness_index(std::vector<double>{2, 4, 6}, std::vector<double>{1, 2, 3}) == Approx(1.0).epsilon(1e-12));
  // Shares [1, 0] against equal contributions: ratios [2, 0].
  CHECK(fairness_index(std::vector<double>{1, 0}, std::vector<double>{1, 1}) == Approx(0.5).epsilon(1e-12));
  CHECK(fairness_index(std::vector<double>{1, 1, 1, 3}, std::vector<double>{1, 1, 1, 1}) ==
        Approx(0.75).epsilon(1e-12));
  CHECK_THROWS_AS(fairness_index(std::vector<double>{1}, std::vector<double>{1, 1}), std::invalid_argument);

  // Paying a zero contributor counts as ten times the largest earned ratio,
  // never less than ten.
  const double unearned = fairness_index(std::vector<double>{1, 1}, std::vector<double>{1, 0});
  // Earned ratio (1/2)/1 = 0.5, so the unearned term is 10.
  CHECK(unearned == Approx(10.5 * 10.5 / (2.0 * (0.25 + 100.0))).epsilon(1e-12));
  const double overpaid = fairness_index(std::vector<double>{3, 1, 0}, std::vector<double>{1, 1, 0});
  // Ratios: 0.75/0.5 = 1.5, 0.25/0.5 = 0.5, and nothing-for-nothing counts as 1.
  CHECK(overpaid == Approx(9.0 / (3.0 * (2.25 + 0.25 + 1.0))).epsilon(1e-12));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> r(5), c(5);
    for (auto& v : r) v = u(rng);
    for (auto& v : c) v = u(rng);
    const double f = fairness_index(r, c);
    CHECK(f > 0.0);
    CHECK(f <= 1.0 + 1e-12);
  }
}

TEST_CASE("adversarial_upload") {
  SpsProfile p;
  p.honest = false;
  const ParameterVector trained = learner::init_params({3, {4}, 2}, 1);

  p.attack = {AttackKind::GaussianPerturb, 0.0};
  CHECK(adversarial_upload(p, trained, 5).values == trained.values);

  p.attack = {AttackKind::RandomParams, 0.0};
  CHECK(adversarial_upload(p, trained, 5).values == learner::init_params(trained.arch, 5).values);

  ParameterVector zero;
  zero.arch = {100, {99}, 2};
  zero.values.assign(zero.arch.parameter_count(), 0.0);
  REQUIRE(zero.size() >= 10000);
  p.attack = {AttackKind::GaussianPerturb, 1.0};
  const auto noisy = adversarial_upload(p, zero, 9);
  double mean = 0.0, sq = 0.0;
  for (double v : noisy.values) mean += v;
  mean /= static_cast<double>(noisy.size());
  for (double v : noisy.values) sq += (v - mean) * (v - mean);
  CHECK(std::abs(std::sqrt(sq / static_cast<double>(noisy.size())) - 1.0) <= 0.1);

  SpsProfile honest;
  CHECK_THROWS_AS(adversarial_upload(honest, trained, 1), std::invalid_argument);
}

TEST_CASE("model_deviation") {
  const auto a = vec({1.0, 2.0});
  const auto b = vec({4.0, 6.0});
  CHECK(model_deviation(a, a) == 0.0);
  CHECK(model_deviation(a, b) == 5.0);
  CHECK(model_deviation(b, a) == 5.0);
  CHECK_THROWS_AS(model_deviation(a, vec({1, 2, 3, 4})), std::invalid_argument);
}

TEST_CASE("normalize_weights returns exact uniform shares for equal inputs") {
  for (std::size_t n = 1; n < 12; ++n) {
    const auto w = normalize_weights(std::vector<double>(n, 0.37));
    for (double v : w) CHECK(v == 1.0 / static_cast<double>(n));
  }
}

TEST_CASE("run_round invariants across schemes") {
  for (auto scheme : {AggregationScheme::ConventionalFedAvg, AggregationScheme::TrustBased,
                      AggregationScheme::UntrustBased}) {
    auto setup = small_setup(5, 2, 21);
    auto st = make_state(setup);
    for (int z = 0; z < 2; ++z) {
      const auto rep = run_round(st, scheme, setup.settings.verification);
      REQUIRE_FALSE(rep.selected.empty());
      double wsum = 0.0, rsum = 0.0;
      for (const auto& c : rep.clients) {
        wsum += c.weight;
        rsum += c.reward;
        CHECK(c.reward > 0.0);
        CHECK(c.cost.t_total <= setup.settings.deadline);
      }
      CHECK(wsum == Approx(1.0).epsilon(1e-9));
      CHECK(rsum == Approx(rep.budget_round).epsilon(1e-9));
      CHECK(rep.budget_spent <= rep.budget_round + 1e-9);
      CHECK(std::is_sorted(rep.selected.begin(), rep.selected.end()));
      for (const auto& a : rep.clients)
        for (const auto& b : rep.clients)
          if (a.weight > b.weight) CHECK(a.reward > b.reward);
    }
  }
}

TEST_CASE("run_round with no malicious suppliers: trust and untrust select the same suppliers") {
  const auto setup = small_setup(4, 0, 5);
  auto trust = make_state(setup);
  auto untrust = make_state(setup);
  const auto a = run_round(trust, AggregationScheme::TrustBased, setup.settings.verification);
  const auto b = run_round(untrust, AggregationScheme::UntrustBased, setup.settings.verification);
  CHECK(a.selected == b.selected);
}

TEST_CASE("run_round pass-through when nothing is selectable") {
  auto setup = small_setup(3, 0, 7);
  setup.settings.deadline = 1e-12;
  auto st = make_state(setup);
  const auto before = st.global;
  const auto rep = run_round(st, AggregationScheme::UntrustBased, setup.settings.verification);
  CHECK(rep.selected.empty());
  CHECK(rep.budget_spent == 0.0);
  CHECK(st.global.values == before.values);
  CHECK(st.spent == 0.0);
}

TEST_CASE("screened uploads keep a positive reward unless strict") {
  auto setup = small_setup(5, 1, 9);
  setup.profiles[0].attack = {AttackKind::GaussianPerturb, 50.0};
  VerificationConfig v;
  v.method = VerificationMethod::EuclideanScreen;

  auto st = make_state(setup);
  const auto rep = run_round(st, AggregationScheme::UntrustBased, v);
  const auto it = std::find_if(rep.clients.begin(), rep.clients.end(), [](const auto& c) { return c.id == 0; });
  REQUIRE(it != rep.clients.end());
  CHECK_FALSE(it->accepted);
  CHECK(it->weight == 0.0);
  CHECK(it->reward > 0.0);
  double min_reward = it->reward;
  for (const auto& c : rep.clients) min_reward = std::min(min_reward, c.reward);
  CHECK(it->reward == min_reward);

  v.strict_rewards = true;
  auto strict = make_state(setup);
  const auto srep = run_round(strict, AggregationScheme::UntrustBased, v);
  double total = 0.0;
  for (const auto& c : srep.clients) {
    if (c.id == 0) {
      CHECK(c.reward == 0.0);
      CHECK_FALSE(c.utility.has_value());
    }
    total += c.reward;
  }
  CHECK(total == Approx(srep.budget_round).epsilon(1e-9));
}

TEST_CASE("scheme equivalence under equal data, equal claims and honest suppliers") {
  // Every supplier holds the same data and shares one seed, so the uploads
  // and all three weightings coincide.
  auto setup = small_setup(4, 0, 13);
  for (auto& p : setup.profiles) {
    p.local_data = setup.profiles[0].local_data;
    p.true_phi = p.claimed_phi = setup.profiles[0].true_phi;
    p.seed = setup.profiles[0].seed;
  }
  std::vector<ParameterVector> finals;
  for (auto scheme : {AggregationScheme::ConventionalFedAvg, AggregationScheme::TrustBased,
                      AggregationScheme::UntrustBased}) {
    auto s = setup;
    s.settings.scheme = scheme;
    finals.push_back(run_experiment(s).final_global);
  }
  CHECK(finals[0].values == finals[1].values);
  CHECK(finals[1].values == finals[2].values);
}

TEST_CASE("run_experiment") {
  SUBCASE("zero rounds") {
    auto setup = small_setup(3, 0, 1, 0);
    const auto r = run_experiment(setup);
    CHECK(r.reports.empty());
    CHECK(r.summary.rounds == 0);
    CHECK(r.summary.final_metrics.accuracy == r.summary.initial_metrics.accuracy);
  }
  SUBCASE("spend within budget, deterministic, honest shadow is zero deviation") {
    auto setup = small_setup(4, 0, 2, 4);
    setup.shadow_run = true;
    const auto a = run_experiment(setup);
    const auto b = run_experiment(setup);
    CHECK(a.summary.total_spent <= setup.settings.total_budget + 1e-9);
    REQUIRE(a.reports.size() == 4);
    for (std::size_t z = 0; z < a.reports.size(); ++z) {
      CHECK(*a.reports[z].deviation == 0.0);
      CHECK(a.reports[z].metrics.accuracy == b.reports[z].metrics.accuracy);
      CHECK(a.global_trajectory[z].values == b.global_trajectory[z].values);
    }
  }
  SUBCASE("malicious suppliers give a positive deviation against the shadow") {
    auto setup = small_setup(4, 2, 3, 2);
    setup.shadow_run = true;
    const auto r = run_experiment(setup);
    CHECK(*r.reports.back().deviation > 0.0);
  }
  SUBCASE("thread count does not change results") {
    auto setup = small_setup(5, 1, 4, 2);
    const auto one = run_experiment(setup);
    setup.settings.threads = 3;
    const auto three = run_experiment(setup);
    CHECK(one.final_global.values == three.final_global.values);
  }
  SUBCASE("duplicate ids rejected") {
    auto setup = small_setup(3, 0, 1, 1);
    setup.profiles[1].id = setup.profiles[0].id;
    CHECK_THROWS_AS(run_experiment(setup), std::invalid_argument);
  }
}

TEST_CASE("honest_copies strip attacks and restore true claims") {
  const auto setup = small_setup(4, 2, 6);
  const auto copies = honest_copies(setup.profiles);
  for (std::size_t i = 0; i < copies.size(); ++i) {
    CHECK(copies[i].honest);
    CHECK(copies[i].attack.kind == AttackKind::None);
    CHECK(copies[i].claimed_phi == setup.profiles[i].true_phi);
    CHECK(copies[i].seed == setup.profiles[i].seed);
  }
}

TEST_CASE("resolve_threads") {
  const char* saved = std::getenv("FEDPOT_THREADS");
  const std::string previous = saved ? saved : "";
  unsetenv("FEDPOT_THREADS");
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);

  setenv("FEDPOT_THREADS", "2", 1);
  CHECK(resolve_threads(3) == 2);
  CHECK(resolve_threads(1) == 1);
  CHECK(resolve_threads(0) <= 2);
  setenv("FEDPOT_THREADS", "junk", 1);
  CHECK(resolve_threads(3) == 3);

  if (saved) setenv("FEDPOT_THREADS", previous.c_str(), 1);
  else unsetenv("FEDPOT_THREADS");
}
