#include "fedpot/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "fedpot/quality.hpp"
#include "fedpot/rng.hpp"

namespace fedpot::config {

namespace {

const std::set<std::string> kRadioKeys = {"bandwidth_share", "transmit_power",  "channel_gain_sq",
                                          "noise_power",     "upload_power",    "cycles_per_sample",
                                          "cpu_frequency",   "chip_coefficient", "deploy_cost"};

// Reads one JSON object, remembering which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const auto p = key.empty() ? (path_.empty() ? std::string("<root>") : path_) : key_path(key);
    throw ConfigError(p + ": " + what);
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void read(const std::string& key, double& out) {
    if (const auto* v = get(key)) {
      if (!v->is_number()) fail(key, "expected a number");
      out = v->get<double>();
    }
  }
  void read(const std::string& key, int& out) {
    if (const auto* v = get(key)) {
      if (!v->is_number_integer()) fail(key, "expected an integer");
      out = v->get<int>();
    }
  }
  void read(const std::string& key, std::size_t& out) {
    if (const auto* v = get(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) fail(key, "expected a non-negative integer");
      out = v->get<std::size_t>();
    }
  }
  void read_seed(const std::string& key, std::uint64_t& out, std::uint64_t fallback) {
    out = fallback;
    if (const auto* v = get(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
        fail(key, "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void read(const std::string& key, bool& out) {
    if (const auto* v = get(key)) {
      if (!v->is_boolean()) fail(key, "expected true or false");
      out = v->get<bool>();
    }
  }
  void read(const std::string& key, std::string& out) {
    if (const auto* v = get(key)) {
      if (!v->is_string()) fail(key, "expected a string");
      out = v->get<std::string>();
    }
  }
  void read(const std::string& key, std::vector<std::string>& out) {
    if (const auto* v = get(key)) {
      if (!v->is_array()) fail(key, "expected an array of strings");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_string()) fail(key, "expected an array of strings");
        out.push_back(e.get<std::string>());
      }
    }
  }
  void read(const std::string& key, std::vector<std::size_t>& out) {
    if (const auto* v = get(key)) {
      if (!v->is_array()) fail(key, "expected an array of positive integers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number_integer() || e.get<long long>() < 1) fail(key, "expected an array of positive integers");
        out.push_back(e.get<std::size_t>());
      }
    }
  }
  void read(const std::string& key, Range& out) {
    if (const auto* v = get(key)) {
      if (v->is_number()) {
        out.lo = out.hi = v->get<double>();
      } else if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number()) {
        out.lo = (*v)[0].get<double>();
        out.hi = (*v)[1].get<double>();
      } else {
        fail(key, "expected a number or a [lo, hi] pair");
      }
      if (!(out.lo > 0.0 || (key == "deploy_cost" && out.lo >= 0.0)) || out.hi < out.lo)
        fail(key, "range must satisfy 0 < lo <= hi");
    }
  }

  template <class F>
  void section(const std::string& key, F&& fn) {
    if (const auto* v = get(key)) {
      Section child(*v, key_path(key));
      fn(child);
      child.finish();
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(it.key(), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path + ": " + what);
}

void require_one_of(const std::string& value, std::initializer_list<const char*> allowed, const std::string& path) {
  for (const char* a : allowed)
    if (value == a) return;
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw ConfigError(path + ": '" + value + "' is not one of " + list);
}

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

double draw(const Range& r, Rng& rng) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

void apply_override(const json& values, radio::ChannelSpec& ch, radio::ComputeSpec& cs) {
  for (auto it = values.begin(); it != values.end(); ++it) {
    const double v = it.value().get<double>();
    const auto& k = it.key();
    if (k == "bandwidth_share") ch.bandwidth_share = v;
    else if (k == "transmit_power") ch.transmit_power = v;
    else if (k == "channel_gain_sq") ch.channel_gain_sq = v;
    else if (k == "noise_power") ch.noise_power = v;
    else if (k == "upload_power") ch.upload_power = v;
    else if (k == "cycles_per_sample") cs.cycles_per_sample = v;
    else if (k == "cpu_frequency") cs.cpu_frequency = v;
    else if (k == "chip_coefficient") cs.chip_coefficient = v;
    else if (k == "deploy_cost") cs.deploy_cost = v;
  }
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig c;
  Section root(doc, "");
  if (const auto* s = root.get("seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
      root.fail("seed", "expected a non-negative integer");
    c.seed = s->get<std::uint64_t>();
  }
  // Sub-seeds default to values derived from the top-level seed.
  c.dataset.synthetic.seed = derive_seed(c.seed, {1});
  c.dataset.split_seed = derive_seed(c.seed, {2});
  c.partition.seed = derive_seed(c.seed, {3});
  c.adversary.seed = derive_seed(c.seed, {4});
  c.quality.seed = derive_seed(c.seed, {5});
  c.radio.seed = derive_seed(c.seed, {6});

  root.section("dataset", [&](Section& s) {
    auto& d = c.dataset;
    s.read("source", d.source);
    s.read("path", d.path);
    s.read("device_paths", d.device_paths);
    s.read("test_path", d.test_path);
    s.read("label_column", d.label_column);
    s.read("benign_label", d.benign_label);
    s.read("train_fraction", d.train_fraction);
    s.read("subsample", d.subsample);
    s.read("normalize", d.normalize);
    s.read_seed("split_seed", d.split_seed, d.split_seed);
    s.section("synthetic", [&](Section& y) {
      y.read("dim", d.synthetic.dimension);
      y.read("num_classes", d.synthetic.num_classes);
      y.read("per_class", d.synthetic.per_class);
      y.read("spread", d.synthetic.spread);
      y.read_seed("seed", d.synthetic.seed, d.synthetic.seed);
    });
  });
  root.section("partition", [&](Section& s) {
    s.read("mode", c.partition.mode);
    s.read("max_classes_per_client", c.partition.max_classes_per_client);
    s.read_seed("seed", c.partition.seed, c.partition.seed);
  });
  root.read("num_sps", c.num_sps);
  root.section("adversary", [&](Section& s) {
    s.read("malicious_fraction", c.adversary.malicious_fraction);
    s.read("attack", c.adversary.attack);
    s.read("sigma", c.adversary.sigma);
    s.read_seed("seed", c.adversary.seed, c.adversary.seed);
  });
  root.section("quality", [&](Section& s) {
    s.read("grid_points", c.quality.grid_points);
    s.read("reference_mode", c.quality.reference_mode);
    s.read("reference_size", c.quality.reference_size);
    s.read("num_types", c.quality.num_types);
    s.read_seed("seed", c.quality.seed, c.quality.seed);
  });
  root.section("learner", [&](Section& s) {
    s.read("hidden_sizes", c.learner.hidden_sizes);
    s.read("epochs", c.learner.epochs);
    s.read("batch_size", c.learner.batch_size);
    s.read("learning_rate", c.learner.learning_rate);
    s.read("lr_decay_every", c.learner.lr_decay_every);
    s.read("lr_decay_factor", c.learner.lr_decay_factor);
  });
  root.section("radio", [&](Section& s) {
    auto& r = c.radio;
    s.read("bandwidth_share", r.bandwidth_share);
    s.read("transmit_power", r.transmit_power);
    s.read("channel_gain_sq", r.channel_gain_sq);
    s.read("noise_power", r.noise_power);
    s.read("upload_power", r.upload_power);
    s.read("cycles_per_sample", r.cycles_per_sample);
    s.read("cpu_frequency", r.cpu_frequency);
    s.read("chip_coefficient", r.chip_coefficient);
    s.read("deploy_cost", r.deploy_cost);
    s.read_seed("seed", r.seed, r.seed);
    if (const auto* ov = s.get("overrides")) {
      const auto base = s.key_path("overrides");
      require(ov->is_array(), base, "expected an array");
      r.overrides.clear();
      for (std::size_t i = 0; i < ov->size(); ++i) {
        const auto& e = (*ov)[i];
        const auto path = base + "[" + std::to_string(i) + "]";
        require(e.is_object(), path, "expected an object");
        require(e.contains("id") && e["id"].is_number_integer(), path + ".id", "expected an integer");
        SpsOverride o;
        o.id = e["id"].get<int>();
        o.values = json::object();
        for (auto it = e.begin(); it != e.end(); ++it) {
          if (it.key() == "id") continue;
          require(kRadioKeys.count(it.key()) > 0, path + "." + it.key(), "unknown key");
          require(it.value().is_number() && it.value().get<double>() >= 0.0, path + "." + it.key(),
                  "expected a non-negative number");
          o.values[it.key()] = it.value().get<double>();
        }
        r.overrides.push_back(std::move(o));
      }
    }
  });
  root.section("contract", [&](Section& s) {
    s.read("budget", c.contract.budget);
    s.read("rounds", c.contract.rounds);
    s.read("budget_policy", c.contract.budget_policy);
    s.read("round_budget", c.contract.round_budget);
    s.read("deadline", c.contract.deadline);
    s.read("reward_multiplier", c.contract.reward_multiplier);
    s.read("reward_floor", c.contract.reward_floor);
  });
  root.read("scheme", c.scheme);
  root.section("verification", [&](Section& s) {
    s.read("method", c.verification.method);
    s.read("screen_multiplier", c.verification.screen_multiplier);
    s.read("accuracy_floor", c.verification.accuracy_floor);
    s.read("strict_rewards", c.verification.strict_rewards);
  });
  root.read("shadow_run", c.shadow_run);
  root.read("threads", c.threads);
  root.read("output_dir", c.output_dir);
  root.finish();

  // Invariants.
  const auto& d = c.dataset;
  require_one_of(d.source, {"synthetic", "csv", "csv_devices"}, "dataset.source");
  if (d.source == "csv") require(!d.path.empty(), "dataset.path", "required when source is csv");
  if (d.source == "csv_devices") {
    require(!d.device_paths.empty(), "dataset.device_paths", "required when source is csv_devices");
    require(!d.test_path.empty(), "dataset.test_path", "required when source is csv_devices");
    require(static_cast<std::size_t>(c.num_sps) == d.device_paths.size(), "num_sps",
            "must equal the number of dataset.device_paths");
  }
  require(d.train_fraction > 0.0 && d.train_fraction < 1.0, "dataset.train_fraction", "must lie in (0,1)");
  require(d.synthetic.dimension >= 1, "dataset.synthetic.dim", "must be >= 1");
  require(d.synthetic.num_classes >= 2, "dataset.synthetic.num_classes", "must be >= 2");
  require(d.synthetic.per_class >= 1, "dataset.synthetic.per_class", "must be >= 1");
  require(d.synthetic.spread >= 0.0, "dataset.synthetic.spread", "must be >= 0");
  require_one_of(c.partition.mode, {"iid", "non_iid"}, "partition.mode");
  require(c.partition.max_classes_per_client >= 1, "partition.max_classes_per_client", "must be >= 1");
  require(c.num_sps >= 1, "num_sps", "must be >= 1");
  require(c.adversary.malicious_fraction >= 0.0 && c.adversary.malicious_fraction <= 1.0,
          "adversary.malicious_fraction", "must lie in [0,1]");
  require_one_of(c.adversary.attack, {"random_params", "gaussian_perturb"}, "adversary.attack");
  require(c.adversary.sigma >= 0.0, "adversary.sigma", "must be >= 0");
  require(c.quality.grid_points >= 2, "quality.grid_points", "must be >= 2");
  require_one_of(c.quality.reference_mode, {"pooled", "uniform"}, "quality.reference_mode");
  require(c.quality.reference_size >= 1, "quality.reference_size", "must be >= 1");
  require(c.quality.num_types >= 0, "quality.num_types", "must be >= 0");
  require(c.learner.epochs >= 1, "learner.epochs", "must be >= 1");
  require(c.learner.batch_size >= 1, "learner.batch_size", "must be >= 1");
  require(c.learner.learning_rate > 0.0, "learner.learning_rate", "must be > 0");
  require(c.learner.lr_decay_every >= 0, "learner.lr_decay_every", "must be >= 0");
  require(c.learner.lr_decay_factor > 0.0, "learner.lr_decay_factor", "must be > 0");
  require(c.contract.budget >= 0.0, "contract.budget", "must be >= 0");
  require(c.contract.rounds >= 0, "contract.rounds", "must be >= 0");
  require_one_of(c.contract.budget_policy, {"even", "fixed"}, "contract.budget_policy");
  require(c.contract.round_budget >= 0.0, "contract.round_budget", "must be >= 0");
  require(c.contract.deadline > 0.0, "contract.deadline", "must be > 0");
  require(c.contract.reward_multiplier > 0.0, "contract.reward_multiplier", "must be > 0");
  require(c.contract.reward_floor >= 0.0, "contract.reward_floor", "must be >= 0");
  require_one_of(c.scheme, {"conventional", "trust", "untrust"}, "scheme");
  require_one_of(c.verification.method, {"test_set", "euclidean_screen"}, "verification.method");
  require(c.verification.screen_multiplier > 0.0, "verification.screen_multiplier", "must be > 0");
  require(c.verification.accuracy_floor >= 0.0 && c.verification.accuracy_floor <= 1.0,
          "verification.accuracy_floor", "must lie in [0,1]");
  return c;
}

ExperimentConfig parse_config_file(const std::string& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (seed_override) {
    if (!doc.is_object()) throw ConfigError(path + ": expected an object");
    doc["seed"] = *seed_override;
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  json overrides = json::array();
  for (const auto& o : c.radio.overrides) {
    json e = o.values;
    e["id"] = o.id;
    overrides.push_back(e);
  }
  const auto& d = c.dataset;
  return json{
      {"seed", c.seed},
      {"dataset",
       {{"source", d.source},
        {"path", d.path},
        {"device_paths", d.device_paths},
        {"test_path", d.test_path},
        {"label_column", d.label_column},
        {"benign_label", d.benign_label},
        {"train_fraction", d.train_fraction},
        {"subsample", d.subsample},
        {"normalize", d.normalize},
        {"split_seed", d.split_seed},
        {"synthetic",
         {{"dim", d.synthetic.dimension},
          {"num_classes", d.synthetic.num_classes},
          {"per_class", d.synthetic.per_class},
          {"spread", d.synthetic.spread},
          {"seed", d.synthetic.seed}}}}},
      {"partition",
       {{"mode", c.partition.mode},
        {"max_classes_per_client", c.partition.max_classes_per_client},
        {"seed", c.partition.seed}}},
      {"num_sps", c.num_sps},
      {"adversary",
       {{"malicious_fraction", c.adversary.malicious_fraction},
        {"attack", c.adversary.attack},
        {"sigma", c.adversary.sigma},
        {"seed", c.adversary.seed}}},
      {"quality",
       {{"grid_points", c.quality.grid_points},
        {"reference_mode", c.quality.reference_mode},
        {"reference_size", c.quality.reference_size},
        {"num_types", c.quality.num_types},
        {"seed", c.quality.seed}}},
      {"learner",
       {{"hidden_sizes", c.learner.hidden_sizes},
        {"epochs", c.learner.epochs},
        {"batch_size", c.learner.batch_size},
        {"learning_rate", c.learner.learning_rate},
        {"lr_decay_every", c.learner.lr_decay_every},
        {"lr_decay_factor", c.learner.lr_decay_factor}}},
      {"radio",
       {{"bandwidth_share", range_json(c.radio.bandwidth_share)},
        {"transmit_power", range_json(c.radio.transmit_power)},
        {"channel_gain_sq", range_json(c.radio.channel_gain_sq)},
        {"noise_power", range_json(c.radio.noise_power)},
        {"upload_power", range_json(c.radio.upload_power)},
        {"cycles_per_sample", range_json(c.radio.cycles_per_sample)},
        {"cpu_frequency", range_json(c.radio.cpu_frequency)},
        {"chip_coefficient", range_json(c.radio.chip_coefficient)},
        {"deploy_cost", range_json(c.radio.deploy_cost)},
        {"seed", c.radio.seed},
        {"overrides", overrides}}},
      {"contract",
       {{"budget", c.contract.budget},
        {"rounds", c.contract.rounds},
        {"budget_policy", c.contract.budget_policy},
        {"round_budget", c.contract.round_budget},
        {"deadline", c.contract.deadline},
        {"reward_multiplier", c.contract.reward_multiplier},
        {"reward_floor", c.contract.reward_floor}}},
      {"scheme", c.scheme},
      {"verification",
       {{"method", c.verification.method},
        {"screen_multiplier", c.verification.screen_multiplier},
        {"accuracy_floor", c.verification.accuracy_floor},
        {"strict_rewards", c.verification.strict_rewards}}},
      {"shadow_run", c.shadow_run},
      {"threads", c.threads},
      {"output_dir", c.output_dir},
  };
}

federation::AggregationScheme parse_scheme(const std::string& name) {
  if (name == "conventional") return federation::AggregationScheme::ConventionalFedAvg;
  if (name == "trust") return federation::AggregationScheme::TrustBased;
  if (name == "untrust") return federation::AggregationScheme::UntrustBased;
  throw ConfigError("scheme: '" + name + "' is not one of conventional, trust, untrust");
}

std::string scheme_name(federation::AggregationScheme scheme) {
  switch (scheme) {
    case federation::AggregationScheme::ConventionalFedAvg: return "conventional";
    case federation::AggregationScheme::TrustBased: return "trust";
    case federation::AggregationScheme::UntrustBased: return "untrust";
  }
  return "unknown";
}

federation::ExperimentSetup build_setup(const ExperimentConfig& cfg) {
  const auto& dc = cfg.dataset;
  LabeledDataset train;
  LabeledDataset test;
  std::vector<LabeledDataset> devices;

  if (dc.source == "synthetic") {
    auto split = holdout_split(generate_synthetic(dc.synthetic), dc.train_fraction, dc.split_seed);
    train = std::move(split.train);
    test = std::move(split.test);
  } else if (dc.source == "csv") {
    auto ds = load_csv(dc.path, dc.label_column);
    if (dc.subsample > 0) ds = subsample(ds, dc.subsample, dc.split_seed);
    auto split = holdout_split(ds, dc.train_fraction, dc.split_seed);
    train = std::move(split.train);
    test = std::move(split.test);
  } else {
    for (const auto& p : dc.device_paths) devices.push_back(load_csv(p, dc.label_column));
    devices.push_back(load_csv(dc.test_path, dc.label_column));
    harmonize_labels(devices);
    test = std::move(devices.back());
    devices.pop_back();
    if (dc.subsample > 0) {
      for (std::size_t i = 0; i < devices.size(); ++i)
        devices[i] = subsample(devices[i], dc.subsample, derive_seed(dc.split_seed, {i}));
      test = subsample(test, dc.subsample, derive_seed(dc.split_seed, {devices.size()}));
    }
    train = concatenate(devices);
  }

  if (dc.normalize) {
    const auto rec = normalize_minmax(train).record;
    train = rec.apply(train);
    test = rec.apply(test);
    for (auto& dv : devices) dv = rec.apply(dv);
  }

  int benign = 0;
  if (!dc.benign_label.empty()) {
    const auto& names = train.label_names;
    auto it = std::find(names.begin(), names.end(), dc.benign_label);
    if (it == names.end()) throw ConfigError("dataset.benign_label: class '" + dc.benign_label + "' not present");
    benign = static_cast<int>(it - names.begin());
  }

  std::vector<LabeledDataset> locals;
  if (!devices.empty()) {
    locals = std::move(devices);
  } else {
    PartitionPlan plan;
    plan.num_clients = static_cast<std::size_t>(cfg.num_sps);
    plan.mode = cfg.partition.mode == "iid" ? PartitionMode::Iid : PartitionMode::NonIid;
    plan.max_classes_per_client = cfg.partition.max_classes_per_client;
    plan.benign_label = benign;
    plan.seed = cfg.partition.seed;
    locals = partition(train, plan);
  }
  const std::size_t m = locals.size();

  const auto reference = cfg.quality.reference_mode == "pooled"
                             ? concatenate(locals)
                             : quality::uniform_reference(train.dimension, cfg.quality.reference_size, cfg.quality.seed);
  std::vector<double> phis(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) phis[i] = quality::vdd_quality(locals[i], reference, cfg.quality.grid_points).phi;

  const auto num_malicious = static_cast<std::size_t>(std::llround(cfg.adversary.malicious_fraction * static_cast<double>(m)));
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng adv_rng(cfg.adversary.seed);
  std::shuffle(order.begin(), order.end(), adv_rng);
  std::vector<bool> malicious(m, false);
  for (std::size_t i = 0; i < num_malicious; ++i) malicious[order[i]] = true;
  const int num_types = cfg.quality.num_types > 0 ? cfg.quality.num_types : static_cast<int>(m);
  const double top_bracket = static_cast<double>(num_types - 1) / static_cast<double>(num_types);
  std::uniform_real_distribution<double> claim(top_bracket, 1.0);

  Rng radio_rng(cfg.radio.seed);
  federation::ExperimentSetup setup;
  for (std::size_t i = 0; i < m; ++i) {
    federation::SpsProfile p;
    p.id = static_cast<int>(i);
    const auto& r = cfg.radio;
    p.channel.bandwidth_share = draw(r.bandwidth_share, radio_rng);
    p.channel.transmit_power = draw(r.transmit_power, radio_rng);
    p.channel.channel_gain_sq = draw(r.channel_gain_sq, radio_rng);
    p.channel.noise_power = draw(r.noise_power, radio_rng);
    p.channel.upload_power = draw(r.upload_power, radio_rng);
    p.compute.cycles_per_sample = draw(r.cycles_per_sample, radio_rng);
    p.compute.cpu_frequency = draw(r.cpu_frequency, radio_rng);
    p.compute.chip_coefficient = draw(r.chip_coefficient, radio_rng);
    p.compute.deploy_cost = draw(r.deploy_cost, radio_rng);
    for (const auto& o : r.overrides)
      if (o.id == p.id) apply_override(o.values, p.channel, p.compute);
    p.local_data = std::move(locals[i]);
    p.true_phi = phis[i];
    p.honest = !malicious[i];
    if (malicious[i]) {
      p.claimed_phi = claim(adv_rng);
      p.attack.kind = cfg.adversary.attack == "random_params" ? federation::AttackKind::RandomParams
                                                              : federation::AttackKind::GaussianPerturb;
      p.attack.sigma = cfg.adversary.sigma;
    } else {
      p.claimed_phi = phis[i];
    }
    p.seed = derive_seed(cfg.seed, {0x5b5, i});
    setup.profiles.push_back(std::move(p));
  }

  auto& s = setup.settings;
  s.arch.input_dim = train.dimension;
  s.arch.hidden_sizes = cfg.learner.hidden_sizes.empty() ? learner::default_hidden_sizes(train.dimension)
                                                         : cfg.learner.hidden_sizes;
  s.arch.num_classes = train.num_classes;
  s.training.epochs = cfg.learner.epochs;
  s.training.batch_size = cfg.learner.batch_size;
  s.training.learning_rate = cfg.learner.learning_rate;
  s.lr_decay_every = cfg.learner.lr_decay_every;
  s.lr_decay_factor = cfg.learner.lr_decay_factor;
  s.scheme = parse_scheme(cfg.scheme);
  s.verification.method = cfg.verification.method == "test_set" ? federation::VerificationMethod::TestSet
                                                                 : federation::VerificationMethod::EuclideanScreen;
  s.verification.screen_multiplier = cfg.verification.screen_multiplier;
  s.verification.accuracy_floor = cfg.verification.accuracy_floor;
  s.verification.strict_rewards = cfg.verification.strict_rewards;
  s.total_budget = cfg.contract.budget;
  s.rounds = cfg.contract.rounds;
  s.budget_policy = cfg.contract.budget_policy == "even" ? federation::BudgetPolicy::Even : federation::BudgetPolicy::Fixed;
  s.fixed_round_budget = cfg.contract.round_budget;
  s.deadline = cfg.contract.deadline;
  s.reward_multiplier = cfg.contract.reward_multiplier;
  s.reward_floor = cfg.contract.reward_floor;
  s.num_types = num_types;
  for (int k = 0; k < train.num_classes; ++k)
    if (k != benign) s.positive_labels.insert(k);
  s.seed = cfg.seed;
  s.threads = cfg.threads;

  setup.test_set = std::move(test);
  setup.shadow_run = cfg.shadow_run;
  return setup;
}

contract::ContractMenu load_menu(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open menu file");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  Section root(doc, "");
  contract::ContractMenu menu;
  const auto* items = root.get("items");
  root.finish();
  require(items && items->is_array(), "items", "expected an array");
  for (std::size_t i = 0; i < items->size(); ++i) {
    Section s((*items)[i], "items[" + std::to_string(i) + "]");
    contract::ContractItem item;
    item.type_index = static_cast<int>(i) + 1;
    s.read("type", item.type_index);
    s.read("theta", item.theta);
    s.read("reward", item.reward);
    s.read("cost", item.cost);
    s.finish();
    menu.items.push_back(item);
  }
  try {
    menu.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return menu;
}

}  // namespace fedpot::config
