#include "fedpot/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "fedpot/rng.hpp"

namespace fedpot {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
    --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    cells.push_back(trim(std::string_view(line).substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

bool parse_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(cell.c_str(), &end);
  return errno == 0 && end == cell.c_str() + cell.size() && std::isfinite(out);
}

// Indices of each class, in dataset order.
std::vector<std::vector<std::size_t>> indices_by_class(const LabeledDataset& ds) {
  std::vector<std::vector<std::size_t>> by_class(
      static_cast<std::size_t>(std::max(ds.num_classes, 0)));
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    by_class[static_cast<std::size_t>(ds.samples[i].label)].push_back(i);
  return by_class;
}

LabeledDataset gather(const LabeledDataset& ds, std::vector<std::size_t> idx) {
  std::sort(idx.begin(), idx.end());
  LabeledDataset out = ds.empty_like();
  out.samples.reserve(idx.size());
  for (auto i : idx) out.samples.push_back(ds.samples[i]);
  return out;
}

}  // namespace

void LabeledDataset::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.features.size() != dimension)
      throw std::invalid_argument("sample " + std::to_string(i) + " has dimension " +
                                  std::to_string(s.features.size()) + ", expected " +
                                  std::to_string(dimension));
    if (s.label < 0 || s.label >= num_classes)
      throw std::invalid_argument("sample " + std::to_string(i) + " has label " +
                                  std::to_string(s.label) + " outside [0, " +
                                  std::to_string(num_classes) + ")");
  }
}

LabeledDataset LabeledDataset::empty_like() const {
  LabeledDataset out;
  out.num_classes = num_classes;
  out.dimension = dimension;
  out.label_names = label_names;
  return out;
}

std::vector<std::size_t> LabeledDataset::label_histogram() const {
  std::vector<std::size_t> h(static_cast<std::size_t>(std::max(num_classes, 0)), 0);
  for (const auto& s : samples) ++h[static_cast<std::size_t>(s.label)];
  return h;
}

LabeledDataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "': missing header row");
  const auto header = split_csv_line(line);
  auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end())
    throw std::runtime_error("'" + path + "': label column '" + label_column + "' not found");
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());

  LabeledDataset ds;
  ds.dimension = header.size() - 1;
  std::unordered_map<std::string, int> label_ids;

  std::size_t line_no = 1;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("'" + path + "' row " + std::to_string(row) + " (line " +
                               std::to_string(line_no) + "): expected " +
                               std::to_string(header.size()) + " cells, got " +
                               std::to_string(cells.size()));
    Sample s;
    s.features.reserve(ds.dimension);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_col) continue;
      double v = 0.0;
      if (!parse_double(cells[c], v))
        throw std::runtime_error("'" + path + "' row " + std::to_string(row) + " (line " +
                                 std::to_string(line_no) + "), column '" + header[c] +
                                 "': non-numeric value '" + cells[c] + "'");
      s.features.push_back(v);
    }
    const auto& name = cells[label_col];
    auto [it, inserted] = label_ids.try_emplace(name, static_cast<int>(ds.label_names.size()));
    if (inserted) ds.label_names.push_back(name);
    s.label = it->second;
    ds.samples.push_back(std::move(s));
    ++row;
  }
  ds.num_classes = static_cast<int>(ds.label_names.size());
  return ds;
}

void harmonize_labels(std::vector<LabeledDataset>& parts) {
  std::vector<std::string> names;
  std::unordered_map<std::string, int> ids;
  for (const auto& p : parts) {
    for (const auto& s : p.samples) {
      const auto& n = p.label_names.at(static_cast<std::size_t>(s.label));
      if (ids.try_emplace(n, static_cast<int>(names.size())).second) names.push_back(n);
    }
  }
  for (auto& p : parts) {
    for (auto& s : p.samples) s.label = ids.at(p.label_names[static_cast<std::size_t>(s.label)]);
    p.label_names = names;
    p.num_classes = static_cast<int>(names.size());
  }
}

NormalizedDataset normalize_minmax(const LabeledDataset& ds) {
  if (ds.empty()) throw std::invalid_argument("normalize_minmax: empty dataset");
  MinMaxRecord rec;
  rec.min = ds.samples.front().features;
  rec.max = ds.samples.front().features;
  for (const auto& s : ds.samples) {
    for (std::size_t j = 0; j < ds.dimension; ++j) {
      rec.min[j] = std::min(rec.min[j], s.features[j]);
      rec.max[j] = std::max(rec.max[j], s.features[j]);
    }
  }
  return {rec.apply(ds), rec};
}

LabeledDataset MinMaxRecord::apply(const LabeledDataset& ds) const {
  if (ds.dimension != min.size())
    throw std::invalid_argument("MinMaxRecord::apply: dimension mismatch");
  LabeledDataset out = ds;
  for (auto& s : out.samples) {
    for (std::size_t j = 0; j < s.features.size(); ++j) {
      const double range = max[j] - min[j];
      const double v = range > 0.0 ? (s.features[j] - min[j]) / range : 0.0;
      s.features[j] = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

std::vector<LabeledDataset> partition(const LabeledDataset& ds, const PartitionPlan& plan) {
  const std::size_t m = plan.num_clients;
  if (m == 0) throw std::invalid_argument("partition: num_clients must be >= 1");
  if (m > ds.size())
    throw std::invalid_argument("partition: " + std::to_string(m) + " clients but only " +
                                std::to_string(ds.size()) + " samples");

  Rng rng(derive_seed(plan.seed, {0x9a27}));
  auto by_class = indices_by_class(ds);
  for (auto& idx : by_class) std::shuffle(idx.begin(), idx.end(), rng);

  std::vector<std::vector<std::size_t>> assigned(m);

  if (plan.mode == PartitionMode::Iid) {
    // Continue the deal across classes so client totals also stay within one.
    std::size_t next = 0;
    for (const auto& idx : by_class) {
      for (auto i : idx) {
        assigned[next].push_back(i);
        next = (next + 1) % m;
      }
    }
  } else {
    std::vector<int> attack;
    for (int c = 0; c < ds.num_classes; ++c)
      if (c != plan.benign_label) attack.push_back(c);
    if (attack.empty()) throw std::invalid_argument("partition: NonIID needs at least one attack class");
    if (plan.max_classes_per_client == 0)
      throw std::invalid_argument("partition: max_classes_per_client must be >= 1");
    const std::size_t a = attack.size();
    const std::size_t k = std::min(plan.max_classes_per_client, a);
    if (m * k < a)
      throw std::invalid_argument("partition: " + std::to_string(a) + " attack classes cannot be spread over " +
                                  std::to_string(m) + " clients with at most " + std::to_string(k) + " each");
    std::shuffle(attack.begin(), attack.end(), rng);

    std::map<int, std::vector<std::size_t>> holders;
    for (std::size_t client = 0; client < m; ++client)
      for (std::size_t j = 0; j < k; ++j) holders[attack[(client * k + j) % a]].push_back(client);

    for (int c = 0; c < ds.num_classes; ++c) {
      const auto& idx = by_class[static_cast<std::size_t>(c)];
      if (c == plan.benign_label) {
        for (std::size_t t = 0; t < idx.size(); ++t) assigned[t % m].push_back(idx[t]);
      } else {
        const auto& h = holders.at(c);
        for (std::size_t t = 0; t < idx.size(); ++t) assigned[h[t % h.size()]].push_back(idx[t]);
      }
    }
  }

  std::vector<LabeledDataset> out;
  out.reserve(m);
  for (auto& idx : assigned) out.push_back(gather(ds, std::move(idx)));
  return out;
}

HoldoutSplit holdout_split(const LabeledDataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("holdout_split: fraction must lie in (0,1)");
  Rng rng(derive_seed(seed, {0x4f1d}));
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (auto idx : indices_by_class(ds)) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  if (train_idx.empty() || test_idx.empty())
    throw std::invalid_argument("holdout_split: fraction " + std::to_string(fraction) +
                                " yields an empty split on " + std::to_string(ds.size()) + " samples");
  return {gather(ds, std::move(train_idx)), gather(ds, std::move(test_idx))};
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.dimension == 0) throw std::invalid_argument("generate_synthetic: dimension must be >= 1");
  if (spec.num_classes < 2) throw std::invalid_argument("generate_synthetic: need at least 2 classes");
  if (spec.per_class == 0) throw std::invalid_argument("generate_synthetic: per_class must be positive");
  if (!(spec.spread >= 0.0)) throw std::invalid_argument("generate_synthetic: spread must be >= 0");

  Rng rng(derive_seed(spec.seed, {0x5e7}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> centers(static_cast<std::size_t>(spec.num_classes));
  for (auto& c : centers) {
    c.resize(spec.dimension);
    for (auto& v : c) v = unit(rng);
  }

  LabeledDataset ds;
  ds.dimension = spec.dimension;
  ds.num_classes = spec.num_classes;
  for (int c = 0; c < spec.num_classes; ++c) ds.label_names.push_back("class" + std::to_string(c));

  std::normal_distribution<double> noise(0.0, spec.spread > 0.0 ? spec.spread : 1.0);
  ds.samples.reserve(spec.per_class * centers.size());
  for (int c = 0; c < spec.num_classes; ++c) {
    const auto& center = centers[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      Sample s;
      s.label = c;
      s.features = center;
      if (spec.spread > 0.0)
        for (auto& v : s.features) v = std::clamp(v + noise(rng), 0.0, 1.0);
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

LabeledDataset subsample(const LabeledDataset& ds, std::size_t count, std::uint64_t seed) {
  if (count >= ds.size()) return ds;
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {0x5b5}));
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(count);
  return gather(ds, std::move(idx));
}

LabeledDataset concatenate(const std::vector<LabeledDataset>& parts) {
  if (parts.empty()) return {};
  LabeledDataset out = parts.front().empty_like();
  for (const auto& p : parts) {
    if (p.dimension != out.dimension || p.num_classes != out.num_classes)
      throw std::invalid_argument("concatenate: incompatible datasets");
    out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
  }
  return out;
}

}  // namespace fedpot
