#include "fedpot/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fedpot/rng.hpp"

namespace fedpot::learner {

std::vector<LayerShape> MlpArchitecture::layers() const {
  std::vector<LayerShape> out;
  std::size_t in = input_dim;
  std::size_t offset = 0;
  auto push = [&](std::size_t width) {
    out.push_back({in, width, offset});
    offset += (in + 1) * width;
    in = width;
  };
  for (auto h : hidden_sizes) push(h);
  push(static_cast<std::size_t>(num_classes));
  return out;
}

std::size_t MlpArchitecture::parameter_count() const {
  const auto ls = layers();
  return ls.back().offset + (ls.back().in + 1) * ls.back().out;
}

void MlpArchitecture::validate() const {
  if (input_dim < 1) throw std::invalid_argument("MLP input_dim must be >= 1");
  if (num_classes < 1) throw std::invalid_argument("MLP num_classes must be >= 1");
  for (auto h : hidden_sizes)
    if (h < 1) throw std::invalid_argument("MLP hidden sizes must be >= 1");
}

std::vector<std::size_t> default_hidden_sizes(std::size_t input_dim) {
  if (input_dim == 115) return {115, 62, 32};
  return {input_dim, (input_dim + 1) / 2, (input_dim + 3) / 4};
}

void TrainingConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("training epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("training batch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("training learning_rate must be >= 0");
}

ParameterVector init_params(const MlpArchitecture& arch, std::uint64_t seed) {
  arch.validate();
  ParameterVector p;
  p.arch = arch;
  p.values.assign(arch.parameter_count(), 0.0);
  Rng rng(derive_seed(seed, {0x1417}));
  for (const auto& l : arch.layers()) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(l.in));
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (std::size_t i = 0; i < l.in * l.out; ++i) p.values[l.offset + i] = dist(rng);
  }
  return p;
}

namespace {

// Scratch buffers for one forward/backward pass.
struct Workspace {
  std::vector<std::vector<double>> act;  // act[0] = input, act[i] = output of layer i
  std::vector<double> delta;
  std::vector<double> delta_prev;
  std::vector<double> logits;
  double log_norm = 0.0;  // log-sum-exp of the logits

  explicit Workspace(const std::vector<LayerShape>& ls) {
    act.resize(ls.size() + 1);
    act[0].resize(ls.front().in);
    for (std::size_t i = 0; i < ls.size(); ++i) act[i + 1].resize(ls[i].out);
  }
};

void forward(const std::vector<double>& w, const std::vector<LayerShape>& ls, std::span<const double> x,
             Workspace& ws) {
  std::copy(x.begin(), x.end(), ws.act[0].begin());
  for (std::size_t li = 0; li < ls.size(); ++li) {
    const auto& l = ls[li];
    const double* weights = w.data() + l.offset;
    const double* bias = weights + l.in * l.out;
    const auto& in = ws.act[li];
    auto& out = ws.act[li + 1];
    const bool hidden = li + 1 < ls.size();
    for (std::size_t o = 0; o < l.out; ++o) {
      const double* row = weights + o * l.in;
      double z = bias[o];
      for (std::size_t i = 0; i < l.in; ++i) z += row[i] * in[i];
      out[o] = hidden ? std::max(z, 0.0) : z;
    }
  }
  // Softmax in place on the logits, keeping them for the loss.
  auto& probs = ws.act.back();
  ws.logits = probs;
  const double mx = *std::max_element(probs.begin(), probs.end());
  double sum = 0.0;
  for (auto& v : probs) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : probs) v /= sum;
  ws.log_norm = mx + std::log(sum);
}

double cross_entropy(const Workspace& ws, int label) {
  return ws.log_norm - ws.logits[static_cast<std::size_t>(label)];
}

void check_dims(const ParameterVector& params, const LabeledDataset& ds) {
  if (ds.dimension != params.arch.input_dim)
    throw std::invalid_argument("dataset dimension " + std::to_string(ds.dimension) +
                                " does not match model input " + std::to_string(params.arch.input_dim));
  if (ds.num_classes > params.arch.num_classes)
    throw std::invalid_argument("dataset has more classes than the model output");
}

}  // namespace

std::vector<double> predict_proba(const ParameterVector& params, std::span<const double> x) {
  if (x.size() != params.arch.input_dim) throw std::invalid_argument("predict_proba: dimension mismatch");
  const auto ls = params.arch.layers();
  Workspace ws(ls);
  forward(params.values, ls, x, ws);
  return ws.act.back();
}

int predict(const ParameterVector& params, std::span<const double> x) {
  const auto p = predict_proba(params, x);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double loss_and_gradient(const ParameterVector& params, const LabeledDataset& ds, std::span<const std::size_t> rows,
                         std::vector<double>* grad) {
  check_dims(params, ds);
  if (rows.empty()) throw std::invalid_argument("loss_and_gradient: no rows");
  const auto ls = params.arch.layers();
  Workspace ws(ls);
  if (grad) grad->assign(params.values.size(), 0.0);
  const auto& w = params.values;

  double total = 0.0;
  for (auto r : rows) {
    const auto& s = ds.samples[r];
    forward(w, ls, s.features, ws);
    total += cross_entropy(ws, s.label);
    if (!grad) continue;

    ws.delta = ws.act.back();
    ws.delta[static_cast<std::size_t>(s.label)] -= 1.0;
    for (std::size_t li = ls.size(); li-- > 0;) {
      const auto& l = ls[li];
      const auto& in = ws.act[li];
      double* gw = grad->data() + l.offset;
      double* gb = gw + l.in * l.out;
      for (std::size_t o = 0; o < l.out; ++o) {
        const double d = ws.delta[o];
        if (d == 0.0) continue;
        double* grow = gw + o * l.in;
        for (std::size_t i = 0; i < l.in; ++i) grow[i] += d * in[i];
        gb[o] += d;
      }
      if (li == 0) break;
      ws.delta_prev.assign(l.in, 0.0);
      const double* weights = w.data() + l.offset;
      for (std::size_t o = 0; o < l.out; ++o) {
        const double d = ws.delta[o];
        if (d == 0.0) continue;
        const double* row = weights + o * l.in;
        for (std::size_t i = 0; i < l.in; ++i) ws.delta_prev[i] += row[i] * d;
      }
      // Rectifier derivative: zero where the hidden activation was clipped.
      for (std::size_t i = 0; i < l.in; ++i)
        if (in[i] <= 0.0) ws.delta_prev[i] = 0.0;
      std::swap(ws.delta, ws.delta_prev);
    }
  }
  const double n = static_cast<double>(rows.size());
  if (grad)
    for (auto& g : *grad) g /= n;
  return total / n;
}

double mean_loss(const ParameterVector& params, const LabeledDataset& ds) {
  std::vector<std::size_t> rows(ds.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return loss_and_gradient(params, ds, rows, nullptr);
}

TrainResult local_train(const ParameterVector& params, const LabeledDataset& ds, const TrainingConfig& cfg) {
  cfg.validate();
  if (ds.empty()) throw std::invalid_argument("local_train: empty dataset");
  check_dims(params, ds);

  TrainResult result{params, 0};
  auto& w = result.params.values;
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(cfg.seed, {0x7a1}));
  std::vector<double> grad;

  for (int e = 0; e < cfg.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      loss_and_gradient(result.params, ds, std::span(order).subspan(start, stop - start), &grad);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.learning_rate * grad[i];
      ++result.update_count;
    }
  }
  return result;
}

EvalMetrics evaluate(const ParameterVector& params, const LabeledDataset& ds, const std::set<int>& positive_labels) {
  if (ds.empty()) throw std::invalid_argument("evaluate: empty dataset");
  check_dims(params, ds);
  const auto ls = params.arch.layers();
  Workspace ws(ls);

  EvalMetrics m;
  std::size_t correct = 0;
  double loss = 0.0;
  for (const auto& s : ds.samples) {
    forward(params.values, ls, s.features, ws);
    const auto& p = ws.act.back();
    const int pred = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    loss += cross_entropy(ws, s.label);
    if (pred == s.label) ++correct;
    const bool actual_pos = positive_labels.count(s.label) > 0;
    const bool pred_pos = positive_labels.count(pred) > 0;
    if (actual_pos && pred_pos) ++m.tp;
    else if (actual_pos) ++m.fn;
    else if (pred_pos) ++m.fp;
    else ++m.tn;
  }
  const double n = static_cast<double>(ds.size());
  m.accuracy = static_cast<double>(correct) / n;
  m.loss = loss / n;
  if (m.tp + m.fn > 0) {
    m.tprate = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    m.f1 = 2.0 * static_cast<double>(m.tp) / static_cast<double>(2 * m.tp + m.fp + m.fn);
  }
  if (m.tn + m.fp > 0) m.tnr = static_cast<double>(m.tn) / static_cast<double>(m.tn + m.fp);
  return m;
}

double accuracy(const ParameterVector& params, const LabeledDataset& ds) {
  if (ds.empty()) throw std::invalid_argument("accuracy: empty dataset");
  check_dims(params, ds);
  const auto ls = params.arch.layers();
  Workspace ws(ls);
  std::size_t correct = 0;
  for (const auto& s : ds.samples) {
    forward(params.values, ls, s.features, ws);
    const auto& p = ws.act.back();
    if (std::max_element(p.begin(), p.end()) - p.begin() == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

double param_distance(const ParameterVector& a, const ParameterVector& b) {
  if (!a.same_layout(b) || a.values.size() != b.values.size())
    throw std::invalid_argument("param_distance: layout mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace fedpot::learner
