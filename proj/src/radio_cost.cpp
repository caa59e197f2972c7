#include "fedpot/radio_cost.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fedpot::radio {

namespace {
void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(name) + " must be strictly positive");
}
}  // namespace

void ChannelSpec::validate() const {
  require_positive(bandwidth_share, "bandwidth_share");
  require_positive(transmit_power, "transmit_power");
  require_positive(channel_gain_sq, "channel_gain_sq");
  require_positive(noise_power, "noise_power");
  require_positive(upload_power, "upload_power");
  require_positive(model_size_bits, "model_size_bits");
}

void ComputeSpec::validate() const {
  require_positive(cycles_per_sample, "cycles_per_sample");
  require_positive(cpu_frequency, "cpu_frequency");
  require_positive(chip_coefficient, "chip_coefficient");
  require_positive(sample_count, "sample_count");
  if (local_epochs < 1) throw std::invalid_argument("local_epochs must be >= 1");
  if (!(deploy_cost >= 0.0)) throw std::invalid_argument("deploy_cost must be >= 0");
}

double achievable_rate(const ChannelSpec& ch) {
  ch.validate();
  return ch.bandwidth_share * std::log1p(ch.transmit_power * ch.channel_gain_sq / ch.noise_power);
}

CostBreakdown cost_breakdown(const ChannelSpec& ch, const ComputeSpec& cs) {
  cs.validate();
  CostBreakdown c;
  c.rate = achievable_rate(ch);
  c.t_upload = ch.model_size_bits / c.rate;
  c.c_upload = c.t_upload * ch.upload_power;
  c.t_compute = static_cast<double>(cs.local_epochs) * cs.cycles_per_sample * cs.sample_count / cs.cpu_frequency;
  c.c_train = cs.chip_coefficient * cs.cpu_frequency * cs.cpu_frequency * cs.cpu_frequency * c.t_compute;
  c.t_total = c.t_upload + c.t_compute;
  c.c_total = cs.deploy_cost + c.c_train + c.c_upload;
  return c;
}

double round_deadline(std::span<const CostBreakdown> selected) {
  if (selected.empty()) throw std::invalid_argument("round_deadline: empty selection");
  double worst = selected.front().t_total;
  for (const auto& c : selected) worst = std::max(worst, c.t_total);
  return worst;
}

double sps_utility(double theta, double reward, double cost) {
  const double tr = theta * reward;
  if (!(tr > 0.0)) throw std::invalid_argument("sps_utility: theta * reward must be > 0");
  return std::log(tr) - cost;
}

double tpr_utility(std::span<const TprEntry> entries) {
  double total = 0.0;
  for (const auto& e : entries) total += e.theta * e.revenue - e.reward;
  return total;
}

}  // namespace fedpot::radio
