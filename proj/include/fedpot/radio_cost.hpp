#pragma once

#include <span>
#include <vector>

namespace fedpot::radio {

// Uplink of one supplier. Rates are in nats/s (natural-log Shannon form).
struct ChannelSpec {
  double bandwidth_share = 1e6;  // Hz
  double transmit_power = 0.1;   // W
  double channel_gain_sq = 1e-6;
  double noise_power = 1e-7;     // W
  double upload_power = 0.2;     // W
  double model_size_bits = 1e5;

  void validate() const;
};

struct ComputeSpec {
  double cycles_per_sample = 1e4;
  double cpu_frequency = 1e9;      // cycles/s
  double chip_coefficient = 1e-28; // J s^2 / cycle^3
  int local_epochs = 1;
  double sample_count = 1.0;
  double deploy_cost = 0.0;        // J, honeypot running cost per round

  void validate() const;
};

struct CostBreakdown {
  double rate = 0.0;
  double t_upload = 0.0;
  double t_compute = 0.0;
  double t_total = 0.0;
  double c_upload = 0.0;
  double c_train = 0.0;
  double c_total = 0.0;
};

double achievable_rate(const ChannelSpec& ch);

CostBreakdown cost_breakdown(const ChannelSpec& ch, const ComputeSpec& cs);

// Latency of the slowest participant. Throws on an empty selection.
double round_deadline(std::span<const CostBreakdown> selected);

// ln(theta * reward) - cost.
double sps_utility(double theta, double reward, double cost);

struct TprEntry {
  double theta = 1.0;
  double revenue = 0.0;
  double reward = 0.0;
};

double tpr_utility(std::span<const TprEntry> entries);

}  // namespace fedpot::radio
