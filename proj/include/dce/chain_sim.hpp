#pragma once

// Synthetic data: device two-mode squeezing from the SQUID model, the lossy
// noisy amplification chain, and finite quadrature samples with pump on/off
// cycling and linear gain drift.
//
// Random streams: every (seed, cycle, pump flag) triple gets its own
// std::mt19937_64 seeded by a SplitMix64 hash of the triple, so cycles can be
// generated in any order (or in parallel) with identical output.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dce/calibration.hpp"
#include "dce/gaussian.hpp"
#include "dce/squid.hpp"

namespace dce::chain {

using gaussian::CovMat4;

struct ChainConfig {
  double eta_minus = 1.0;
  double eta_plus = 1.0;
  double noise_temperature_minus_k = 0.0;
  double noise_temperature_plus_k = 0.0;
  double gain_start_minus = 1.0;
  double gain_start_plus = 1.0;
  double gain_end_minus = 1.0;
  double gain_end_plus = 1.0;
  double bandwidth_hz = 1e6;
  std::uint64_t seed = 1;
  std::int64_t cycles = 100;
  std::int64_t samples_per_cycle = 100000;

  void validate() const;

  /// Power gains (minus, plus) during a cycle, interpolated linearly in the
  /// cycle index from the start to the end values.
  std::pair<double, double> gains_at(std::int64_t cycle) const;
};

/// Chain with the device's measured losses (-2.3 / -1.7 dB), system noise
/// temperatures and start/end gains.
ChainConfig reference_chain();

struct QuadratureRecord {
  std::int64_t cycle = 0;
  bool pump_on = false;
  double i_minus = 0.0;
  double q_minus = 0.0;
  double i_plus = 0.0;
  double q_plus = 0.0;

  Eigen::Vector4d vector() const { return {i_minus, q_minus, i_plus, q_plus}; }
  friend bool operator==(const QuadratureRecord&, const QuadratureRecord&) = default;
};

struct RecordSetMeta {
  squid::PumpConfig pump;
  ChainConfig chain;
};

struct RecordSet {
  RecordSetMeta meta;
  std::vector<QuadratureRecord> records;
};

/// Second-moment accumulator for one (cycle, pump flag) block.
struct CycleMoments {
  std::int64_t cycle = 0;
  bool pump_on = false;
  std::int64_t count = 0;
  Eigen::Matrix4d sum_outer = Eigen::Matrix4d::Zero();

  void add(const Eigen::Vector4d& x) {
    sum_outer.noalias() += x * x.transpose();
    ++count;
  }
  Eigen::Matrix4d mean() const { return sum_outer / static_cast<double>(count); }
};

/// Per-cycle moments; on[c] and off[c] belong to the same cycle c.
struct CycleMomentSet {
  RecordSetMeta meta;
  std::vector<CycleMoments> on;
  std::vector<CycleMoments> off;
};

/// Device-level ground truth for one pump configuration.
struct DeviceState {
  double peak_density = 0.0;
  double n_minus = 0.0;
  double n_plus = 0.0;
  double squeezing_r = 0.0;
  double purity = 1.0;
  CovMat4 covariance;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the random stream for one (cycle, pump flag) block.
std::uint64_t stream_seed(std::uint64_t seed, std::int64_t cycle, bool pump_on);

/// Draws zero-mean Gaussian 4-vectors with a fixed covariance.
class GaussianSampler {
 public:
  /// Throws SamplingError when V is indefinite beyond 1e-10 of its scale.
  explicit GaussianSampler(const Eigen::Matrix4d& covariance);

  template <class Rng>
  Eigen::Vector4d operator()(Rng& rng) {
    Eigen::Vector4d z;
    for (int i = 0; i < 4; ++i) z[i] = normal_(rng);
    return factor_ * z;
  }

  void reset() { normal_.reset(); }
  const Eigen::Matrix4d& factor() const { return factor_; }

 private:
  Eigen::Matrix4d factor_;
  std::normal_distribution<double> normal_;
};

DeviceState device_state(const squid::PumpConfig& cfg, const squid::SquidParams& p);
CovMat4 device_covariance(const squid::PumpConfig& cfg, const squid::SquidParams& p);

/// Loss, amplifier noise k_B T_n / (h f) on each mode, then the power gains
/// (element (i, j) scales by sqrt(G_i G_j)).
CovMat4 detected_covariance(const CovMat4& device, const ChainConfig& chain, double f_minus_hz,
                            double f_plus_hz, double gain_minus, double gain_plus);

/// Same, at the start-of-run gains.
CovMat4 detected_covariance(const CovMat4& device, const ChainConfig& chain, double f_minus_hz,
                            double f_plus_hz);

std::vector<QuadratureRecord> sample_records(const CovMat4& v, std::int64_t count, std::uint64_t seed);

/// Records of one cycle: samples_per_cycle pump-on draws, then as many
/// pump-off draws.
std::vector<QuadratureRecord> cycle_records(const CovMat4& device, const RecordSetMeta& meta, std::int64_t cycle);

/// Full record set: per cycle, samples_per_cycle pump-on records followed by
/// the same number of pump-off records.
RecordSet pump_cycle_dataset(const squid::PumpConfig& cfg, const squid::SquidParams& p,
                             const ChainConfig& chain);

/// Streaming equivalent of pump_cycle_dataset: accumulates per-cycle second
/// moments without materializing records. Produces exactly the moments that
/// reduce_to_moments(pump_cycle_dataset(...)) would.
CycleMomentSet pump_cycle_moments(const squid::PumpConfig& cfg, const squid::SquidParams& p,
                                  const ChainConfig& chain);

/// Groups records by (cycle, flag) and accumulates their second moments.
CycleMomentSet reduce_to_moments(const RecordSet& rs);

/// Shot-noise sweep with multiplicative Gaussian noise (1 + noise_frac z).
std::vector<calibration::ShotNoisePoint> simulate_shot_noise_sweep(
    double gain, double noise_temperature_k, const calibration::ShotNoiseEnv& env,
    double bandwidth_hz, std::span<const double> currents, double noise_frac, std::uint64_t seed);

/// Evenly spaced bias currents on [-max, max].
std::vector<double> symmetric_currents(double max_current_a, int count);

}  // namespace dce::chain
