#include "dce/chain_sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "dce/constants.hpp"
#include "dce/errors.hpp"
#include "dce/rates.hpp"

namespace dce::chain {
namespace {

using constants::kBoltzmann;
using constants::kPlanck;

constexpr double kIndefiniteTolerance = 1e-10;
constexpr double kJitter = 1e-12;

// Runs body(i) for i in [0, n) on up to hardware_concurrency threads. Each
// index is handled by exactly one thread; callers write results by index.
template <class Body>
void parallel_for(std::size_t n, Body body) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  }
}

// Emits `count` draws from the (cycle, flag) stream to sink(x).
template <class Sink>
void draw_block(GaussianSampler sampler, std::uint64_t seed, std::int64_t cycle, bool pump_on,
                std::int64_t count, Sink&& sink) {
  std::mt19937_64 rng(stream_seed(seed, cycle, pump_on));
  sampler.reset();
  for (std::int64_t k = 0; k < count; ++k) sink(sampler(rng));
}

struct CycleSamplers {
  GaussianSampler on;
  GaussianSampler off;
};

CycleSamplers cycle_samplers(const CovMat4& device, const RecordSetMeta& meta, std::int64_t cycle) {
  const auto [g_minus, g_plus] = meta.chain.gains_at(cycle);
  const double fm = meta.pump.f_minus_hz;
  const double fp = meta.pump.f_plus_hz;
  return {GaussianSampler(detected_covariance(device, meta.chain, fm, fp, g_minus, g_plus).elements()),
          GaussianSampler(detected_covariance(CovMat4::vacuum(), meta.chain, fm, fp, g_minus, g_plus).elements())};
}

QuadratureRecord make_record(std::int64_t cycle, bool pump_on, const Eigen::Vector4d& x) {
  return {cycle, pump_on, x[0], x[1], x[2], x[3]};
}

}  // namespace

void ChainConfig::validate() const {
  if (!(eta_minus >= 0.0 && eta_minus <= 1.0 && eta_plus >= 0.0 && eta_plus <= 1.0)) {
    throw DomainError("transmissivities must lie in [0, 1]");
  }
  if (!(noise_temperature_minus_k >= 0.0 && noise_temperature_plus_k >= 0.0)) {
    throw DomainError("noise temperatures must be >= 0");
  }
  if (!(gain_start_minus > 0.0 && gain_start_plus > 0.0 && gain_end_minus > 0.0 && gain_end_plus > 0.0)) {
    throw DomainError("gains must be > 0");
  }
  if (!(bandwidth_hz > 0.0)) throw DomainError("bandwidth must be > 0");
  if (cycles < 1 || samples_per_cycle < 1) throw DomainError("cycles and samples per cycle must be >= 1");
}

std::pair<double, double> ChainConfig::gains_at(std::int64_t cycle) const {
  const double t = cycles > 1 ? static_cast<double>(cycle) / static_cast<double>(cycles - 1) : 0.0;
  return {gain_start_minus + (gain_end_minus - gain_start_minus) * t,
          gain_start_plus + (gain_end_plus - gain_start_plus) * t};
}

ChainConfig reference_chain() {
  namespace ref = calibration::reference;
  ChainConfig c;
  c.eta_minus = std::pow(10.0, -2.3 / 10.0);
  c.eta_plus = std::pow(10.0, -1.7 / 10.0);
  c.noise_temperature_minus_k = ref::kSystemNoiseMinusK;
  c.noise_temperature_plus_k = ref::kSystemNoisePlusK;
  c.gain_start_minus = ref::kGainStartMinus;
  c.gain_end_minus = ref::kGainEndMinus;
  c.gain_start_plus = ref::kGainStartPlus;
  c.gain_end_plus = ref::kGainEndPlus;
  return c;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::int64_t cycle, bool pump_on) {
  const std::uint64_t block = (static_cast<std::uint64_t>(cycle) << 1) | (pump_on ? 1u : 0u);
  return mix64(mix64(seed) ^ mix64(block + 0x632be59bd9b4e019ULL));
}

GaussianSampler::GaussianSampler(const Eigen::Matrix4d& covariance) {
  Eigen::LLT<Eigen::Matrix4d> llt(covariance);
  if (llt.info() == Eigen::Success) {
    factor_ = llt.matrixL();
    return;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(covariance);
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  const double lowest = eig.eigenvalues().minCoeff();
  if (lowest < -kIndefiniteTolerance * scale) {
    throw SamplingError("covariance is indefinite: eigenvalue " + std::to_string(lowest), lowest);
  }
  const Eigen::Matrix4d jittered =
      covariance + Eigen::Matrix4d::Identity() * (kJitter * scale + std::max(0.0, -lowest));
  llt.compute(jittered);
  if (llt.info() != Eigen::Success) throw SamplingError("Cholesky failed after jitter", lowest);
  factor_ = llt.matrixL();
}

DeviceState device_state(const squid::PumpConfig& cfg, const squid::SquidParams& p) {
  cfg.validate();
  p.validate();
  DeviceState s;
  s.peak_density = squid::dce_peak_density(cfg, p);
  const rates::SpectralModel spectrum{s.peak_density, cfg.f_pump_hz};
  s.n_minus = rates::n_of_f(cfg.f_minus_hz, spectrum);
  s.n_plus = rates::n_of_f(cfg.f_plus_hz, spectrum);
  s.purity = squid::dce_purity(cfg, p);
  // Pair production ties both modes to one squeezing parameter; the
  // geometric mean keeps the spectrum's asymmetry out of r.
  s.squeezing_r = std::asinh(std::sqrt(std::sqrt(s.n_minus * s.n_plus)));

  CovMat4::Matrix m = gaussian::tmsv_covariance(s.squeezing_r, 0.0).elements();
  m.block<2, 2>(0, 2) *= std::sqrt(s.purity);
  m.block<2, 2>(2, 0) *= std::sqrt(s.purity);
  const double extra_minus = (1.0 - s.purity) * s.n_minus;
  const double extra_plus = (1.0 - s.purity) * s.n_plus;
  m(0, 0) += extra_minus;
  m(1, 1) += extra_minus;
  m(2, 2) += extra_plus;
  m(3, 3) += extra_plus;
  s.covariance = CovMat4(m);
  return s;
}

CovMat4 device_covariance(const squid::PumpConfig& cfg, const squid::SquidParams& p) {
  return device_state(cfg, p).covariance;
}

CovMat4 detected_covariance(const CovMat4& device, const ChainConfig& chain, double f_minus_hz,
                            double f_plus_hz, double gain_minus, double gain_plus) {
  if (!(f_minus_hz > 0.0 && f_plus_hz > 0.0)) throw DomainError("frequencies must be > 0");
  if (!(gain_minus > 0.0 && gain_plus > 0.0)) throw DomainError("gains must be > 0");
  const CovMat4 lossy = gaussian::apply_loss(device, chain.eta_minus, chain.eta_plus);
  CovMat4::Matrix m = lossy.elements();
  CovMat4::Matrix e = lossy.errors();
  const double amp_minus = kBoltzmann * chain.noise_temperature_minus_k / (kPlanck * f_minus_hz);
  const double amp_plus = kBoltzmann * chain.noise_temperature_plus_k / (kPlanck * f_plus_hz);
  m(0, 0) += amp_minus;
  m(1, 1) += amp_minus;
  m(2, 2) += amp_plus;
  m(3, 3) += amp_plus;
  const std::array<double, 4> g{std::sqrt(gain_minus), std::sqrt(gain_minus), std::sqrt(gain_plus),
                                std::sqrt(gain_plus)};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      m(i, j) *= g[i] * g[j];
      e(i, j) *= g[i] * g[j];
    }
  }
  return CovMat4(m, e);
}

CovMat4 detected_covariance(const CovMat4& device, const ChainConfig& chain, double f_minus_hz,
                            double f_plus_hz) {
  return detected_covariance(device, chain, f_minus_hz, f_plus_hz, chain.gain_start_minus,
                             chain.gain_start_plus);
}

std::vector<QuadratureRecord> sample_records(const CovMat4& v, std::int64_t count, std::uint64_t seed) {
  if (count < 0) throw DomainError("sample count must be >= 0");
  std::vector<QuadratureRecord> out;
  if (count == 0) return out;
  out.reserve(static_cast<std::size_t>(count));
  draw_block(GaussianSampler(v.elements()), seed, 0, false, count,
             [&](const Eigen::Vector4d& x) { out.push_back(make_record(0, false, x)); });
  return out;
}

std::vector<QuadratureRecord> cycle_records(const CovMat4& device, const RecordSetMeta& meta, std::int64_t cycle) {
  if (cycle < 0 || cycle >= meta.chain.cycles) throw DomainError("cycle index out of range");
  const CycleSamplers s = cycle_samplers(device, meta, cycle);
  std::vector<QuadratureRecord> out;
  out.reserve(static_cast<std::size_t>(meta.chain.samples_per_cycle) * 2);
  for (const bool on : {true, false}) {
    draw_block(on ? s.on : s.off, meta.chain.seed, cycle, on, meta.chain.samples_per_cycle,
               [&](const Eigen::Vector4d& x) { out.push_back(make_record(cycle, on, x)); });
  }
  return out;
}

RecordSet pump_cycle_dataset(const squid::PumpConfig& cfg, const squid::SquidParams& p,
                             const ChainConfig& chain) {
  chain.validate();
  RecordSet rs;
  rs.meta = {cfg, chain};
  const CovMat4 device = device_covariance(cfg, p);
  const auto per_cycle = static_cast<std::size_t>(chain.samples_per_cycle);
  rs.records.resize(static_cast<std::size_t>(chain.cycles) * 2 * per_cycle);
  parallel_for(static_cast<std::size_t>(chain.cycles), [&](std::size_t c) {
    const auto block = cycle_records(device, rs.meta, static_cast<std::int64_t>(c));
    std::copy(block.begin(), block.end(), rs.records.begin() + static_cast<std::ptrdiff_t>(c * 2 * per_cycle));
  });
  return rs;
}

CycleMomentSet pump_cycle_moments(const squid::PumpConfig& cfg, const squid::SquidParams& p,
                                  const ChainConfig& chain) {
  chain.validate();
  CycleMomentSet ms;
  ms.meta = {cfg, chain};
  const CovMat4 device = device_covariance(cfg, p);
  const auto cycles = static_cast<std::size_t>(chain.cycles);
  ms.on.resize(cycles);
  ms.off.resize(cycles);
  parallel_for(cycles, [&](std::size_t c) {
    const auto cycle = static_cast<std::int64_t>(c);
    const CycleSamplers s = cycle_samplers(device, ms.meta, cycle);
    for (const bool on : {true, false}) {
      CycleMoments& m = on ? ms.on[c] : ms.off[c];
      m.cycle = cycle;
      m.pump_on = on;
      draw_block(on ? s.on : s.off, chain.seed, cycle, on, chain.samples_per_cycle,
                 [&](const Eigen::Vector4d& x) { m.add(x); });
    }
  });
  return ms;
}

CycleMomentSet reduce_to_moments(const RecordSet& rs) {
  std::map<std::int64_t, CycleMoments> on, off;
  for (const auto& r : rs.records) {
    CycleMoments& m = (r.pump_on ? on : off)[r.cycle];
    m.cycle = r.cycle;
    m.pump_on = r.pump_on;
    m.add(r.vector());
  }
  CycleMomentSet ms;
  ms.meta = rs.meta;
  for (auto& [cycle, m] : on) ms.on.push_back(m);
  for (auto& [cycle, m] : off) ms.off.push_back(m);
  return ms;
}

std::vector<calibration::ShotNoisePoint> simulate_shot_noise_sweep(
    double gain, double noise_temperature_k, const calibration::ShotNoiseEnv& env,
    double bandwidth_hz, std::span<const double> currents, double noise_frac, std::uint64_t seed) {
  if (!(noise_frac >= 0.0)) throw DomainError("noise fraction must be >= 0");
  std::mt19937_64 rng(mix64(seed));
  std::normal_distribution<double> normal;
  std::vector<calibration::ShotNoisePoint> out;
  out.reserve(currents.size());
  for (double i : currents) {
    const double s = calibration::shot_noise_psd(i, gain, noise_temperature_k, bandwidth_hz, env);
    const double z = normal(rng);
    out.push_back({i, s * (1.0 + noise_frac * z)});
  }
  return out;
}

std::vector<double> symmetric_currents(double max_current_a, int count) {
  if (count < 2) throw DomainError("need at least two currents");
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) {
    out[k] = -max_current_a + 2.0 * max_current_a * k / (count - 1);
  }
  return out;
}

}  // namespace dce::chain
