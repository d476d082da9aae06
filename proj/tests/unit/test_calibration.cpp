#include "dce/calibration.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dce/chain_sim.hpp"
#include "dce/constants.hpp"
#include "dce/errors.hpp"

using namespace dce;
using namespace dce::calibration;
using constants::kBoltzmann;
using constants::kPlanck;

namespace {

ShotNoiseEnv env_at(double f_hz) {
  ShotNoiseEnv e;
  e.frequency_hz = f_hz;
  return e;
}

FluxPumpMap onset_map(double slope, double noise, std::uint64_t seed) {
  FluxPumpMap m;
  for (double v = 0.1; v <= 1.0 + 1e-9; v += 0.05) m.pump_voltages_v.push_back(v);
  for (int r = 0; r < 200; ++r) m.dc_flux_phi0.push_back(0.0025 * r);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  for (double phi : m.dc_flux_phi0) {
    for (double v : m.pump_voltages_v) {
      const bool pumped = phi + slope * v >= 0.5;
      m.power.push_back(1.0 + noise * z(rng) + (pumped ? 1.0 : 0.0));
    }
  }
  return m;
}

}  // namespace

TEST(ShotNoise, EvenAndContinuous) {
  const auto env = env_at(4.1e9);
  for (double i = 1e-9; i <= 10e-6; i *= 1.5) {
    EXPECT_DOUBLE_EQ(shot_noise_psd(i, 1e9, 3.0, 1e6, env), shot_noise_psd(-i, 1e9, 3.0, 1e6, env));
  }
  const double s0 = shot_noise_psd(0.0, 1e9, 3.0, 1e6, env);
  EXPECT_NEAR(shot_noise_psd(1e-12, 1e9, 3.0, 1e6, env), s0, 1e-9 * s0);
}

TEST(ShotNoise, MonotoneInCurrent) {
  const auto env = env_at(4.1e9);
  double prev = 0.0;
  for (double i = 0.0; i <= 20e-6; i += 0.1e-6) {
    const double s = shot_noise_psd(i, 1e9, 3.0, 1e6, env);
    EXPECT_GE(s, prev);
    prev = s;
  }
}

TEST(ShotNoise, ZeroTemperatureLimit) {
  auto env = env_at(4.1e9);
  env.temperature_k = 1e-6;
  const double want = 1e9 * 1e6 * (kPlanck * 4.1e9 / 2 + kBoltzmann * 3.71);
  EXPECT_NEAR(shot_noise_psd(0.0, 1e9, 3.71, 1e6, env), want, 1e-3 * want);
}

TEST(ShotNoise, LargeCurrentSlope) {
  // The source term has V_s^2 = 2 e |I| R^2 Z0^2 / (Z0 + R)^2, so the
  // asymptotic slope of V_s^2 / Z0 is 2 e R^2 Z0 / (Z0 + R)^2.
  const auto env = env_at(4.1e9);
  const double r = env.resistance_ohm, z0 = env.line_impedance_ohm;
  const double want = 1e9 * 1e6 * 2 * constants::kElementaryCharge * r * r * z0 / ((z0 + r) * (z0 + r));
  const double h = 1e-6;
  const double slope = (shot_noise_psd(1e-3 + h, 1e9, 3.0, 1e6, env) - shot_noise_psd(1e-3 - h, 1e9, 3.0, 1e6, env)) / (2 * h);
  EXPECT_NEAR(slope, want, 0.005 * want);
}

TEST(Fit, NoiselessRecovery) {
  const auto env = env_at(4.1e9);
  const auto currents = chain::symmetric_currents(20e-6, 41);
  const auto data = chain::simulate_shot_noise_sweep(1.3051e9, 3.71, env, 1e6, currents, 0.0, 1);
  const auto fit = fit_calibration(data, env, 1e6);
  EXPECT_NEAR(fit.gain, 1.3051e9, 1e-6 * 1.3051e9);
  EXPECT_NEAR(fit.noise_temperature_k, 3.71, 1e-6 * 3.71);
  EXPECT_FALSE(fit.at_bound);
  EXPECT_EQ(fit.frequency_hz, 4.1e9);
  EXPECT_EQ(fit.bandwidth_hz, 1e6);
}

TEST(Fit, ReferenceValuedRoundTrip) {
  const auto env = env_at(4.1e9);
  const auto currents = chain::symmetric_currents(20e-6, 41);
  const auto data = chain::simulate_shot_noise_sweep(1.3051e9, 3.71, env, 1e6, currents, 0.005, 42);
  const auto fit = fit_calibration(data, env, 1e6);
  EXPECT_NEAR(fit.gain, 1.3051e9, 0.01 * 1.3051e9);
  EXPECT_NEAR(fit.noise_temperature_k, 3.71, 0.02 * 3.71);
  EXPECT_GT(fit.gain_error, 0.0);
  EXPECT_GT(fit.noise_temperature_error_k, 0.0);
}

TEST(Fit, RandomizedCoverage) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lg(8.0, 10.0), tn(1.0, 10.0);
  const auto env = env_at(4.8e9);
  const auto currents = chain::symmetric_currents(20e-6, 41);
  int inside = 0;
  const int runs = 60;
  for (int k = 0; k < runs; ++k) {
    const double g = std::pow(10.0, lg(rng));
    const double t = tn(rng);
    const auto data = chain::simulate_shot_noise_sweep(g, t, env, 1e6, currents, 0.005, 1000 + k);
    const auto fit = fit_calibration(data, env, 1e6);
    if (std::abs(fit.gain - g) <= 3 * fit.gain_error && std::abs(fit.noise_temperature_k - t) <= 3 * fit.noise_temperature_error_k) {
      ++inside;
    }
  }
  EXPECT_GE(inside, runs - 3);
}

TEST(Fit, LinearRegionOnlyFlagsNoiseTemperature) {
  const auto env = env_at(4.1e9);
  std::vector<double> currents;
  for (double i = 1e-3; i <= 2e-3 + 1e-12; i += 0.05e-3) {
    currents.push_back(i);
    currents.push_back(-i);
  }
  const auto data = chain::simulate_shot_noise_sweep(1.3e9, 3.71, env, 1e6, currents, 0.005, 9);
  const auto fit = fit_calibration(data, env, 1e6);
  EXPECT_NEAR(fit.gain, 1.3e9, 0.02 * 1.3e9);
  EXPECT_GT(fit.noise_temperature_error_k, 1.0);
  EXPECT_TRUE(fit.noise_temperature_unconstrained);
}

TEST(Fit, DegenerateData) {
  const auto env = env_at(4.1e9);
  std::vector<ShotNoisePoint> few(5, {1e-6, 1.0});
  EXPECT_THROW(fit_calibration(few, env, 1e6), FitError);
  std::vector<ShotNoisePoint> same(20, {1e-6, 1.0});
  for (std::size_t k = 0; k < same.size(); k += 2) same[k].current_a = -1e-6;
  EXPECT_THROW(fit_calibration(same, env, 1e6), FitError);
}

TEST(ErrorBudget, ReferenceGains) {
  const auto b = combine_gain_uncertainty(1.3051e9, 1.2929e9, 3.4e6, 4.3e6);
  EXPECT_NEAR(b.dg_drift, 12.2e6, 0.05e6);
  EXPECT_NEAR(b.dg_total, 12.9e6, 0.2e6);
  EXPECT_NEAR(b.dg_total * b.dg_total, b.dg_fit * b.dg_fit + b.dg_drift * b.dg_drift, 1e-6 * b.dg_total * b.dg_total);
  EXPECT_NEAR(b.gain_mid, 0.5 * (1.3051e9 + 1.2929e9), 1.0);
  // Second band: total 10.0e6; relative 1 % and 0.7 %.
  const auto p = combine_gain_uncertainty(1.4906e9, 1.4817e9, 3.6e6, 5.6e6);
  EXPECT_NEAR(p.dg_total, 10.0e6, 0.05e6);
  EXPECT_NEAR(b.dg_total / b.gain_mid, 0.01, 0.0005);
  EXPECT_NEAR(p.dg_total / p.gain_mid, 0.007, 0.0005);
}

TEST(ErrorBudget, Limits) {
  const auto same = combine_gain_uncertainty(1e9, 1e9, 3e6, 5e6);
  EXPECT_EQ(same.dg_drift, 0.0);
  EXPECT_DOUBLE_EQ(same.dg_total, same.dg_fit);
  const auto exact = combine_gain_uncertainty(1.3e9, 1.2e9, 0.0, 0.0);
  EXPECT_NEAR(exact.dg_total, 0.1e9, 1.0);
}

TEST(PhotonNumber, Inversion) {
  EXPECT_EQ(photon_number(2.0, 2.0, 1e9, 1e6, 4.1e9), 0.0);
  const double p = 1e6 * 1e9 * kPlanck * 4.1e9 * 0.01;
  EXPECT_NEAR(photon_number(6 * p, 5 * p, 1e9, 1e6, 4.1e9), 0.01, 1e-15);
  EXPECT_LT(photon_number(1.0, 2.0, 1e9, 1e6, 4.1e9), 0.0);
}

TEST(PhotonNumber, Unbiased) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> z;
  const double g = 1.3e9, bw = 1e6, f = 4.1e9, n = 0.05;
  const double unit = bw * g * kPlanck * f;
  const double sigma = 0.0025 * unit;
  double sum = 0.0;
  const int reps = 1000;
  for (int k = 0; k < reps; ++k) {
    const double off = 20.0 * unit + sigma * z(rng);
    const double on = 20.0 * unit + n * unit + sigma * z(rng);
    sum += photon_number(on, off, g, bw, f);
  }
  const double se = std::sqrt(2.0) * 0.0025 / std::sqrt(reps);
  EXPECT_NEAR(sum / reps, n, 2 * se);
}

TEST(PhotonNumber, ErrorExamples) {
  EXPECT_NEAR(photon_number_error(0.05, 0.01, 0.0025), std::sqrt(2.5e-7 + 1.25e-5), 1e-12);
  EXPECT_NEAR(photon_number_error(0.05, 0.01, 0.0025), 0.00357, 0.00001);
  EXPECT_NEAR(photon_number_error(1.0, 0.01, 0.0), 0.01, 1e-15);
  EXPECT_NEAR(photon_number_error(0.0, 0.01, 0.0025), std::sqrt(2.0) * 0.0025, 1e-15);
}

TEST(Loss, FromNoise) {
  EXPECT_NEAR(loss_from_noise(2.2, 3.7), -2.26, 0.005);
  EXPECT_NEAR(loss_from_noise(2.0, 2.95), -1.69, 0.005);
  EXPECT_EQ(loss_from_noise(3.0, 3.0), 0.0);
}

TEST(Thermal, Occupation) {
  EXPECT_EQ(thermal_occupation(4.8e9, 0.0), 0.0);
  const double n = thermal_occupation(4.8e9, 0.040);
  EXPECT_NEAR(n, 1.0 / std::expm1(kPlanck * 4.8e9 / (kBoltzmann * 0.040)), 1e-15);
  EXPECT_NEAR(n, 0.0031, 0.0001);
  const double rj = kBoltzmann * 4.0 / (kPlanck * 1e6);
  EXPECT_NEAR(thermal_occupation(1e6, 4.0), rj, 0.01 * rj);
}

TEST(FluxPump, RecoversSlope) {
  const auto fit = flux_pump_slope(onset_map(0.375, 0.01, 3));
  EXPECT_NEAR(fit.slope_phi0_per_v, 0.375, 0.02 * 0.375);
  EXPECT_GE(fit.onsets.size(), 10u);
}

TEST(FluxPump, ZeroSlope) {
  FluxPumpMap m = onset_map(0.0, 0.01, 4);
  // Fixed onset: every column crosses at the same flux.
  for (std::size_t r = 0; r < m.dc_flux_phi0.size(); ++r) {
    for (std::size_t c = 0; c < m.pump_voltages_v.size(); ++c) {
      if (m.dc_flux_phi0[r] >= 0.3) m.power[r * m.pump_voltages_v.size() + c] += 1.0;
    }
  }
  const auto fit = flux_pump_slope(m);
  EXPECT_NEAR(fit.slope_phi0_per_v, 0.0, 0.0025);
}

TEST(FluxPump, UniformMapHasNoOnset) {
  FluxPumpMap m;
  m.pump_voltages_v = {0.1, 0.2, 0.3};
  m.dc_flux_phi0 = {0.0, 0.1, 0.2, 0.3, 0.4};
  m.power.assign(15, 1.0);
  EXPECT_THROW(flux_pump_slope(m), OnsetNotFoundError);
}
