#include "dce/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/minima.hpp>

#include "dce/constants.hpp"
#include "dce/errors.hpp"

namespace dce::calibration {
namespace {

using constants::kBoltzmann;
using constants::kElementaryCharge;
using constants::kPlanck;

// x / tanh(x), continued to 1 at x = 0.
double x_over_tanh(double x) {
  if (std::abs(x) < 1e-6) return 1.0 + x * x / 3.0;
  return x / std::tanh(x);
}

// Shot/Johnson/zero-point bracket of the detected PSD, without the noise
// temperature term: V_T^2 / (2 Z0) (E1 / tanh E1 + E2 / tanh E2).
double source_term(double current_a, const ShotNoiseEnv& env) {
  const double z0 = env.line_impedance_ohm;
  const double r = env.resistance_ohm;
  const double vs2 = 2.0 * kElementaryCharge * std::abs(current_a) * r * r * z0 * z0 / ((z0 + r) * (z0 + r));
  const double vt2 = 4.0 * kBoltzmann * env.temperature_k * z0 * z0 / (z0 + r);
  const double vz2 = z0 * 0.5 * kPlanck * env.frequency_hz;
  const double e1 = (vs2 + vz2) / vt2;
  const double e2 = (vs2 - vz2) / vt2;
  return vt2 / (2.0 * z0) * (x_over_tanh(e1) + x_over_tanh(e2));
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

void ShotNoiseEnv::validate() const {
  if (!(temperature_k > 0.0)) throw DomainError("device temperature must be > 0");
  if (!(resistance_ohm > 0.0)) throw DomainError("resistance must be > 0");
  if (!(line_impedance_ohm > 0.0)) throw DomainError("line impedance must be > 0");
  if (!(frequency_hz > 0.0)) throw DomainError("frequency must be > 0");
}

double shot_noise_psd(double current_a, double gain, double noise_temperature_k, double bandwidth_hz,
                      const ShotNoiseEnv& env) {
  env.validate();
  return gain * bandwidth_hz * (source_term(current_a, env) + kBoltzmann * noise_temperature_k);
}

CalibrationFit fit_calibration(std::span<const ShotNoisePoint> data, const ShotNoiseEnv& env,
                               double bandwidth_hz, const FitOptions& options) {
  env.validate();
  if (!(bandwidth_hz > 0.0)) throw DomainError("bandwidth must be > 0");
  if (!(options.t_min_k > 0.0 && options.t_max_k > options.t_min_k)) {
    throw DomainError("noise temperature bounds must satisfy 0 < t_min < t_max");
  }
  if (data.size() < 8) throw FitError("calibration fit needs at least 8 points", data.size());
  std::set<double> distinct;
  for (const auto& p : data) distinct.insert(std::abs(p.current_a));
  if (distinct.size() < 2) throw FitError("calibration data has a single bias current");

  const std::size_t n = data.size();
  std::vector<double> source(n), y(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    source[i] = bandwidth_hz * source_term(data[i].current_a, env);
    y[i] = data[i].psd;
    if (options.relative_residuals) {
      if (!(y[i] > 0.0)) throw FitError("relative residuals need positive PSD values", y[i]);
      w[i] = 1.0 / (y[i] * y[i]);
    } else {
      w[i] = 1.0;
    }
  }

  // For fixed T_n the model is G * m_i with m_i = Bw (source_i + k T_n).
  auto best_gain = [&](double t) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = source[i] + bandwidth_hz * kBoltzmann * t;
      num += w[i] * y[i] * m;
      den += w[i] * m * m;
    }
    return num / den;
  };
  auto sse = [&](double t) {
    const double g = best_gain(t);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - g * (source[i] + bandwidth_hz * kBoltzmann * t);
      s += w[i] * r * r;
    }
    return s;
  };

  // Coarse log grid to bracket the global minimum, then Brent inside it.
  constexpr int kGrid = 241;
  const double log_lo = std::log(options.t_min_k);
  const double log_hi = std::log(options.t_max_k);
  std::vector<double> grid(kGrid);
  int best = 0;
  double best_sse = 0.0;
  for (int k = 0; k < kGrid; ++k) {
    grid[k] = std::exp(log_lo + (log_hi - log_lo) * k / (kGrid - 1));
    const double s = sse(grid[k]);
    if (k == 0 || s < best_sse) {
      best = k;
      best_sse = s;
    }
  }
  const double lo = grid[std::max(best - 1, 0)];
  const double hi = grid[std::min(best + 1, kGrid - 1)];
  std::uintmax_t iterations = 200;
  const auto [t_fit, sse_fit] =
      boost::math::tools::brent_find_minima(sse, lo, hi, std::numeric_limits<double>::digits / 2, iterations);

  CalibrationFit fit;
  fit.gain = best_gain(t_fit);
  fit.noise_temperature_k = t_fit;
  fit.frequency_hz = env.frequency_hz;
  fit.bandwidth_hz = bandwidth_hz;
  fit.residual_rms = std::sqrt(sse_fit / static_cast<double>(n));
  constexpr double kBoundTolerance = 1e-4;
  fit.at_bound = t_fit - options.t_min_k < kBoundTolerance || options.t_max_k - t_fit < kBoundTolerance;

  // Linearized covariance in relative parameters (G/G_fit, T/T_fit).
  Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double sw = std::sqrt(w[i]);
    const double dg = sw * (source[i] + bandwidth_hz * kBoltzmann * t_fit) * fit.gain;
    const double dt = sw * fit.gain * bandwidth_hz * kBoltzmann * t_fit;
    jtj(0, 0) += dg * dg;
    jtj(0, 1) += dg * dt;
    jtj(1, 1) += dt * dt;
  }
  jtj(1, 0) = jtj(0, 1);
  const double dof = static_cast<double>(n) - 2.0;
  const Eigen::Matrix2d cov = (sse_fit / dof) * jtj.inverse();
  fit.gain_error = fit.gain * std::sqrt(std::max(cov(0, 0), 0.0));
  fit.noise_temperature_error_k = t_fit * std::sqrt(std::max(cov(1, 1), 0.0));
  fit.noise_temperature_unconstrained = !(fit.noise_temperature_error_k <= 1.0);
  return fit;
}

ErrorBudget combine_gain_uncertainty(double gain_start, double gain_end, double dgain_start,
                                     double dgain_end) {
  if (!(gain_start > 0.0 && gain_end > 0.0)) throw DomainError("gains must be > 0");
  if (!(dgain_start >= 0.0 && dgain_end >= 0.0)) throw DomainError("gain errors must be >= 0");
  ErrorBudget b;
  b.gain_mid = 0.5 * (gain_start + gain_end);
  b.dg_fit = 0.5 * (dgain_start + dgain_end);
  b.dg_drift = std::abs(gain_start - gain_end);
  b.dg_total = std::hypot(b.dg_fit, b.dg_drift);
  return b;
}

double photon_number(double power_on, double power_off, double gain, double bandwidth_hz,
                     double frequency_hz) {
  if (!(gain > 0.0 && bandwidth_hz > 0.0 && frequency_hz > 0.0)) {
    throw DomainError("gain, bandwidth and frequency must be > 0");
  }
  return (power_on - power_off) / (bandwidth_hz * gain * kPlanck * frequency_hz);
}

double photon_number_error(double n, double dgain_over_gain, double dp_off) {
  if (!(dgain_over_gain >= 0.0 && dp_off >= 0.0)) throw DomainError("uncertainties must be >= 0");
  const double gain_term = n * dgain_over_gain;
  return std::sqrt(gain_term * gain_term + 2.0 * dp_off * dp_off);
}

double loss_from_noise(double t_amplifier_k, double t_system_k) {
  if (!(t_amplifier_k > 0.0 && t_system_k > 0.0)) throw DomainError("noise temperatures must be > 0");
  if (t_amplifier_k > t_system_k) {
    throw DomainError("amplifier noise above system noise implies gain, not loss");
  }
  return 10.0 * std::log10(t_amplifier_k / t_system_k);
}

double thermal_occupation(double frequency_hz, double temperature_k) {
  if (!(frequency_hz > 0.0)) throw DomainError("frequency must be > 0");
  if (!(temperature_k >= 0.0)) throw DomainError("temperature must be >= 0");
  if (temperature_k == 0.0) return 0.0;
  return 1.0 / std::expm1(kPlanck * frequency_hz / (kBoltzmann * temperature_k));
}

FluxPumpSlope flux_pump_slope(const FluxPumpMap& map, const OnsetOptions& options) {
  const std::size_t cols = map.pump_voltages_v.size();
  const std::size_t rows = map.dc_flux_phi0.size();
  if (cols == 0 || rows < 4 || map.power.size() != rows * cols) {
    throw DomainError("flux-pump map needs >= 4 flux rows and matching power grid");
  }
  if (!std::is_sorted(map.pump_voltages_v.begin(), map.pump_voltages_v.end()) ||
      !std::is_sorted(map.dc_flux_phi0.begin(), map.dc_flux_phi0.end())) {
    throw DomainError("flux-pump map axes must be ascending");
  }

  const boost::math::normal unit;
  const double z25 = boost::math::quantile(unit, 0.25);
  const double z125 = boost::math::quantile(unit, 0.125);

  FluxPumpSlope out;
  std::vector<double> column(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) column[r] = map.at(r, c);
    const double q25 = quantile(column, 0.25);
    const double q125 = quantile(column, 0.125);
    const double sigma = std::max(0.0, (q25 - q125) / (z25 - z125));
    const double background = q25 - z25 * sigma;
    const double threshold = background + options.kappa * sigma;

    for (std::size_t r = 0; r < rows; ++r) {
      if (column[r] <= threshold) continue;
      double onset = map.dc_flux_phi0[r];
      if (r > 0) {
        const double t = (threshold - column[r - 1]) / (column[r] - column[r - 1]);
        onset = map.dc_flux_phi0[r - 1] + std::clamp(t, 0.0, 1.0) * (map.dc_flux_phi0[r] - map.dc_flux_phi0[r - 1]);
      }
      out.onsets.emplace_back(map.pump_voltages_v[c], 0.5 - onset);
      break;
    }
  }
  if (out.onsets.size() < 2) {
    throw OnsetNotFoundError("fewer than two columns cross the onset threshold",
                             static_cast<double>(out.onsets.size()));
  }

  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : out.onsets) {
    mx += x;
    my += y;
  }
  mx /= out.onsets.size();
  my /= out.onsets.size();
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : out.onsets) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) throw OnsetNotFoundError("onsets found at a single pump voltage only");
  out.slope_phi0_per_v = sxy / sxx;
  out.intercept_phi0 = my - out.slope_phi0_per_v * mx;
  return out;
}

}  // namespace dce::calibration
