#pragma once

// In-situ calibration of the amplification chain from SQUID shot noise,
// the resulting photon-number error budget, and the flux-pump amplitude
// calibration from the photon-generation onset.

#include <span>
#include <vector>

namespace dce::calibration {

/// Reference values measured on the device (for reports and presets).
namespace reference {
inline constexpr double kSystemNoiseMinusK = 3.71;   // at 4.1 GHz
inline constexpr double kSystemNoisePlusK = 2.95;    // at 4.8 GHz
inline constexpr double kHemtNoiseMinusK = 2.3;      // amplifier datasheet, 4.1 GHz
inline constexpr double kHemtNoisePlusK = 2.0;       // amplifier datasheet, 4.8 GHz
inline constexpr double kLossEstimateAmpMinusK = 2.2;  // value used for the 4.1 GHz loss
inline constexpr double kGainStartMinus = 1.3051e9;
inline constexpr double kGainStartMinusErr = 3.4e6;
inline constexpr double kGainEndMinus = 1.2929e9;
inline constexpr double kGainEndMinusErr = 4.3e6;
inline constexpr double kGainStartPlus = 1.4906e9;
inline constexpr double kGainStartPlusErr = 3.6e6;
inline constexpr double kGainEndPlus = 1.4817e9;
inline constexpr double kGainEndPlusErr = 5.6e6;
inline constexpr double kFluxPumpSlopePhi0PerV = 0.375;
}  // namespace reference

struct ShotNoiseEnv {
  double temperature_k = 0.01;
  double resistance_ohm = 69.7;
  double line_impedance_ohm = 50.0;
  double frequency_hz = 4.1e9;

  void validate() const;
};

struct ShotNoisePoint {
  double current_a;
  double psd;
};

struct CalibrationFit {
  double gain = 0.0;
  double noise_temperature_k = 0.0;
  double gain_error = 0.0;
  double noise_temperature_error_k = 0.0;
  double frequency_hz = 0.0;
  double bandwidth_hz = 0.0;
  /// RMS of the (relative, when weighted) residuals.
  double residual_rms = 0.0;
  /// Noise temperature landed on the search interval boundary.
  bool at_bound = false;
  /// dT_n exceeds 1 K: the data does not pin the noise floor.
  bool noise_temperature_unconstrained = false;
};

struct FitOptions {
  double t_min_k = 0.1;
  double t_max_k = 30.0;
  /// Minimize relative residuals (appropriate for multiplicative noise).
  bool relative_residuals = true;
};

struct ErrorBudget {
  double gain_mid = 0.0;
  double dg_fit = 0.0;
  double dg_drift = 0.0;
  double dg_total = 0.0;
  double dp_off = 0.0;
  double dn = 0.0;
};

/// Detected noise power spectral density of the biased SQUID.
double shot_noise_psd(double current_a, double gain, double noise_temperature_k, double bandwidth_hz,
                      const ShotNoiseEnv& env);

/// Two-parameter fit of (G, T_n). G enters linearly and is solved in closed
/// form for every trial T_n; T_n comes from a bounded 1-D minimization.
CalibrationFit fit_calibration(std::span<const ShotNoisePoint> data, const ShotNoiseEnv& env,
                               double bandwidth_hz, const FitOptions& options = {});

/// Gain error from start/end calibrations:
/// dG_total = sqrt(dG_fit^2 + dG_drift^2), dG_fit the mean of the two fit errors.
ErrorBudget combine_gain_uncertainty(double gain_start, double gain_end, double dgain_start,
                                     double dgain_end);

/// (P_on - P_off) / (Bw G h f). Not clamped: may be negative.
double photon_number(double power_on, double power_off, double gain, double bandwidth_hz,
                     double frequency_hz);

/// sqrt((n dG/G)^2 + 2 dP_off^2).
double photon_number_error(double n, double dgain_over_gain, double dp_off);

/// 10 log10(T_amp / T_sys), in dB (<= 0).
double loss_from_noise(double t_amplifier_k, double t_system_k);

/// Bose-Einstein occupation 1 / (exp(hf / kT) - 1).
double thermal_occupation(double frequency_hz, double temperature_k);

/// Detected power on a grid of pump voltage (columns) and static flux (rows).
struct FluxPumpMap {
  std::vector<double> pump_voltages_v;  // ascending
  std::vector<double> dc_flux_phi0;     // ascending
  /// power[row * pump_voltages_v.size() + col]
  std::vector<double> power;

  double at(std::size_t row, std::size_t col) const {
    return power[row * pump_voltages_v.size() + col];
  }
};

struct FluxPumpSlope {
  double slope_phi0_per_v = 0.0;
  double intercept_phi0 = 0.0;
  /// (V_pump, 0.5 - Phi_DC onset) for every column where an onset was found.
  std::vector<std::pair<double, double>> onsets;
};

struct OnsetOptions {
  double kappa = 5.0;
};

/// Fit Phi_AC = slope V_pump + intercept from the onset ridge where
/// Phi_AC + Phi_DC reaches half a flux quantum.
///
/// Each column's background mean and sigma come from its lowest-quartile
/// powers, matched to normal quantiles (12.5% and 25%), so the ridge itself
/// does not inflate the estimate.
FluxPumpSlope flux_pump_slope(const FluxPumpMap& map, const OnsetOptions& options = {});

}  // namespace dce::calibration
