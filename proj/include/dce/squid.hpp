#pragma once

// SQUID-terminated transmission line: the flux-tunable Josephson inductance
// acts as a movable mirror whose effective position is L_eff = L_J v / Z0.
//
// Flux arguments are in units of the flux quantum throughout.

#include <complex>
#include <span>
#include <vector>

#include "dce/constants.hpp"

namespace dce::squid {

struct SquidParams {
  double critical_current_a = 3.4e-6;
  double flux_quantum_wb = constants::kFluxQuantum;
  double line_impedance_ohm = 50.0;
  double line_velocity_m_per_s = 1.2e8;
  double normal_resistance_ohm = 69.7;
  double gap_voltage_v = 360e-6;
  /// Dimensionless factor multiplying the photon-density scale; fitted to the
  /// operating point (see calibrate_density_scale).
  double density_scale = 1.0;
  /// Central-difference step for dL_eff/dPhi.
  double derivative_step_phi0 = 1e-4;
  /// Samples per pump period for the harmonic decomposition.
  int period_samples = 4096;

  /// Throws DomainError when an invariant is violated.
  void validate() const;
};

struct PumpConfig {
  double phi_dc = -0.41;
  double phi_ac = 0.013;
  double f_pump_hz = 8.9e9;
  double f_minus_hz = 4.1e9;
  double f_plus_hz = 4.8e9;

  void validate() const;
};

/// Complex Fourier coefficients of 1/L_J(t) over one pump period.
/// Two-sided convention: g(t) = dc_term + sum_k 2 Re(a_k e^{i k w t}).
struct HarmonicSpectrum {
  double dc_term = 0.0;
  std::vector<std::complex<double>> amplitudes;  // harmonics 1..K

  /// Time-averaged power of the truncated series, dc^2 + 2 sum |a_k|^2.
  double series_power() const;
};

/// Operating point used to fit SquidParams::density_scale.
struct DensityCalibrationPoint {
  double phi_dc = -0.41;
  double phi_ac = 0.013;
  double f_pump_hz = 8.9e9;
  double target_density = 0.01;
};

double josephson_inductance(double phi, const SquidParams& p);

/// L_J v_line / Z0, in metres.
double effective_length(double phi, const SquidParams& p);

/// dL_eff/dPhi (metres per flux quantum) by central difference.
double effective_length_slope(double phi, const SquidParams& p);

/// Relative phase of the reflected probe: -2 atan(2 pi f L_J / Z0).
double reflection_phase(double f_hz, double phi, const SquidParams& p);

/// Unit-magnitude reflection coefficient exp(i theta) of the lossless mirror.
std::complex<double> reflection_coefficient(double f_hz, double phi, const SquidParams& p);

/// Peak mirror velocity over the speed of light.
double effective_mirror_speed(const PumpConfig& cfg, const SquidParams& p);

HarmonicSpectrum harmonic_decomposition(const PumpConfig& cfg, const SquidParams& p, int harmonics);

/// Fraction of pair production driven by the fundamental pump tone,
/// |a_1|^2 / sum_{k>=1} |a_k|^2, evaluated with `harmonics` terms.
double dce_purity(const PumpConfig& cfg, const SquidParams& p, int harmonics = 8);

/// Peak photon spectral density n_p (photons s^-1 Hz^-1).
double dce_peak_density(const PumpConfig& cfg, const SquidParams& p);

/// density_scale that makes dce_peak_density hit the target at `point`.
double calibrate_density_scale(const SquidParams& p, const DensityCalibrationPoint& point = {});

/// Device defaults with density_scale fitted to n_p = 0.01 at 13 mPhi0.
SquidParams default_squid_params();

/// Stewart-McCumber parameter from the hysteresis: 4 I_c / (pi I_r).
double beta_c(double critical_current_a, double retrapping_current_a);

/// Inverse of beta_c for the retrapping current.
double retrapping_current(double critical_current_a, double beta);

struct IvPoint {
  double current_a;
  double voltage_v;
};

struct IvFit {
  double resistance_ohm;
  double gap_voltage_v;
  double critical_current_a;
};

struct IvFitOptions {
  /// Points with |V| above this lie on the resistive branch.
  double gap_threshold_v = 360e-6;
  /// |V| below this counts as the supercurrent branch.
  double zero_voltage_tolerance_v = 1e-6;
};

/// Resistance from a common-slope line fit to the resistive branch.
///
/// Positive and negative bias branches get separate intercepts so that an
/// offset (e.g. excess current) does not bias the slope. The gap voltage is
/// the largest |V| that is neither on the supercurrent branch nor above the
/// threshold, or the threshold itself when no such knee points exist.
IvFit iv_fit(std::span<const IvPoint> points, const IvFitOptions& options = {});

}  // namespace dce::squid
