#include "dce/squid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dce/errors.hpp"

namespace dce::squid {
namespace {

using constants::kPi;

constexpr double kSingularCosine = 1e-6;

// Throws when |cos(pi phi)| vanishes anywhere on [lo, hi].
void require_regular_range(double lo, double hi) {
  const bool crosses_half_integer = std::floor(lo - 0.5) != std::floor(hi - 0.5);
  const double edge = std::min(std::abs(std::cos(kPi * lo)), std::abs(std::cos(kPi * hi)));
  if (crosses_half_integer || edge <= kSingularCosine) {
    throw SingularInductanceError("flux range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                      "] reaches a half-integer flux quantum",
                                  crosses_half_integer ? std::round(lo - 0.5) + 0.5 : lo);
  }
}

double inverse_inductance(double phi, const SquidParams& p) {
  return 1.0 / josephson_inductance(phi, p);
}

double modulation_half_width(const PumpConfig& cfg, const SquidParams& p) {
  return std::max(cfg.phi_ac, p.derivative_step_phi0);
}

}  // namespace

void SquidParams::validate() const {
  if (!(critical_current_a > 0.0)) throw DomainError("critical current must be > 0");
  if (!(flux_quantum_wb > 0.0)) throw DomainError("flux quantum must be > 0");
  if (!(line_impedance_ohm > 0.0)) throw DomainError("line impedance must be > 0");
  if (!(line_velocity_m_per_s > 0.0 && line_velocity_m_per_s <= constants::kSpeedOfLight)) {
    throw DomainError("line velocity must lie in (0, c]");
  }
  if (!(normal_resistance_ohm > 0.0)) throw DomainError("normal resistance must be > 0");
  if (!(density_scale >= 0.0)) throw DomainError("density scale must be >= 0");
  if (!(derivative_step_phi0 > 0.0 && derivative_step_phi0 < 0.1)) {
    throw DomainError("derivative step must lie in (0, 0.1) flux quanta");
  }
  if (period_samples < 16) throw DomainError("period sampling needs at least 16 points");
}

void PumpConfig::validate() const {
  if (!(std::abs(f_plus_hz + f_minus_hz - f_pump_hz) <= 1.0)) {
    throw DomainError("detection frequencies must sum to the pump frequency");
  }
  if (!(0.0 < f_minus_hz && f_minus_hz < f_plus_hz && f_plus_hz < f_pump_hz)) {
    throw DomainError("need 0 < f_minus < f_plus < f_pump");
  }
  if (!(std::abs(phi_dc) < 0.5)) throw DomainError("|phi_dc| must be below half a flux quantum");
  if (!(phi_ac >= 0.0)) throw DomainError("phi_ac must be >= 0");
}

double HarmonicSpectrum::series_power() const {
  double power = dc_term * dc_term;
  for (const auto& a : amplitudes) power += 2.0 * std::norm(a);
  return power;
}

double josephson_inductance(double phi, const SquidParams& p) {
  const double c = std::abs(std::cos(kPi * phi));
  if (c <= kSingularCosine) {
    throw SingularInductanceError("Josephson inductance diverges at phi = " + std::to_string(phi), phi);
  }
  return p.flux_quantum_wb / (2.0 * kPi * p.critical_current_a * c);
}

double effective_length(double phi, const SquidParams& p) {
  return josephson_inductance(phi, p) * p.line_velocity_m_per_s / p.line_impedance_ohm;
}

double effective_length_slope(double phi, const SquidParams& p) {
  const double h = p.derivative_step_phi0;
  return (effective_length(phi + h, p) - effective_length(phi - h, p)) / (2.0 * h);
}

double reflection_phase(double f_hz, double phi, const SquidParams& p) {
  const double reactance = 2.0 * kPi * f_hz * josephson_inductance(phi, p);
  return -2.0 * std::atan(reactance / p.line_impedance_ohm);
}

std::complex<double> reflection_coefficient(double f_hz, double phi, const SquidParams& p) {
  return std::polar(1.0, reflection_phase(f_hz, phi, p));
}

double effective_mirror_speed(const PumpConfig& cfg, const SquidParams& p) {
  const double half_width = modulation_half_width(cfg, p);
  require_regular_range(cfg.phi_dc - half_width, cfg.phi_dc + half_width);
  const double displacement = cfg.phi_ac * std::abs(effective_length_slope(cfg.phi_dc, p));
  return 2.0 * kPi * cfg.f_pump_hz * displacement / constants::kSpeedOfLight;
}

HarmonicSpectrum harmonic_decomposition(const PumpConfig& cfg, const SquidParams& p, int harmonics) {
  if (harmonics < 2) throw DomainError("harmonic decomposition needs K >= 2");
  require_regular_range(cfg.phi_dc - cfg.phi_ac, cfg.phi_dc + cfg.phi_ac);

  const int n = p.period_samples;
  std::vector<double> cos_table(n), sin_table(n), samples(n);
  for (int i = 0; i < n; ++i) {
    const double angle = 2.0 * kPi * i / n;
    cos_table[i] = std::cos(angle);
    sin_table[i] = std::sin(angle);
  }
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    samples[i] = inverse_inductance(cfg.phi_dc + cfg.phi_ac * sin_table[i], p);
    mean += samples[i];
  }
  mean /= n;

  HarmonicSpectrum spectrum;
  spectrum.dc_term = mean;
  spectrum.amplitudes.reserve(harmonics);
  // Periodic trapezoidal rule; the mean is removed first so a constant
  // signal leaves no rounding residue in the harmonics.
  for (int k = 1; k <= harmonics; ++k) {
    double re = 0.0, im = 0.0;
    for (int i = 0; i < n; ++i) {
      const int idx = static_cast<int>((static_cast<long long>(k) * i) % n);
      const double centered = samples[i] - mean;
      re += centered * cos_table[idx];
      im -= centered * sin_table[idx];
    }
    spectrum.amplitudes.emplace_back(re / n, im / n);
  }
  return spectrum;
}

double dce_purity(const PumpConfig& cfg, const SquidParams& p, int harmonics) {
  if (harmonics < 4) throw DomainError("purity needs at least 4 harmonics");
  if (cfg.phi_ac == 0.0) return 1.0;
  const HarmonicSpectrum s = harmonic_decomposition(cfg, p, harmonics);
  double total = 0.0;
  for (const auto& a : s.amplitudes) total += std::norm(a);
  if (total == 0.0) return 1.0;
  return std::norm(s.amplitudes.front()) / total;
}

double dce_peak_density(const PumpConfig& cfg, const SquidParams& p) {
  if (cfg.phi_ac == 0.0) return 0.0;
  const double half_width = modulation_half_width(cfg, p);
  require_regular_range(cfg.phi_dc - half_width, cfg.phi_dc + half_width);
  const double displacement = cfg.phi_ac * std::abs(effective_length_slope(cfg.phi_dc, p));
  const double phase = displacement * 2.0 * kPi * cfg.f_pump_hz / (2.0 * p.line_velocity_m_per_s);
  return p.density_scale * phase * phase;
}

double calibrate_density_scale(const SquidParams& p, const DensityCalibrationPoint& point) {
  SquidParams unit = p;
  unit.density_scale = 1.0;
  PumpConfig cfg;
  cfg.phi_dc = point.phi_dc;
  cfg.phi_ac = point.phi_ac;
  cfg.f_pump_hz = point.f_pump_hz;
  const double raw = dce_peak_density(cfg, unit);
  if (!(raw > 0.0)) throw DomainError("calibration point produces no photons");
  return point.target_density / raw;
}

SquidParams default_squid_params() {
  SquidParams p;
  p.density_scale = calibrate_density_scale(p);
  return p;
}

double beta_c(double critical_current_a, double retrapping_current_a) {
  if (!(retrapping_current_a > 0.0)) throw DomainError("retrapping current must be > 0");
  return 4.0 * critical_current_a / (kPi * retrapping_current_a);
}

double retrapping_current(double critical_current_a, double beta) {
  if (!(beta > 0.0)) throw DomainError("beta_c must be > 0");
  return 4.0 * critical_current_a / (kPi * beta);
}

IvFit iv_fit(std::span<const IvPoint> points, const IvFitOptions& options) {
  // Common slope, separate intercepts for the two bias polarities:
  //   V = R I + b_s,  s in {+, -}.
  struct Branch {
    double n = 0, si = 0, sv = 0, sii = 0, siv = 0;
  };
  Branch pos, neg;
  double gap = 0.0;
  double critical = 0.0;
  for (const auto& pt : points) {
    const double av = std::abs(pt.voltage_v);
    if (av > options.gap_threshold_v) {
      Branch& b = pt.current_a >= 0.0 ? pos : neg;
      b.n += 1;
      b.si += pt.current_a;
      b.sv += pt.voltage_v;
      b.sii += pt.current_a * pt.current_a;
      b.siv += pt.current_a * pt.voltage_v;
    } else if (av <= options.zero_voltage_tolerance_v) {
      critical = std::max(critical, std::abs(pt.current_a));
    } else {
      gap = std::max(gap, av);
    }
  }

  // Centered sums per branch; the slope pools them.
  double sxx = 0.0, sxy = 0.0;
  for (const Branch* b : {&pos, &neg}) {
    if (b->n == 0) continue;
    sxx += b->sii - b->si * b->si / b->n;
    sxy += b->siv - b->si * b->sv / b->n;
  }
  if (pos.n + neg.n < 2 || !(sxx > 0.0)) {
    throw FitError("iv_fit needs at least two distinct resistive-branch points",
                   pos.n + neg.n);
  }
  IvFit fit;
  fit.resistance_ohm = sxy / sxx;
  fit.gap_voltage_v = gap > 0.0 ? gap : options.gap_threshold_v;
  fit.critical_current_a = critical;
  return fit;
}

}  // namespace dce::squid
