#pragma once

// Entanglement rates of a broadband source with a parabolic photon spectrum.

#include <optional>
#include <string>
#include <vector>

namespace dce::rates {

struct SpectralModel {
  double peak_density = 0.01;  // n_p, photons s^-1 Hz^-1 at f_p / 2
  double f_pump_hz = 8.9e9;

  void validate() const;
};

struct RateResult {
  double rate_ebit_per_s = 0.0;
  double f_lo_hz = 0.0;
  double f_hi_hz = 0.0;
  int panels = 0;
  /// Entanglement of formation where N(f) peaks inside the band.
  double peak_entropy_of_formation = 0.0;
};

inline constexpr int kDefaultPanels = 4096;

/// n(f) = n_p f (f_p - f) / (f_p / 2)^2 on [0, f_p].
double n_of_f(double f_hz, const SpectralModel& m);

/// Low-occupation log-negativity 2 sqrt(n(f)).
double logneg_of_f(double f_hz, const SpectralModel& m);

/// Peak density whose spectrum has log-negativity `peak_logneg` at f_p / 2.
double peak_density_for_logneg(double peak_logneg);

/// Band integral of E_F(N(f)) by composite Simpson with pairwise summation.
RateResult ebit_rate(const SpectralModel& m, double f_lo_hz, double f_hi_hz,
                     int panels = kDefaultPanels);

struct ComparisonRow {
  std::string reference;
  std::optional<double> measured_mebit_per_s;
  double at_sample_mebit_per_s;
};

/// Published entanglement rates of other microwave sources, plus this
/// device's measured (5.2) and at-sample (90) Mebit/s.
const std::vector<ComparisonRow>& comparison_table();

/// Fixed-width plain-text rendering of the table.
std::string render_comparison_table(const std::vector<ComparisonRow>& rows);

}  // namespace dce::rates
