#include "dce/rates.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <span>

#include "dce/errors.hpp"
#include "dce/gaussian.hpp"

namespace dce::rates {
namespace {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

void require_in_band(double f_hz, const SpectralModel& m) {
  if (!(f_hz >= 0.0 && f_hz <= m.f_pump_hz)) {
    throw DomainError("frequency " + std::to_string(f_hz) + " Hz outside [0, f_p]");
  }
}

}  // namespace

void SpectralModel::validate() const {
  if (!(peak_density >= 0.0)) throw DomainError("peak density must be >= 0");
  if (!(f_pump_hz > 0.0)) throw DomainError("pump frequency must be > 0");
}

double n_of_f(double f_hz, const SpectralModel& m) {
  m.validate();
  require_in_band(f_hz, m);
  const double half = m.f_pump_hz / 2.0;
  return m.peak_density * f_hz * (m.f_pump_hz - f_hz) / (half * half);
}

double logneg_of_f(double f_hz, const SpectralModel& m) {
  return 2.0 * std::sqrt(n_of_f(f_hz, m));
}

double peak_density_for_logneg(double peak_logneg) {
  if (!(peak_logneg >= 0.0)) throw DomainError("log-negativity must be >= 0");
  return peak_logneg * peak_logneg / 4.0;
}

RateResult ebit_rate(const SpectralModel& m, double f_lo_hz, double f_hi_hz, int panels) {
  m.validate();
  if (!(0.0 <= f_lo_hz && f_lo_hz < f_hi_hz && f_hi_hz <= m.f_pump_hz)) {
    throw DomainError("band must satisfy 0 <= f_lo < f_hi <= f_p");
  }
  if (panels < 64 || panels % 2 != 0) throw DomainError("Simpson needs an even panel count >= 64");

  const double h = (f_hi_hz - f_lo_hz) / panels;
  std::vector<double> terms(static_cast<std::size_t>(panels) + 1);
  for (int i = 0; i <= panels; ++i) {
    // Last node pinned to f_hi so rounding never leaves the band.
    const double f = i == panels ? f_hi_hz : f_lo_hz + i * h;
    const double weight = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    terms[i] = weight * gaussian::entropy_of_formation(logneg_of_f(f, m));
  }

  RateResult r;
  r.rate_ebit_per_s = h / 3.0 * pairwise_sum(terms);
  r.f_lo_hz = f_lo_hz;
  r.f_hi_hz = f_hi_hz;
  r.panels = panels;
  const double f_peak = std::clamp(m.f_pump_hz / 2.0, f_lo_hz, f_hi_hz);
  r.peak_entropy_of_formation = gaussian::entropy_of_formation(logneg_of_f(f_peak, m));
  return r;
}

const std::vector<ComparisonRow>& comparison_table() {
  static const std::vector<ComparisonRow> rows{
      {"Eichler et al. 2011", std::nullopt, 5.14},
      {"Flurin et al. 2012", std::nullopt, 6.0},
      {"Menzel et al. 2012", std::nullopt, 5.7},
      {"Ku et al. 2015", 0.07, 2.7},
      {"Fedorov et al. 2018", std::nullopt, 4.3},
      {"This work", 5.2, 90.0},
  };
  return rows;
}

std::string render_comparison_table(const std::vector<ComparisonRow>& rows) {
  std::size_t width = std::string("Reference").size();
  for (const auto& r : rows) width = std::max(width, r.reference.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "Reference" << " | "
      << std::setw(26) << "Measured (Mebit/s)" << " | " << "At sample (Mebit/s)\n";
  out << std::string(width, '-') << "-+-" << std::string(26, '-') << "-+-" << std::string(19, '-') << '\n';
  for (const auto& r : rows) {
    std::ostringstream measured;
    if (r.measured_mebit_per_s) {
      measured << *r.measured_mebit_per_s;
    } else {
      measured << "-";
    }
    out << std::setw(static_cast<int>(width)) << r.reference << " | " << std::setw(26) << measured.str()
        << " | " << r.at_sample_mebit_per_s << '\n';
  }
  return out.str();
}

}  // namespace dce::rates
