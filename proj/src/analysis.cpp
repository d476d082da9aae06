#include "dce/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "dce/errors.hpp"

namespace dce::analysis {
namespace {

using Matrix = Eigen::Matrix4d;

constexpr double kOneSigmaLow = 0.15865525393145707;
constexpr double kOneSigmaHigh = 0.8413447460685429;

void require_matching_frequency(double calib_hz, double meta_hz, const char* band) {
  if (!(std::abs(calib_hz - meta_hz) <= 1e-6 * meta_hz)) {
    throw ConfigError(std::string("calibration for the ") + band + " band is at " +
                      std::to_string(calib_hz) + " Hz but the records are at " + std::to_string(meta_hz) + " Hz");
  }
}

// Gain-normalized per-cycle moment matrices for one pump state.
struct NormalizedCycles {
  std::vector<Matrix> on;
  std::vector<Matrix> off;
};

NormalizedCycles normalize(const chain::CycleMomentSet& ms, const calibration::CalibrationFit& calib_minus,
                           const calibration::CalibrationFit& calib_plus, const AnalysisOptions& options) {
  if (ms.on.size() < 2 || ms.off.size() < 2) {
    throw DomainError("covariance error bars need at least two cycles per pump state");
  }
  if (ms.on.size() != ms.off.size()) throw ConfigError("pump-on and pump-off cycle counts differ");
  for (std::size_t c = 0; c < ms.on.size(); ++c) {
    if (ms.on[c].cycle != ms.off[c].cycle) throw ConfigError("pump-on and pump-off cycles are not paired");
    if (ms.on[c].count == 0 || ms.off[c].count == 0) throw DomainError("empty cycle in record set");
  }
  require_matching_frequency(calib_minus.frequency_hz, ms.meta.pump.f_minus_hz, "minus");
  require_matching_frequency(calib_plus.frequency_hz, ms.meta.pump.f_plus_hz, "plus");
  if (!(calib_minus.gain > 0.0 && calib_plus.gain > 0.0)) throw ConfigError("calibrated gains must be > 0");

  Matrix rotation = Matrix::Identity();
  const double c = std::cos(options.plus_rotation_rad);
  const double s = std::sin(options.plus_rotation_rad);
  rotation(2, 2) = c;
  rotation(2, 3) = -s;
  rotation(3, 2) = s;
  rotation(3, 3) = c;

  // Power gains per band; cross elements take sqrt(G- G+).
  const std::array<double, 4> amp{std::sqrt(calib_minus.gain), std::sqrt(calib_minus.gain),
                                  std::sqrt(calib_plus.gain), std::sqrt(calib_plus.gain)};
  Matrix inverse_gain;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) inverse_gain(i, j) = 1.0 / (amp[i] * amp[j]);
  }
  auto convert = [&](const chain::CycleMoments& m) {
    const Matrix raw = rotation * m.mean() * rotation.transpose();
    const Matrix sym = 0.5 * (raw + raw.transpose());
    return Matrix(sym.cwiseProduct(inverse_gain));
  };

  NormalizedCycles out;
  out.on.reserve(ms.on.size());
  out.off.reserve(ms.off.size());
  for (const auto& m : ms.on) out.on.push_back(convert(m));
  for (const auto& m : ms.off) out.off.push_back(convert(m));
  return out;
}

CovMat4 mean_with_errors(const std::vector<Matrix>& cycles) {
  const double n = static_cast<double>(cycles.size());
  Matrix mean = Matrix::Zero();
  for (const auto& m : cycles) mean += m;
  mean /= n;
  Matrix var = Matrix::Zero();
  for (const auto& m : cycles) var += (m - mean).cwiseAbs2();
  var /= (n - 1.0);
  return CovMat4(mean, (var / n).cwiseSqrt());
}

Matrix mean_of(const std::vector<Matrix>& cycles, const std::vector<std::size_t>& idx) {
  Matrix mean = Matrix::Zero();
  for (std::size_t i : idx) mean += cycles[i];
  return mean / static_cast<double>(idx.size());
}

// The scalar summary of an input-referred state that gets bootstrapped.
struct Summary {
  gaussian::EntanglementReport report;
  double n_minus = 0.0;
  double n_plus = 0.0;
  double squeezing_db = 0.0;
  double amplification_db = 0.0;

  static constexpr int kFields = 10;
  std::array<double, kFields> fields() const {
    return {report.nu_minus.value, report.log_negativity.value, report.duan_plus.value,
            report.duan_minus.value, report.entropy_of_formation.value, report.purity.value,
            n_minus, n_plus, squeezing_db, amplification_db};
  }
};

Summary summarize(const CovMat4& v) {
  Summary s;
  s.report = gaussian::entanglement_report(v);
  s.n_minus = 0.5 * (v(0, 0) + v(1, 1)) - 0.5;
  s.n_plus = 0.5 * (v(2, 2) + v(3, 3)) - 0.5;
  s.squeezing_db = to_db(s.report.duan_minus.value);
  s.amplification_db = to_db(s.report.duan_plus.value);
  return s;
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

CovariancePair estimate_covariance(const chain::CycleMomentSet& moments,
                                   const calibration::CalibrationFit& calib_minus,
                                   const calibration::CalibrationFit& calib_plus,
                                   const AnalysisOptions& options) {
  const NormalizedCycles cycles = normalize(moments, calib_minus, calib_plus, options);
  return {mean_with_errors(cycles.on), mean_with_errors(cycles.off)};
}

CovariancePair estimate_covariance(const chain::RecordSet& rs,
                                   const calibration::CalibrationFit& calib_minus,
                                   const calibration::CalibrationFit& calib_plus,
                                   const AnalysisOptions& options) {
  return estimate_covariance(chain::reduce_to_moments(rs), calib_minus, calib_plus, options);
}

CovMat4 input_referred_state(const CovMat4& on, const CovMat4& off) {
  const Matrix elements = on.elements() - off.elements() + CovMat4::vacuum().elements();
  const Matrix errors = (on.errors().cwiseAbs2() + off.errors().cwiseAbs2()).cwiseSqrt();
  return CovMat4(elements, errors);
}

AnalysisResult analyze(const chain::CycleMomentSet& moments,
                       const calibration::CalibrationFit& calib_minus,
                       const calibration::CalibrationFit& calib_plus,
                       const AnalysisOptions& options) {
  if (options.bootstrap_resamples < 2) throw DomainError("bootstrap needs at least 2 resamples");
  const NormalizedCycles cycles = normalize(moments, calib_minus, calib_plus, options);
  const CovMat4 state = input_referred_state(mean_with_errors(cycles.on), mean_with_errors(cycles.off));
  const Summary point = summarize(state);

  // Cycles are resampled as on/off pairs so slow gain drift cancels in the
  // difference exactly as it does in the point estimate.
  const std::size_t n = cycles.on.size();
  const std::uint64_t seed =
      options.bootstrap_seed != 0 ? options.bootstrap_seed : chain::mix64(moments.meta.chain.seed ^ 0xb007u);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::array<std::vector<double>, Summary::kFields> samples;
  std::vector<std::size_t> idx(n);
  for (int b = 0; b < options.bootstrap_resamples; ++b) {
    for (auto& i : idx) i = pick(rng);
    const CovMat4 resampled(mean_of(cycles.on, idx) - mean_of(cycles.off, idx) + CovMat4::vacuum().elements());
    Summary s;
    try {
      s = summarize(resampled);
    } catch (const NumericalError&) {
      continue;  // unphysical resample; contributes nothing
    }
    const auto f = s.fields();
    for (int k = 0; k < Summary::kFields; ++k) samples[k].push_back(f[k]);
  }

  std::array<double, Summary::kFields> sigma{};
  for (int k = 0; k < Summary::kFields; ++k) {
    auto& v = samples[k];
    if (v.size() < 2) continue;
    std::sort(v.begin(), v.end());
    sigma[k] = 0.5 * (quantile_sorted(v, kOneSigmaHigh) - quantile_sorted(v, kOneSigmaLow));
  }

  AnalysisResult r;
  r.covariance = state;
  r.report = point.report;
  r.report.nu_minus.error = sigma[0];
  r.report.log_negativity.error = sigma[1];
  r.report.duan_plus.error = sigma[2];
  r.report.duan_minus.error = sigma[3];
  r.report.entropy_of_formation.error = sigma[4];
  r.report.purity.error = sigma[5];
  r.n_minus = {point.n_minus, sigma[6]};
  r.n_plus = {point.n_plus, sigma[7]};
  r.squeezing_db = {point.squeezing_db, sigma[8]};
  r.amplification_db = {point.amplification_db, sigma[9]};
  r.cycles = static_cast<int>(n);
  r.bootstrap_resamples = static_cast<int>(samples[0].size());
  return r;
}

AnalysisResult analyze(const chain::RecordSet& rs, const calibration::CalibrationFit& calib_minus,
                       const calibration::CalibrationFit& calib_plus, const AnalysisOptions& options) {
  return analyze(chain::reduce_to_moments(rs), calib_minus, calib_plus, options);
}

double to_db(double ratio) {
  if (!(ratio > 0.0)) throw DomainError("dB conversion needs a positive ratio");
  return 10.0 * std::log10(ratio);
}

std::string_view pair_name(QuadraturePair pair) {
  switch (pair) {
    case QuadraturePair::kIMinusIPlus: return "I-I+";
    case QuadraturePair::kQMinusQPlus: return "Q-Q+";
    case QuadraturePair::kIMinusQPlus: return "I-Q+";
    case QuadraturePair::kQMinusIPlus: return "Q-I+";
  }
  return "?";
}

QuadraturePair parse_pair(std::string_view name) {
  for (auto p : {QuadraturePair::kIMinusIPlus, QuadraturePair::kQMinusQPlus, QuadraturePair::kIMinusQPlus,
                 QuadraturePair::kQMinusIPlus}) {
    if (pair_name(p) == name) return p;
  }
  throw ConfigError("unknown quadrature pair '" + std::string(name) + "'");
}

std::int64_t Histogram2D::total() const {
  std::int64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

Histogram2D::Histogram2D(QuadraturePair pair_, int bins_x_, int bins_y_, const HistogramRange& range_)
    : pair(pair_), range(range_), bins_x(bins_x_), bins_y(bins_y_) {
  if (bins_x < 1 || bins_y < 1) throw DomainError("histogram needs at least one bin per axis");
  if (!(std::isfinite(range.x_min) && std::isfinite(range.x_max) && std::isfinite(range.y_min) &&
        std::isfinite(range.y_max) && range.x_min < range.x_max && range.y_min < range.y_max)) {
    throw DomainError("histogram range must be finite and non-empty");
  }
  counts.assign(static_cast<std::size_t>(bins_x) * bins_y, 0);
}

void Histogram2D::add(const chain::QuadratureRecord& r) {
  double x = 0.0;
  double y = 0.0;
  switch (pair) {
    case QuadraturePair::kIMinusIPlus: x = r.i_minus; y = r.i_plus; break;
    case QuadraturePair::kQMinusQPlus: x = r.q_minus; y = r.q_plus; break;
    case QuadraturePair::kIMinusQPlus: x = r.i_minus; y = r.q_plus; break;
    case QuadraturePair::kQMinusIPlus: x = r.q_minus; y = r.i_plus; break;
  }
  if (std::isnan(x) || std::isnan(y)) throw DomainError("NaN quadrature in histogram input");
  auto bin = [](double v, double lo, double hi, int n) {
    const double k = std::clamp(std::floor((v - lo) / (hi - lo) * n), 0.0, static_cast<double>(n - 1));
    return static_cast<int>(k);
  };
  const int ix = bin(x, range.x_min, range.x_max, bins_x);
  const int iy = bin(y, range.y_min, range.y_max, bins_y);
  counts[static_cast<std::size_t>(iy) * bins_x + ix] += r.pump_on ? 1 : -1;
  (r.pump_on ? n_on : n_off) += 1;
}

Histogram2D histogram2d(const chain::RecordSet& rs, QuadraturePair pair, int bins_x, int bins_y,
                        const HistogramRange& range) {
  if (rs.records.empty()) throw DomainError("histogram of an empty record set");
  Histogram2D h(pair, bins_x, bins_y, range);
  for (const auto& r : rs.records) h.add(r);
  return h;
}

}  // namespace dce::analysis
