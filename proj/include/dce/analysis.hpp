#pragma once

// From quadrature records to entanglement measures: gain-normalized
// covariance estimation per pump state, on-minus-off differencing with the
// vacuum re-added, and bootstrap error bars over cycles.

#include <cstdint>
#include <string_view>
#include <vector>

#include "dce/calibration.hpp"
#include "dce/chain_sim.hpp"
#include "dce/gaussian.hpp"

namespace dce::analysis {

using gaussian::CovMat4;
using gaussian::Estimate;

struct AnalysisOptions {
  int bootstrap_resamples = 200;
  /// Seed of the bootstrap resampler; 0 derives it from the dataset seed.
  std::uint64_t bootstrap_seed = 0;
  /// Rotation applied to the (I+, Q+) pair before estimation, for
  /// local-oscillator phase offsets between the two bands.
  double plus_rotation_rad = 0.0;
};

struct CovariancePair {
  CovMat4 on;
  CovMat4 off;
};

struct AnalysisResult {
  CovMat4 covariance;  // input-referred, vacuum-half units
  gaussian::EntanglementReport report;
  Estimate n_minus;
  Estimate n_plus;
  Estimate squeezing_db;      // 10 log10(delta_IQ-)
  Estimate amplification_db;  // 10 log10(delta_IQ+)
  int cycles = 0;
  int bootstrap_resamples = 0;
};

/// Mean gain-normalized second moments per pump state. Element errors are
/// the standard deviation across cycles over sqrt(cycles).
CovariancePair estimate_covariance(const chain::CycleMomentSet& moments,
                                   const calibration::CalibrationFit& calib_minus,
                                   const calibration::CalibrationFit& calib_plus,
                                   const AnalysisOptions& options = {});

CovariancePair estimate_covariance(const chain::RecordSet& rs,
                                   const calibration::CalibrationFit& calib_minus,
                                   const calibration::CalibrationFit& calib_plus,
                                   const AnalysisOptions& options = {});

/// V_on - V_off + V_vac, errors added in quadrature.
CovMat4 input_referred_state(const CovMat4& on, const CovMat4& off);

AnalysisResult analyze(const chain::CycleMomentSet& moments,
                       const calibration::CalibrationFit& calib_minus,
                       const calibration::CalibrationFit& calib_plus,
                       const AnalysisOptions& options = {});

AnalysisResult analyze(const chain::RecordSet& rs, const calibration::CalibrationFit& calib_minus,
                       const calibration::CalibrationFit& calib_plus,
                       const AnalysisOptions& options = {});

/// 10 log10(ratio); ratio must be > 0.
double to_db(double ratio);

enum class QuadraturePair { kIMinusIPlus, kQMinusQPlus, kIMinusQPlus, kQMinusIPlus };

std::string_view pair_name(QuadraturePair pair);
QuadraturePair parse_pair(std::string_view name);

struct HistogramRange {
  double x_min = -1.0;
  double x_max = 1.0;
  double y_min = -1.0;
  double y_max = 1.0;
};

/// Signed (pump on minus pump off) 2-D histogram. Values beyond the range
/// land in the edge bins, so the total count is always N_on - N_off.
struct Histogram2D {
  Histogram2D() = default;
  Histogram2D(QuadraturePair pair, int bins_x, int bins_y, const HistogramRange& range);

  void add(const chain::QuadratureRecord& r);

  QuadraturePair pair = QuadraturePair::kIMinusIPlus;
  HistogramRange range;
  int bins_x = 101;
  int bins_y = 101;
  std::vector<std::int64_t> counts;  // counts[iy * bins_x + ix]
  std::int64_t n_on = 0;
  std::int64_t n_off = 0;

  std::int64_t at(int ix, int iy) const { return counts[static_cast<std::size_t>(iy) * bins_x + ix]; }
  std::int64_t total() const;
};

Histogram2D histogram2d(const chain::RecordSet& rs, QuadraturePair pair, int bins_x, int bins_y,
                        const HistogramRange& range);

}  // namespace dce::analysis
