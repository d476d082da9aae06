#pragma once

// Subcommand bodies behind the dce executable. Each throws the dce error
// hierarchy; run_guarded maps it to the process exit code.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dce/analysis.hpp"
#include "dce/calibration.hpp"
#include "dce/config.hpp"
#include "dce/rates.hpp"

namespace dce::commands {

enum class RecordFormat { kCsv, kBinary };

RecordFormat parse_format(std::string_view name);

/// Ground truth of a simulated run, for closure tests.
nlohmann::json truth_json(const config::RunConfig& cfg);

/// Writes into cfg.paths.out_dir:
///   records.csv | records.bin + records.json
///   truth.json
///   shot_noise_minus.csv, shot_noise_plus.csv   (at the mid-run gains)
///   calib_minus.json, calib_plus.json           (fits of those sweeps)
void simulate(const config::RunConfig& cfg, RecordFormat format, std::ostream& log);

calibration::CalibrationFit calibrate(const std::filesystem::path& sweep_csv, const std::filesystem::path& out_json,
                                      std::ostream& log);

struct AnalyzeRequest {
  std::filesystem::path records;
  std::filesystem::path calib_minus;
  std::filesystem::path calib_plus;
  std::filesystem::path out_dir;
  analysis::AnalysisOptions options;
  int bins = 101;
  /// Half-width of the histogram axes in input-referred units; by default
  /// four standard deviations of the calibrated amplifier noise.
  std::optional<double> histogram_half_width;
};

/// Writes analysis.json and histogram_<pair>.csv for the four pairs.
analysis::AnalysisResult analyze(const AnalyzeRequest& req, std::ostream& log);

struct SweepRow {
  double phi_ac_phi0 = 0.0;
  double n_injected = 0.0;  // device photon number per mode
  double log_negativity = 0.0;
  double log_negativity_err = 0.0;
  double delta_plus = 0.0;
  double delta_minus = 0.0;
  double purity = 0.0;  // pump harmonic purity of the drive
  bool ok = false;
  std::string error;
};

/// Per-point seed: mixes the run seed with the point index.
std::uint64_t sweep_seed(std::uint64_t seed, std::size_t index);

/// simulate + analyze at each amplitude (in parallel, streaming moments).
/// Failed points are returned with ok = false and NaN values.
std::vector<SweepRow> sweep(const config::RunConfig& cfg, const std::vector<double>& amplitudes_phi0);

std::string sweep_csv(const std::vector<SweepRow>& rows);

struct RateRequest {
  rates::SpectralModel model;
  double f_lo_hz = 0.0;
  double f_hi_hz = 0.0;  // 0 = full band [0, f_p]
  int panels = rates::kDefaultPanels;
  std::filesystem::path out_dir;
};

/// Writes rate.json and comparison.json; prints the comparison table.
rates::RateResult rate(const RateRequest& req, std::ostream& out);

/// 0 ok, 2 configuration/validation, 3 I/O, 4 numerical failure.
int exit_code(const std::exception& e);

/// Runs body, reporting any exception on `err` and converting it to an exit
/// code. body returns the exit code of a normal completion.
int run_guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace dce::commands
