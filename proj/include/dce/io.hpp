#pragma once

// File formats. Every emitted file carries schema_version; readers reject
// an unknown major version.
//
//   shot-noise sweep CSV   "# key=value" lines (T, R, Z0, f, Bw in SI units)
//                          then rows "I_amps,S_p_detected"
//   record set CSV         "# key=value" metadata, then rows
//                          "cycle,pump_on,i_minus,q_minus,i_plus,q_plus"
//   record set binary      little-endian float64, six per record in the CSV
//                          column order, plus a JSON sidecar with metadata
//                          and record count
//   calibration JSON       flat object G, T_n, dG, dT_n, f, Bw, residual_rms

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dce/analysis.hpp"
#include "dce/calibration.hpp"
#include "dce/chain_sim.hpp"
#include "dce/rates.hpp"

namespace dce::io {

inline constexpr std::string_view kSchemaVersion = "1.0";

/// Throws ConfigError unless `version` has major component 1.
void require_schema(std::string_view version);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);
double parse_double(std::string_view s);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// Incremental counterpart of write_file_atomic. The target appears only on
/// commit(); an uncommitted writer removes its temporary file.
class AtomicFileWriter {
 public:
  explicit AtomicFileWriter(std::filesystem::path path);
  ~AtomicFileWriter();
  AtomicFileWriter(const AtomicFileWriter&) = delete;
  AtomicFileWriter& operator=(const AtomicFileWriter&) = delete;

  void write(std::string_view chunk);
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

using Metadata = std::map<std::string, std::string>;

/// Splits "# key=value" header lines from the data lines that follow.
struct CsvDocument {
  Metadata meta;
  std::vector<std::string> rows;
};
CsvDocument parse_csv(std::string_view text);

struct ShotNoiseSweep {
  calibration::ShotNoiseEnv env;
  double bandwidth_hz = 0.0;
  std::vector<calibration::ShotNoisePoint> points;
};

std::string shot_noise_csv(const ShotNoiseSweep& sweep);
ShotNoiseSweep parse_shot_noise_csv(std::string_view text);

nlohmann::json calibration_json(const calibration::CalibrationFit& fit);
calibration::CalibrationFit calibration_from_json(const nlohmann::json& j);

Metadata record_set_metadata(const chain::RecordSetMeta& meta);
chain::RecordSetMeta record_set_meta_from(const Metadata& meta);

std::string record_csv_header(const chain::RecordSetMeta& meta, std::size_t record_count);
void append_record_csv(std::string& out, const chain::QuadratureRecord& r);
void append_record_binary(std::string& out, const chain::QuadratureRecord& r);
nlohmann::json record_sidecar(const chain::RecordSetMeta& meta, std::size_t record_count);

std::string record_set_csv(const chain::RecordSet& rs);
chain::RecordSet parse_record_set_csv(std::string_view text);

/// Binary payload and its JSON sidecar.
std::string record_set_binary(const chain::RecordSet& rs);
nlohmann::json record_set_sidecar(const chain::RecordSet& rs);
chain::RecordSet parse_record_set_binary(std::string_view payload, const nlohmann::json& sidecar);

/// Streams the records of either format to `sink` without holding them in
/// memory; returns the metadata.
chain::RecordSetMeta scan_record_set(const std::filesystem::path& path,
                                     const std::function<void(const chain::QuadratureRecord&)>& sink);

/// Reads either format: "*.bin" (with "*.json" sidecar next to it) or CSV.
chain::RecordSet load_record_set(const std::filesystem::path& path);

nlohmann::json analysis_json(const analysis::AnalysisResult& r);
std::string histogram_csv(const analysis::Histogram2D& h);

nlohmann::json rate_json(const rates::RateResult& r, const rates::SpectralModel& m);
nlohmann::json comparison_json(const std::vector<rates::ComparisonRow>& rows);

}  // namespace dce::io
