#include "dce/io.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

#include "dce/errors.hpp"

namespace dce::io {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

const std::string& require_key(const Metadata& meta, const std::string& key) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw ConfigError("missing metadata key '" + key + "'");
  return it->second;
}

double meta_double(const Metadata& meta, const std::string& key) {
  return parse_double(require_key(meta, key));
}

std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("not an integer: '" + std::string(s) + "'");
  return v;
}

std::uint64_t parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("not an unsigned integer: '" + std::string(s) + "'");
  return v;
}

std::string header(const Metadata& meta) {
  std::string out;
  for (const auto& [k, v] : meta) out += "# " + k + "=" + v + "\n";
  return out;
}

void put_le(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

double get_le(const char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

json matrix_json(const Eigen::Matrix4d& m) {
  json a = json::array();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) a.push_back(m(i, j));
  }
  return a;
}

void put_estimate(json& j, const std::string& name, const gaussian::Estimate& e) {
  j[name] = e.value;
  j[name + "_err"] = e.error;
}

}  // namespace

void require_schema(std::string_view version) {
  const auto dot = version.find('.');
  const std::string_view major = version.substr(0, dot);
  if (major != "1") throw ConfigError("unsupported schema version '" + std::string(version) + "'");
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw NumericalError("cannot format value", v);
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("not a number: '" + std::string(s) + "'");
  return v;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  AtomicFileWriter w(path);
  w.write(contents);
  w.commit();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AtomicFileWriter::AtomicFileWriter(std::filesystem::path path) : path_(std::move(path)), tmp_(path_) {
  tmp_ += ".tmp";
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot open '" + tmp_.string() + "' for writing");
}

AtomicFileWriter::~AtomicFileWriter() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_, ec);
  }
}

void AtomicFileWriter::write(std::string_view chunk) {
  out_.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
  if (!out_) throw IoError("write to '" + tmp_.string() + "' failed");
}

void AtomicFileWriter::commit() {
  out_.close();
  if (!out_) throw IoError("closing '" + tmp_.string() + "' failed");
  std::error_code ec;
  std::filesystem::rename(tmp_, path_, ec);
  if (ec) throw IoError("cannot rename '" + tmp_.string() + "' to '" + path_.string() + "': " + ec.message());
  committed_ = true;
}

CsvDocument parse_csv(std::string_view text) {
  CsvDocument doc;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;  // free-form comment
      doc.meta[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
    } else {
      doc.rows.emplace_back(line);
    }
  }
  if (auto it = doc.meta.find("schema_version"); it != doc.meta.end()) require_schema(it->second);
  return doc;
}

std::string shot_noise_csv(const ShotNoiseSweep& sweep) {
  Metadata meta{{"schema_version", std::string(kSchemaVersion)},
                {"T", format_double(sweep.env.temperature_k)},
                {"R", format_double(sweep.env.resistance_ohm)},
                {"Z0", format_double(sweep.env.line_impedance_ohm)},
                {"f", format_double(sweep.env.frequency_hz)},
                {"Bw", format_double(sweep.bandwidth_hz)}};
  std::string out = header(meta);
  for (const auto& p : sweep.points) out += format_double(p.current_a) + "," + format_double(p.psd) + "\n";
  return out;
}

ShotNoiseSweep parse_shot_noise_csv(std::string_view text) {
  const CsvDocument doc = parse_csv(text);
  ShotNoiseSweep s;
  s.env.temperature_k = meta_double(doc.meta, "T");
  s.env.resistance_ohm = meta_double(doc.meta, "R");
  s.env.line_impedance_ohm = meta_double(doc.meta, "Z0");
  s.env.frequency_hz = meta_double(doc.meta, "f");
  s.bandwidth_hz = meta_double(doc.meta, "Bw");
  for (const auto& row : doc.rows) {
    const auto cols = split(row, ',');
    if (cols.size() != 2) throw ConfigError("shot-noise row needs 2 columns: '" + row + "'");
    // Tolerate a column-name row.
    if (cols[0] == "I_amps") continue;
    s.points.push_back({parse_double(cols[0]), parse_double(cols[1])});
  }
  return s;
}

json calibration_json(const calibration::CalibrationFit& fit) {
  return json{{"schema_version", kSchemaVersion},
              {"G", fit.gain},
              {"T_n", fit.noise_temperature_k},
              {"dG", fit.gain_error},
              {"dT_n", fit.noise_temperature_error_k},
              {"f", fit.frequency_hz},
              {"Bw", fit.bandwidth_hz},
              {"residual_rms", fit.residual_rms},
              {"at_bound", fit.at_bound},
              {"T_n_unconstrained", fit.noise_temperature_unconstrained}};
}

calibration::CalibrationFit calibration_from_json(const json& j) {
  try {
    require_schema(j.at("schema_version").get<std::string>());
    calibration::CalibrationFit fit;
    fit.gain = j.at("G").get<double>();
    fit.noise_temperature_k = j.at("T_n").get<double>();
    fit.gain_error = j.at("dG").get<double>();
    fit.noise_temperature_error_k = j.at("dT_n").get<double>();
    fit.frequency_hz = j.at("f").get<double>();
    fit.bandwidth_hz = j.at("Bw").get<double>();
    fit.residual_rms = j.value("residual_rms", 0.0);
    fit.at_bound = j.value("at_bound", false);
    fit.noise_temperature_unconstrained = j.value("T_n_unconstrained", false);
    return fit;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad calibration JSON: ") + e.what());
  }
}

Metadata record_set_metadata(const chain::RecordSetMeta& m) {
  const auto& c = m.chain;
  return {{"schema_version", std::string(kSchemaVersion)},
          {"phi_dc_phi0", format_double(m.pump.phi_dc)},
          {"phi_ac_phi0", format_double(m.pump.phi_ac)},
          {"f_p_hz", format_double(m.pump.f_pump_hz)},
          {"f_minus_hz", format_double(m.pump.f_minus_hz)},
          {"f_plus_hz", format_double(m.pump.f_plus_hz)},
          {"eta_minus", format_double(c.eta_minus)},
          {"eta_plus", format_double(c.eta_plus)},
          {"t_n_minus_k", format_double(c.noise_temperature_minus_k)},
          {"t_n_plus_k", format_double(c.noise_temperature_plus_k)},
          {"g_start_minus", format_double(c.gain_start_minus)},
          {"g_start_plus", format_double(c.gain_start_plus)},
          {"g_end_minus", format_double(c.gain_end_minus)},
          {"g_end_plus", format_double(c.gain_end_plus)},
          {"bw_hz", format_double(c.bandwidth_hz)},
          {"seed", std::to_string(c.seed)},
          {"cycles", std::to_string(c.cycles)},
          {"samples_per_cycle", std::to_string(c.samples_per_cycle)}};
}

chain::RecordSetMeta record_set_meta_from(const Metadata& meta) {
  require_schema(require_key(meta, "schema_version"));
  chain::RecordSetMeta m;
  m.pump.phi_dc = meta_double(meta, "phi_dc_phi0");
  m.pump.phi_ac = meta_double(meta, "phi_ac_phi0");
  m.pump.f_pump_hz = meta_double(meta, "f_p_hz");
  m.pump.f_minus_hz = meta_double(meta, "f_minus_hz");
  m.pump.f_plus_hz = meta_double(meta, "f_plus_hz");
  auto& c = m.chain;
  c.eta_minus = meta_double(meta, "eta_minus");
  c.eta_plus = meta_double(meta, "eta_plus");
  c.noise_temperature_minus_k = meta_double(meta, "t_n_minus_k");
  c.noise_temperature_plus_k = meta_double(meta, "t_n_plus_k");
  c.gain_start_minus = meta_double(meta, "g_start_minus");
  c.gain_start_plus = meta_double(meta, "g_start_plus");
  c.gain_end_minus = meta_double(meta, "g_end_minus");
  c.gain_end_plus = meta_double(meta, "g_end_plus");
  c.bandwidth_hz = meta_double(meta, "bw_hz");
  c.seed = parse_uint(require_key(meta, "seed"));
  c.cycles = parse_int(require_key(meta, "cycles"));
  c.samples_per_cycle = parse_int(require_key(meta, "samples_per_cycle"));
  return m;
}

std::string record_csv_header(const chain::RecordSetMeta& meta, std::size_t record_count) {
  Metadata m = record_set_metadata(meta);
  m["records"] = std::to_string(record_count);
  return header(m);
}

void append_record_csv(std::string& out, const chain::QuadratureRecord& r) {
  out += std::to_string(r.cycle);
  out += r.pump_on ? ",1," : ",0,";
  out += format_double(r.i_minus);
  out += ',';
  out += format_double(r.q_minus);
  out += ',';
  out += format_double(r.i_plus);
  out += ',';
  out += format_double(r.q_plus);
  out += '\n';
}

void append_record_binary(std::string& out, const chain::QuadratureRecord& r) {
  put_le(out, static_cast<double>(r.cycle));
  put_le(out, r.pump_on ? 1.0 : 0.0);
  put_le(out, r.i_minus);
  put_le(out, r.q_minus);
  put_le(out, r.i_plus);
  put_le(out, r.q_plus);
}

json record_sidecar(const chain::RecordSetMeta& meta, std::size_t record_count) {
  json j;
  for (const auto& [k, v] : record_set_metadata(meta)) j["meta"][k] = v;
  j["schema_version"] = kSchemaVersion;
  j["record_count"] = record_count;
  j["fields"] = {"cycle", "pump_on", "i_minus", "q_minus", "i_plus", "q_plus"};
  j["encoding"] = "float64-le";
  return j;
}

std::string record_set_csv(const chain::RecordSet& rs) {
  std::string out = record_csv_header(rs.meta, rs.records.size());
  out.reserve(out.size() + rs.records.size() * 96);
  for (const auto& r : rs.records) append_record_csv(out, r);
  return out;
}

namespace {

chain::QuadratureRecord parse_record_row(std::string_view row) {
  const auto cols = split(row, ',');
  if (cols.size() != 6) throw ConfigError("record row needs 6 columns: '" + std::string(row) + "'");
  chain::QuadratureRecord r;
  r.cycle = parse_int(cols[0]);
  const auto flag = parse_int(cols[1]);
  if (flag != 0 && flag != 1) throw ConfigError("pump_on must be 0 or 1");
  r.pump_on = flag == 1;
  r.i_minus = parse_double(cols[2]);
  r.q_minus = parse_double(cols[3]);
  r.i_plus = parse_double(cols[4]);
  r.q_plus = parse_double(cols[5]);
  return r;
}

chain::QuadratureRecord decode_record(const char* p) {
  chain::QuadratureRecord r;
  r.cycle = static_cast<std::int64_t>(get_le(p));
  r.pump_on = get_le(p + 8) != 0.0;
  r.i_minus = get_le(p + 16);
  r.q_minus = get_le(p + 24);
  r.i_plus = get_le(p + 32);
  r.q_plus = get_le(p + 40);
  return r;
}

constexpr std::size_t kRecordBytes = 48;

std::pair<chain::RecordSetMeta, std::size_t> sidecar_meta(const json& sidecar) {
  try {
    require_schema(sidecar.at("schema_version").get<std::string>());
    Metadata meta;
    for (const auto& [k, v] : sidecar.at("meta").items()) meta[k] = v.get<std::string>();
    return {record_set_meta_from(meta), sidecar.at("record_count").get<std::size_t>()};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad record sidecar: ") + e.what());
  }
}

}  // namespace

chain::RecordSet parse_record_set_csv(std::string_view text) {
  const CsvDocument doc = parse_csv(text);
  chain::RecordSet rs;
  rs.meta = record_set_meta_from(doc.meta);
  rs.records.reserve(doc.rows.size());
  for (const auto& row : doc.rows) {
    if (row.rfind("cycle", 0) == 0) continue;
    rs.records.push_back(parse_record_row(row));
  }
  if (auto it = doc.meta.find("records"); it != doc.meta.end()) {
    if (parse_int(it->second) != static_cast<std::int64_t>(rs.records.size())) {
      throw ConfigError("record count does not match metadata");
    }
  }
  return rs;
}

std::string record_set_binary(const chain::RecordSet& rs) {
  std::string out;
  out.reserve(rs.records.size() * kRecordBytes);
  for (const auto& r : rs.records) append_record_binary(out, r);
  return out;
}

json record_set_sidecar(const chain::RecordSet& rs) { return record_sidecar(rs.meta, rs.records.size()); }

chain::RecordSet parse_record_set_binary(std::string_view payload, const json& sidecar) {
  const auto [meta, count] = sidecar_meta(sidecar);
  if (payload.size() != count * kRecordBytes) throw ConfigError("binary payload size does not match record count");
  chain::RecordSet rs;
  rs.meta = meta;
  rs.records.reserve(count);
  for (std::size_t i = 0; i < count; ++i) rs.records.push_back(decode_record(payload.data() + i * kRecordBytes));
  return rs;
}

namespace {

json read_sidecar(const std::filesystem::path& bin) {
  std::filesystem::path path = bin;
  path.replace_extension(".json");
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("bad sidecar JSON '" + path.string() + "': " + e.what());
  }
}

}  // namespace

chain::RecordSetMeta scan_record_set(const std::filesystem::path& path,
                                     const std::function<void(const chain::QuadratureRecord&)>& sink) {
  if (path.extension() == ".bin") {
    const auto [meta, count] = sidecar_meta(read_sidecar(path));
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<char> buf(kRecordBytes * 8192);
    std::size_t seen = 0;
    while (in) {
      in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
      const auto got = static_cast<std::size_t>(in.gcount());
      if (got % kRecordBytes != 0) throw ConfigError("binary payload is not a whole number of records");
      for (std::size_t off = 0; off < got; off += kRecordBytes) sink(decode_record(buf.data() + off));
      seen += got / kRecordBytes;
    }
    if (in.bad()) throw IoError("read error on '" + path.string() + "'");
    if (seen != count) throw ConfigError("binary payload size does not match record count");
    return meta;
  }

  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  Metadata header_meta;
  std::optional<chain::RecordSetMeta> meta;
  std::size_t seen = 0;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    if (row.front() == '#') {
      if (meta) throw ConfigError("metadata line after data rows");
      const std::string_view body = trim(row.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos) {
        header_meta[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
      }
      continue;
    }
    if (!meta) meta = record_set_meta_from(header_meta);
    if (row.rfind("cycle", 0) == 0) continue;
    sink(parse_record_row(row));
    ++seen;
  }
  if (in.bad()) throw IoError("read error on '" + path.string() + "'");
  if (!meta) meta = record_set_meta_from(header_meta);
  if (auto it = header_meta.find("records"); it != header_meta.end()) {
    if (parse_int(it->second) != static_cast<std::int64_t>(seen)) {
      throw ConfigError("record count does not match metadata");
    }
  }
  return *meta;
}

chain::RecordSet load_record_set(const std::filesystem::path& path) {
  chain::RecordSet rs;
  rs.meta = scan_record_set(path, [&](const chain::QuadratureRecord& r) { rs.records.push_back(r); });
  return rs;
}

json analysis_json(const analysis::AnalysisResult& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["cycles"] = r.cycles;
  j["bootstrap_resamples"] = r.bootstrap_resamples;
  j["covariance"] = matrix_json(r.covariance.elements());
  j["covariance_errors"] = matrix_json(r.covariance.errors());
  put_estimate(j, "nu_minus", r.report.nu_minus);
  put_estimate(j, "log_negativity", r.report.log_negativity);
  put_estimate(j, "duan_plus", r.report.duan_plus);
  put_estimate(j, "duan_minus", r.report.duan_minus);
  put_estimate(j, "entropy_of_formation", r.report.entropy_of_formation);
  put_estimate(j, "purity", r.report.purity);
  put_estimate(j, "n_minus", r.n_minus);
  put_estimate(j, "n_plus", r.n_plus);
  put_estimate(j, "squeezing_db", r.squeezing_db);
  put_estimate(j, "amplification_db", r.amplification_db);
  return j;
}

std::string histogram_csv(const analysis::Histogram2D& h) {
  Metadata meta{{"schema_version", std::string(kSchemaVersion)},
                {"pair", std::string(analysis::pair_name(h.pair))},
                {"x_min", format_double(h.range.x_min)},
                {"x_max", format_double(h.range.x_max)},
                {"y_min", format_double(h.range.y_min)},
                {"y_max", format_double(h.range.y_max)},
                {"bins_x", std::to_string(h.bins_x)},
                {"bins_y", std::to_string(h.bins_y)},
                {"n_on", std::to_string(h.n_on)},
                {"n_off", std::to_string(h.n_off)},
                {"layout", "row iy (from y_min), column ix (from x_min), signed on-minus-off counts"}};
  std::string out = header(meta);
  for (int iy = 0; iy < h.bins_y; ++iy) {
    for (int ix = 0; ix < h.bins_x; ++ix) {
      if (ix) out += ',';
      out += std::to_string(h.at(ix, iy));
    }
    out += '\n';
  }
  return out;
}

json rate_json(const rates::RateResult& r, const rates::SpectralModel& m) {
  return json{{"schema_version", kSchemaVersion},
              {"peak_density", m.peak_density},
              {"f_p_hz", m.f_pump_hz},
              {"f_lo_hz", r.f_lo_hz},
              {"f_hi_hz", r.f_hi_hz},
              {"panels", r.panels},
              {"rate_ebit_per_s", r.rate_ebit_per_s},
              {"rate_mebit_per_s", r.rate_ebit_per_s / 1e6},
              {"peak_entropy_of_formation", r.peak_entropy_of_formation}};
}

json comparison_json(const std::vector<rates::ComparisonRow>& rows) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["rows"] = json::array();
  for (const auto& r : rows) {
    json row{{"reference", r.reference}, {"at_sample_mebit_per_s", r.at_sample_mebit_per_s}};
    row["measured_mebit_per_s"] = r.measured_mebit_per_s ? json(*r.measured_mebit_per_s) : json(nullptr);
    j["rows"].push_back(row);
  }
  return j;
}

}  // namespace dce::io
