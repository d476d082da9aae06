#include "dce/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <thread>

#include "dce/chain_sim.hpp"
#include "dce/constants.hpp"
#include "dce/errors.hpp"
#include "dce/gaussian.hpp"
#include "dce/io.hpp"

namespace dce::commands {
namespace {

using nlohmann::json;

json matrix_json(const Eigen::Matrix4d& m) {
  json a = json::array();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) a.push_back(m(i, j));
  }
  return a;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

void write_json(const std::filesystem::path& path, const json& j) { io::write_file_atomic(path, j.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("missing input file '" + path.string() + "'");
  try {
    return json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse '" + path.string() + "': " + e.what());
  }
}

std::pair<double, double> mid_gains(const chain::ChainConfig& c) {
  return {0.5 * (c.gain_start_minus + c.gain_end_minus), 0.5 * (c.gain_start_plus + c.gain_end_plus)};
}

// Calibration an ideal shot-noise measurement would return for one band.
calibration::CalibrationFit exact_calibration(double gain, double t_n, double f_hz, double bw_hz) {
  calibration::CalibrationFit fit;
  fit.gain = gain;
  fit.noise_temperature_k = t_n;
  fit.frequency_hz = f_hz;
  fit.bandwidth_hz = bw_hz;
  return fit;
}

// Amplifier noise in quanta, plus the vacuum half quantum.
double noise_quanta(const calibration::CalibrationFit& c) {
  return constants::kBoltzmann * c.noise_temperature_k / (constants::kPlanck * c.frequency_hz) + 0.5;
}

template <class Body>
void parallel_for(std::size_t n, Body body) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  }
}

}  // namespace

RecordFormat parse_format(std::string_view name) {
  if (name == "csv") return RecordFormat::kCsv;
  if (name == "bin") return RecordFormat::kBinary;
  throw ConfigError("unknown record format '" + std::string(name) + "' (expected csv or bin)");
}

json truth_json(const config::RunConfig& cfg) {
  const chain::DeviceState dev = chain::device_state(cfg.pump, cfg.squid);
  const gaussian::CovMat4 expected = gaussian::apply_loss(dev.covariance, cfg.chain.eta_minus, cfg.chain.eta_plus);
  const auto rep = gaussian::entanglement_report(expected);
  const auto [g_minus, g_plus] = mid_gains(cfg.chain);
  return json{{"schema_version", io::kSchemaVersion},
              {"seed", cfg.seed},
              {"phi_ac_phi0", cfg.pump.phi_ac},
              {"phi_dc_phi0", cfg.pump.phi_dc},
              {"peak_density", dev.peak_density},
              {"squeezing_r", dev.squeezing_r},
              {"n_minus", dev.n_minus},
              {"n_plus", dev.n_plus},
              {"pump_purity", dev.purity},
              {"device_covariance", matrix_json(dev.covariance.elements())},
              {"input_referred_covariance", matrix_json(expected.elements())},
              {"log_negativity", rep.log_negativity.value},
              {"duan_plus", rep.duan_plus.value},
              {"duan_minus", rep.duan_minus.value},
              {"squeezing_db", analysis::to_db(rep.duan_minus.value)},
              {"amplification_db", analysis::to_db(rep.duan_plus.value)},
              {"gain_start_minus", cfg.chain.gain_start_minus},
              {"gain_start_plus", cfg.chain.gain_start_plus},
              {"gain_end_minus", cfg.chain.gain_end_minus},
              {"gain_end_plus", cfg.chain.gain_end_plus},
              {"gain_mid_minus", g_minus},
              {"gain_mid_plus", g_plus}};
}

void simulate(const config::RunConfig& cfg, RecordFormat format, std::ostream& log) {
  cfg.validate();
  const auto& out = cfg.paths.out_dir;
  ensure_dir(out);

  chain::RecordSetMeta meta{cfg.pump, cfg.chain};
  meta.chain.seed = cfg.seed;
  const gaussian::CovMat4 device = chain::device_covariance(cfg.pump, cfg.squid);
  const auto count = static_cast<std::size_t>(meta.chain.cycles * 2 * meta.chain.samples_per_cycle);

  const bool binary = format == RecordFormat::kBinary;
  const auto records_path = out / (binary ? "records.bin" : "records.csv");
  {
    io::AtomicFileWriter w(records_path);
    if (!binary) w.write(io::record_csv_header(meta, count));
    std::string chunk;
    for (std::int64_t c = 0; c < meta.chain.cycles; ++c) {
      chunk.clear();
      for (const auto& r : chain::cycle_records(device, meta, c)) {
        binary ? io::append_record_binary(chunk, r) : io::append_record_csv(chunk, r);
      }
      w.write(chunk);
    }
    w.commit();
  }
  if (binary) write_json(out / "records.json", io::record_sidecar(meta, count));
  write_json(out / "truth.json", truth_json(cfg));

  const auto currents = chain::symmetric_currents(cfg.shot_noise.max_current_a, cfg.shot_noise.points);
  const auto [g_minus, g_plus] = mid_gains(cfg.chain);
  struct Band {
    const char* name;
    double gain;
    double t_n;
    double f_hz;
    std::uint64_t salt;
  };
  for (const Band& b : {Band{"minus", g_minus, cfg.chain.noise_temperature_minus_k, cfg.pump.f_minus_hz, 1},
                        Band{"plus", g_plus, cfg.chain.noise_temperature_plus_k, cfg.pump.f_plus_hz, 2}}) {
    io::ShotNoiseSweep sweep;
    sweep.env = cfg.env;
    sweep.env.frequency_hz = b.f_hz;
    sweep.bandwidth_hz = cfg.chain.bandwidth_hz;
    sweep.points = chain::simulate_shot_noise_sweep(b.gain, b.t_n, sweep.env, sweep.bandwidth_hz, currents,
                                                    cfg.shot_noise.noise_frac, chain::mix64(cfg.seed ^ b.salt));
    io::write_file_atomic(out / ("shot_noise_" + std::string(b.name) + ".csv"), io::shot_noise_csv(sweep));
    const auto fit = calibration::fit_calibration(sweep.points, sweep.env, sweep.bandwidth_hz);
    write_json(out / ("calib_" + std::string(b.name) + ".json"), io::calibration_json(fit));
  }
  log << "wrote " << count << " records to " << records_path.string() << "\n";
}

calibration::CalibrationFit calibrate(const std::filesystem::path& sweep_csv, const std::filesystem::path& out_json,
                                      std::ostream& log) {
  if (!std::filesystem::exists(sweep_csv)) throw IoError("missing input file '" + sweep_csv.string() + "'");
  const io::ShotNoiseSweep sweep = io::parse_shot_noise_csv(io::read_file(sweep_csv));
  const auto fit = calibration::fit_calibration(sweep.points, sweep.env, sweep.bandwidth_hz);
  if (out_json.has_parent_path()) ensure_dir(out_json.parent_path());
  write_json(out_json, io::calibration_json(fit));
  log << "G = " << fit.gain << " +- " << fit.gain_error << ", T_n = " << fit.noise_temperature_k << " +- "
      << fit.noise_temperature_error_k << " K\n";
  if (fit.at_bound) log << "warning: noise temperature at the search bound\n";
  if (fit.noise_temperature_unconstrained) log << "warning: noise temperature poorly constrained\n";
  return fit;
}

analysis::AnalysisResult analyze(const AnalyzeRequest& req, std::ostream& log) {
  const auto calib_minus = io::calibration_from_json(read_json(req.calib_minus));
  const auto calib_plus = io::calibration_from_json(read_json(req.calib_plus));
  if (!std::filesystem::exists(req.records)) throw IoError("missing input file '" + req.records.string() + "'");

  const double hx = req.histogram_half_width.value_or(4.0 * std::sqrt(noise_quanta(calib_minus)));
  const double hy = req.histogram_half_width.value_or(4.0 * std::sqrt(noise_quanta(calib_plus)));
  const analysis::HistogramRange range{-hx, hx, -hy, hy};
  using analysis::QuadraturePair;
  std::vector<analysis::Histogram2D> hists;
  for (auto pair : {QuadraturePair::kIMinusIPlus, QuadraturePair::kQMinusQPlus, QuadraturePair::kIMinusQPlus,
                    QuadraturePair::kQMinusIPlus}) {
    // Pairs mix the two bands; the axis ranges follow the band of each axis.
    hists.emplace_back(pair, req.bins, req.bins, range);
  }

  const double sm = 1.0 / std::sqrt(calib_minus.gain);
  const double sp = 1.0 / std::sqrt(calib_plus.gain);
  std::map<std::int64_t, chain::CycleMoments> on, off;
  const auto meta = io::scan_record_set(req.records, [&](const chain::QuadratureRecord& r) {
    chain::CycleMoments& m = (r.pump_on ? on : off)[r.cycle];
    m.cycle = r.cycle;
    m.pump_on = r.pump_on;
    m.add(r.vector());
    chain::QuadratureRecord n = r;
    n.i_minus *= sm;
    n.q_minus *= sm;
    n.i_plus *= sp;
    n.q_plus *= sp;
    for (auto& h : hists) h.add(n);
  });
  chain::CycleMomentSet ms;
  ms.meta = meta;
  for (auto& [c, m] : on) ms.on.push_back(m);
  for (auto& [c, m] : off) ms.off.push_back(m);

  analysis::AnalysisOptions options = req.options;
  const auto result = analysis::analyze(ms, calib_minus, calib_plus, options);

  ensure_dir(req.out_dir);
  write_json(req.out_dir / "analysis.json", io::analysis_json(result));
  for (const auto& h : hists) {
    std::string name(analysis::pair_name(h.pair));
    std::replace(name.begin(), name.end(), '-', 'm');
    std::replace(name.begin(), name.end(), '+', 'p');
    io::write_file_atomic(req.out_dir / ("histogram_" + name + ".csv"), io::histogram_csv(h));
  }
  log << "log-negativity " << result.report.log_negativity.value << " +- " << result.report.log_negativity.error
      << ", squeezing " << result.squeezing_db.value << " dB, amplification " << result.amplification_db.value
      << " dB\n";
  return result;
}

std::uint64_t sweep_seed(std::uint64_t seed, std::size_t index) {
  return chain::mix64(seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1));
}

std::vector<SweepRow> sweep(const config::RunConfig& cfg, const std::vector<double>& amplitudes_phi0) {
  cfg.validate();
  std::vector<SweepRow> rows(amplitudes_phi0.size());
  const auto [g_minus, g_plus] = mid_gains(cfg.chain);
  const auto calib_minus = exact_calibration(g_minus, cfg.chain.noise_temperature_minus_k, cfg.pump.f_minus_hz,
                                             cfg.chain.bandwidth_hz);
  const auto calib_plus = exact_calibration(g_plus, cfg.chain.noise_temperature_plus_k, cfg.pump.f_plus_hz,
                                            cfg.chain.bandwidth_hz);
  parallel_for(rows.size(), [&](std::size_t k) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    SweepRow& row = rows[k];
    row = {amplitudes_phi0[k], nan, nan, nan, nan, nan, nan, false, {}};
    try {
      squid::PumpConfig pump = cfg.pump;
      pump.phi_ac = amplitudes_phi0[k];
      chain::ChainConfig chain = cfg.chain;
      chain.seed = sweep_seed(cfg.seed, k);
      const auto dev = chain::device_state(pump, cfg.squid);
      const auto moments = chain::pump_cycle_moments(pump, cfg.squid, chain);
      const auto result = analysis::analyze(moments, calib_minus, calib_plus);
      row.n_injected = dev.n_minus;
      row.log_negativity = result.report.log_negativity.value;
      row.log_negativity_err = result.report.log_negativity.error;
      row.delta_plus = result.report.duan_plus.value;
      row.delta_minus = result.report.duan_minus.value;
      row.purity = dev.purity;
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  });
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "# schema_version=" + std::string(io::kSchemaVersion) + "\n";
  out += "phi_ac_phi0,n,log_negativity,log_negativity_err,delta_iq_plus,delta_iq_minus,purity\n";
  for (const auto& r : rows) {
    out += io::format_double(r.phi_ac_phi0) + "," + io::format_double(r.n_injected) + "," +
           io::format_double(r.log_negativity) + "," + io::format_double(r.log_negativity_err) + "," +
           io::format_double(r.delta_plus) + "," + io::format_double(r.delta_minus) + "," +
           io::format_double(r.purity) + "\n";
  }
  return out;
}

rates::RateResult rate(const RateRequest& req, std::ostream& out) {
  const double hi = req.f_hi_hz > 0.0 ? req.f_hi_hz : req.model.f_pump_hz;
  const auto r = rates::ebit_rate(req.model, req.f_lo_hz, hi, req.panels);
  ensure_dir(req.out_dir);
  write_json(req.out_dir / "rate.json", io::rate_json(r, req.model));
  write_json(req.out_dir / "comparison.json", io::comparison_json(rates::comparison_table()));
  out << "rate " << r.rate_ebit_per_s / 1e6 << " Mebit/s over [" << r.f_lo_hz / 1e9 << ", " << r.f_hi_hz / 1e9
      << "] GHz\n\n"
      << rates::render_comparison_table(rates::comparison_table());
  return r;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 2;
  if (dynamic_cast<const IoError*>(&e)) return 3;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return 3;
  return 4;
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  }
}

}  // namespace dce::commands
