#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dce/commands.hpp"
#include "dce/config.hpp"
#include "dce/errors.hpp"
#include "dce/io.hpp"

namespace {

using namespace dce;

config::RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed,
                              const std::string& out_dir) {
  config::RunConfig cfg = path.empty() ? config::default_run_config() : config::load_run_config(path);
  if (seed) {
    cfg.seed = *seed;
    cfg.chain.seed = *seed;
  }
  if (!out_dir.empty()) cfg.paths.out_dir = out_dir;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamical Casimir entanglement simulator and analysis toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;

  auto* sim = app.add_subcommand("simulate", "Generate quadrature records, shot-noise sweeps and ground truth");
  std::string format = "csv";
  sim->add_option("--config", config_path, "Run configuration (JSON)");
  sim->add_option("--seed", seed, "Override the configured seed");
  sim->add_option("--out", out_dir, "Output directory");
  sim->add_option("--format", format, "Record format")->check(CLI::IsMember({"csv", "bin"}));

  auto* cal = app.add_subcommand("calibrate", "Fit gain and noise temperature to a shot-noise sweep");
  std::string sweep_in;
  std::string calib_out;
  cal->add_option("--in", sweep_in, "Shot-noise sweep CSV")->required();
  cal->add_option("--out", calib_out, "Calibration JSON to write")->required();

  auto* ana = app.add_subcommand("analyze", "Covariance, entanglement measures and histograms from records");
  commands::AnalyzeRequest areq;
  std::string records_in, calib_minus, calib_plus, analyze_out = "out";
  std::optional<double> half_width;
  std::uint64_t bootstrap_seed = 0;
  ana->add_option("--records", records_in, "Record file (.csv, or .bin with .json sidecar)")->required();
  ana->add_option("--calib-minus", calib_minus, "Calibration JSON of the lower band")->required();
  ana->add_option("--calib-plus", calib_plus, "Calibration JSON of the upper band")->required();
  ana->add_option("--out", analyze_out, "Output directory");
  ana->add_option("--bins", areq.bins, "Histogram bins per axis")->check(CLI::PositiveNumber);
  ana->add_option("--range", half_width, "Histogram half-width (input-referred units)");
  ana->add_option("--bootstrap", areq.options.bootstrap_resamples, "Bootstrap resamples");
  ana->add_option("--seed", bootstrap_seed, "Bootstrap seed (0 derives it from the records)");

  auto* swp = app.add_subcommand("sweep", "Simulate and analyze over pump amplitudes");
  std::vector<double> amplitudes;
  swp->add_option("--config", config_path, "Run configuration (JSON)");
  swp->add_option("--seed", seed, "Override the configured seed");
  swp->add_option("--out", out_dir, "Output directory");
  swp->add_option("--amplitudes", amplitudes, "Pump amplitudes in flux quanta")->delimiter(',');

  auto* rt = app.add_subcommand("rate", "Entanglement generation rate over a band");
  commands::RateRequest rreq;
  std::optional<double> peak_logneg;
  std::string rate_out = "out";
  rt->add_option("--peak-density", rreq.model.peak_density, "Photon density at f_p/2 (photons/s/Hz)");
  rt->add_option("--peak-logneg", peak_logneg, "Peak log-negativity (sets the density)");
  rt->add_option("--f-p", rreq.model.f_pump_hz, "Pump frequency (Hz)");
  rt->add_option("--f-lo", rreq.f_lo_hz, "Band lower edge (Hz)");
  rt->add_option("--f-hi", rreq.f_hi_hz, "Band upper edge (Hz); 0 means f_p");
  rt->add_option("--panels", rreq.panels, "Simpson panels");
  rt->add_option("--out", rate_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  return commands::run_guarded(
      [&]() -> int {
        if (*sim) {
          const auto cfg = load_config(config_path, seed, out_dir);
          commands::simulate(cfg, commands::parse_format(format), std::cout);
          return 0;
        }
        if (*cal) {
          commands::calibrate(sweep_in, calib_out, std::cout);
          return 0;
        }
        if (*ana) {
          areq.records = records_in;
          areq.calib_minus = calib_minus;
          areq.calib_plus = calib_plus;
          areq.out_dir = analyze_out;
          areq.histogram_half_width = half_width;
          areq.options.bootstrap_seed = bootstrap_seed;
          commands::analyze(areq, std::cout);
          return 0;
        }
        if (*swp) {
          const auto cfg = load_config(config_path, seed, out_dir);
          const auto& amps = amplitudes.empty() ? cfg.sweep_amplitudes_phi0 : amplitudes;
          if (amps.empty()) throw ConfigError("no sweep amplitudes given");
          const auto rows = commands::sweep(cfg, amps);
          std::filesystem::create_directories(cfg.paths.out_dir);
          io::write_file_atomic(cfg.paths.out_dir / "sweep.csv", commands::sweep_csv(rows));
          int failed = 0;
          for (const auto& r : rows) {
            if (r.ok) continue;
            ++failed;
            std::cerr << "point phi_ac = " << r.phi_ac_phi0 << " failed: " << r.error << "\n";
          }
          std::cout << "wrote " << rows.size() << " sweep points (" << failed << " failed)\n";
          return failed ? 4 : 0;
        }
        if (peak_logneg) rreq.model.peak_density = rates::peak_density_for_logneg(*peak_logneg);
        rreq.out_dir = rate_out;
        commands::rate(rreq, std::cout);
        return 0;
      },
      std::cerr);
}
