#pragma once

// Run configuration: one JSON document with sections named after the types
// they fill, every physical quantity in SI with a unit-suffixed key.
//
//   {
//     "schema_version": "1.0",
//     "seed": 1,
//     "squid":  { "i_c_a", "z0_ohm", "v_line_m_per_s", "r_n_ohm", "v_gap_v",
//                 "density_scale" },
//     "pump":   { "phi_dc_phi0", "phi_ac_phi0", "f_p_hz", "f_minus_hz", "f_plus_hz" },
//     "chain":  { "eta_minus", "eta_plus", "t_n_minus_k", "t_n_plus_k",
//                 "g_start_minus", "g_start_plus", "g_end_minus", "g_end_plus",
//                 "bw_hz", "cycles", "samples_per_cycle" },
//     "env":    { "t_k", "r_ohm", "z0_ohm" },
//     "shot_noise": { "i_max_a", "points", "noise_frac" },
//     "sweep":  { "phi_ac_phi0": [...] },
//     "paths":  { "out_dir" }
//   }
//
// Every key is optional; missing keys keep the defaults of the underlying
// types. When squid.density_scale is absent it is fitted to the reference
// operating point.

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dce/calibration.hpp"
#include "dce/chain_sim.hpp"
#include "dce/squid.hpp"

namespace dce::config {

struct ShotNoiseSweepConfig {
  double max_current_a = 20e-6;
  int points = 41;
  double noise_frac = 0.005;
};

struct RunPaths {
  std::filesystem::path out_dir = "out";
};

struct RunConfig {
  squid::SquidParams squid;
  squid::PumpConfig pump;
  chain::ChainConfig chain;
  calibration::ShotNoiseEnv env;
  ShotNoiseSweepConfig shot_noise;
  std::vector<double> sweep_amplitudes_phi0;
  RunPaths paths;
  std::uint64_t seed = 1;

  /// Throws DomainError/ConfigError when any nested invariant fails.
  void validate() const;
};

/// Reference defaults: reference SQUID, operating point and chain.
RunConfig default_run_config();

/// Parses and validates. Unknown keys and wrong types raise ConfigError.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& c);

}  // namespace dce::config
