#include "dce/config.hpp"

#include <algorithm>
#include <initializer_list>
#include <string>

#include "dce/errors.hpp"
#include "dce/io.hpp"

namespace dce::config {
namespace {

using nlohmann::json;

const json& section(const json& root, const char* name, std::initializer_list<std::string_view> keys) {
  static const json empty = json::object();
  if (!root.contains(name)) return empty;
  const json& s = root.at(name);
  if (!s.is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
  for (const auto& [k, v] : s.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw ConfigError(std::string("unknown key '") + name + "." + k + "'");
    }
  }
  return s;
}

template <class T>
void read(const json& s, const char* key, T& out) {
  if (!s.contains(key)) return;
  try {
    out = s.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

}  // namespace

void RunConfig::validate() const {
  squid.validate();
  pump.validate();
  chain.validate();
  env.validate();
  if (!(shot_noise.max_current_a > 0.0)) throw ConfigError("shot_noise.i_max_a must be > 0");
  if (shot_noise.points < 8) throw ConfigError("shot_noise.points must be >= 8");
  if (!(shot_noise.noise_frac >= 0.0)) throw ConfigError("shot_noise.noise_frac must be >= 0");
  for (double a : sweep_amplitudes_phi0) {
    if (!(a >= 0.0)) throw ConfigError("sweep amplitudes must be >= 0");
  }
  if (paths.out_dir.empty()) throw ConfigError("paths.out_dir must not be empty");
}

RunConfig default_run_config() {
  RunConfig c;
  c.squid = squid::default_squid_params();
  c.chain = chain::reference_chain();
  c.chain.seed = c.seed;
  return c;
}

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    static constexpr std::string_view known[] = {"schema_version", "seed", "squid", "pump", "chain",
                                                 "env", "shot_noise", "sweep", "paths"};
    if (std::find(std::begin(known), std::end(known), k) == std::end(known)) {
      throw ConfigError("unknown key '" + k + "'");
    }
  }
  std::string version = std::string(io::kSchemaVersion);
  read(j, "schema_version", version);
  io::require_schema(version);

  RunConfig c = default_run_config();
  read(j, "seed", c.seed);
  c.chain.seed = c.seed;

  const json& sq = section(j, "squid", {"i_c_a", "z0_ohm", "v_line_m_per_s", "r_n_ohm", "v_gap_v", "density_scale"});
  read(sq, "i_c_a", c.squid.critical_current_a);
  read(sq, "z0_ohm", c.squid.line_impedance_ohm);
  read(sq, "v_line_m_per_s", c.squid.line_velocity_m_per_s);
  read(sq, "r_n_ohm", c.squid.normal_resistance_ohm);
  read(sq, "v_gap_v", c.squid.gap_voltage_v);
  if (sq.contains("density_scale")) {
    read(sq, "density_scale", c.squid.density_scale);
  } else {
    c.squid.validate();
    c.squid.density_scale = squid::calibrate_density_scale(c.squid);
  }

  const json& pu = section(j, "pump", {"phi_dc_phi0", "phi_ac_phi0", "f_p_hz", "f_minus_hz", "f_plus_hz"});
  read(pu, "phi_dc_phi0", c.pump.phi_dc);
  read(pu, "phi_ac_phi0", c.pump.phi_ac);
  read(pu, "f_p_hz", c.pump.f_pump_hz);
  read(pu, "f_minus_hz", c.pump.f_minus_hz);
  read(pu, "f_plus_hz", c.pump.f_plus_hz);

  const json& ch = section(j, "chain", {"eta_minus", "eta_plus", "t_n_minus_k", "t_n_plus_k", "g_start_minus",
                                        "g_start_plus", "g_end_minus", "g_end_plus", "bw_hz", "cycles",
                                        "samples_per_cycle"});
  read(ch, "eta_minus", c.chain.eta_minus);
  read(ch, "eta_plus", c.chain.eta_plus);
  read(ch, "t_n_minus_k", c.chain.noise_temperature_minus_k);
  read(ch, "t_n_plus_k", c.chain.noise_temperature_plus_k);
  read(ch, "g_start_minus", c.chain.gain_start_minus);
  read(ch, "g_start_plus", c.chain.gain_start_plus);
  read(ch, "g_end_minus", c.chain.gain_end_minus);
  read(ch, "g_end_plus", c.chain.gain_end_plus);
  read(ch, "bw_hz", c.chain.bandwidth_hz);
  read(ch, "cycles", c.chain.cycles);
  read(ch, "samples_per_cycle", c.chain.samples_per_cycle);

  const json& en = section(j, "env", {"t_k", "r_ohm", "z0_ohm"});
  read(en, "t_k", c.env.temperature_k);
  read(en, "r_ohm", c.env.resistance_ohm);
  read(en, "z0_ohm", c.env.line_impedance_ohm);
  c.env.frequency_hz = c.pump.f_minus_hz;

  const json& sn = section(j, "shot_noise", {"i_max_a", "points", "noise_frac"});
  read(sn, "i_max_a", c.shot_noise.max_current_a);
  read(sn, "points", c.shot_noise.points);
  read(sn, "noise_frac", c.shot_noise.noise_frac);

  const json& sw = section(j, "sweep", {"phi_ac_phi0"});
  read(sw, "phi_ac_phi0", c.sweep_amplitudes_phi0);

  const json& pa = section(j, "paths", {"out_dir"});
  std::string out_dir = c.paths.out_dir.string();
  read(pa, "out_dir", out_dir);
  c.paths.out_dir = out_dir;

  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse '" + path.string() + "': " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  return json{
      {"schema_version", io::kSchemaVersion},
      {"seed", c.seed},
      {"squid",
       {{"i_c_a", c.squid.critical_current_a},
        {"z0_ohm", c.squid.line_impedance_ohm},
        {"v_line_m_per_s", c.squid.line_velocity_m_per_s},
        {"r_n_ohm", c.squid.normal_resistance_ohm},
        {"v_gap_v", c.squid.gap_voltage_v},
        {"density_scale", c.squid.density_scale}}},
      {"pump",
       {{"phi_dc_phi0", c.pump.phi_dc},
        {"phi_ac_phi0", c.pump.phi_ac},
        {"f_p_hz", c.pump.f_pump_hz},
        {"f_minus_hz", c.pump.f_minus_hz},
        {"f_plus_hz", c.pump.f_plus_hz}}},
      {"chain",
       {{"eta_minus", c.chain.eta_minus},
        {"eta_plus", c.chain.eta_plus},
        {"t_n_minus_k", c.chain.noise_temperature_minus_k},
        {"t_n_plus_k", c.chain.noise_temperature_plus_k},
        {"g_start_minus", c.chain.gain_start_minus},
        {"g_start_plus", c.chain.gain_start_plus},
        {"g_end_minus", c.chain.gain_end_minus},
        {"g_end_plus", c.chain.gain_end_plus},
        {"bw_hz", c.chain.bandwidth_hz},
        {"cycles", c.chain.cycles},
        {"samples_per_cycle", c.chain.samples_per_cycle}}},
      {"env", {{"t_k", c.env.temperature_k}, {"r_ohm", c.env.resistance_ohm}, {"z0_ohm", c.env.line_impedance_ohm}}},
      {"shot_noise",
       {{"i_max_a", c.shot_noise.max_current_a},
        {"points", c.shot_noise.points},
        {"noise_frac", c.shot_noise.noise_frac}}},
      {"sweep", {{"phi_ac_phi0", c.sweep_amplitudes_phi0}}},
      {"paths", {{"out_dir", c.paths.out_dir.string()}}}};
}

}  // namespace dce::config
