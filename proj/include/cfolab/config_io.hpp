#pragma once

// JSON experiment files. A `preset` key expands to the reference system and
// every other key overrides it. Unknown keys are rejected.
//
//   {
//     "preset": "paper-fig2",
//     "system": {"n_subcarriers": 1024, "pilot_length": 64, "n_tx": 3, "n_rx": 2,
//                "cp_length": 80, "max_channel_length": 75,
//                "offsets": [3, 7, 14], "chu_root": 1},
//     "channel": {"delays": [0, 4], "powers_db": [0, -3]},
//     "estimators": ["simplified:7", "ml_grid", "simplified_rs:7"],
//     "snr_points_db": [0, 5, 10], "trials": 2000, "seed": 1,
//     "epsilon_mode": "uniform_random" | {"fixed": 2.3},
//     "noiseless": false, "iotas": [1, 2], "emcb_draws": 500,
//     "bench_repetitions": 100, "grid": {"coarse_step": 0.05, "fine_step": 1e-4},
//     "threads": 0
//   }

#include "cfolab/harness.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <string>

namespace cfolab {

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <typename T>
void read_field(const json& obj, const char* key, T& target, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

inline void apply_system(const json& j, SystemConfig& cfg) {
  reject_unknown(j,
                 {"n_subcarriers", "pilot_length", "n_tx", "n_rx", "cp_length", "max_channel_length", "offsets",
                  "chu_root"},
                 "system");
  read_field(j, "n_subcarriers", cfg.n_subcarriers, "system");
  read_field(j, "pilot_length", cfg.pilot_length, "system");
  read_field(j, "n_tx", cfg.n_tx, "system");
  read_field(j, "n_rx", cfg.n_rx, "system");
  read_field(j, "cp_length", cfg.cp_length, "system");
  read_field(j, "max_channel_length", cfg.max_channel_length, "system");
  read_field(j, "offsets", cfg.offsets, "system");
  read_field(j, "chu_root", cfg.chu_root, "system");
}

}  // namespace detail

/// Applies a parsed JSON document on top of `spec` (or the named preset).
inline ExperimentSpec spec_from_json(const nlohmann::json& j, ExperimentSpec spec = {}) {
  using detail::read_field;
  detail::reject_unknown(j,
                         {"preset", "system", "channel", "estimators", "snr_points_db", "trials", "seed",
                          "epsilon_mode", "noiseless", "iotas", "emcb_draws", "bench_repetitions", "grid", "threads"},
                         "config");
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) throw ConfigError("config.preset must be a string");
    spec = preset_spec(parse_preset(j["preset"].get<std::string>()));
  }
  if (j.contains("system")) detail::apply_system(j["system"], spec.config);
  if (j.contains("channel")) {
    detail::reject_unknown(j["channel"], {"delays", "powers_db"}, "channel");
    read_field(j["channel"], "delays", spec.profile.delays, "channel");
    read_field(j["channel"], "powers_db", spec.profile.powers_db, "channel");
  }
  if (j.contains("estimators")) {
    std::vector<std::string> ids;
    read_field(j, "estimators", ids, "config");
    spec.estimators.clear();
    for (const std::string& id : ids) spec.estimators.push_back(EstimatorId::parse(id));
  }
  read_field(j, "snr_points_db", spec.snr_points_db, "config");
  read_field(j, "trials", spec.trials, "config");
  read_field(j, "seed", spec.seed, "config");
  read_field(j, "noiseless", spec.noiseless, "config");
  read_field(j, "iotas", spec.iotas, "config");
  read_field(j, "emcb_draws", spec.emcb_draws, "config");
  read_field(j, "bench_repetitions", spec.bench_repetitions, "config");
  read_field(j, "threads", spec.threads, "config");
  if (j.contains("grid")) {
    detail::reject_unknown(j["grid"], {"coarse_step", "fine_step"}, "grid");
    read_field(j["grid"], "coarse_step", spec.grid.coarse_step, "grid");
    read_field(j["grid"], "fine_step", spec.grid.fine_step, "grid");
  }
  if (j.contains("epsilon_mode")) {
    const auto& m = j["epsilon_mode"];
    if (m.is_string() && m.get<std::string>() == "uniform_random") {
      spec.epsilon = {true, 0.0};
    } else if (m.is_object() && m.size() == 1 && m.contains("fixed") && m["fixed"].is_number()) {
      spec.epsilon = {false, m["fixed"].get<double>()};
    } else {
      throw ConfigError("config.epsilon_mode must be \"uniform_random\" or {\"fixed\": <number>}");
    }
  }
  return spec;
}

inline ExperimentSpec spec_from_text(const std::string& text, ExperimentSpec spec = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return spec_from_json(j, std::move(spec));
}

inline ExperimentSpec load_spec(const std::string& path, ExperimentSpec spec = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return spec_from_text(text, std::move(spec));
}

}  // namespace cfolab
