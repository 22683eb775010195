#include "bgvcf/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <toml.hpp>

namespace bgvcf {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected a table/object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw InputError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(where + "." + key + ": " + e.what());
  }
}

template <class T>
void read_optional(const json& j, const char* key, std::optional<T>& out, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T value{};
  read(j, key, value, where);
  out = value;
}

}  // namespace

std::vector<sim::TargetSpec> PipelineConfig::default_targets(double noise_variance, double snr_db) {
  return {sim::TargetSpec::from_snr({30, 31, 32}, 0.25, 0.0, snr_db, noise_variance),
          sim::TargetSpec::from_snr({39, 40, 41}, -0.1, 0.0, snr_db, noise_variance)};
}

double PipelineConfig::resolved_look_doppler() const {
  if (look_doppler) return *look_doppler;
  return targets.empty() ? 0.25 : targets.front().normalized_doppler;
}

double PipelineConfig::resolved_look_spatial() const {
  if (look_spatial) return *look_spatial;
  return targets.empty() ? 0.0 : targets.front().normalized_spatial;
}

int PipelineConfig::resolved_subspace_dim() const {
  if (optimizer.subspace_dim > 0) return optimizer.subspace_dim;
  return grassmann::brennan_rank(scenario.num_elements, scenario.num_pulses, scenario.beta());
}

void PipelineConfig::validate() const {
  scenario.validate();
  for (const auto& t : targets) t.validate();
  if (window.num_training < 1) throw InputError("window.num_training must be >= 1");
  if (window.num_guard < 0) throw InputError("window.num_guard must be >= 0");
  if (window.sweep_first.has_value() != window.sweep_last.has_value()) {
    throw InputError("window: sweep_first and sweep_last go together");
  }
  if (window.sweep_first && *window.sweep_first > *window.sweep_last) {
    throw InputError("window: sweep_first > sweep_last");
  }
  if (window.training_first.has_value() != window.training_last.has_value()) {
    throw InputError("window: training_first and training_last go together");
  }
  if (window.training_first && *window.training_first > *window.training_last) {
    throw InputError("window: training_first > training_last");
  }
  if (!(burg.psi1 >= 0.0)) throw InputError("burg.psi1 must be >= 0");
  if (burg.order < -1 || burg.order > scenario.dimension() - 1) {
    throw InputError("burg.order must be -1 or in [0, MN-1]");
  }
  if (optimizer.subspace_dim > scenario.dimension()) {
    throw InputError("optimizer.subspace_dim exceeds the space-time dimension");
  }
  optimizer.validate(optimizer.weights.size());
  if (estimators.empty()) throw InputError("estimators: empty list");
  for (const auto& e : estimators) {
    if (std::find(kEstimatorLabels.begin(), kEstimatorLabels.end(), e) == kEstimatorLabels.end()) {
      throw InputError("estimators: unsupported label '" + e + "'");
    }
  }
  if (!(lsmi_loading > 0.0)) throw InputError("lsmi_loading must be positive");
  if (!(gip_keep > 0.0) || gip_keep > 1.0) throw InputError("gip_keep must lie in (0, 1]");
  if (grid_points < 2) throw InputError("grid_points must be >= 2");
}

json to_json(const sim::ScenarioConfig& s) {
  json j = {{"num_elements", s.num_elements},
            {"num_pulses", s.num_pulses},
            {"carrier_frequency", s.carrier_frequency},
            {"prf", s.prf},
            {"platform_velocity", s.platform_velocity},
            {"platform_height", s.platform_height},
            {"bandwidth", s.bandwidth},
            {"num_clutter_patches", s.num_clutter_patches},
            {"num_range_ambiguities", s.num_range_ambiguities},
            {"cnr_db", s.cnr_db},
            {"noise_variance", s.noise_variance},
            {"num_range_cells", s.num_range_cells},
            {"texture_db", s.texture_db},
            {"rng_seed", s.rng_seed}};
  if (s.element_spacing) j["element_spacing"] = *s.element_spacing;
  return j;
}

sim::ScenarioConfig scenario_from_json(const json& j) {
  const std::string where = "scenario";
  reject_unknown(j,
                 {"num_elements", "num_pulses", "carrier_frequency", "prf", "platform_velocity",
                  "platform_height", "bandwidth", "element_spacing", "num_clutter_patches",
                  "num_range_ambiguities", "cnr_db", "noise_variance", "num_range_cells",
                  "texture_db", "rng_seed"},
                 where);
  sim::ScenarioConfig s;
  read(j, "num_elements", s.num_elements, where);
  read(j, "num_pulses", s.num_pulses, where);
  read(j, "carrier_frequency", s.carrier_frequency, where);
  read(j, "prf", s.prf, where);
  read(j, "platform_velocity", s.platform_velocity, where);
  read(j, "platform_height", s.platform_height, where);
  read(j, "bandwidth", s.bandwidth, where);
  read_optional(j, "element_spacing", s.element_spacing, where);
  read(j, "num_clutter_patches", s.num_clutter_patches, where);
  read(j, "num_range_ambiguities", s.num_range_ambiguities, where);
  read(j, "cnr_db", s.cnr_db, where);
  read(j, "noise_variance", s.noise_variance, where);
  read(j, "num_range_cells", s.num_range_cells, where);
  read(j, "texture_db", s.texture_db, where);
  read(j, "rng_seed", s.rng_seed, where);
  return s;
}

json to_json(const sim::TargetSpec& t) {
  return {{"range_cells", t.range_cells},
          {"normalized_doppler", t.normalized_doppler},
          {"normalized_spatial", t.normalized_spatial},
          {"amplitude", {t.amplitude.real(), t.amplitude.imag()}}};
}

sim::TargetSpec target_from_json(const json& j, double noise_variance) {
  const std::string where = "targets[]";
  reject_unknown(j, {"range_cells", "normalized_doppler", "normalized_spatial", "amplitude", "snr_db"},
                 where);
  if (j.contains("amplitude") && j.contains("snr_db")) {
    throw InputError(where + ": give either amplitude or snr_db, not both");
  }
  sim::TargetSpec t;
  read(j, "range_cells", t.range_cells, where);
  read(j, "normalized_doppler", t.normalized_doppler, where);
  read(j, "normalized_spatial", t.normalized_spatial, where);
  if (j.contains("snr_db")) {
    double snr = 0.0;
    read(j, "snr_db", snr, where);
    t.amplitude = sim::TargetSpec::from_snr({}, 0.0, 0.0, snr, noise_variance).amplitude;
  } else if (j.contains("amplitude")) {
    std::vector<double> a;
    read(j, "amplitude", a, where);
    if (a.size() != 2) throw InputError(where + ".amplitude: expected [re, im]");
    t.amplitude = {a[0], a[1]};
  }
  return t;
}

PipelineConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"scenario", "targets", "window", "burg", "optimizer", "estimators", "lsmi_loading",
                  "gip_keep", "look", "grid_points", "input_scnr_db", "input", "output_dir"},
                 "config");
  PipelineConfig c;
  if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"));
  c.targets = PipelineConfig::default_targets(c.scenario.noise_variance, 10.0);
  if (j.contains("targets")) {
    c.targets.clear();
    if (!j.at("targets").is_array()) throw InputError("targets: expected an array");
    for (const auto& t : j.at("targets")) c.targets.push_back(target_from_json(t, c.scenario.noise_variance));
  }
  if (j.contains("window")) {
    const auto& w = j.at("window");
    reject_unknown(w, {"num_training", "num_guard", "cut_index", "sweep_first", "sweep_last", "training_first",
                    "training_last"},
                   "window");
    read(w, "num_training", c.window.num_training, "window");
    read(w, "num_guard", c.window.num_guard, "window");
    read(w, "cut_index", c.window.cut_index, "window");
    read_optional(w, "sweep_first", c.window.sweep_first, "window");
    read_optional(w, "sweep_last", c.window.sweep_last, "window");
    read_optional(w, "training_first", c.window.training_first, "window");
    read_optional(w, "training_last", c.window.training_last, "window");
  }
  if (j.contains("burg")) {
    const auto& b = j.at("burg");
    reject_unknown(b, {"psi1", "order"}, "burg");
    read(b, "psi1", c.burg.psi1, "burg");
    read(b, "order", c.burg.order, "burg");
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    reject_unknown(o,
                   {"step_size", "max_iterations", "tolerance", "weights", "subspace_dim", "max_halvings"},
                   "optimizer");
    read(o, "step_size", c.optimizer.step_size, "optimizer");
    read(o, "max_iterations", c.optimizer.max_iterations, "optimizer");
    read(o, "tolerance", c.optimizer.tolerance, "optimizer");
    read(o, "weights", c.optimizer.weights, "optimizer");
    read(o, "subspace_dim", c.optimizer.subspace_dim, "optimizer");
    read(o, "max_halvings", c.optimizer.max_halvings, "optimizer");
  }
  read(j, "estimators", c.estimators, "config");
  read(j, "lsmi_loading", c.lsmi_loading, "config");
  read(j, "gip_keep", c.gip_keep, "config");
  if (j.contains("look")) {
    const auto& l = j.at("look");
    reject_unknown(l, {"doppler", "spatial"}, "look");
    read_optional(l, "doppler", c.look_doppler, "look");
    read_optional(l, "spatial", c.look_spatial, "look");
  }
  read(j, "grid_points", c.grid_points, "config");
  read(j, "input_scnr_db", c.input_scnr_db, "config");
  if (j.contains("input") && !j.at("input").is_null()) {
    std::string p;
    read(j, "input", p, "config");
    c.input = p;
  }
  if (j.contains("output_dir")) {
    std::string p;
    read(j, "output_dir", p, "config");
    c.output_dir = p;
  }
  return c;
}

json to_json(const PipelineConfig& c) {
  json targets = json::array();
  for (const auto& t : c.targets) targets.push_back(to_json(t));
  json window = {{"num_training", c.window.num_training},
                 {"num_guard", c.window.num_guard},
                 {"cut_index", c.window.cut_index}};
  if (c.window.sweep_first) window["sweep_first"] = *c.window.sweep_first;
  if (c.window.sweep_last) window["sweep_last"] = *c.window.sweep_last;
  if (c.window.training_first) window["training_first"] = *c.window.training_first;
  if (c.window.training_last) window["training_last"] = *c.window.training_last;
  json look = json::object();
  if (c.look_doppler) look["doppler"] = *c.look_doppler;
  if (c.look_spatial) look["spatial"] = *c.look_spatial;
  json j = {{"scenario", to_json(c.scenario)},
            {"targets", targets},
            {"window", window},
            {"burg", {{"psi1", c.burg.psi1}, {"order", c.burg.order}}},
            {"optimizer",
             {{"step_size", c.optimizer.step_size},
              {"max_iterations", c.optimizer.max_iterations},
              {"tolerance", c.optimizer.tolerance},
              {"weights", c.optimizer.weights},
              {"subspace_dim", c.optimizer.subspace_dim},
              {"max_halvings", c.optimizer.max_halvings}}},
            {"estimators", c.estimators},
            {"lsmi_loading", c.lsmi_loading},
            {"gip_keep", c.gip_keep},
            {"look", look},
            {"grid_points", c.grid_points},
            {"input_scnr_db", c.input_scnr_db},
            {"output_dir", c.output_dir.string()}};
  if (c.input) j["input"] = c.input->string();
  return j;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  json j;
  const auto ext = path.extension().string();
  try {
    if (ext == ".toml") {
      const toml::table table = toml::parse(text.str(), path.string());
      std::stringstream as_json;
      as_json << toml::json_formatter{table};
      j = json::parse(as_json.str());
    } else {
      j = json::parse(text.str());
    }
  } catch (const toml::parse_error& e) {
    throw InputError("config " + path.string() + ": " + std::string(e.description()));
  } catch (const json::exception& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
  auto config = config_from_json(j);
  config.validate();
  return config;
}

std::string config_hash(const PipelineConfig& config) {
  json j = to_json(config);
  j.erase("output_dir");
  const std::string text = j.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("config_hash: SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace bgvcf
