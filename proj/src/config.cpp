#include "ptrack/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "ptrack/error.hpp"
#include "ptrack/io.hpp"

namespace ptrack {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw Error(Errc::Config, "key '" + key + "': expected " + expected + ", got '" + value + "'");
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, "a number");
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

using Setter = std::function<void(const std::string& key, const std::string& value)>;

void apply_settings(const std::vector<std::pair<std::string, std::string>>& kv,
           const std::map<std::string, Setter>& setters) {
  for (const auto& [k, v] : kv) {
    const auto it = setters.find(k);
    if (it == setters.end()) throw Error(Errc::Config, "unknown config key '" + k + "'");
    it->second(k, v);
  }
}

std::map<std::string, Setter> toolkit_setters(ToolkitConfig& c) {
  auto dbl = [](double& field) { return Setter([&field](const auto& k, const auto& v) { field = to_double(k, v); }); };
  auto integer = [](int& field) { return Setter([&field](const auto& k, const auto& v) { field = to_int<int>(k, v); }); };
  auto flag = [](bool& field) { return Setter([&field](const auto& k, const auto& v) { field = to_bool(k, v); }); };
  TrackerConfig& t = c.tracker;
  return {
      {"min_hits", integer(t.lifecycle.min_hits)},
      {"max_age", integer(t.lifecycle.max_age)},
      {"cls_lead", integer(t.lifecycle.cls_lead)},
      {"cls_confirm_threshold", dbl(t.lifecycle.cls_confirm_threshold)},
      {"tentative_miss_tolerance", integer(t.lifecycle.tentative_miss_tolerance)},
      {"pending_fail_patience", integer(t.lifecycle.pending_fail_patience)},
      {"base_radius_px", Setter([&c](const auto& k, const auto& v) {
         c.tracker.gating.base_radius = to_double(k, v);
         c.gog.gating.base_radius = c.tracker.gating.base_radius;
       })},
      {"reference_altitude_m", Setter([&c](const auto& k, const auto& v) {
         c.tracker.gating.reference_altitude = to_double(k, v);
         c.gog.gating.reference_altitude = c.tracker.gating.reference_altitude;
       })},
      {"process_noise_pos", dbl(t.motion.process_noise_pos)},
      {"process_noise_vel", dbl(t.motion.process_noise_vel)},
      {"measurement_noise", dbl(t.motion.measurement_noise)},
      {"initial_pos_var", dbl(t.motion.initial_pos_var)},
      {"initial_vel_var", dbl(t.motion.initial_vel_var)},
      {"dcf_patch_cells", Setter([&t](const auto& k, const auto& v) {
         t.dcf.patch_cells = to_int<std::size_t>(k, v);
       })},
      {"dcf_lambda", dbl(t.dcf.lambda)},
      {"dcf_learning_rate", dbl(t.dcf.learning_rate)},
      {"dcf_label_sigma", dbl(t.dcf.label_sigma)},
      {"dcf_psr_min", dbl(t.dcf.psr_min)},
      {"dcf_init_on_miss", flag(t.dcf.init_on_miss)},
      {"ransac_iters", integer(t.ransac.iterations)},
      {"ransac_inlier_px", dbl(t.ransac.inlier_threshold)},
      {"ransac_min_inliers", integer(t.ransac.min_inliers)},
      {"ransac_seed", Setter([&t](const auto& k, const auto& v) { t.ransac.seed = to_int<std::uint64_t>(k, v); })},
      {"gog_entry_cost", dbl(c.gog.entry_cost)},
      {"gog_exit_cost", dbl(c.gog.exit_cost)},
      {"gog_gap_penalty", dbl(c.gog.gap_penalty)},
      {"gog_max_gap", integer(c.gog.max_gap)},
      {"idsw_gate_px", dbl(c.idsw_gate_px)},
      {"emit_coasted", flag(t.emit_coasted)},
      {"validator", Setter([&c](const auto& k, const std::string& v) {
         if (v == "auto") c.validator = ValidatorKind::Auto;
         else if (v == "none") c.validator = ValidatorKind::None;
         else if (v == "score") c.validator = ValidatorKind::Score;
         else if (v == "feature") c.validator = ValidatorKind::Feature;
         else bad_value(k, v, "auto, none, score or feature");
       })},
      {"energy_offset", dbl(c.energy.offset)},
      {"energy_scale", dbl(c.energy.scale)},
      {"energy_radius_cells", integer(c.energy.radius_cells)},
  };
}

const char* validator_name(ValidatorKind k) {
  switch (k) {
    case ValidatorKind::Auto: return "auto";
    case ValidatorKind::None: return "none";
    case ValidatorKind::Score: return "score";
    case ValidatorKind::Feature: return "feature";
  }
  return "auto";
}

const char* shape_name(AltitudeShape s) {
  switch (s) {
    case AltitudeShape::Constant: return "constant";
    case AltitudeShape::Linear: return "linear";
    case AltitudeShape::Sine: return "sine";
  }
  return "constant";
}

std::vector<OcclusionWindow> parse_occlusions(const std::string& key, const std::string& v) {
  std::vector<OcclusionWindow> out;
  std::string_view rest = v;
  while (!rest.empty()) {
    const auto semi = rest.find(';');
    const std::string item(trim(rest.substr(0, semi)));
    rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
    if (item.empty()) continue;
    const auto c1 = item.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : item.find(':', c1 + 1);
    if (c2 == std::string::npos) bad_value(key, item, "agent:start:end");
    out.push_back({to_int<std::size_t>(key, item.substr(0, c1)),
                   to_int<std::int64_t>(key, item.substr(c1 + 1, c2 - c1 - 1)),
                   to_int<std::int64_t>(key, item.substr(c2 + 1))});
  }
  return out;
}

}  // namespace

void ToolkitConfig::validate() const {
  tracker.validate();
  gog.validate();
  energy.validate();
  if (!(idsw_gate_px > 0.0)) throw Error(Errc::Config, "idsw_gate_px must be > 0");
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (!seen.insert(key).second) throw ParseError(line_no, "duplicate key '" + key + "'");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

ToolkitConfig parse_toolkit_config(std::string_view text) {
  ToolkitConfig c;
  apply_settings(parse_key_values(text), toolkit_setters(c));
  c.validate();
  return c;
}

ToolkitConfig load_toolkit_config(const std::filesystem::path& path) {
  try {
    return parse_toolkit_config(read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string toolkit_config_to_text(const ToolkitConfig& c) {
  const TrackerConfig& t = c.tracker;
  std::string s;
  auto put = [&s](const char* k, const std::string& v) { s += std::string(k) + " = " + v + '\n'; };
  auto num = [](double v) { return format_number(v); };
  put("min_hits", std::to_string(t.lifecycle.min_hits));
  put("max_age", std::to_string(t.lifecycle.max_age));
  put("cls_lead", std::to_string(t.lifecycle.cls_lead));
  put("cls_confirm_threshold", num(t.lifecycle.cls_confirm_threshold));
  put("tentative_miss_tolerance", std::to_string(t.lifecycle.tentative_miss_tolerance));
  put("pending_fail_patience", std::to_string(t.lifecycle.pending_fail_patience));
  put("base_radius_px", num(t.gating.base_radius));
  put("reference_altitude_m", num(t.gating.reference_altitude));
  put("process_noise_pos", num(t.motion.process_noise_pos));
  put("process_noise_vel", num(t.motion.process_noise_vel));
  put("measurement_noise", num(t.motion.measurement_noise));
  put("initial_pos_var", num(t.motion.initial_pos_var));
  put("initial_vel_var", num(t.motion.initial_vel_var));
  put("dcf_patch_cells", std::to_string(t.dcf.patch_cells));
  put("dcf_lambda", num(t.dcf.lambda));
  put("dcf_learning_rate", num(t.dcf.learning_rate));
  put("dcf_label_sigma", num(t.dcf.label_sigma));
  put("dcf_psr_min", num(t.dcf.psr_min));
  put("dcf_init_on_miss", t.dcf.init_on_miss ? "true" : "false");
  put("ransac_iters", std::to_string(t.ransac.iterations));
  put("ransac_inlier_px", num(t.ransac.inlier_threshold));
  put("ransac_min_inliers", std::to_string(t.ransac.min_inliers));
  put("ransac_seed", std::to_string(t.ransac.seed));
  put("gog_entry_cost", num(c.gog.entry_cost));
  put("gog_exit_cost", num(c.gog.exit_cost));
  put("gog_gap_penalty", num(c.gog.gap_penalty));
  put("gog_max_gap", std::to_string(c.gog.max_gap));
  put("idsw_gate_px", num(c.idsw_gate_px));
  put("emit_coasted", t.emit_coasted ? "true" : "false");
  put("validator", validator_name(c.validator));
  put("energy_offset", num(c.energy.offset));
  put("energy_scale", num(c.energy.scale));
  put("energy_radius_cells", std::to_string(c.energy.radius_cells));
  return s;
}

ScenarioConfig parse_scenario_config(std::string_view text) {
  ScenarioConfig c;
  auto dbl = [](double& field) { return Setter([&field](const auto& k, const auto& v) { field = to_double(k, v); }); };
  auto count = [](std::size_t& field) {
    return Setter([&field](const auto& k, const auto& v) { field = to_int<std::size_t>(k, v); });
  };
  const std::map<std::string, Setter> setters = {
      {"n_agents", count(c.n_agents)},
      {"frames", count(c.frames)},
      {"arena_width", dbl(c.arena_width)},
      {"arena_height", dbl(c.arena_height)},
      {"agent_speed_sigma", dbl(c.agent_speed_sigma)},
      {"altitude_start", dbl(c.altitude_start)},
      {"altitude_end", dbl(c.altitude_end)},
      {"altitude_shape", Setter([&c](const auto& k, const std::string& v) {
         if (v == "constant") c.altitude_shape = AltitudeShape::Constant;
         else if (v == "linear") c.altitude_shape = AltitudeShape::Linear;
         else if (v == "sine") c.altitude_shape = AltitudeShape::Sine;
         else bad_value(k, v, "constant, linear or sine");
       })},
      {"camera_rotation_deg", dbl(c.camera_rotation_deg)},
      {"camera_tx", dbl(c.camera_tx)},
      {"camera_ty", dbl(c.camera_ty)},
      {"fn_rate", dbl(c.fn_rate)},
      {"fp_clutter_rate", dbl(c.fp_clutter_rate)},
      {"persistent_fp_count", count(c.persistent_fp_count)},
      {"jitter_sigma", dbl(c.jitter_sigma)},
      {"occlusion_windows", Setter([&c](const auto& k, const auto& v) { c.occlusion_windows = parse_occlusions(k, v); })},
      {"feature_channels", count(c.feature_channels)},
      {"feature_stride", dbl(c.feature_stride)},
      {"write_features", Setter([&c](const auto& k, const auto& v) { c.write_features = to_bool(k, v); })},
      {"background_points", count(c.background_points)},
      {"correspondence_noise", dbl(c.correspondence_noise)},
      {"seed", Setter([&c](const auto& k, const auto& v) { c.seed = to_int<std::uint64_t>(k, v); })},
  };
  apply_settings(parse_key_values(text), setters);
  c.validate();
  return c;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  try {
    return parse_scenario_config(read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string scenario_to_text(const ScenarioConfig& c) {
  std::string s;
  auto put = [&s](const char* k, const std::string& v) { s += std::string(k) + " = " + v + '\n'; };
  auto num = [](double v) { return format_number(v); };
  put("n_agents", std::to_string(c.n_agents));
  put("frames", std::to_string(c.frames));
  put("arena_width", num(c.arena_width));
  put("arena_height", num(c.arena_height));
  put("agent_speed_sigma", num(c.agent_speed_sigma));
  put("altitude_start", num(c.altitude_start));
  put("altitude_end", num(c.altitude_end));
  put("altitude_shape", shape_name(c.altitude_shape));
  put("camera_rotation_deg", num(c.camera_rotation_deg));
  put("camera_tx", num(c.camera_tx));
  put("camera_ty", num(c.camera_ty));
  put("fn_rate", num(c.fn_rate));
  put("fp_clutter_rate", num(c.fp_clutter_rate));
  put("persistent_fp_count", std::to_string(c.persistent_fp_count));
  put("jitter_sigma", num(c.jitter_sigma));
  std::string occ;
  for (const OcclusionWindow& w : c.occlusion_windows) {
    if (!occ.empty()) occ += ';';
    occ += std::to_string(w.agent) + ':' + std::to_string(w.start) + ':' + std::to_string(w.end);
  }
  put("occlusion_windows", occ);
  put("feature_channels", std::to_string(c.feature_channels));
  put("feature_stride", num(c.feature_stride));
  put("write_features", c.write_features ? "true" : "false");
  put("background_points", std::to_string(c.background_points));
  put("correspondence_noise", num(c.correspondence_noise));
  put("seed", std::to_string(c.seed));
  return s;
}

}  // namespace ptrack
