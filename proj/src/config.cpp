#include "gridloc/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gridloc {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        " is not key=value: " + t);
    }
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

void RunConfig::apply(const std::string& key, const std::string& value) {
  try {
    if (key == "map") map_path = value;
    else if (key == "resolution") resolution = std::stod(value);
    else if (key == "threshold") threshold = std::stoi(value);
    else if (key == "channels") channels = std::stoi(value);
    else if (key == "method") method = value;
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "duration") duration_s = std::stod(value);
    else if (key == "out_dir") out_dir = value;
    else if (key == "sigma_x") sigma_x = std::stod(value);
    else if (key == "sigma_y") sigma_y = std::stod(value);
    else if (key == "sigma_theta") sigma_theta = std::stod(value);
    else if (key == "alpha_trans") alpha_trans = std::stod(value);
    else if (key == "alpha_rot") alpha_rot = std::stod(value);
    else if (key == "alpha_cross") alpha_cross = std::stod(value);
    else if (key == "sigma_hit") sigma_hit = std::stod(value);
    else if (key == "weight_floor") weight_floor = std::stod(value);
    else if (key == "beam_stride") beam_stride = std::stoi(value);
    else if (key == "sample_budget") sample_budget = std::stoi(value);
    else if (key == "dt") dt = std::stod(value);
    else if (key == "speed") speed = std::stod(value);
    else if (key == "scan_period") scan_period_s = std::stod(value);
    else if (key == "beam_count") beam_count = std::stoi(value);
    else if (key == "fov") fov = std::stod(value);
    else if (key == "max_range") max_range = std::stod(value);
    else if (key == "range_noise") range_noise = std::stod(value);
    else if (key == "frame_period") frame_period_s = std::stod(value);
    else if (key == "threads") threads = std::stoi(value);
    else throw ConfigError("unknown config key: " + key);
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad value for " + key + ": " + value);
  } catch (const std::out_of_range&) {
    throw ConfigError("value out of range for " + key + ": " + value);
  }
}

RunConfig RunConfig::from_map(const std::map<std::string, std::string>& kv) {
  RunConfig cfg;
  for (const auto& [k, v] : kv) cfg.apply(k, v);
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_map(parse_key_values(ss.str()));
}

std::string RunConfig::dump() const {
  std::map<std::string, std::string> kv;
  kv["map"] = map_path;
  kv["resolution"] = fmt(resolution);
  kv["threshold"] = std::to_string(threshold);
  kv["channels"] = std::to_string(channels);
  kv["method"] = method;
  kv["seed"] = std::to_string(seed);
  kv["duration"] = fmt(duration_s);
  kv["out_dir"] = out_dir;
  kv["sigma_x"] = fmt(sigma_x);
  kv["sigma_y"] = fmt(sigma_y);
  kv["sigma_theta"] = fmt(sigma_theta);
  kv["alpha_trans"] = fmt(alpha_trans);
  kv["alpha_rot"] = fmt(alpha_rot);
  kv["alpha_cross"] = fmt(alpha_cross);
  kv["sigma_hit"] = fmt(sigma_hit);
  kv["weight_floor"] = fmt(weight_floor);
  kv["beam_stride"] = std::to_string(beam_stride);
  kv["sample_budget"] = std::to_string(sample_budget);
  kv["dt"] = fmt(dt);
  kv["speed"] = fmt(speed);
  kv["scan_period"] = fmt(scan_period_s);
  kv["beam_count"] = std::to_string(beam_count);
  kv["fov"] = fmt(fov);
  kv["max_range"] = fmt(max_range);
  kv["range_noise"] = fmt(range_noise);
  kv["frame_period"] = fmt(frame_period_s);
  kv["threads"] = std::to_string(threads);
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

Method RunConfig::method_enum() const {
  if (method == "blind") return Method::kBlind;
  if (method == "sampled") return Method::kSampled;
  if (method == "pf") return Method::kParticleFilter;
  throw ConfigError("unknown method: " + method +
                    " (expected blind, sampled or pf)");
}

RunParams RunConfig::run_params() const {
  RunParams p;
  p.method = method_enum();
  p.seed = seed;
  p.duration_s = duration_s;
  p.dt = dt;
  p.speed = speed;
  p.scan_period_s = scan_period_s;
  p.beam_count = beam_count;
  p.fov = fov;
  p.max_range = max_range;
  p.range_noise = range_noise;
  p.odom_noise = OdometryNoiseModel{alpha_trans, alpha_rot, alpha_cross};
  p.localizer.channels = channels;
  p.localizer.motion_noise = MotionNoise{sigma_x, sigma_y, sigma_theta};
  p.localizer.likelihood = LikelihoodParams{sigma_hit, weight_floor, beam_stride};
  p.localizer.sample_budget = sample_budget;
  return p;
}

}  // namespace gridloc
