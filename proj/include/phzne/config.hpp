// Experiment configuration: a flat `key = value` file whose keys are the
// field names of ExperimentConfig. Lists are comma separated; `#` starts a
// comment.
#pragma once

#include "phzne/mitigation.hpp"
#include "phzne/sampling.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace phzne {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kDefaultRatio = 1.61;

struct ExperimentConfig {
  std::vector<double> m{-10.0};
  std::vector<double> epsilon_levels{0.18, 0.29};  // (eps1, eps2), or an eps1 grid when `ratio` is set
  std::optional<double> ratio;                      // t in eps2 = t eps1
  std::optional<double> shot_scale = kDefaultShotScale;  // coincidences per basis; empty = exact
  MitigationSchedule schedule{100, 100, kBasesPerIteration};
  std::uint32_t runs = 100;
  std::optional<std::uint64_t> master_seed;
  std::string output = "out";
  std::vector<std::uint64_t> budget_grid;   // deferred: N values; empty = n * {2, 4, ..., 40}
  std::vector<std::uint32_t> k0_grid;       // deferred: empty = 0..30
  std::uint32_t theta_points = 91;          // hom-scan grid over [0, 90] degrees
  unsigned threads = 0;                     // 0 = hardware concurrency
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_real(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw ConfigError(key + ": not a finite number: '" + s + "'");
  return v;
}

template <typename T>
T parse_unsigned(const std::string& key, const std::string& s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(key + ": not a non-negative integer: '" + s + "'");
  }
  return v;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& value, Parse parse) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) out.push_back(parse(key, item));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

}  // namespace detail

/// Applies one `key = value` assignment.
inline void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  const auto real = [](const std::string& k, const std::string& s) { return parse_real(k, s); };
  if (key == "m") {
    cfg.m = parse_list<double>(key, value, real);
  } else if (key == "epsilon_levels") {
    cfg.epsilon_levels = parse_list<double>(key, value, real);
  } else if (key == "ratio") {
    cfg.ratio = parse_real(key, value);
  } else if (key == "shot_scale") {
    if (value == "exact") cfg.shot_scale.reset();
    else cfg.shot_scale = parse_real(key, value);
  } else if (key == "schedule") {
    const auto v = parse_list<std::uint32_t>(key, value, parse_unsigned<std::uint32_t>);
    if (v.size() != 2) throw ConfigError("schedule: expected 'k0, k1'");
    cfg.schedule.k0 = v[0];
    cfg.schedule.k1 = v[1];
  } else if (key == "runs") {
    cfg.runs = parse_unsigned<std::uint32_t>(key, value);
  } else if (key == "master_seed") {
    cfg.master_seed = parse_unsigned<std::uint64_t>(key, value);
  } else if (key == "output") {
    cfg.output = value;
  } else if (key == "budget_grid") {
    cfg.budget_grid = parse_list<std::uint64_t>(key, value, parse_unsigned<std::uint64_t>);
  } else if (key == "k0_grid") {
    cfg.k0_grid = parse_list<std::uint32_t>(key, value, parse_unsigned<std::uint32_t>);
  } else if (key == "theta_points") {
    cfg.theta_points = parse_unsigned<std::uint32_t>(key, value);
  } else if (key == "threads") {
    cfg.threads = parse_unsigned<unsigned>(key, value);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

inline void parse_config(std::istream& in, ExperimentConfig& cfg, const std::string& origin = "config") {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  ExperimentConfig cfg;
  parse_config(in, cfg, path);
  return cfg;
}

/// (eps1, eps2) pair; eps2 absent means no mitigation is possible.
struct NoisePair {
  double eps1 = 0.0;
  std::optional<double> eps2;
};

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.m.empty()) throw ConfigError("m: at least one value required");
  if (cfg.runs < 1) throw ConfigError("runs must be >= 1");
  if (cfg.epsilon_levels.empty()) throw ConfigError("epsilon_levels: at least one value required");
  for (double e : cfg.epsilon_levels) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("epsilon_levels: values must lie in [0, 1]");
  }
  if (cfg.ratio && !(*cfg.ratio > 1.0)) throw ConfigError("ratio must be > 1");
  if (!cfg.ratio && cfg.epsilon_levels.size() > 2) {
    throw ConfigError("epsilon_levels: more than two values needs `ratio` (eps1 grid)");
  }
  if (!cfg.ratio && cfg.epsilon_levels.size() == 2 && !(cfg.epsilon_levels[1] > cfg.epsilon_levels[0])) {
    throw ConfigError("epsilon_levels: need eps1 < eps2");
  }
  if (cfg.shot_scale) ShotScale check(*cfg.shot_scale);
  validate(cfg.schedule);
  if (cfg.schedule.n != kBasesPerIteration) throw ConfigError("schedule: n must be 6");
}

/// Noise pairs described by the config: the explicit (eps1, eps2), or one
/// pair t-scaled per grid value. Throws when t * eps1 > 1.
inline std::vector<NoisePair> noise_pairs(const ExperimentConfig& cfg) {
  std::vector<NoisePair> out;
  if (cfg.ratio) {
    for (double e : cfg.epsilon_levels) {
      if (*cfg.ratio * e > 1.0) {
        throw ConfigError("ratio * eps1 = " + std::to_string(*cfg.ratio * e) + " exceeds 1 at eps1 = " +
                          std::to_string(e));
      }
      out.push_back({e, e > 0.0 ? std::optional<double>(*cfg.ratio * e) : std::nullopt});
    }
  } else {
    out.push_back({cfg.epsilon_levels[0], cfg.epsilon_levels.size() > 1
                                              ? std::optional<double>(cfg.epsilon_levels[1])
                                              : std::nullopt});
  }
  return out;
}

}  // namespace phzne
