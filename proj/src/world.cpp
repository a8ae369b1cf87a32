#include "hetsim/world.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace hetsim {

RewardPreset parse_preset(const std::string& name) {
  if (name == "R1") return RewardPreset::R1;
  if (name == "R2") return RewardPreset::R2;
  if (name == "R3") return RewardPreset::R3;
  if (name == "R4") return RewardPreset::R4;
  throw ConfigError("unknown reward preset '" + name + "' (expected R1..R4)");
}

std::string to_string(RewardPreset p) {
  switch (p) {
    case RewardPreset::R1: return "R1";
    case RewardPreset::R2: return "R2";
    case RewardPreset::R3: return "R3";
    case RewardPreset::R4: return "R4";
  }
  return "R4";
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("invalid config: ") + what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void WorldConfig::validate() const {
  require(n_h >= 0 && n_d >= 0, "agent counts must be non-negative");
  require(n_agents() >= 1, "at least one agent is required");
  require(n_t >= 0, "n_t must be non-negative");
  require(finite_positive(d), "d must be > 0");
  require(finite_positive(r_h) && finite_positive(r_d), "radii must be > 0");
  require(finite_positive(r_h_l) && finite_positive(r_d_l),
          "sensor ranges must be > 0");
  require(n_l >= 1, "n_l must be >= 1");
  require(finite_positive(rho_cov), "rho_cov must be > 0");
  require(std::isfinite(d_safe) && d_safe >= 0.0, "d_safe must be >= 0");
  require(finite_positive(r_c), "r_c must be > 0");
  require(d_c >= 1, "d_c must be >= 1");
  require(finite_positive(m_mass), "m_mass must be > 0");
  require(finite_positive(dt), "dt must be > 0");
  require(std::isfinite(c_d) && c_d >= 0.0, "c_d must be >= 0");
  require(finite_positive(u_max), "u_max must be > 0");
  require(finite_positive(v_max), "v_max must be > 0");
  require(u_max <= v_max, "u_max must not exceed v_max");
  require(max_steps >= 1, "max_steps must be >= 1");
  require(finite_positive(target_radius), "target_radius must be > 0");
}

namespace {

using Setter = std::function<void(WorldConfig&, const std::string&)>;

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') &&
      v.back() == v.front())
    return v.substr(1, v.size() - 2);
  return v;
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
#define HETSIM_INT(name) \
  t[#name] = [](WorldConfig& c, const std::string& v) { c.name = to_int(#name, v); }
#define HETSIM_DBL(name) \
  t[#name] = [](WorldConfig& c, const std::string& v) { c.name = to_double(#name, v); }
    HETSIM_INT(n_h);
    HETSIM_INT(n_d);
    HETSIM_INT(n_t);
    HETSIM_DBL(d);
    HETSIM_DBL(r_h);
    HETSIM_DBL(r_d);
    HETSIM_DBL(r_h_l);
    HETSIM_DBL(r_d_l);
    HETSIM_INT(n_l);
    HETSIM_DBL(rho_cov);
    HETSIM_DBL(d_safe);
    HETSIM_DBL(r_c);
    HETSIM_INT(d_c);
    HETSIM_DBL(m_mass);
    HETSIM_DBL(dt);
    HETSIM_DBL(c_d);
    HETSIM_DBL(u_max);
    HETSIM_DBL(v_max);
    HETSIM_INT(max_steps);
    HETSIM_DBL(target_radius);
    HETSIM_DBL(w_dist);
    HETSIM_DBL(w_goal);
    HETSIM_DBL(w_coll);
    HETSIM_DBL(w_comm);
    HETSIM_DBL(r_goal);
    HETSIM_DBL(r_coll);
#undef HETSIM_INT
#undef HETSIM_DBL
    t["preset"] = [](WorldConfig& c, const std::string& v) {
      c.preset = parse_preset(unquote(v));
    };
    t["distance_sign"] = [](WorldConfig& c, const std::string& v) {
      const std::string s = unquote(v);
      if (s == "intent") {
        c.distance_sign = DistanceSign::Intent;
      } else if (s == "literal") {
        c.distance_sign = DistanceSign::Literal;
      } else {
        throw ConfigError("key 'distance_sign': expected intent|literal, got '" +
                          s + "'");
      }
    };
    t["fallback"] = [](WorldConfig& c, const std::string& v) {
      const std::string s = unquote(v);
      if (s == "brake") {
        c.fallback = FallbackMode::Brake;
      } else if (s == "drift") {
        c.fallback = FallbackMode::Drift;
      } else {
        throw ConfigError("key 'fallback': expected brake|drift, got '" + s + "'");
      }
    };
    t["safety_filter"] = [](WorldConfig& c, const std::string& v) {
      c.safety_filter = to_bool("safety_filter", v);
    };
    return t;
  }();
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

WorldConfig parse_config(const std::string& text) {
  WorldConfig config;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments that are not inside a quoted string.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(config, value);
  }
  config.validate();
  return config;
}

WorldConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace {

// Shortest text that parses back to the same double.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_config(const WorldConfig& c) {
  std::ostringstream out;
  out << "n_h = " << c.n_h << "\nn_d = " << c.n_d << "\nn_t = " << c.n_t
      << "\nd = " << num(c.d) << "\nr_h = " << num(c.r_h) << "\nr_d = " << num(c.r_d)
      << "\nr_h_l = " << num(c.r_h_l) << "\nr_d_l = " << num(c.r_d_l) << "\nn_l = " << c.n_l
      << "\nrho_cov = " << num(c.rho_cov) << "\nd_safe = " << num(c.d_safe)
      << "\nr_c = " << num(c.r_c) << "\nd_c = " << c.d_c << "\nm_mass = " << num(c.m_mass)
      << "\ndt = " << num(c.dt) << "\nc_d = " << num(c.c_d) << "\nu_max = " << num(c.u_max)
      << "\nv_max = " << num(c.v_max) << "\nmax_steps = " << c.max_steps
      << "\ntarget_radius = " << num(c.target_radius) << "\nw_dist = " << num(c.w_dist)
      << "\nw_goal = " << num(c.w_goal) << "\nw_coll = " << num(c.w_coll)
      << "\nw_comm = " << num(c.w_comm) << "\nr_goal = " << num(c.r_goal)
      << "\nr_coll = " << num(c.r_coll) << "\npreset = \"" << to_string(c.preset)
      << "\"\ndistance_sign = \""
      << (c.distance_sign == DistanceSign::Intent ? "intent" : "literal")
      << "\"\nsafety_filter = " << (c.safety_filter ? "true" : "false")
      << "\nfallback = \"" << (c.fallback == FallbackMode::Brake ? "brake" : "drift") << "\"\n";
  return out.str();
}

Vec2 AgentState::world_velocity() const {
  if (kind == AgentKind::Holonomic) return vel;
  return unit_from_angle(heading) * speed;
}

double body_radius(AgentKind kind, const WorldConfig& config) {
  return kind == AgentKind::Holonomic ? config.r_h : config.r_d;
}

double sensor_range(AgentKind kind, const WorldConfig& config) {
  return kind == AgentKind::Holonomic ? config.r_h_l : config.r_d_l;
}

namespace {

constexpr int kMaxPlacementAttempts = 10000;

}  // namespace

EpisodeState init_episode(const WorldConfig& config, std::uint64_t seed) {
  config.validate();
  EpisodeState state;
  state.rng = Rng(seed);
  Rng& rng = state.rng;

  auto sample_point = [&] { return Vec2{rng.uniform(0.0, config.d), rng.uniform(0.0, config.d)}; };

  state.targets.reserve(config.n_t);
  for (int g = 0; g < config.n_t; ++g) {
    Target t;
    t.pos = sample_point();
    state.targets.push_back(t);
  }

  state.agents.reserve(config.n_agents());
  for (int i = 0; i < config.n_agents(); ++i) {
    const AgentKind kind = i < config.n_h ? AgentKind::Holonomic : AgentKind::DiffDrive;
    const double radius = body_radius(kind, config);
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const Vec2 p = sample_point();
      bool ok = true;
      for (const auto& other : state.agents) {
        if (distance(p, other.pos) < radius + body_radius(other.kind, config)) {
          ok = false;
          break;
        }
      }
      for (std::size_t g = 0; ok && g < state.targets.size(); ++g) {
        if (distance(p, state.targets[g].pos) <= config.rho_cov) ok = false;
      }
      if (!ok) continue;
      if (kind == AgentKind::Holonomic) {
        state.agents.push_back(AgentState::holonomic(p));
      } else {
        const double heading = wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
        state.agents.push_back(AgentState::diff_drive(p, heading));
      }
      placed = true;
    }
    if (!placed)
      throw ConfigError("could not place agent " + std::to_string(i) + " after " +
                        std::to_string(kMaxPlacementAttempts) +
                        " attempts; workspace too small for the team");
  }

  state.prev_messages.assign(config.n_agents(), std::vector<double>(config.d_c, 0.0));
  return state;
}

std::vector<CoverageEvent> check_coverage(EpisodeState& state, const WorldConfig& config) {
  std::vector<CoverageEvent> events;
  for (std::size_t g = 0; g < state.targets.size(); ++g) {
    Target& target = state.targets[g];
    if (target.covered) continue;
    double best = std::numeric_limits<double>::infinity();
    int best_agent = -1;
    for (std::size_t i = 0; i < state.agents.size(); ++i) {
      const double dist = distance(state.agents[i].pos, target.pos);
      if (dist < best) {
        best = dist;
        best_agent = static_cast<int>(i);
      }
    }
    if (best_agent >= 0 && best <= config.rho_cov) {
      target.covered = true;
      target.covered_at = state.step;
      target.covered_by = best_agent;
      events.push_back({static_cast<int>(g), best_agent, state.step});
    }
  }
  return events;
}

}  // namespace hetsim
