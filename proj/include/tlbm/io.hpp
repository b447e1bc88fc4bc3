#pragma once

// JSON and CSV formats shared by the library and the command-line tool.

#include "tlbm/equilibrium.hpp"
#include "tlbm/riemann.hpp"
#include "tlbm/simulator.hpp"
#include "tlbm/velocity_model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace tlbm {

using Json = nlohmann::ordered_json;

/// 17 significant digits, enough for an exact round trip of a double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// FNV-1a 64-bit digest, printed as 16 hex digits.
inline std::string fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- model documents ---------------------------------------------------------

inline Json model_to_json(const VelocityModel& m) {
  Json j;
  j["q"] = m.q();
  j["p"] = m.ratios.lattice_speeds();
  j["v2"] = m.v2;
  j["weights_normalized"] = m.normalized_weights;
  j["residual"] = m.residual;
  j["all_positive"] = m.all_positive;
  Json ghosts = Json::array();
  for (bool g : m.ghosts) {
    ghosts.push_back(g);
  }
  j["ghosts"] = ghosts;
  if (m.exact_v2_squared) {
    j["v2_squared_exact"] = to_string(*m.exact_v2_squared);
    Json w = Json::array();
    for (const auto& x : m.exact_normalized_weights) {
      w.push_back(to_string(x));
    }
    j["weights_normalized_exact"] = w;
  }
  return j;
}

inline VelocityModel model_from_json(const Json& j) {
  if (!j.contains("q") || !j.contains("p") || !j.contains("v2") || !j.contains("weights_normalized")) {
    throw InvalidArgument("model document needs q, p, v2 and weights_normalized");
  }
  VelocityModel m;
  m.ratios = RatioTuple::from_lattice_speeds(j.at("q").get<int>(), j.at("p").get<std::vector<long long>>());
  m.v2 = j.at("v2").get<double>();
  m.normalized_weights = j.at("weights_normalized").get<std::vector<double>>();
  if (m.normalized_weights.size() != m.ratios.pairs() + 1) {
    throw InvalidArgument("model document: weights_normalized must list one weight per non-negative velocity");
  }
  if (!(m.v2 > 0.0)) {
    throw InvalidArgument("model document: v2 must be positive");
  }
  m.residual = j.value("residual", 0.0);
  m.all_positive = j.value("all_positive", true);
  if (j.contains("ghosts")) {
    m.ghosts = j.at("ghosts").get<std::vector<bool>>();
  } else {
    m.ghosts.assign(m.normalized_weights.size(), false);
  }
  return m;
}

// --- expansion and shock-tube configuration ------------------------------------

inline Json expansion_to_json(const ExpansionSpec& s) {
  return Json{{"kind", to_string(s.kind)}, {"order", s.order}, {"theta0", to_string(s.theta0)}};
}

inline ExpansionSpec expansion_from_json(const Json& j) {
  ExpansionSpec s;
  s.kind = parse_expansion_kind(j.at("kind").get<std::string>());
  s.order = j.at("order").get<int>();
  if (j.contains("theta0")) {
    s.theta0 = j.at("theta0").is_string() ? Rational(j.at("theta0").get<std::string>())
                                          : rational_from_double(j.at("theta0").get<double>());
  }
  return s;
}

/// Parses "TE5", "HE3", ... into a spec about theta0 = 1.
inline ExpansionSpec parse_expansion_label(const std::string& label) {
  if (label.size() < 3) {
    throw InvalidArgument("expansion label '" + label + "' must look like TE5 or HE3");
  }
  ExpansionSpec s;
  s.kind = parse_expansion_kind(label.substr(0, 2));
  try {
    std::size_t used = 0;
    s.order = std::stoi(label.substr(2), &used);
    if (used != label.size() - 2) {
      throw InvalidArgument("");
    }
  } catch (const std::exception&) {
    throw InvalidArgument("expansion label '" + label + "' must look like TE5 or HE3");
  }
  s.validate();
  return s;
}

inline std::string expansion_label(const ExpansionSpec& s) { return to_string(s.kind) + std::to_string(s.order); }

inline std::string to_string(HighSide s) { return s == HighSide::Left ? "left" : "right"; }

inline HighSide parse_high_side(const std::string& s) {
  if (s == "left") {
    return HighSide::Left;
  }
  if (s == "right") {
    return HighSide::Right;
  }
  throw InvalidArgument("high side must be 'left' or 'right', got '" + s + "'");
}

/// Shock-tube settings (without the model, which is serialized separately).
inline Json config_to_json(const ShockTubeConfig& c) {
  return Json{{"expansion", expansion_to_json(c.expansion)},
              {"nodes", c.nodes},
              {"interface", c.interface},
              {"rho_bar", c.high_density},
              {"high_side", to_string(c.high_side)},
              {"tau", c.tau},
              {"steps", c.steps},
              {"snapshot_interval", c.snapshot_interval}};
}

/// Applies every field present in j to c; absent fields keep their value.
inline void apply_config_json(const Json& j, ShockTubeConfig& c) {
  if (j.contains("expansion")) {
    const auto& e = j.at("expansion");
    c.expansion = e.is_string() ? parse_expansion_label(e.get<std::string>()) : expansion_from_json(e);
  }
  if (j.contains("nodes")) c.nodes = j.at("nodes").get<int>();
  if (j.contains("interface")) c.interface = j.at("interface").get<int>();
  if (j.contains("rho_bar")) c.high_density = j.at("rho_bar").get<double>();
  if (j.contains("high_side")) c.high_side = parse_high_side(j.at("high_side").get<std::string>());
  if (j.contains("tau")) c.tau = j.at("tau").get<double>();
  if (j.contains("steps")) c.steps = j.at("steps").get<int>();
  if (j.contains("snapshot_interval")) c.snapshot_interval = j.at("snapshot_interval").get<int>();
  if (j.contains("workers")) c.workers = j.at("workers").get<int>();
}

inline Json verdict_to_json(const StabilityVerdict& v) {
  Json j{{"stable", v.stable}, {"fluctuation", v.fluctuation}};
  if (!v.stable) {
    j["failure_step"] = v.failure_step;
    j["failure_mode"] = to_string(v.failure_mode);
    j["failure_node"] = v.failure_node;
  }
  return j;
}

inline Json plateau_to_json(const PlateauReport& r) {
  auto value = [](const PlateauValue& v) { return Json{{"node", v.at_node}, {"median", v.median}, {"spread", v.spread}}; };
  return Json{{"x1", r.x1},
              {"x2", r.x2},
              {"window", r.window},
              {"rho1", value(r.rho1)},
              {"rho2", value(r.rho2)},
              {"p1", value(r.p1)},
              {"p2", value(r.p2)},
              {"theta1", value(r.theta1)},
              {"theta2", value(r.theta2)},
              {"u1", value(r.u1)},
              {"u2", value(r.u2)},
              {"flat", r.flat},
              {"warnings", r.warnings}};
}

inline Json riemann_to_json(const RiemannSolution& s) {
  return Json{{"gamma", s.gamma},
              {"p_star", s.reported_pressure_star()},
              {"gas_pressure_star", s.p_star},
              {"u_star", s.u_star},
              {"rho_star_left", s.rho_star_left},
              {"rho_star_right", s.rho_star_right},
              {"theta_star_left", s.star_left().theta},
              {"theta_star_right", s.star_right().theta},
              {"left_wave", to_string(s.left_wave)},
              {"right_wave", to_string(s.right_wave)},
              {"left_head", s.left_head},
              {"left_tail", s.left_tail},
              {"right_head", s.right_head},
              {"right_tail", s.right_tail},
              {"rankine_hugoniot_residual", rankine_hugoniot_residual(s)},
              {"rarefaction_residual", rarefaction_invariant_residual(s)}};
}

// --- profile CSV ---------------------------------------------------------------

inline constexpr std::string_view kProfileHeader = "X,rho,u,theta,p";

/// One row per node: X (1-based), rho, u, theta, p = rho theta.
inline std::string profile_csv(const Snapshot& s) {
  std::string out(kProfileHeader);
  out += '\n';
  for (std::size_t x = 0; x < s.size(); ++x) {
    out += std::to_string(x + 1);
    for (double v : {s.rho[x], s.u[x], s.theta[x], s.pressure(x)}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

inline Snapshot parse_profile_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kProfileHeader) {
    throw InvalidArgument("profile CSV must start with the header " + std::string(kProfileHeader));
  }
  Snapshot s;
  int expected = 1;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) {
      cells.push_back(std::stod(cell));
    }
    if (cells.size() != 5 || static_cast<int>(cells[0]) != expected) {
      throw InvalidArgument("malformed profile CSV row " + std::to_string(expected));
    }
    s.rho.push_back(cells[1]);
    s.u.push_back(cells[2]);
    s.theta.push_back(cells[3]);
    ++expected;
  }
  return s;
}

inline Snapshot read_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidArgument("cannot open profile CSV " + path);
  }
  return parse_profile_csv(in);
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidArgument("cannot open " + path);
  }
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("invalid JSON in " + path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InvalidArgument("cannot write " + path);
  }
  out << text;
}

}  // namespace tlbm
