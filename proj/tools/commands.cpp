#include "commands.hpp"

#include "tlbm/catalog.hpp"
#include "tlbm/equilibrium.hpp"
#include "tlbm/io.hpp"
#include "tlbm/model_solver.hpp"
#include "tlbm/riemann.hpp"
#include "tlbm/simulator.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace tlbm::cli {
namespace {

/// Raised when an explicit expectation (--expect-stable, verify tolerance) fails.
class ExpectationFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

long long parse_integer(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("expected an integer, got '" + s + "'");
  }
  if (used != s.size()) {
    throw InvalidArgument("expected an integer, got '" + s + "'");
  }
  return v;
}

double parse_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("expected a number, got '" + s + "'");
  }
  if (used != s.size()) {
    throw InvalidArgument("expected a number, got '" + s + "'");
  }
  return v;
}

std::vector<long long> parse_integer_list(const std::string& s) {
  std::vector<long long> out;
  for (const auto& item : split_list(s)) {
    out.push_back(parse_integer(item));
  }
  return out;
}

std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    out.push_back(parse_real(item));
  }
  return out;
}

/// Exact rational from "3", "-0.25", "1/3" or "2.5e-2".
Rational parse_exact(const std::string& text) {
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    const Rational den(parse_integer(text.substr(slash + 1)));
    if (den == 0) {
      throw InvalidArgument("zero denominator in '" + text + "'");
    }
    return Rational(parse_integer(text.substr(0, slash))) / den;
  }
  std::string mantissa = text;
  long long exponent = 0;
  if (const auto e = text.find_first_of("eE"); e != std::string::npos) {
    mantissa = text.substr(0, e);
    exponent = parse_integer(text.substr(e + 1));
  }
  bool negative = false;
  if (!mantissa.empty() && (mantissa[0] == '-' || mantissa[0] == '+')) {
    negative = mantissa[0] == '-';
    mantissa.erase(0, 1);
  }
  std::string digits;
  long long fraction_digits = 0;
  bool seen_point = false;
  for (char c : mantissa) {
    if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      digits += c;
      if (seen_point) {
        ++fraction_digits;
      }
    } else {
      throw InvalidArgument("expected a decimal number, got '" + text + "'");
    }
  }
  if (digits.empty()) {
    throw InvalidArgument("expected a decimal number, got '" + text + "'");
  }
  Rational value{BigInt(digits)};
  const long long shift = exponent - fraction_digits;
  const Rational ten_pow = rational_pow(Rational(10), static_cast<unsigned>(shift < 0 ? -shift : shift));
  value = shift < 0 ? Rational(value / ten_pow) : Rational(value * ten_pow);
  return negative ? -value : value;
}

GasState parse_gas_state(const std::string& s) {
  const auto v = parse_real_list(s);
  if (v.size() != 3) {
    throw InvalidArgument("gas state must be rho,u,theta, got '" + s + "'");
  }
  return {v[0], v[1], v[2]};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// --- model selection -----------------------------------------------------------

struct ModelOptions {
  std::string catalog;
  std::string model_file;
  int q = 0;
  std::string ratios;
  std::string speeds;
  int branch = 0;
  double ghost_threshold = kDefaultGhostThreshold;

  void attach(CLI::App* app, bool allow_ghost_threshold = true) {
    app->add_option("--catalog", catalog, "Built-in model (q3, q5, q7, q11, q21)");
    app->add_option("--model-file", model_file, "Model JSON (a derive document or a single model)");
    app->add_option("--q", q, "Velocity count (odd, >= 3)");
    app->add_option("--ratios", ratios, "Integer ratios pbar_4,pbar_6,... relative to p_2 = 1");
    app->add_option("--speeds", speeds, "Integer lattice speeds p_2,p_4,... (alternative to --ratios)");
    app->add_option("--branch", branch, "Root index when several models exist (ascending v2)");
    if (allow_ghost_threshold) {
      app->add_option("--ghost-threshold", ghost_threshold, "Weight below which a velocity is a ghost");
    }
  }

  [[nodiscard]] bool given() const { return !catalog.empty() || !model_file.empty() || q != 0; }

  [[nodiscard]] RatioTuple tuple() const {
    if (!speeds.empty()) {
      return RatioTuple::from_lattice_speeds(q, parse_integer_list(speeds));
    }
    return RatioTuple::from_ratios(q, parse_integer_list(ratios));
  }

  [[nodiscard]] VelocityModel resolve() const {
    if (!catalog.empty()) {
      return resolve_catalog(catalog);
    }
    if (!model_file.empty()) {
      return load_model_file(model_file, branch);
    }
    if (q == 0) {
      throw InvalidArgument("select a model with --catalog, --model-file or --q/--ratios");
    }
    const auto models = solve_model(tuple(), ghost_threshold);
    if (models.empty()) {
      throw NumericalFailure("no positive real root for this ratio tuple");
    }
    if (branch < 0 || static_cast<std::size_t>(branch) >= models.size()) {
      throw InvalidArgument("branch " + std::to_string(branch) + " out of range (" + std::to_string(models.size()) +
                            " models)");
    }
    return models[static_cast<std::size_t>(branch)];
  }

  [[nodiscard]] VelocityModel resolve_catalog(const std::string& name) const {
    return tlbm::resolve(find_catalog_entry(name), ghost_threshold);
  }

  static VelocityModel load_model_file(const std::string& path, int branch) {
    if (!std::filesystem::exists(path)) {
      throw InvalidArgument("model file not found: " + path);
    }
    Json j = read_json_file(path);
    if (j.contains("models")) {
      j = j.at("models");
    }
    if (j.is_array()) {
      if (branch < 0 || static_cast<std::size_t>(branch) >= j.size()) {
        throw InvalidArgument("branch " + std::to_string(branch) + " out of range in " + path);
      }
      return model_from_json(j.at(static_cast<std::size_t>(branch)));
    }
    if (j.contains("model")) {
      return model_from_json(j.at("model"));
    }
    return model_from_json(j);
  }
};

/// Model reference inside a config document: a full model, {"catalog": name} or {"q", "ratios", "branch"}.
VelocityModel model_from_config(const Json& j) {
  if (j.contains("catalog")) {
    return catalog_model(j.at("catalog").get<std::string>());
  }
  if (j.contains("weights_normalized")) {
    return model_from_json(j);
  }
  if (j.contains("q")) {
    const int q = j.at("q").get<int>();
    const RatioTuple t = j.contains("p") ? RatioTuple::from_lattice_speeds(q, j.at("p").get<std::vector<long long>>())
                                         : RatioTuple::from_ratios(q, j.value("ratios", std::vector<long long>{}));
    const auto models = solve_model(t);
    const auto branch = static_cast<std::size_t>(j.value("branch", 0));
    if (branch >= models.size()) {
      throw InvalidArgument("config model branch out of range");
    }
    return models[branch];
  }
  throw InvalidArgument("config 'model' needs catalog, q/ratios or a full model document");
}

// --- shock-tube options ----------------------------------------------------------

struct TubeOptions {
  std::string config_file;
  std::string expansion;
  double rho_bar = 3.0;
  std::string high_side = "left";
  double tau = 1.0;
  int nodes = 1000;
  int interface = 500;
  int steps = 0;
  int snapshot_interval = 0;
  int workers = 0;
  std::vector<CLI::Option*> opts;
  CLI::Option* expansion_opt = nullptr;
  CLI::Option* rho_opt = nullptr;
  CLI::Option* side_opt = nullptr;
  CLI::Option* tau_opt = nullptr;
  CLI::Option* nodes_opt = nullptr;
  CLI::Option* interface_opt = nullptr;
  CLI::Option* steps_opt = nullptr;
  CLI::Option* interval_opt = nullptr;
  CLI::Option* workers_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "Shock-tube JSON config (a run manifest also works)");
    expansion_opt = app->add_option("--expansion", expansion, "Equilibrium expansion, e.g. TE5 or HE3");
    rho_opt = app->add_option("--rho-bar", rho_bar, "Density of the high-density state");
    side_opt = app->add_option("--high-side", high_side, "Side of the interface holding rho-bar (left|right)");
    tau_opt = app->add_option("--tau", tau, "BGK relaxation time");
    nodes_opt = app->add_option("--nodes", nodes, "Lattice nodes");
    interface_opt = app->add_option("--interface", interface, "First node of the right-hand state");
    steps_opt = app->add_option("--steps", steps, "Time steps (0 = automatic)");
    interval_opt = app->add_option("--snapshot-interval", snapshot_interval, "Steps between snapshots (0 = final only)");
    workers_opt = app->add_option("--workers", workers, "Collision workers (0 = TLBM_WORKERS or 1)");
  }

  /// File first, then flags on top. The model comes from the file unless model options are given.
  ShockTubeConfig resolve(const ModelOptions& model) const {
    ShockTubeConfig c;
    c.expansion = parse_expansion_label("HE3");
    bool have_model = false;
    if (!config_file.empty()) {
      const Json j = read_json_file(config_file);
      apply_config_json(j, c);
      if (j.contains("model")) {
        c.model = model_from_config(j.at("model"));
        have_model = true;
      }
    }
    if (model.given()) {
      c.model = model.resolve();
      have_model = true;
    }
    if (!have_model) {
      throw InvalidArgument("no model: pass --catalog, --model-file, --q/--ratios or a config with 'model'");
    }
    if (expansion_opt->count() > 0) c.expansion = parse_expansion_label(expansion);
    if (rho_opt->count() > 0) c.high_density = rho_bar;
    if (side_opt->count() > 0) c.high_side = parse_high_side(high_side);
    if (tau_opt->count() > 0) c.tau = tau;
    if (nodes_opt->count() > 0) c.nodes = nodes;
    if (interface_opt->count() > 0) c.interface = interface;
    if (steps_opt->count() > 0) c.steps = steps;
    if (interval_opt->count() > 0) c.snapshot_interval = snapshot_interval;
    if (workers_opt->count() > 0) c.workers = workers;
    c.validate();
    if (c.steps == 0) {
      c.steps = default_steps(c);
    }
    return c;
  }
};

Json run_manifest(const ShockTubeConfig& c) {
  Json j;
  j["command"] = "simulate";
  j["tool_version"] = kToolVersion;
  j["model"] = model_to_json(c.model);
  const Json settings = config_to_json(c);
  for (const auto& [k, v] : settings.items()) {
    j[k] = v;
  }
  return j;
}

// --- derive ------------------------------------------------------------------------

int cmd_derive(const ModelOptions& opts, const std::string& output, std::ostream& out) {
  if (opts.q == 0) {
    throw InvalidArgument("derive needs --q");
  }
  const RatioTuple tuple = opts.tuple();
  const MomentSystem sys = build_moment_system(tuple);
  const auto models = solve_model(tuple, opts.ghost_threshold);
  Json doc;
  doc["q"] = tuple.q();
  doc["p"] = tuple.lattice_speeds();
  Json poly = Json::array();
  for (const auto& c : sys.polynomial.coefficients()) {
    poly.push_back(to_string(c));
  }
  doc["polynomial_in_v2_squared"] = poly;
  Json list = Json::array();
  for (const auto& m : models) {
    list.push_back(model_to_json(m));
  }
  doc["models"] = list;
  const std::string text = dump(doc);
  if (output.empty()) {
    out << text;
  } else {
    write_text_file(output, text);
  }
  if (models.empty()) {
    throw NumericalFailure("no positive real root for this ratio tuple");
  }
  return kSuccess;
}

// --- sweep -------------------------------------------------------------------------

struct SweepOptions {
  int q = 0;
  std::string ratios;
  std::string from;
  std::string to;
  std::string step;
  std::string param = "ratio";
  std::string v2_from;
  std::string v2_to;
  std::string v2_step;
  std::string output;
};

std::vector<Rational> decimal_grid(const std::string& from, const std::string& to, const std::string& step) {
  const Rational a = parse_exact(from);
  const Rational b = parse_exact(to);
  const Rational h = parse_exact(step);
  if (h <= 0) {
    throw InvalidArgument("sweep step must be positive");
  }
  if (b < a) {
    throw InvalidArgument("sweep range is empty");
  }
  std::vector<Rational> grid;
  for (Rational x = a; x <= b; x += h) {
    grid.push_back(x);
  }
  return grid;
}

/// Shortest round-trip form, used for grid coordinates that were given as decimals.
std::string format_grid(const Rational& x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, to_double(x));
  return std::string(buf, res.ptr);
}

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

int cmd_sweep(const SweepOptions& o, std::ostream& out) {
  if (o.q == 0) {
    throw InvalidArgument("sweep needs --q");
  }
  const auto items = split_list(o.ratios);
  int free_index = -1;
  std::vector<Rational> fixed;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (items[k] == "x") {
      if (free_index >= 0) {
        throw InvalidArgument("sweep takes exactly one free parameter ('x'), found more");
      }
      free_index = static_cast<int>(k);
      fixed.emplace_back(0);
    } else {
      fixed.push_back(parse_exact(items[k]));
    }
  }
  if (free_index < 0) {
    throw InvalidArgument("mark the swept ratio with 'x' in --ratios");
  }
  const bool by_r = o.param == "r";
  if (o.param != "r" && o.param != "ratio") {
    throw InvalidArgument("--param must be 'ratio' or 'r'");
  }
  if (by_r && o.q != 5) {
    throw InvalidArgument("--param r applies to q = 5 only");
  }
  const auto grid = decimal_grid(o.from, o.to, o.step);
  const bool residual_grid = !o.v2_from.empty();
  std::ostringstream csv;

  auto tuple_at = [&](const Rational& x) -> std::optional<RatioTuple> {
    std::vector<Rational> ratios = fixed;
    if (by_r) {
      if (x <= 0 || x >= 1) {
        return std::nullopt;
      }
      ratios[static_cast<std::size_t>(free_index)] = 1 / x;
    } else {
      ratios[static_cast<std::size_t>(free_index)] = x;
    }
    try {
      return RatioTuple::from_rational_ratios(o.q, ratios);
    } catch (const InvalidArgument&) {
      return std::nullopt;
    }
  };

  if (residual_grid) {
    const auto v2_grid = decimal_grid(o.v2_from, o.v2_to, o.v2_step);
    csv << (by_r ? "r" : "ratio") << ",v2,residual\n";
    for (const auto& x : grid) {
      const auto tuple = tuple_at(x);
      for (const auto& v : v2_grid) {
        csv << format_grid(x) << ',' << format_grid(v) << ',';
        if (tuple && v > 0) {
          csv << format_double(build_moment_system(*tuple).equation_residual(to_double(v)));
        }
        csv << '\n';
      }
    }
  } else if (by_r) {
    // Two-branch table: branch 0 has the smaller v2 (-chi), branch 1 the larger (+chi).
    csv << "r,v2_minus,v2_plus,w1_minus,w1_plus,w2_minus,w2_plus,w4_minus,w4_plus\n";
    for (const auto& x : grid) {
      std::array<std::optional<double>, 8> cells;
      if (const auto tuple = tuple_at(x)) {
        const auto models = solve_model(*tuple);
        for (std::size_t b = 0; b < 2 && !models.empty(); ++b) {
          const auto& m = models[std::min(b, models.size() - 1)];
          cells[0 + b] = m.v2;
          cells[2 + b] = m.normalized_weights[0];
          cells[4 + b] = m.normalized_weights[1];
          cells[6 + b] = m.normalized_weights[2];
        }
      }
      csv << format_grid(x);
      for (const auto& c : cells) {
        csv << ',' << cell(c);
      }
      csv << '\n';
    }
  } else {
    const std::size_t pairs = static_cast<std::size_t>((o.q - 1) / 2);
    csv << "ratio,branch,v2";
    csv << ",w1";
    for (std::size_t j = 1; j <= pairs; ++j) {
      csv << ",w" << 2 * j;
    }
    csv << ",residual,all_positive,ghosts\n";
    for (const auto& x : grid) {
      const auto tuple = tuple_at(x);
      if (!tuple) {
        continue;
      }
      const auto models = solve_model(*tuple);
      for (std::size_t b = 0; b < models.size(); ++b) {
        const auto& m = models[b];
        csv << format_grid(x) << ',' << b << ',' << format_double(m.v2);
        for (double w : m.normalized_weights) {
          csv << ',' << format_double(w);
        }
        csv << ',' << format_double(m.residual) << ',' << (m.all_positive ? 1 : 0) << ','
            << std::count(m.ghosts.begin(), m.ghosts.end(), true) << '\n';
      }
    }
  }
  if (o.output.empty()) {
    out << csv.str();
  } else {
    write_text_file(o.output, csv.str());
  }
  return kSuccess;
}

// --- expand / verify -----------------------------------------------------------------

int cmd_expand(const std::string& kind, int order, const std::string& theta0, const std::string& output,
               std::ostream& out) {
  ExpansionSpec spec{parse_expansion_kind(kind), order, parse_exact(theta0)};
  const auto poly = expand(spec);
  std::ostringstream csv;
  poly.write_csv(csv);
  if (output.empty()) {
    out << csv.str();
  } else {
    write_text_file(output, csv.str());
  }
  return kSuccess;
}

struct VerifyOptions {
  std::string expansion = "TE2";
  std::string rho = "1";
  std::string u = "-0.2,0,0.2";
  std::string theta = "0.8,1,1.2";
  int max_moment = -1;
  double tolerance = 1e-10;
  bool samples = false;
};

int cmd_verify(const ModelOptions& mo, const VerifyOptions& o, std::ostream& out) {
  const VelocityModel model = mo.resolve();
  const ExpansionSpec spec = parse_expansion_label(o.expansion);
  MomentRanges ranges;
  ranges.rho = parse_real_list(o.rho);
  ranges.u = parse_real_list(o.u);
  ranges.theta = parse_real_list(o.theta);
  ranges.max_moment = o.max_moment;
  ranges.tolerance = o.tolerance;
  const auto report = verify_moments(model, expand(spec), ranges);
  Json j;
  j["model"] = model_to_json(model);
  j["expansion"] = expansion_label(spec);
  j["m_max"] = report.m_max;
  j["max_abs_error"] = report.max_abs_error;
  j["tolerance"] = o.tolerance;
  j["pass"] = report.pass;
  if (o.samples) {
    Json rows = Json::array();
    for (const auto& s : report.samples) {
      rows.push_back(Json{{"m", s.m}, {"rho", s.rho}, {"u", s.u}, {"theta", s.theta}, {"discrete", s.discrete},
                          {"analytic", s.analytic}, {"error", s.error}});
    }
    j["samples"] = rows;
  }
  out << dump(j);
  if (!report.pass) {
    throw ExpectationFailure("moment check failed: max error " + format_double(report.max_abs_error));
  }
  return kSuccess;
}

// --- simulate ---------------------------------------------------------------------

/// Probe node for a lattice of `nodes`: the 1000-node default scaled, unless given explicitly.
int probe_node(int requested, int default_at_1000, std::size_t nodes) {
  if (requested > 0) {
    return requested;
  }
  return std::max(1, static_cast<int>(std::lround(default_at_1000 * static_cast<double>(nodes) / 1000.0)));
}

struct SimulateOptions {
  std::string output_dir = ".";
  int x1 = 0;
  int x2 = 0;
  bool expect_stable = false;
};

std::string snapshot_name(int step) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "profile_step_%06d.csv", step);
  return buf;
}

int cmd_simulate(const ModelOptions& mo, const TubeOptions& to, const SimulateOptions& so, std::ostream& out) {
  const ShockTubeConfig config = to.resolve(mo);
  const RunResult result = run(config);
  std::filesystem::create_directories(so.output_dir);
  const std::filesystem::path dir(so.output_dir);

  Json outputs = Json::array();
  auto emit = [&](const std::string& name, const Snapshot& s) {
    const std::string text = profile_csv(s);
    write_text_file((dir / name).string(), text);
    outputs.push_back(Json{{"file", name}, {"step", s.step}, {"fnv1a64", fnv1a64(text)}});
  };
  for (std::size_t k = 0; k + 1 < result.snapshots.size(); ++k) {
    emit(snapshot_name(result.snapshots[k].step), result.snapshots[k]);
  }
  emit("profile.csv", result.final_snapshot());

  Json manifest = run_manifest(result.config);
  manifest["verdict"] = verdict_to_json(result.verdict);
  const std::size_t n = result.final_snapshot().size();
  const PlateauReport plateaus =
      extract_plateaus(result.final_snapshot(), probe_node(so.x1, 430, n), probe_node(so.x2, 650, n));
  manifest["plateaus"] = plateau_to_json(plateaus);
  manifest["final_step"] = result.final_snapshot().step;
  manifest["outputs"] = outputs;
  write_text_file((dir / "manifest.json").string(), dump(manifest));

  Json report{{"verdict", manifest["verdict"]}, {"plateaus", manifest["plateaus"]}, {"steps", result.config.steps},
              {"final_step", result.final_snapshot().step}, {"profile", (dir / "profile.csv").string()},
              {"profile_fnv1a64", outputs.back()["fnv1a64"]}};
  out << dump(report);
  if (so.expect_stable && !result.verdict.stable) {
    throw ExpectationFailure("run became unstable at step " + std::to_string(result.verdict.failure_step) + " (" +
                             to_string(result.verdict.failure_mode) + ")");
  }
  return kSuccess;
}

// --- riemann / compare ----------------------------------------------------------------

int cmd_riemann(const ModelOptions& mo, const TubeOptions& to, const std::string& left, const std::string& right,
                double gamma, double dx, const std::string& profile, std::ostream& out) {
  GasState l{3.0, 0.0, 1.0};
  GasState r = ShockTubeConfig::low_state();
  std::optional<ShockTubeConfig> config;
  if (mo.given() || !to.config_file.empty()) {
    config = to.resolve(mo);
    l = config->state_left_of_interface();
    r = config->state_right_of_interface();
  } else if (to.rho_opt->count() > 0 || to.side_opt->count() > 0) {
    ShockTubeConfig c;
    c.high_density = to.rho_bar;
    c.high_side = parse_high_side(to.high_side);
    l = c.state_left_of_interface();
    r = c.state_right_of_interface();
  }
  if (!left.empty()) l = parse_gas_state(left);
  if (!right.empty()) r = parse_gas_state(right);
  const RiemannSolution sol = solve_riemann(l, r, gamma);
  Json j = riemann_to_json(sol);
  j["left"] = Json{{"rho", l.rho}, {"u", l.u}, {"theta", l.theta}};
  j["right"] = Json{{"rho", r.rho}, {"u", r.u}, {"theta", r.theta}};
  if (!profile.empty()) {
    ShockTubeConfig c;
    if (config) {
      c = *config;
    } else {
      if (!(dx > 0.0)) {
        throw InvalidArgument("a profile needs a model (for the node spacing) or --dx");
      }
      // Spacing dx with a unit-ratio lattice: v2 = dx, p_2 = 1.
      c.model.ratios = RatioTuple::from_ratios(3, {});
      c.model.v2 = dx;
      c.model.normalized_weights = {2.0 / 3.0, 1.0 / 6.0};
      c.nodes = to.nodes;
      c.interface = to.interface;
      c.steps = to.steps;
    }
    if (c.steps <= 0) {
      throw InvalidArgument("a profile needs --steps");
    }
    if (gamma != kMonatomic1dGamma || !left.empty() || !right.empty()) {
      // Sample the solved problem directly when the states differ from the config.
      Snapshot s;
      s.step = c.steps;
      const double origin = static_cast<double>(c.interface) - 0.5;
      for (int x = 1; x <= c.nodes; ++x) {
        const GasState g = sample(sol, (x - origin) * c.spacing() / c.steps);
        s.rho.push_back(g.rho);
        s.u.push_back(g.u);
        s.theta.push_back(g.theta);
      }
      write_text_file(profile, profile_csv(s));
    } else {
      write_text_file(profile, profile_csv(riemann_profile(c, c.steps)));
    }
    j["profile"] = profile;
    j["steps"] = c.steps;
    j["dx"] = c.spacing();
  }
  out << dump(j);
  return kSuccess;
}

struct CompareOptions {
  std::string simulation;
  std::string reference;
  std::string manifest;
  int x1 = 0;
  int x2 = 0;
};

int cmd_compare(const CompareOptions& o, std::ostream& out) {
  if (o.simulation.empty()) {
    throw InvalidArgument("compare needs --simulation");
  }
  const Snapshot sim = read_profile_csv(o.simulation);
  Snapshot ref;
  std::string source;
  if (!o.reference.empty()) {
    ref = read_profile_csv(o.reference);
    source = o.reference;
  } else if (!o.manifest.empty()) {
    const Json m = read_json_file(o.manifest);
    ShockTubeConfig c;
    apply_config_json(m, c);
    c.model = model_from_config(m.at("model"));
    const int time = m.value("final_step", c.steps);
    ref = riemann_profile(c, time);
    source = "riemann";
  } else {
    throw InvalidArgument("compare needs --reference or --manifest");
  }
  if (sim.size() != ref.size()) {
    throw InvalidArgument("node counts differ: " + std::to_string(sim.size()) + " vs " + std::to_string(ref.size()));
  }
  Json l1;
  Json linf;
  auto field = [&](const std::string& name, auto get) {
    double sum = 0.0;
    double worst = 0.0;
    for (std::size_t x = 0; x < sim.size(); ++x) {
      const double d = std::abs(get(sim, x) - get(ref, x));
      sum += d;
      worst = std::max(worst, d);
    }
    l1[name] = sim.size() == 0 ? 0.0 : sum / static_cast<double>(sim.size());
    linf[name] = worst;
  };
  field("rho", [](const Snapshot& s, std::size_t x) { return s.rho[x]; });
  field("u", [](const Snapshot& s, std::size_t x) { return s.u[x]; });
  field("theta", [](const Snapshot& s, std::size_t x) { return s.theta[x]; });
  field("p", [](const Snapshot& s, std::size_t x) { return s.pressure(x); });
  Json plateaus;
  for (const auto& [label, node] :
       {std::pair{"x1", probe_node(o.x1, 430, sim.size())}, std::pair{"x2", probe_node(o.x2, 650, sim.size())}}) {
    if (node < 1 || static_cast<std::size_t>(node) > sim.size()) {
      throw InvalidArgument("probe node outside the lattice");
    }
    const auto x = static_cast<std::size_t>(node - 1);
    Json p{{"node", node}};
    auto entry = [&](const char* name, double a, double b) {
      p[name] = Json{{"simulation", a}, {"reference", b}, {"diff", a - b}};
    };
    entry("rho", sim.rho[x], ref.rho[x]);
    entry("u", sim.u[x], ref.u[x]);
    entry("theta", sim.theta[x], ref.theta[x]);
    entry("p", sim.pressure(x), ref.pressure(x));
    plateaus[label] = p;
  }
  out << dump(Json{{"nodes", sim.size()}, {"reference", source}, {"l1", l1}, {"linf", linf}, {"plateaus", plateaus}});
  return kSuccess;
}

// --- stability scan ----------------------------------------------------------------------

struct ScanOptions {
  std::string models = "q5";
  std::string rho_bars = "3";
  std::string taus = "1";
  std::string expansions = "HE3";
  std::string high_side = "left";
  int nodes = 1000;
  int steps = 0;
  int workers = 0;
  std::string output;
};

int cmd_stability_scan(const ScanOptions& o, std::ostream& out) {
  struct Job {
    std::string model_name;
    VelocityModel model;
    ExpansionSpec expansion;
    double rho_bar;
    double tau;
  };
  std::vector<std::pair<std::string, VelocityModel>> models;
  for (const auto& name : split_list(o.models)) {
    if (name.rfind("file:", 0) == 0) {
      models.emplace_back(name, ModelOptions::load_model_file(name.substr(5), 0));
    } else {
      models.emplace_back(name, catalog_model(name));
    }
  }
  std::vector<ExpansionSpec> expansions;
  for (const auto& e : split_list(o.expansions)) {
    expansions.push_back(parse_expansion_label(e));
  }
  const auto rho_bars = parse_real_list(o.rho_bars);
  const auto taus = parse_real_list(o.taus);
  if (models.empty() || expansions.empty() || rho_bars.empty() || taus.empty()) {
    throw InvalidArgument("stability-scan needs non-empty model, expansion, rho-bar and tau lists");
  }
  const HighSide side = parse_high_side(o.high_side);
  std::vector<Job> jobs;
  for (const auto& [name, model] : models) {
    for (const auto& e : expansions) {
      for (double rb : rho_bars) {
        for (double tau : taus) {
          jobs.push_back({name, model, e, rb, tau});
        }
      }
    }
  }
  std::vector<std::string> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        const Job& job = jobs[k];
        ShockTubeConfig c;
        c.model = job.model;
        c.expansion = job.expansion;
        c.high_density = job.rho_bar;
        c.tau = job.tau;
        c.high_side = side;
        c.nodes = o.nodes;
        c.interface = o.nodes / 2;
        c.steps = o.steps;
        c.workers = 1;
        const RunResult r = run(c);
        std::ostringstream row;
        row << job.model_name << ',' << job.model.q() << ',' << format_double(job.model.v2) << ','
            << expansion_label(job.expansion) << ',' << format_double(job.rho_bar) << ',' << format_double(job.tau)
            << ',' << r.config.steps << ',' << (r.verdict.stable ? "stable" : "unstable") << ','
            << r.verdict.failure_step << ',' << to_string(r.verdict.failure_mode) << ','
            << format_double(r.verdict.fluctuation) << '\n';
        rows[k] = row.str();
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) {
          error = std::current_exception();
        }
      }
    }
  };
  const int threads = std::max(1, resolve_workers(o.workers));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < threads; ++t) {
      pool.emplace_back(worker);
    }
    worker();
  }
  if (error) {
    std::rethrow_exception(error);
  }
  std::string csv = "model,q,v2,expansion,rho_bar,tau,steps,verdict,failure_step,failure_mode,fluctuation\n";
  for (const auto& r : rows) {
    csv += r;
  }
  if (o.output.empty()) {
    out << csv;
  } else {
    write_text_file(o.output, csv);
  }
  return kSuccess;
}

// --- catalog ---------------------------------------------------------------------------

int cmd_catalog(std::ostream& out) {
  Json list = Json::array();
  for (const auto& e : catalog()) {
    const VelocityModel m = resolve(e);
    list.push_back(Json{{"name", e.name},
                        {"q", e.q},
                        {"ratios", e.ratios},
                        {"published_v2", e.published_v2},
                        {"derived_v2", m.v2},
                        {"abs_diff", std::abs(m.v2 - e.published_v2)},
                        {"note", e.note},
                        {"model", model_to_json(m)}});
  }
  out << dump(list);
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete-velocity thermal lattice Boltzmann models: derivation, expansions, shock tubes", "tlbm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  ModelOptions derive_model;
  std::string derive_output;
  auto* derive = app.add_subcommand("derive", "Solve the reduced polynomial for a ratio tuple");
  derive_model.attach(derive);
  derive->add_option("--output", derive_output, "Write the JSON document here instead of stdout");

  SweepOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Sweep one ratio (or r = 1/pbar_4) and emit branch or residual grids");
  sweep->add_option("--q", sweep_opts.q, "Velocity count")->required();
  sweep->add_option("--ratios", sweep_opts.ratios, "Ratios with exactly one 'x', e.g. 2,x")->required();
  sweep->add_option("--from", sweep_opts.from, "First grid value")->required();
  sweep->add_option("--to", sweep_opts.to, "Last grid value")->required();
  sweep->add_option("--step", sweep_opts.step, "Grid step")->required();
  sweep->add_option("--param", sweep_opts.param, "Meaning of x: 'ratio' (pbar) or 'r' (1/pbar_4, q = 5)");
  sweep->add_option("--v2-from", sweep_opts.v2_from, "Residual grid: first v2");
  sweep->add_option("--v2-to", sweep_opts.v2_to, "Residual grid: last v2");
  sweep->add_option("--v2-step", sweep_opts.v2_step, "Residual grid: v2 step");
  sweep->add_option("--output", sweep_opts.output, "CSV path (default stdout)");

  std::string expand_kind = "TE";
  int expand_order = 2;
  std::string expand_theta0 = "1";
  std::string expand_output;
  auto* expand_cmd = app.add_subcommand("expand", "Dump the exact coefficient table of an expansion");
  expand_cmd->add_option("--kind", expand_kind, "TE or HE");
  expand_cmd->add_option("--order", expand_order, "Expansion order N");
  expand_cmd->add_option("--theta0", expand_theta0, "Reference temperature (TE)");
  expand_cmd->add_option("--output", expand_output, "CSV path (default stdout)");

  ModelOptions verify_model;
  VerifyOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "Check discrete equilibrium moments against the analytic ones");
  verify_model.attach(verify);
  verify->add_option("--expansion", verify_opts.expansion, "Expansion label, e.g. TE4");
  verify->add_option("--rho", verify_opts.rho, "Density samples");
  verify->add_option("--u", verify_opts.u, "Velocity samples");
  verify->add_option("--theta", verify_opts.theta, "Temperature samples");
  verify->add_option("--max-moment", verify_opts.max_moment, "Highest moment (default m_max)");
  verify->add_option("--tolerance", verify_opts.tolerance, "Absolute tolerance");
  verify->add_flag("--samples", verify_opts.samples, "Include every sample in the report");

  ModelOptions sim_model;
  TubeOptions sim_tube;
  SimulateOptions sim_opts;
  auto* simulate = app.add_subcommand("simulate", "Run the shock tube and write profiles and a manifest");
  sim_model.attach(simulate);
  sim_tube.attach(simulate);
  simulate->add_option("--output-dir", sim_opts.output_dir, "Directory for profile.csv and manifest.json");
  simulate->add_option("--x1", sim_opts.x1, "First plateau probe node (default 430 per 1000 nodes)");
  simulate->add_option("--x2", sim_opts.x2, "Second plateau probe node (default 650 per 1000 nodes)");
  simulate->add_flag("--expect-stable", sim_opts.expect_stable, "Exit 3 if the run becomes unstable");

  ModelOptions riemann_model;
  TubeOptions riemann_tube;
  std::string riemann_left;
  std::string riemann_right;
  double riemann_gamma = kMonatomic1dGamma;
  double riemann_dx = 0.0;
  std::string riemann_profile_path;
  auto* riemann = app.add_subcommand("riemann", "Exact Riemann solution and sampled profile");
  riemann_model.attach(riemann, false);
  riemann_tube.attach(riemann);
  riemann->add_option("--left", riemann_left, "Left state rho,u,theta");
  riemann->add_option("--right", riemann_right, "Right state rho,u,theta");
  riemann->add_option("--gamma", riemann_gamma, "Ratio of specific heats");
  riemann->add_option("--dx", riemann_dx, "Node spacing when no model is given");
  riemann->add_option("--profile", riemann_profile_path, "Write the sampled profile CSV here");

  CompareOptions compare_opts;
  auto* compare = app.add_subcommand("compare", "Error metrics of a profile against the Riemann solution");
  compare->add_option("--simulation", compare_opts.simulation, "Simulated profile CSV");
  compare->add_option("--reference", compare_opts.reference, "Reference profile CSV");
  compare->add_option("--manifest", compare_opts.manifest, "Run manifest; the reference is the exact solution");
  compare->add_option("--x1", compare_opts.x1, "First probe node (default 430 per 1000 nodes)");
  compare->add_option("--x2", compare_opts.x2, "Second probe node (default 650 per 1000 nodes)");

  ScanOptions scan_opts;
  auto* scan = app.add_subcommand("stability-scan", "Stable/unstable matrix over models, densities, tau, expansions");
  scan->add_option("--models", scan_opts.models, "Catalog names or file:PATH, comma separated");
  scan->add_option("--rho-bars", scan_opts.rho_bars, "High densities");
  scan->add_option("--taus", scan_opts.taus, "Relaxation times");
  scan->add_option("--expansions", scan_opts.expansions, "Expansion labels, e.g. HE3,TE5");
  scan->add_option("--high-side", scan_opts.high_side, "left or right");
  scan->add_option("--nodes", scan_opts.nodes, "Lattice nodes");
  scan->add_option("--steps", scan_opts.steps, "Steps per run (0 = automatic)");
  scan->add_option("--workers", scan_opts.workers, "Parallel runs (0 = TLBM_WORKERS or 1)");
  scan->add_option("--output", scan_opts.output, "CSV path (default stdout)");

  auto* catalog_cmd = app.add_subcommand("catalog", "Published models, re-derived");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*derive) return cmd_derive(derive_model, derive_output, out);
    if (*sweep) return cmd_sweep(sweep_opts, out);
    if (*expand_cmd) return cmd_expand(expand_kind, expand_order, expand_theta0, expand_output, out);
    if (*verify) return cmd_verify(verify_model, verify_opts, out);
    if (*simulate) return cmd_simulate(sim_model, sim_tube, sim_opts, out);
    if (*riemann) {
      return cmd_riemann(riemann_model, riemann_tube, riemann_left, riemann_right, riemann_gamma, riemann_dx,
                         riemann_profile_path, out);
    }
    if (*compare) return cmd_compare(compare_opts, out);
    if (*scan) return cmd_stability_scan(scan_opts, out);
    if (*catalog_cmd) return cmd_catalog(out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const ExpectationFailure& e) {
    err << "expectation failed: " << e.what() << '\n';
    return kExpectationViolated;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace tlbm::cli
