#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include "sng/errors.hpp"
#include "sng/scenario.hpp"

namespace sng {

namespace {

// Edge/peak density of a Gaussian at this many standard deviations is far
// below the 1e-12 boundary tolerance.
constexpr double kHalfWidthSigmas = 9.0;
constexpr double kSigmasPerStep = 6.0;
constexpr std::size_t kMinPoints = 4096;

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

const char* kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::none: return "none";
    case KernelKind::sphere_quadratic: return "sphere-quadratic";
    case KernelKind::custom_table: return "custom-table";
  }
  return "none";
}

struct KeySpec {
  enum class Type { real, integer, text } type;
  std::function<void(ScenarioConfig&, const std::string&, std::vector<std::string>&)> set;
  std::function<std::optional<std::string>(const ScenarioConfig&)> get;
};

using Problems = std::vector<std::string>;

template <class T>
KeySpec real_key(std::optional<T> ScenarioConfig::*member) {
  return {KeySpec::Type::real,
          [member](ScenarioConfig& c, const std::string& v, Problems&) { c.*member = *to_double(v); },
          [member](const ScenarioConfig& c) -> std::optional<std::string> {
            if (!(c.*member)) return std::nullopt;
            return fmt(*(c.*member));
          }};
}

KeySpec plain_real(double ScenarioConfig::*member) {
  return {KeySpec::Type::real,
          [member](ScenarioConfig& c, const std::string& v, Problems&) { c.*member = *to_double(v); },
          [member](const ScenarioConfig& c) -> std::optional<std::string> { return fmt(c.*member); }};
}

KeySpec phys_key(double PhysParams::*member) {
  return {KeySpec::Type::real,
          [member](ScenarioConfig& c, const std::string& v, Problems&) {
            c.phys.*member = *to_double(v);
          },
          [member](const ScenarioConfig& c) -> std::optional<std::string> {
            return fmt(c.phys.*member);
          }};
}

const std::map<std::string, KeySpec>& key_table() {
  using T = KeySpec::Type;
  static const std::map<std::string, KeySpec> table = {
      {"scenario",
       {T::text,
        [](ScenarioConfig& c, const std::string& v, Problems& p) {
          if (auto k = parse_scenario_kind(v)) {
            c.scenario = *k;
          } else {
            p.push_back("unknown scenario '" + v + "'");
          }
        },
        [](const ScenarioConfig& c) -> std::optional<std::string> { return to_string(c.scenario); }}},
      {"n_points",
       {T::integer,
        [](ScenarioConfig& c, const std::string& v, Problems& p) {
          const auto n = *to_integer(v);
          if (n < 2) {
            p.push_back("n_points must be a power of two >= 2");
            return;
          }
          c.n_points = static_cast<std::size_t>(n);
        },
        [](const ScenarioConfig& c) -> std::optional<std::string> {
          if (!c.n_points) return std::nullopt;
          return std::to_string(*c.n_points);
        }}},
      {"x_min", real_key(&ScenarioConfig::x_min)},
      {"x_max", real_key(&ScenarioConfig::x_max)},
      {"hbar", phys_key(&PhysParams::hbar)},
      {"mass", phys_key(&PhysParams::mass)},
      {"G", phys_key(&PhysParams::G)},
      {"norm_sq", phys_key(&PhysParams::norm_sq)},
      {"k_ext", real_key(&ScenarioConfig::k_ext)},
      {"k_self", real_key(&ScenarioConfig::k_self)},
      {"k_ratio", real_key(&ScenarioConfig::k_ratio)},
      {"sphere_mass", real_key(&ScenarioConfig::sphere_mass)},
      {"sphere_radius", real_key(&ScenarioConfig::sphere_radius)},
      {"kernel",
       {T::text,
        [](ScenarioConfig& c, const std::string& v, Problems& p) {
          if (v == "none") {
            c.kernel = KernelKind::none;
          } else if (v == "sphere-quadratic") {
            c.kernel = KernelKind::sphere_quadratic;
          } else if (v == "custom-table") {
            c.kernel = KernelKind::custom_table;
          } else {
            p.push_back("unknown kernel '" + v + "'");
          }
        },
        [](const ScenarioConfig& c) -> std::optional<std::string> { return kernel_name(c.kernel); }}},
      {"kernel_file",
       {T::text, [](ScenarioConfig& c, const std::string& v, Problems&) { c.kernel_file = v; },
        [](const ScenarioConfig& c) -> std::optional<std::string> {
          if (c.kernel_file.empty()) return std::nullopt;
          return c.kernel_file;
        }}},
      {"kernel_coupling", plain_real(&ScenarioConfig::kernel_coupling)},
      {"dt", real_key(&ScenarioConfig::dt)},
      {"t_end", real_key(&ScenarioConfig::t_end)},
      {"output_stride",
       {T::integer,
        [](ScenarioConfig& c, const std::string& v, Problems& p) {
          const auto n = *to_integer(v);
          if (n < 1) {
            p.push_back("output_stride must be >= 1");
            return;
          }
          c.output_stride = static_cast<int>(n);
        },
        [](const ScenarioConfig& c) -> std::optional<std::string> {
          if (!c.output_stride) return std::nullopt;
          return std::to_string(*c.output_stride);
        }}},
      {"scheme",
       {T::text,
        [](ScenarioConfig& c, const std::string& v, Problems& p) {
          if (v == "strang_split") {
            c.scheme = Scheme::strang_split;
          } else if (v == "imaginary_time") {
            c.scheme = Scheme::imaginary_time;
          } else {
            p.push_back("unknown scheme '" + v + "'");
          }
        },
        [](const ScenarioConfig& c) -> std::optional<std::string> {
          return c.scheme == Scheme::strang_split ? "strang_split" : "imaginary_time";
        }}},
      {"self_consistency",
       {T::text,
        [](ScenarioConfig& c, const std::string& v, Problems& p) {
          if (v == "midpoint_predictor") {
            c.self_consistency = SelfConsistency::midpoint_predictor;
          } else if (v == "frozen") {
            c.self_consistency = SelfConsistency::frozen;
          } else {
            p.push_back("unknown self_consistency '" + v + "'");
          }
        },
        [](const ScenarioConfig& c) -> std::optional<std::string> {
          return c.self_consistency == SelfConsistency::frozen ? "frozen" : "midpoint_predictor";
        }}},
      {"soliton_center", real_key(&ScenarioConfig::soliton_center)},
      {"soliton_width", real_key(&ScenarioConfig::soliton_width)},
      {"boost_velocity", real_key(&ScenarioConfig::boost_velocity)},
      {"pilot_center", plain_real(&ScenarioConfig::pilot_center)},
      {"pilot_momentum", plain_real(&ScenarioConfig::pilot_momentum)},
      {"variance_ratio", plain_real(&ScenarioConfig::variance_ratio)},
      {"pilot_width", real_key(&ScenarioConfig::pilot_width)},
      {"out",
       {T::text, [](ScenarioConfig& c, const std::string& v, Problems&) { c.out = v; },
        [](const ScenarioConfig& c) -> std::optional<std::string> { return c.out; }}},
      {"snapshot_every",
       {T::integer,
        [](ScenarioConfig& c, const std::string& v, Problems& p) {
          const auto n = *to_integer(v);
          if (n < 0) {
            p.push_back("snapshot_every must be >= 0");
            return;
          }
          c.snapshot_every = static_cast<std::size_t>(n);
        },
        [](const ScenarioConfig& c) -> std::optional<std::string> {
          return std::to_string(c.snapshot_every);
        }}},
      {"r_max", plain_real(&ScenarioConfig::r_max)},
      {"radial_points",
       {T::integer,
        [](ScenarioConfig& c, const std::string& v, Problems& p) {
          const auto n = *to_integer(v);
          if (n < 3) {
            p.push_back("radial_points must be >= 3");
            return;
          }
          c.radial_points = static_cast<std::size_t>(n);
        },
        [](const ScenarioConfig& c) -> std::optional<std::string> {
          return std::to_string(c.radial_points);
        }}},
      {"tol", real_key(&ScenarioConfig::tol)},
  };
  return table;
}

// Half-width and smallest standard deviation reached by a Gaussian packet
// of initial standard deviation sigma over [0, t_end].
struct PacketBounds {
  double reach = 0.0;
  double min_sigma = 0.0;
};

PacketBounds packet_bounds(double center, double velocity, double sigma, double confinement,
                           double k_ext, double t_end, const PhysParams& phys) {
  const double m = phys.mass;
  const double hbar = phys.hbar;
  double amplitude = 0.0;
  if (k_ext > 0.0) {
    const double w = std::sqrt(k_ext / m);
    amplitude = std::hypot(center, velocity / w);
  } else {
    amplitude = std::abs(center) + std::abs(velocity) * t_end;
  }
  double max_sigma = sigma;
  double min_sigma = sigma;
  if (confinement > 0.0) {
    const double partner = hbar / (2.0 * m * std::sqrt(confinement / m) * sigma);
    max_sigma = std::max(sigma, partner);
    min_sigma = std::min(sigma, partner);
  } else {
    max_sigma = std::hypot(sigma, hbar * t_end / (2.0 * m * sigma));
  }
  return {amplitude + kHalfWidthSigmas * max_sigma, min_sigma};
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::figure1: return "figure1";
    case ScenarioKind::ground_state: return "ground-state";
    case ScenarioKind::choquard: return "choquard";
    case ScenarioKind::ehrenfest: return "ehrenfest";
    case ScenarioKind::boost: return "boost";
    case ScenarioKind::custom: return "custom";
  }
  return "custom";
}

std::optional<ScenarioKind> parse_scenario_kind(const std::string& name) {
  for (auto k : {ScenarioKind::figure1, ScenarioKind::ground_state, ScenarioKind::choquard,
                 ScenarioKind::ehrenfest, ScenarioKind::boost, ScenarioKind::custom}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

double harmonic_extent(double stiffness, const PhysParams& phys) {
  if (!(stiffness > 0.0)) throw ConfigError("harmonic_extent needs a positive stiffness");
  return std::sqrt(phys.hbar / std::sqrt(stiffness * phys.mass));
}

std::vector<std::string> numeric_keys() {
  std::vector<std::string> keys;
  for (const auto& [name, spec] : key_table()) {
    if (spec.type != KeySpec::Type::text) keys.push_back(name);
  }
  return keys;
}

namespace {

ScenarioConfig parse_entries(const std::vector<std::pair<std::string, std::string>>& entries,
                             const std::vector<std::size_t>& lines,
                             std::optional<ScenarioKind> forced) {
  Problems problems;
  ScenarioConfig cfg;
  std::set<std::string> seen;
  const auto& table = key_table();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [key, value] = entries[i];
    const std::string where = "line " + std::to_string(lines[i]) + ": ";
    const auto it = table.find(key);
    if (it == table.end()) {
      problems.push_back(where + "unknown key '" + key + "'");
      continue;
    }
    if (!seen.insert(key).second) {
      problems.push_back(where + "duplicate key '" + key + "'");
      continue;
    }
    const auto& spec = it->second;
    if (spec.type == KeySpec::Type::real && !to_double(value)) {
      problems.push_back(where + "'" + value + "' is not a number for key " + key);
      continue;
    }
    if (spec.type == KeySpec::Type::integer && !to_integer(value)) {
      problems.push_back(where + "'" + value + "' is not an integer for key " + key);
      continue;
    }
    spec.set(cfg, value, problems);
  }
  if (forced) {
    if (seen.count("scenario") && cfg.scenario != *forced) {
      problems.push_back("config names scenario '" + to_string(cfg.scenario) +
                         "' but '" + to_string(*forced) + "' was requested");
    }
    cfg.scenario = *forced;
  }
  if (problems.empty()) {
    try {
      resolve(cfg);
    } catch (const ConfigError& e) {
      problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    }
  } else {
    // Report semantic problems too, on a best-effort basis.
    try {
      resolve(cfg);
    } catch (const ConfigError& e) {
      for (const auto& p : e.problems()) {
        if (std::find(problems.begin(), problems.end(), p) == problems.end()) problems.push_back(p);
      }
    }
  }
  if (!problems.empty()) throw ConfigError(problems);
  return cfg;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, std::optional<ScenarioKind> forced) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::size_t> lines;
  Problems problems;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const auto line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    lines.push_back(line_no);
  }
  try {
    auto cfg = parse_entries(entries, lines, forced);
    if (!problems.empty()) throw ConfigError(problems);
    return cfg;
  } catch (const ConfigError& e) {
    problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    throw ConfigError(problems);
  }
}

std::string render_config(const ScenarioConfig& cfg) {
  std::ostringstream out;
  // The scenario line goes first; the rest follow in key order.
  out << "scenario = " << to_string(cfg.scenario) << '\n';
  for (const auto& [name, spec] : key_table()) {
    if (name == "scenario") continue;
    if (auto v = spec.get(cfg)) out << name << " = " << *v << '\n';
  }
  return out.str();
}

ScenarioConfig with_value(const ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = key_table();
  if (!table.count(key)) throw ConfigError("unknown key '" + key + "'");
  std::string text;
  std::istringstream in(render_config(cfg));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + " = ", 0) == 0) continue;
    text += line + '\n';
  }
  text += key + " = " + value + '\n';
  return parse_config(text);
}

ResolvedScenario resolve(const ScenarioConfig& cfg) {
  Problems p;
  ResolvedScenario r;
  r.kind = cfg.scenario;
  r.phys = cfg.phys;
  try {
    cfg.phys.validate();
  } catch (const ConfigError& e) {
    p.insert(p.end(), e.problems().begin(), e.problems().end());
  }
  const bool evolving = cfg.scenario != ScenarioKind::ground_state &&
                        cfg.scenario != ScenarioKind::choquard;

  // Stiffnesses.
  const double default_k_ext = (cfg.scenario == ScenarioKind::figure1 ||
                                cfg.scenario == ScenarioKind::ehrenfest)
                                   ? 1.0
                                   : 0.0;
  const double k_ext = cfg.k_ext.value_or(default_k_ext);
  if (!(k_ext >= 0.0)) p.push_back("k_ext must be ≥ 0");
  if (cfg.k_self && !(*cfg.k_self >= 0.0)) p.push_back("k_self must be ≥ 0");
  if (cfg.k_ratio && !(*cfg.k_ratio > 0.0)) p.push_back("k_ratio must be > 0");
  if (cfg.k_ratio && !(k_ext > 0.0)) p.push_back("k_ratio requires k_ext > 0");
  if (cfg.sphere_mass && !(*cfg.sphere_mass > 0.0)) p.push_back("sphere_mass must be > 0");
  if (cfg.sphere_radius && !(*cfg.sphere_radius > 0.0)) p.push_back("sphere_radius must be > 0");

  double k_self = 0.0;
  if (cfg.k_self) {
    k_self = *cfg.k_self;
  } else if (cfg.k_ratio) {
    k_self = *cfg.k_ratio * k_ext;
  } else if (cfg.sphere_mass && cfg.sphere_radius && *cfg.sphere_mass > 0.0 &&
             *cfg.sphere_radius > 0.0) {
    k_self = sphere_k_self(cfg.phys.G, *cfg.sphere_mass, *cfg.sphere_radius, cfg.phys.norm_sq);
  } else {
    switch (cfg.scenario) {
      case ScenarioKind::figure1: k_self = 1000.0 * k_ext; break;
      case ScenarioKind::ehrenfest:
      case ScenarioKind::boost:
      case ScenarioKind::ground_state: k_self = 1000.0; break;
      default: k_self = 0.0;
    }
  }
  if (cfg.k_self && cfg.k_ratio && k_ext > 0.0) {
    const double implied = *cfg.k_ratio * k_ext;
    if (std::abs(implied - *cfg.k_self) > 1e-12 * std::max(std::abs(implied), std::abs(*cfg.k_self))) {
      p.push_back("k_self disagrees with k_ratio * k_ext");
    }
  }
  r.model = HarmonicModelParams{k_ext, k_self, cfg.sphere_mass, cfg.sphere_radius};
  if (p.empty()) {
    try {
      check_consistency(r.model, r.phys);
    } catch (const ConfigError& e) {
      p.push_back(e.what());
    }
  }
  const double k_total = k_ext + k_self;

  // Kernel.
  r.kernel = cfg.kernel;
  r.kernel_file = cfg.kernel_file;
  r.kernel_coupling = cfg.kernel_coupling;
  if (cfg.kernel == KernelKind::sphere_quadratic && !cfg.sphere_radius) {
    p.push_back("kernel sphere-quadratic requires sphere_radius");
  }
  if (cfg.kernel == KernelKind::custom_table && cfg.kernel_file.empty()) {
    p.push_back("kernel custom-table requires kernel_file");
  }
  if (cfg.kernel != KernelKind::none &&
      (cfg.scenario == ScenarioKind::figure1 || cfg.scenario == ScenarioKind::choquard)) {
    p.push_back("kernel is not used by scenario " + to_string(cfg.scenario));
  }

  // Initial state.
  r.soliton_center = cfg.soliton_center.value_or(
      (cfg.scenario == ScenarioKind::figure1 || cfg.scenario == ScenarioKind::ehrenfest) ? 1.0 : 0.0);
  r.boost_velocity = cfg.boost_velocity.value_or(
      cfg.scenario == ScenarioKind::boost ? 1.0 : (cfg.scenario == ScenarioKind::ehrenfest ? 0.5 : 0.0));
  if (cfg.soliton_width) {
    if (!(*cfg.soliton_width > 0.0)) p.push_back("soliton_width must be > 0");
    r.soliton_extent = *cfg.soliton_width;
  } else if (k_total > 0.0 && p.empty()) {
    r.soliton_extent = harmonic_extent(k_total, r.phys);
    if (cfg.scenario == ScenarioKind::ehrenfest) r.soliton_extent *= 1.2;
  } else if (cfg.scenario != ScenarioKind::choquard) {
    p.push_back("soliton_width is required when k_ext + k_self = 0");
  }
  r.pilot_center = cfg.pilot_center;
  r.pilot_momentum = cfg.pilot_momentum;
  if (!(cfg.variance_ratio > 0.0 && cfg.variance_ratio < 1.0)) {
    p.push_back("variance_ratio must lie in (0, 1)");
  }
  if (cfg.pilot_width) {
    if (!(*cfg.pilot_width > 0.0)) p.push_back("pilot_width must be > 0");
    r.pilot_extent = *cfg.pilot_width;
  } else if (cfg.variance_ratio > 0.0) {
    r.pilot_extent = r.soliton_extent / std::sqrt(cfg.variance_ratio);
  }

  // Time window.
  const double w_ext = k_ext > 0.0 ? std::sqrt(k_ext / cfg.phys.mass) : 0.0;
  const double w_tot = k_total > 0.0 ? std::sqrt(k_total / cfg.phys.mass) : 0.0;
  double t_end = 0.0;
  if (cfg.t_end) {
    t_end = *cfg.t_end;
    if (!(t_end > 0.0)) p.push_back("t_end must be > 0");
  } else if (evolving) {
    switch (cfg.scenario) {
      case ScenarioKind::figure1:
        if (w_ext > 0.0) t_end = 2.0 * 2.0 * std::numbers::pi / w_ext;
        else p.push_back("figure1 needs k_ext > 0 or an explicit t_end");
        break;
      case ScenarioKind::ehrenfest:
        if (w_ext > 0.0) t_end = 2.0 * std::numbers::pi / w_ext;
        else p.push_back("ehrenfest needs k_ext > 0 or an explicit t_end");
        break;
      case ScenarioKind::boost:
        if (w_tot > 0.0) t_end = std::numbers::pi / w_tot;
        else p.push_back("boost needs k_self > 0 or an explicit t_end");
        break;
      default: p.push_back("missing required key t_end for scenario " + to_string(cfg.scenario));
    }
  }

  int desired_stride = 1;
  if (cfg.scenario == ScenarioKind::boost) desired_stride = 10;
  if (cfg.scenario == ScenarioKind::ehrenfest) desired_stride = 20;
  double dt = 0.0;
  if (cfg.dt) {
    dt = *cfg.dt;
    if (!(dt > 0.0)) p.push_back("dt must be > 0");
  } else if (evolving && t_end > 0.0) {
    double target = 0.0;
    if (cfg.scenario == ScenarioKind::boost) {
      target = t_end / 400.0;
    } else if (k_total > 0.0) {
      target = default_dt(k_total, cfg.phys.mass);
      if (cfg.scenario == ScenarioKind::ehrenfest) target /= 20.0;
      if (cfg.scenario == ScenarioKind::figure1) target /= 4.0;
    } else {
      target = t_end / 1000.0;
    }
    if (cfg.scenario == ScenarioKind::figure1 && w_ext > 0.0) {
      desired_stride = std::max(1, static_cast<int>(std::floor(2.0 * std::numbers::pi / w_ext / (300.0 * target))));
    }
    const int block = cfg.output_stride.value_or(desired_stride);
    const double blocks = std::ceil(t_end / (target * block) - 1e-9);
    dt = t_end / (blocks * block);
  }
  if (cfg.scenario == ScenarioKind::figure1 && cfg.dt && dt > 0.0 && w_ext > 0.0) {
    desired_stride = std::max(1, static_cast<int>(std::floor(2.0 * std::numbers::pi / w_ext / (300.0 * dt))));
  }

  int stride = cfg.output_stride.value_or(desired_stride);
  if (!cfg.output_stride && evolving && dt > 0.0 && t_end > 0.0) {
    const auto steps = static_cast<long long>(std::llround(t_end / dt));
    while (stride > 1 && steps % stride != 0) --stride;
  }

  r.spec.dt = dt;
  r.spec.t_end = t_end;
  r.spec.output_stride = stride;
  r.spec.scheme = cfg.scheme;
  r.spec.self_consistency = cfg.self_consistency;
  r.spec.keep_snapshots = cfg.snapshot_every > 0;
  r.snapshot_every = cfg.snapshot_every;
  if (cfg.scheme == Scheme::imaginary_time && cfg.scenario != ScenarioKind::ground_state) {
    p.push_back("scheme imaginary_time is only valid for scenario ground-state");
  }
  if (evolving && p.empty()) {
    try {
      r.spec.step_count();
      if (!(dt < strang_dt_max(k_total, cfg.phys.mass))) {
        p.push_back("dt exceeds the Strang stability bound " + fmt(strang_dt_max(k_total, cfg.phys.mass)));
      }
    } catch (const ConfigError& e) {
      p.insert(p.end(), e.problems().begin(), e.problems().end());
    }
  }

  // Grid.
  if (cfg.x_min.has_value() != cfg.x_max.has_value()) {
    p.push_back("x_min and x_max must be given together");
  }
  if (cfg.n_points && !std::has_single_bit(*cfg.n_points)) {
    p.push_back("n_points must be a power of two");
  }
  if (cfg.scenario != ScenarioKind::choquard && p.empty()) {
    const double sigma_s = r.soliton_extent / std::numbers::sqrt2;
    const double confinement = k_total;
    std::vector<PacketBounds> packets{packet_bounds(r.soliton_center, r.boost_velocity, sigma_s,
                                                    confinement, k_ext, t_end, r.phys)};
    if (cfg.scenario == ScenarioKind::figure1) {
      packets.push_back(packet_bounds(r.pilot_center, r.pilot_momentum / cfg.phys.mass,
                                      r.pilot_extent / std::numbers::sqrt2, k_ext, k_ext, t_end,
                                      r.phys));
    }
    double half = 0.0;
    double min_sigma = std::numeric_limits<double>::infinity();
    for (const auto& b : packets) {
      half = std::max(half, b.reach);
      min_sigma = std::min(min_sigma, b.min_sigma);
    }
    double lo = -half;
    double hi = half;
    if (cfg.x_min && cfg.x_max) {
      lo = *cfg.x_min;
      hi = *cfg.x_max;
    }
    std::size_t n = 0;
    if (cfg.n_points) {
      n = *cfg.n_points;
    } else {
      const double want = std::ceil((hi - lo) / (min_sigma / kSigmasPerStep));
      n = std::max<std::size_t>(kMinPoints, std::bit_ceil(static_cast<std::size_t>(want)));
    }
    try {
      r.grid = Grid1D(n, lo, hi);
    } catch (const ConfigError& e) {
      p.push_back(e.what());
    }
  }

  // Remaining knobs.
  r.out = cfg.out;
  if (cfg.out.empty()) p.push_back("out must not be empty");
  if (!(cfg.r_max >= 0.0)) p.push_back("r_max must be ≥ 0");
  r.choquard.r_max = cfg.r_max;
  r.choquard.n_points = cfg.radial_points;
  r.tol = cfg.tol.value_or(cfg.scenario == ScenarioKind::ground_state ? 1e-12 : 1e-10);
  if (!(r.tol > 0.0)) p.push_back("tol must be > 0");

  if (!p.empty()) throw ConfigError(p);
  return r;
}

}  // namespace sng
