#include "sdre_eso/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <utility>

#include "sdre_eso/errors.hpp"
#include "sdre_eso/eso.hpp"

namespace sdre_eso::scenario {

namespace {

struct Entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

struct Section {
  std::size_t line = 0;
  std::map<std::string, Entry> entries;
};

constexpr double kDegree = std::numbers::pi / 180.0;

const char* const kSections[] = {"scenario", "plant",      "simulation", "eso",
                                 "controller", "sweep", "output"};

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Parser {
 public:
  Parser(std::string_view text, std::string source) : source_(std::move(source)) { load(text); }

  [[noreturn]] void fail(const std::string& section, const Entry& e, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(e.line) + ": [" + section + "] " + e.key + ": " +
                      msg);
  }

  [[noreturn]] void fail_missing(const std::string& section, const std::string& key) const {
    throw ConfigError(source_ + ": missing required key [" + section + "] " + key);
  }

  std::optional<Entry> take(const std::string& section, const std::string& key) {
    auto s = sections_.find(section);
    if (s == sections_.end()) return std::nullopt;
    auto e = s->second.entries.find(key);
    if (e == s->second.entries.end()) return std::nullopt;
    e->second.used = true;
    return e->second;
  }

  Entry require(const std::string& section, const std::string& key) {
    auto e = take(section, key);
    if (!e) fail_missing(section, key);
    return *e;
  }

  double number(const std::string& section, const Entry& e, const std::string& text) const {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
      fail(section, e, "expected a finite number, got '" + text + "'");
    }
    return v;
  }

  double number(const std::string& section, const Entry& e) const {
    return number(section, e, e.value);
  }

  // Number with an optional deg / rad / deg/s / rad/s suffix, in radians.
  double angle(const std::string& section, const Entry& e, const std::string& text) const {
    static const std::pair<const char*, double> kSuffixes[] = {
        {"deg/s", kDegree}, {"rad/s", 1.0}, {"deg", kDegree}, {"rad", 1.0}};
    for (const auto& [suffix, factor] : kSuffixes) {
      const std::string_view sv(suffix);
      if (text.size() > sv.size() && text.compare(text.size() - sv.size(), sv.size(), sv) == 0) {
        return number(section, e, trim(std::string_view(text).substr(0, text.size() - sv.size()))) *
               factor;
      }
    }
    return number(section, e, text);
  }

  std::size_t count(const std::string& section, const Entry& e) const {
    const double v = number(section, e);
    if (v < 0.0 || v != std::floor(v) || v > 1e9) {
      fail(section, e, "expected a non-negative integer");
    }
    return static_cast<std::size_t>(v);
  }

  bool boolean(const std::string& section, const Entry& e) const {
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    fail(section, e, "expected true or false");
  }

  std::vector<double> list(const std::string& section, const Entry& e, bool angles = false) const {
    std::vector<double> out;
    if (e.value.empty()) return out;
    for (const std::string& item : split(e.value, ',')) {
      out.push_back(angles ? angle(section, e, item) : number(section, e, item));
    }
    return out;
  }

  Matrix matrix(const std::string& section, const Entry& e, const std::string& text) const {
    const auto rows = split(text, ';');
    std::vector<double> entries;
    std::size_t cols = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto items = split(rows[r], ',');
      if (r == 0) cols = items.size();
      if (items.size() != cols) fail(section, e, "rows have different lengths");
      for (const auto& item : items) entries.push_back(number(section, e, item));
    }
    return Matrix(rows.size(), cols, std::move(entries));
  }

  Matrix matrix(const std::string& section, const Entry& e) const {
    return matrix(section, e, e.value);
  }

  template <typename Enum>
  Enum choice(const std::string& section, const Entry& e,
              std::initializer_list<std::pair<const char*, Enum>> options) const {
    std::string names;
    for (const auto& [name, value] : options) {
      if (e.value == name) return value;
      names += names.empty() ? name : std::string(", ") + name;
    }
    fail(section, e, "expected one of " + names + ", got '" + e.value + "'");
  }

  // Every key that was never taken is an error.
  void reject_unused() const {
    for (const auto& [name, section] : sections_) {
      for (const auto& [key, entry] : section.entries) {
        if (!entry.used) {
          throw ConfigError(source_ + ":" + std::to_string(entry.line) + ": [" + name +
                            "] unknown key '" + key + "'");
        }
      }
    }
  }

  const std::string& source() const { return source_; }

 private:
  void load(std::string_view text) {
    std::string current;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      ++line_no;
      const std::string line = trim(text.substr(start, end - start));
      start = end + 1;
      if (line.empty() || line[0] == '#') {
        if (end == text.size()) break;
        continue;
      }
      const std::string where = source_ + ":" + std::to_string(line_no) + ": ";
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(where + "malformed section header");
        current = trim(std::string_view(line).substr(1, line.size() - 2));
        if (std::find(std::begin(kSections), std::end(kSections), current) == std::end(kSections)) {
          throw ConfigError(where + "unknown section [" + current + "]");
        }
        if (sections_.count(current)) throw ConfigError(where + "duplicate section [" + current + "]");
        sections_[current].line = line_no;
      } else {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        if (current.empty()) throw ConfigError(where + "key outside of any section");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (key.empty()) throw ConfigError(where + "empty key");
        auto& entries = sections_[current].entries;
        if (entries.count(key)) {
          throw ConfigError(where + "[" + current + "] " + key + ": duplicate key");
        }
        entries[key] = {key, trim(std::string_view(line).substr(eq + 1)), line_no, false};
      }
      if (end == text.size()) break;
    }
  }

  std::string source_;
  std::map<std::string, Section> sections_;
};

SystemDims dims_of(const PlantSpec& p) {
  if (p.type == "chain_integrator") return {p.k, p.n};
  return {2, 1};
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_number(v[i]);
  return out;
}

std::string join(const Vector& v) { return join(std::vector<double>(v.span().begin(), v.span().end())); }

std::string join(const Matrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (i) out += "; ";
    for (std::size_t j = 0; j < m.cols(); ++j) out += (j ? ", " : "") + format_number(m(i, j));
  }
  return out;
}

}  // namespace

std::vector<std::string> plant_types() { return {"pendulum", "chain_integrator"}; }

Scenario parse_scenario_text(std::string_view text, const std::string& source) {
  Parser p(text, source);
  Scenario s;

  s.name = p.require("scenario", "name").value;
  if (s.name.empty()) p.fail("scenario", p.require("scenario", "name"), "must not be empty");

  // [plant]
  const Entry type = p.require("plant", "type");
  s.plant.type = type.value;
  if (s.plant.type == "pendulum") {
    s.plant.g = p.number("plant", p.require("plant", "g"));
    const Entry l = p.require("plant", "l");
    s.plant.l = p.number("plant", l);
    if (!(s.plant.l > 0.0)) p.fail("plant", l, "pendulum length must be positive");
    s.plant.b = p.number("plant", p.require("plant", "b"));
  } else if (s.plant.type == "chain_integrator") {
    const Entry k = p.require("plant", "k");
    const Entry n = p.require("plant", "n");
    s.plant.k = p.count("plant", k);
    s.plant.n = p.count("plant", n);
    if (s.plant.k < 1) p.fail("plant", k, "must be at least 1");
    if (s.plant.n < 1) p.fail("plant", n, "must be at least 1");
  } else {
    p.fail("plant", type, "unknown plant type '" + type.value + "'");
  }
  const SystemDims dims = dims_of(s.plant);
  const std::size_t N = dims.state_dim();

  // [simulation]
  const Entry t_final = p.require("simulation", "t_final");
  const Entry dt = p.require("simulation", "dt");
  s.t_final = p.number("simulation", t_final);
  s.dt = p.number("simulation", dt);
  if (!(s.dt > 0.0)) p.fail("simulation", dt, "must be positive");
  if (!(s.t_final >= s.dt)) p.fail("simulation", t_final, "must be at least dt");
  const Entry x0 = p.require("simulation", "x0");
  s.x0 = Vector(p.list("simulation", x0, true));
  if (s.x0.size() != N) {
    p.fail("simulation", x0, "expected " + std::to_string(N) + " entries, got " +
                                 std::to_string(s.x0.size()));
  }

  // [eso]
  if (auto e = p.take("eso", "epsilon")) {
    s.eso.epsilon = p.number("eso", *e);
    if (!(s.eso.epsilon > 0.0)) p.fail("eso", *e, "must be positive");
  }
  if (s.dt > s.eso.epsilon / 10.0 * (1.0 + 1e-12)) {
    p.fail("simulation", dt,
           format_number(s.dt) + " exceeds epsilon / 10 = " + format_number(s.eso.epsilon / 10.0));
  }
  if (auto e = p.take("eso", "coefficients")) {
    s.eso.coefficients = p.list("eso", *e);
    if (s.eso.coefficients.size() != dims.k + 1) {
      p.fail("eso", *e, "expected k + 1 = " + std::to_string(dims.k + 1) + " coefficients");
    }
  }
  if (auto e = p.take("eso", "state_offset")) {
    s.eso.state_offset = Vector(p.list("eso", *e, true));
    if (s.eso.state_offset.size() != N) {
      p.fail("eso", *e, "expected " + std::to_string(N) + " entries");
    }
  }
  if (auto e = p.take("eso", "ext")) {
    if (e->value != "drift") {
      s.eso.ext = ExtInit::Values;
      s.eso.ext_values = Vector(p.list("eso", *e));
      if (s.eso.ext_values.size() != dims.n) {
        p.fail("eso", *e, "expected 'drift' or " + std::to_string(dims.n) + " values");
      }
    }
  }
  if (auto e = p.take("eso", "g_hat_source")) {
    s.eso.g_hat_from_measurement =
        p.choice<bool>("eso", *e, {{"estimate", false}, {"measurement", true}});
  }

  // [controller]
  if (auto e = p.take("controller", "mode")) {
    s.controller.mode = p.choice<controller::ControlMode>(
        "controller", *e,
        {{"switching", controller::ControlMode::Switching},
         {"sdre", controller::ControlMode::SdreEsoOnly},
         {"adrc", controller::ControlMode::AdrcOnly}});
  }
  const Entry Q = p.require("controller", "Q");
  s.controller.Q = p.matrix("controller", Q);
  if (s.controller.Q.rows() != N || s.controller.Q.cols() != N) {
    p.fail("controller", Q, "expected a " + std::to_string(N) + " x " + std::to_string(N) +
                                " matrix");
  }
  const Entry R = p.require("controller", "R");
  s.controller.R = p.matrix("controller", R);
  if (s.controller.R.rows() != dims.n || s.controller.R.cols() != dims.n) {
    p.fail("controller", R, "expected a " + std::to_string(dims.n) + " x " +
                                std::to_string(dims.n) + " matrix");
  }
  if (auto e = p.take("controller", "tau")) {
    s.controller.tau = p.number("controller", *e);
    if (!(s.controller.tau >= 0.0)) p.fail("controller", *e, "must be non-negative");
  }
  if (auto e = p.take("controller", "u0")) {
    s.controller.u0 = Vector(p.list("controller", *e));
    if (s.controller.u0.size() != dims.n) p.fail("controller", *e, "expected n entries");
  }
  if (auto e = p.take("controller", "variant")) {
    s.controller.variant = p.choice<VariantKind>(
        "controller", *e,
        {{"discontinuous", VariantKind::Discontinuous},
         {"continuous", VariantKind::Continuous},
         {"continuous_scalar", VariantKind::ContinuousScalar}});
    if (s.controller.variant == VariantKind::Continuous && dims.n < 2) {
      p.fail("controller", *e, "the continuous variant needs n >= 2");
    }
    if (s.controller.variant == VariantKind::ContinuousScalar && !(dims == SystemDims{2, 1})) {
      p.fail("controller", *e, "the continuous_scalar variant needs k = 2, n = 1");
    }
  }
  if (auto e = p.take("controller", "rho")) {
    s.controller.rho = Vector(p.list("controller", *e));
    if (s.controller.rho.size() != dims.n) p.fail("controller", *e, "expected n entries");
  }
  if (auto e = p.take("controller", "weights")) {
    s.controller.weights = p.matrix("controller", *e);
    if (s.controller.weights.rows() != dims.n || s.controller.weights.cols() != N) {
      p.fail("controller", *e, "expected an n x kn matrix");
    }
  }
  if (auto e = p.take("controller", "varpi")) s.controller.varpi = p.number("controller", *e);
  if (auto e = p.take("controller", "varrho")) {
    s.controller.varrho = Vector(p.list("controller", *e));
    if (s.controller.varrho.size() != dims.n) p.fail("controller", *e, "expected n entries");
  }
  if (auto e = p.take("controller", "continuous_fallback")) {
    s.controller.continuous_fallback = p.boolean("controller", *e);
  }
  if (auto e = p.take("controller", "roa")) {
    s.controller.roa = p.choice<RoaSource>(
        "controller", *e, {{"linearization", RoaSource::Linearization}, {"none", RoaSource::None}});
  }
  if (auto e = p.take("controller", "sign")) {
    s.controller.sign = p.choice<controller::JacobianSign>(
        "controller", *e,
        {{"minus", controller::JacobianSign::Minus},
         {"plus", controller::JacobianSign::Plus}});
  }
  if (auto e = p.take("controller", "dwell_steps")) {
    s.controller.dwell_steps = p.count("controller", *e);
  }
  if (auto e = p.take("controller", "max_switches")) {
    s.controller.max_switches = p.count("controller", *e);
  }

  // [sweep]
  if (auto e = p.take("sweep", "q_scales")) {
    s.sweep.q_scales = p.list("sweep", *e);
    if (s.sweep.q_scales.empty()) p.fail("sweep", *e, "empty sweep list");
    for (double q : s.sweep.q_scales) {
      if (!(q > 0.0)) p.fail("sweep", *e, "scales must be positive");
    }
  }
  if (auto e = p.take("sweep", "gains")) {
    if (!s.sweep.q_scales.empty()) p.fail("sweep", *e, "give either q_scales or gains, not both");
    if (e->value.empty()) p.fail("sweep", *e, "empty sweep list");
    for (const std::string& g : split(e->value, '|')) {
      Matrix K = p.matrix("sweep", *e, g);
      if (K.rows() != dims.n || K.cols() != N) p.fail("sweep", *e, "each gain must be n x kn");
      s.sweep.gains.push_back(std::move(K));
    }
  }
  if (auto e = p.take("sweep", "workers")) {
    s.sweep.workers = p.count("sweep", *e);
    if (s.sweep.workers < 1) p.fail("sweep", *e, "must be at least 1");
  }

  // [output]
  if (auto e = p.take("output", "dir")) {
    if (e->value.empty()) p.fail("output", *e, "must not be empty");
    s.output.dir = e->value;
  }
  if (auto e = p.take("output", "csv_stride")) {
    s.output.csv_stride = p.count("output", *e);
    if (s.output.csv_stride < 1) p.fail("output", *e, "must be at least 1");
  }

  p.reject_unused();

  // Remaining invariants (definiteness of Q and R, variant parameters, the
  // offline ROA construction) are checked by building the simulator inputs.
  try {
    const sim::Plant plant = build_plant(s);
    sim::validate(build_sim_config(s, plant), plant);
  } catch (const Error& e) {
    throw ConfigError(p.source() + ": " + e.what());
  }
  return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario_text(text.str(), path.string());
}

std::string serialize(const Scenario& s) {
  std::ostringstream out;
  out << "[scenario]\nname = " << s.name << "\n\n[plant]\ntype = " << s.plant.type << "\n";
  if (s.plant.type == "chain_integrator") {
    out << "k = " << s.plant.k << "\nn = " << s.plant.n << "\n";
  } else {
    out << "g = " << format_number(s.plant.g) << "\nl = " << format_number(s.plant.l)
        << "\nb = " << format_number(s.plant.b) << "\n";
  }

  out << "\n[simulation]\nt_final = " << format_number(s.t_final)
      << "\ndt = " << format_number(s.dt) << "\nx0 = " << join(s.x0) << "\n";

  out << "\n[eso]\nepsilon = " << format_number(s.eso.epsilon) << "\n";
  if (!s.eso.coefficients.empty()) out << "coefficients = " << join(s.eso.coefficients) << "\n";
  if (!s.eso.state_offset.empty()) out << "state_offset = " << join(s.eso.state_offset) << "\n";
  out << "ext = " << (s.eso.ext == ExtInit::Drift ? "drift" : join(s.eso.ext_values)) << "\n";
  out << "g_hat_source = " << (s.eso.g_hat_from_measurement ? "measurement" : "estimate") << "\n";

  const ControllerSpec& c = s.controller;
  out << "\n[controller]\nmode = " << controller::to_string(c.mode) << "\nQ = " << join(c.Q)
      << "\nR = " << join(c.R) << "\ntau = " << format_number(c.tau) << "\n";
  if (!c.u0.empty()) out << "u0 = " << join(c.u0) << "\n";
  out << "variant = "
      << (c.variant == VariantKind::Discontinuous ? "discontinuous"
          : c.variant == VariantKind::Continuous  ? "continuous"
                                                  : "continuous_scalar")
      << "\n";
  if (!c.rho.empty()) out << "rho = " << join(c.rho) << "\n";
  if (c.weights.rows()) out << "weights = " << join(c.weights) << "\n";
  out << "varpi = " << format_number(c.varpi) << "\n";
  if (!c.varrho.empty()) out << "varrho = " << join(c.varrho) << "\n";
  out << "continuous_fallback = " << (c.continuous_fallback ? "true" : "false") << "\n";
  out << "roa = " << (c.roa == RoaSource::Linearization ? "linearization" : "none") << "\n";
  out << "sign = " << (c.sign == controller::JacobianSign::Minus ? "minus" : "plus")
      << "\ndwell_steps = " << c.dwell_steps << "\nmax_switches = " << c.max_switches << "\n";

  out << "\n[sweep]\n";
  if (!s.sweep.q_scales.empty()) out << "q_scales = " << join(s.sweep.q_scales) << "\n";
  if (!s.sweep.gains.empty()) {
    out << "gains = ";
    for (std::size_t i = 0; i < s.sweep.gains.size(); ++i) {
      out << (i ? " | " : "") << join(s.sweep.gains[i]);
    }
    out << "\n";
  }
  out << "workers = " << s.sweep.workers << "\n";

  out << "\n[output]\ndir = " << s.output.dir << "\ncsv_stride = " << s.output.csv_stride << "\n";
  return out.str();
}

sim::Plant build_plant(const Scenario& s) {
  if (s.plant.type == "pendulum") return sim::pendulum_plant(s.plant.g, s.plant.l, s.plant.b);
  if (s.plant.type == "chain_integrator") return sim::chain_integrator_plant({s.plant.k, s.plant.n});
  throw ConfigError("unknown plant type '" + s.plant.type + "'");
}

sim::SimConfig build_sim_config(const Scenario& s, const sim::Plant& plant) {
  const SystemDims dims = plant.dims;
  sim::SimConfig cfg;
  cfg.t_final = s.t_final;
  cfg.dt = s.dt;
  cfg.x0 = s.x0;

  eso::LinearHighGain gain;
  gain.epsilon = s.eso.epsilon;
  gain.coefficients =
      s.eso.coefficients.empty() ? eso::default_coefficients(dims.k) : s.eso.coefficients;
  cfg.eso = {dims, gain, plant.G_hat, s.eso.g_hat_from_measurement};

  Vector xhat0 = s.x0;
  if (!s.eso.state_offset.empty()) xhat0 = xhat0 + s.eso.state_offset;
  const Vector ext0 = s.eso.ext == ExtInit::Drift ? plant.f(s.x0) : s.eso.ext_values;
  cfg.eso_init = eso::initialize(xhat0, ext0, dims);

  const ControllerSpec& c = s.controller;
  controller::ControllerConfig& cc = cfg.controller;
  cc.dims = dims;
  cc.Q = c.Q;
  cc.R = c.R;
  switch (c.variant) {
    case VariantKind::Discontinuous:
      cc.sdc_variant = sdc::DiscontinuousVariant{c.rho, c.weights};
      break;
    case VariantKind::Continuous:
      cc.sdc_variant = sdc::ContinuousVariant{c.varpi, c.varrho, {}};
      break;
    case VariantKind::ContinuousScalar:
      cc.sdc_variant = sdc::ContinuousScalarVariant{};
      break;
  }
  cc.tau = c.tau;
  cc.u0 = c.u0;
  cc.mode = c.mode;
  cc.g_hat = plant.G_hat;
  cc.continuous_fallback = c.continuous_fallback;
  cc.dwell_steps = c.dwell_steps;
  if (c.roa == RoaSource::Linearization && c.mode == controller::ControlMode::Switching) {
    if (!plant.df0 || !plant.B0_true) {
      throw ConfigError("plant '" + plant.name + "' has no linearization for the ROA estimate");
    }
    cc.roa = controller::closed_loop_jacobian(*plant.df0, *plant.B0_true, c.Q, c.R, c.sign);
  }
  return cfg;
}

}  // namespace sdre_eso::scenario
