#include "cascade/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cascade/error.hpp"
#include "cascade/io.hpp"

namespace cascade {

namespace pt = boost::property_tree;

namespace {

// Calls v(section, key, field) for every configurable field, in canonical order.
template <class Config, class Visitor>
void visit_fields(Config& c, Visitor&& v) {
  v("trap", "kind", c.trap.kind);
  v("trap", "omega", c.trap.omega);
  v("trap", "beta", c.trap.beta);
  v("trap", "r_max", c.trap.r_max);
  v("trap", "n_points", c.trap.n_points);
  v("trap", "K", c.trap.K);
  v("trap", "decay_tol", c.trap.decay_tol);
  v("trap", "gap_tol", c.trap.gap_tol);

  v("kernels", "w_amplitude", c.kernels.w_amplitude);
  v("kernels", "w_width", c.kernels.w_width);
  v("kernels", "v_amplitude", c.kernels.v_amplitude);
  v("kernels", "v_width", c.kernels.v_width);
  v("kernels", "s", c.kernels.s);

  v("momentum", "rho_max", c.momentum.rho_max);
  v("momentum", "n_rho", c.momentum.n_rho);

  v("conventions", "fgr_pi", c.conventions.fgr_pi);
  v("conventions", "epsilon_policy", c.conventions.epsilon_policy);
  v("conventions", "direct_terms", c.conventions.direct_terms);
  v("conventions", "tensor_filter", c.conventions.tensor_filter);
  v("conventions", "tensor_max_K", c.conventions.tensor_max_K);

  v("dynamics", "coefficients", c.dynamics.coefficients);
  v("dynamics", "initial", c.dynamics.initial);
  v("dynamics", "flow", c.dynamics.flow);
  v("dynamics", "eta", c.dynamics.eta);
  v("dynamics", "T_end", c.dynamics.T_end);
  v("dynamics", "rtol", c.dynamics.rtol);
  v("dynamics", "atol", c.dynamics.atol);
  v("dynamics", "samples", c.dynamics.samples);
  v("dynamics", "c_step", c.dynamics.c_step);
  v("dynamics", "normalize", c.dynamics.normalize);
  v("dynamics", "renormalize", c.dynamics.renormalize);
  v("dynamics", "bec_threshold", c.dynamics.bec_threshold);

  v("sweep", "etas", c.sweep.etas);
  v("sweep", "K", c.sweep.K);
  v("sweep", "initial", c.sweep.initial);
  v("sweep", "T0", c.sweep.T0);
  v("sweep", "samples", c.sweep.samples);
  v("sweep", "noise_factor", c.sweep.noise_factor);

  v("output", "dir", c.output.dir);
}

std::string field_name(const char* section, const char* key) {
  return std::string(section) + "." + key;
}

void read_value(const std::string& name, const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out))
    throw config_error(name + ": expected a finite number, got '" + text + "'");
}

void read_value(const std::string& name, const std::string& text, long long& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw config_error(name + ": expected an integer, got '" + text + "'");
}

void read_value(const std::string& name, const std::string& text, bool& out) {
  if (text == "true") out = true;
  else if (text == "false") out = false;
  else throw config_error(name + ": expected true or false, got '" + text + "'");
}

void read_value(const std::string&, const std::string& text, std::string& out) { out = text; }

std::string write_value(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
std::string write_value(long long x) { return std::to_string(x); }
std::string write_value(bool x) { return x ? "true" : "false"; }
std::string write_value(const std::string& x) { return x; }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& what, const std::string& text) {
  double x = 0.0;
  try {
    read_value(what, trim(text), x);
  } catch (const Error&) {
    throw validation_error(what + ": '" + text + "' is not a number");
  }
  return x;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw validation_error(what);
}

}  // namespace

SimulationConfig parse_config_text(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }

  SimulationConfig c;
  std::set<std::string> known;
  visit_fields(c, [&](const char* section, const char* key, auto& field) {
    const std::string name = field_name(section, key);
    known.insert(name);
    const auto sec = tree.get_child_optional(section);
    if (!sec) return;
    const auto val = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (val) read_value(name, trim(*val), field);
  });
  for (const auto& [section, sub] : tree) {
    if (sub.empty() && !sub.data().empty())
      throw config_error("key '" + section + "' appears outside any section");
    for (const auto& [key, value] : sub) {
      (void)value;
      if (!known.count(section + "." + key))
        throw config_error("unknown key '" + section + "." + key + "'");
    }
    bool section_known = false;
    for (const auto& k : known) section_known = section_known || k.rfind(section + ".", 0) == 0;
    if (!section_known) throw config_error("unknown section '" + section + "'");
  }
  return c;
}

SimulationConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string emit_config(const SimulationConfig& c) {
  std::ostringstream out;
  std::string current;
  visit_fields(c, [&](const char* section, const char* key, const auto& field) {
    if (current != section) {
      if (!current.empty()) out << '\n';
      out << '[' << section << "]\n";
      current = section;
    }
    out << key << " = " << write_value(field) << '\n';
  });
  return out.str();
}

std::string config_hash(const SimulationConfig& c) { return io::sha256_hex(emit_config(c)); }

std::vector<double> parse_eta_list(const std::string& s) {
  std::vector<double> etas;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    etas.push_back(parse_number("sweep.etas", tok));
  }
  return etas;
}

std::optional<double> synthetic_rate(const std::string& source) {
  const std::string s = trim(source);
  if (s == "computed") return std::nullopt;
  static const std::regex re(R"(logistic\(\s*([^)]+?)\s*\))");
  std::smatch m;
  if (!std::regex_match(s, m, re))
    throw validation_error("dynamics.coefficients must be 'computed' or 'logistic(G)'");
  return parse_number("dynamics.coefficients", m[1].str());
}

StateVector initial_state(const std::string& spec_in, std::size_t K, bool normalize) {
  const std::string spec = trim(spec_in);
  if (K == 0) throw dimension_error("initial state: K must be positive");
  StateVector F(K, cplx{});
  static const std::regex call(R"(([a-z-]+)\(\s*([^)]*?)\s*\))");
  std::smatch m;
  if (spec == "ground-only") {
    F[0] = 1.0;
  } else if (std::regex_match(spec, m, call)) {
    const std::string name = m[1].str();
    const double arg = parse_number("initial state", m[2].str());
    if (name == "two-mode") {
      require(K >= 2, "two-mode preset needs K >= 2");
      require(arg >= 0.0 && arg <= 1.0, "two-mode(x0): x0 must lie in [0, 1]");
      F[0] = std::sqrt(arg);
      F[1] = std::sqrt(1.0 - arg);
    } else if (name == "uniform") {
      require(arg >= 1.0 && arg == std::floor(arg), "uniform(n): n must be a positive integer");
      const auto n = std::min(static_cast<std::size_t>(arg), K);
      for (std::size_t k = 0; k < n; ++k) F[k] = 1.0 / std::sqrt(static_cast<double>(n));
    } else if (name == "geometric") {
      require(arg > 0.0 && arg < 1.0, "geometric(q): q must lie in (0, 1)");
      for (std::size_t k = 0; k < K; ++k) F[k] = std::pow(arg, static_cast<double>(k));
    } else {
      throw validation_error("unknown initial-data preset '" + name + "'");
    }
  } else {
    std::istringstream in(spec);
    std::size_t k = 0;
    std::string tok;
    while (in >> tok) {
      require(k < K, "initial state has more than K entries");
      std::istringstream one(tok);
      cplx z;
      if (tok.front() == '(') {
        one >> z;
      } else {
        double re = 0.0;
        one >> re;
        z = re;
      }
      require(!one.fail() && one.peek() == std::char_traits<char>::eof(),
              "initial state: cannot read amplitude '" + tok + "'");
      require(std::isfinite(z.real()) && std::isfinite(z.imag()),
              "initial state: amplitudes must be finite");
      F[k++] = z;
    }
    require(k > 0, "initial state is empty");
  }
  if (normalize) {
    const double m = mass(F);
    require(m > 0.0, "initial state has zero mass");
    for (auto& z : F) z /= std::sqrt(m);
  }
  return F;
}

void validate(const SimulationConfig& c) {
  const auto& t = c.trap;
  require(t.kind == "harmonic" || t.kind == "anharmonic",
          "trap.kind must be harmonic or anharmonic");
  require(t.omega > 0.0, "trap.omega must be positive");
  require(t.beta >= 0.0, "trap.beta must be non-negative");
  require(t.r_max > 0.0, "trap.r_max must be positive");
  require(t.n_points >= 16, "trap.n_points must be at least 16");
  require(t.K >= 1, "trap.K must be positive");
  require(4 * t.K < t.n_points, "trap.K must be below n_points / 4");
  require(t.decay_tol > 0.0, "trap.decay_tol must be positive");
  require(t.gap_tol > 0.0, "trap.gap_tol must be positive");

  const auto& k = c.kernels;
  require(k.w_width > 0.0 && k.v_width > 0.0, "kernel widths must be positive");
  require(k.s > 0.5, "kernels.s must exceed 1/2");

  require(c.momentum.rho_max >= 0.0, "momentum.rho_max must be non-negative (0 = automatic)");
  require(c.momentum.n_rho >= 8, "momentum.n_rho must be at least 8");

  try {
    parse_epsilon_policy(c.conventions.epsilon_policy);
    parse_tensor_filter(c.conventions.tensor_filter);
  } catch (const Error& e) {
    throw validation_error(e.what());
  }
  require(c.conventions.tensor_max_K >= 1, "conventions.tensor_max_K must be positive");

  const auto& d = c.dynamics;
  const auto rate = synthetic_rate(d.coefficients);
  if (rate) require(*rate > 0.0, "logistic rate must be positive");
  require(d.flow == "limit" || d.flow == "prelimit", "dynamics.flow must be limit or prelimit");
  require(!(rate && d.flow == "prelimit"), "synthetic coefficients have no prelimit tensor");
  require(d.eta > 0.0, "dynamics.eta must be positive");
  require(d.T_end > 0.0, "dynamics.T_end must be positive");
  require(d.rtol > 0.0 && d.atol > 0.0, "solver tolerances must be positive");
  require(d.samples >= 2, "dynamics.samples must be at least 2");
  require(d.c_step > 0.0, "dynamics.c_step must be positive");
  require(d.bec_threshold > 0.0, "dynamics.bec_threshold must be positive");
  if (rate) require(t.K >= 2, "logistic coefficients need trap.K >= 2");
  initial_state(d.initial, static_cast<std::size_t>(t.K), d.normalize);
  if (d.flow == "prelimit")
    require(t.K <= c.conventions.tensor_max_K, "trap.K exceeds the prelimit tensor guard");

  const auto& s = c.sweep;
  const auto etas = parse_eta_list(s.etas);
  for (std::size_t i = 0; i < etas.size(); ++i) {
    require(etas[i] > 0.0, "sweep.etas must be positive");
    require(i == 0 || etas[i] < etas[i - 1], "sweep.etas must be strictly decreasing");
  }
  require(s.K >= 1 && s.K <= c.conventions.tensor_max_K, "sweep.K must be in [1, tensor_max_K]");
  require(4 * s.K < t.n_points, "sweep.K must be below n_points / 4");
  initial_state(s.initial, static_cast<std::size_t>(s.K), true);
  require(s.T0 > 0.0, "sweep.T0 must be positive");
  require(s.samples >= 200, "sweep.samples must be at least 200");
  require(s.noise_factor >= 1.0, "sweep.noise_factor must be at least 1");

  require(!c.output.dir.empty(), "output.dir must not be empty");
}

CoefficientOptions coefficient_options(const SimulationConfig& c) {
  CoefficientOptions o;
  o.fgr_pi = c.conventions.fgr_pi;
  o.direct_terms = c.conventions.direct_terms;
  o.epsilon_policy = parse_epsilon_policy(c.conventions.epsilon_policy);
  o.filter = parse_tensor_filter(c.conventions.tensor_filter);
  o.tensor_max_K = static_cast<std::size_t>(c.conventions.tensor_max_K);
  return o;
}

SolverOptions solver_options(const SimulationConfig& c) {
  SolverOptions o;
  o.rtol = c.dynamics.rtol;
  o.atol = c.dynamics.atol;
  o.c_step = c.dynamics.c_step;
  o.renormalize = c.dynamics.renormalize;
  return o;
}

}  // namespace cascade
