#include "pdes/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pdes {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) items.push_back(trim(item));
  return items;
}

double parse_double(const std::string& value, const std::string& key) {
  const std::string v = trim(value);
  const char* begin = v.c_str();
  char* end = nullptr;
  const double out = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ConfigError("config: bad number for key '" + key + "': " + value);
  return out;
}

long parse_long(const std::string& value, const std::string& key) {
  const double v = parse_double(value, key);
  const long out = static_cast<long>(v);
  if (static_cast<double>(out) != v)
    throw ConfigError("config: key '" + key + "' must be an integer");
  return out;
}

std::vector<double> parse_double_list(const std::string& value,
                                      const std::string& key) {
  std::vector<double> out;
  for (const std::string& item : split_list(value))
    out.push_back(parse_double(item, key));
  return out;
}

struct RawConfig {
  std::map<std::string, std::string> scalars;
  std::vector<std::string> edges;
  std::vector<std::string> agents;
};

RawConfig read_raw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  RawConfig raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: empty key on line " + std::to_string(lineno));
    if (key == "edge") {
      raw.edges.push_back(value);
    } else if (key == "agent") {
      raw.agents.push_back(value);
    } else {
      if (raw.scalars.count(key))
        throw ConfigError("config: duplicate key '" + key + "'");
      raw.scalars[key] = value;
    }
  }
  return raw;
}

const std::set<std::string> kKnownKeys = {
    "problem",      "problem.name", "lambda",     "variant",   "iters",
    "alpha.family", "alpha.a",      "alpha.b",    "alpha.p",   "eps.family",
    "eps.a",        "eps.b",        "eps.p",      "eps.const", "norm.c",
    "norm.rounds",  "x0",           "v0",         "seed",      "out"};

ScheduleSpec parse_schedule(const RawConfig& raw, const std::string& prefix) {
  ScheduleSpec spec;
  const auto get = [&](const std::string& suffix) -> const std::string* {
    auto it = raw.scalars.find(prefix + "." + suffix);
    return it == raw.scalars.end() ? nullptr : &it->second;
  };
  const std::string* family = get("family");
  const std::string* shorthand =
      prefix == "eps" ? get("const") : nullptr;
  if (shorthand) {
    if (family)
      throw ConfigError("config: give either eps.const or eps.family");
    spec.family = "constant";
    spec.a = parse_double(*shorthand, "eps.const");
    return spec;
  }
  if (!family) throw ConfigError("config: missing key '" + prefix + ".family'");
  spec.family = *family;
  if (spec.family == "power") {
    const std::string* a = get("a");
    const std::string* b = get("b");
    const std::string* p = get("p");
    if (!a || !b || !p)
      throw ConfigError("config: power schedule '" + prefix +
                        "' needs a, b and p");
    spec.a = parse_double(*a, prefix + ".a");
    spec.b = parse_double(*b, prefix + ".b");
    spec.p = parse_double(*p, prefix + ".p");
  } else if (spec.family == "constant") {
    const std::string* a = get("a");
    if (!a)
      throw ConfigError("config: constant schedule '" + prefix + "' needs a");
    spec.a = parse_double(*a, prefix + ".a");
  } else {
    throw ConfigError("config: unknown schedule family '" + spec.family + "'");
  }
  return spec;
}

std::string default_out(const std::string& path) {
  std::string stem = path;
  const auto slash = stem.find_last_of('/');
  if (slash != std::string::npos) stem = stem.substr(slash + 1);
  const auto dot = stem.find_last_of('.');
  if (dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
  return stem + ".csv";
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  const RawConfig raw = read_raw(path);
  for (const auto& [key, value] : raw.scalars)
    if (!kKnownKeys.count(key))
      throw ConfigError("config: unknown key '" + key + "'");

  ExperimentConfig cfg;
  const auto get = [&](const std::string& key) -> const std::string* {
    auto it = raw.scalars.find(key);
    return it == raw.scalars.end() ? nullptr : &it->second;
  };
  const auto require = [&](const std::string& key) -> const std::string& {
    const std::string* v = get(key);
    if (!v) throw ConfigError("config: missing key '" + key + "'");
    return *v;
  };

  if (const std::string* v = get("problem")) cfg.problem = trim(*v);
  if (cfg.problem != "lasso" && cfg.problem != "custom")
    throw ConfigError("config: problem must be 'lasso' or 'custom'");
  if (cfg.problem == "custom") {
    cfg.custom_name = require("problem.name");
  } else {
    if (get("problem.name"))
      throw ConfigError("config: problem.name is only valid with custom");
    cfg.lambda = parse_double(require("lambda"), "lambda");
    if (cfg.lambda < 0) throw ConfigError("config: lambda must be >= 0");
    if (raw.agents.empty())
      throw ConfigError("config: lasso problem needs agent lines");
  }

  for (const std::string& a : raw.agents) {
    const auto items = parse_double_list(a, "agent");
    if (items.size() != 3)
      throw ConfigError("config: agent lines are 'p, lower, upper'");
    if (std::isnan(items[1]) || std::isnan(items[2]) || items[1] > items[2])
      throw ConfigError("config: agent interval has lower > upper");
    cfg.agents.push_back({items[0], items[1], items[2]});
  }

  const int n = cfg.problem == "lasso" ? static_cast<int>(cfg.agents.size())
                                       : -1;  // custom: checked at build time
  for (const std::string& e : raw.edges) {
    const auto items = parse_double_list(e, "edge");
    if (items.size() != 3)
      throw ConfigError("config: edge lines are 'i, j, weight'");
    const long i = static_cast<long>(items[0]);
    const long j = static_cast<long>(items[1]);
    if (static_cast<double>(i) != items[0] ||
        static_cast<double>(j) != items[1] || i < 1 || j < 1)
      throw ConfigError("config: edge endpoints must be 1-indexed integers");
    if (n > 0 && (i > n || j > n))
      throw ConfigError("config: edge endpoint exceeds agent count");
    cfg.edges.push_back(
        {static_cast<int>(i - 1), static_cast<int>(j - 1), items[2]});
  }

  const std::string variant = trim(require("variant"));
  if (variant == "plain")
    cfg.variant = Variant::plain;
  else if (variant == "normalized")
    cfg.variant = Variant::normalized;
  else
    throw ConfigError("config: variant must be 'plain' or 'normalized'");

  cfg.iters = parse_long(require("iters"), "iters");
  if (cfg.iters < 0) throw ConfigError("config: iters must be >= 0");

  cfg.alpha = parse_schedule(raw, "alpha");
  cfg.eps = parse_schedule(raw, "eps");

  if (const std::string* v = get("norm.c")) {
    cfg.norm_c = parse_double(*v, "norm.c");
    if (!(*cfg.norm_c > 0)) throw ConfigError("config: norm.c must be > 0");
  }
  if (const std::string* v = get("norm.rounds")) {
    cfg.norm_rounds = static_cast<int>(parse_long(*v, "norm.rounds"));
    if (*cfg.norm_rounds < 1)
      throw ConfigError("config: norm.rounds must be >= 1");
  }
  if (cfg.variant == Variant::normalized && (!cfg.norm_c || !cfg.norm_rounds))
    throw ConfigError(
        "config: normalized variant needs norm.c and norm.rounds");

  cfg.x0 = parse_double_list(require("x0"), "x0");
  if (const std::string* v = get("v0")) cfg.v0 = parse_double_list(*v, "v0");
  if (const std::string* v = get("seed"))
    cfg.seed = static_cast<unsigned long>(parse_long(*v, "seed"));
  cfg.out = get("out") ? trim(*get("out")) : default_out(path);
  if (cfg.out.empty()) throw ConfigError("config: out must not be empty");
  return cfg;
}

CommGraph build_graph(const ExperimentConfig& cfg, int node_count) {
  try {
    return CommGraph::from_edges(node_count, cfg.edges);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ProblemInstance build_problem(const ExperimentConfig& cfg) {
  if (cfg.problem == "custom") {
    const InstanceFactory* factory = find_instance(cfg.custom_name);
    if (!factory)
      throw ConfigError("config: unknown custom problem '" + cfg.custom_name +
                        "'");
    return (*factory)();
  }
  std::vector<double> p;
  std::vector<Interval> sets;
  for (const AgentSpec& a : cfg.agents) {
    p.push_back(a.p);
    sets.push_back(Interval(a.lower, a.upper));
  }
  try {
    return lasso_instance(cfg.lambda, p, sets);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

Schedule build_schedule(const ScheduleSpec& spec) {
  try {
    if (spec.family == "power") return Schedule::power(spec.a, spec.b, spec.p);
    if (spec.family == "constant") return Schedule::constant(spec.a);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  throw ConfigError("config: unknown schedule family '" + spec.family + "'");
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_initial_state(
    const ExperimentConfig& cfg, const ProblemInstance& prob) {
  const int n = prob.agent_count();
  const int d = prob.dimension();
  if (static_cast<int>(cfg.x0.size()) != n * d)
    throw ConfigError("config: x0 needs " + std::to_string(n * d) +
                      " values");
  if (!cfg.v0.empty() && static_cast<int>(cfg.v0.size()) != n * d)
    throw ConfigError("config: v0 needs " + std::to_string(n * d) +
                      " values");
  Eigen::MatrixXd x0(n, d);
  Eigen::MatrixXd v0 = Eigen::MatrixXd::Zero(n, d);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) {
      x0(i, c) = cfg.x0[static_cast<size_t>(i * d + c)];
      if (!cfg.v0.empty()) v0(i, c) = cfg.v0[static_cast<size_t>(i * d + c)];
    }
  return {std::move(x0), std::move(v0)};
}

void check_feasibility_assumption(const ExperimentConfig& cfg) {
  if (cfg.problem != "lasso") return;
  std::vector<Interval> sets;
  for (const AgentSpec& a : cfg.agents)
    sets.push_back(Interval(a.lower, a.upper));
  if (!intersect(sets))
    throw AssumptionError(
        1, "Assumption 1 violated: the constraint sets have an empty "
           "intersection");
}

void check_connectivity_assumption(const CommGraph& g) {
  if (!is_connected(g))
    throw AssumptionError(
        2, "Assumption 2 violated: the communication graph is not connected");
}

}  // namespace pdes
