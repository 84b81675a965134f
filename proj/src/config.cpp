#include "idemc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "idemc/builtin_problems.hpp"
#include "idemc/errors.hpp"
#include "idemc/external_evaluator.hpp"

namespace idemc {

namespace {

// Raised by value parsers; rethrown as ParseError with key and line.
struct BadValue {
  std::string reason;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view s) {
  s = trim(s);
  if (s == "inf" || s == "unbounded") return kUnbounded;
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v)) {
    throw BadValue{"expected a real number, got '" + std::string(s) + "'"};
  }
  return v;
}

std::uint64_t to_unsigned(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) {
    throw BadValue{"expected a non-negative integer, got '" + std::string(s) + "'"};
  }
  return v;
}

std::vector<double> to_list(std::string_view s) {
  std::vector<double> out;
  std::string text(s);
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream in(text);
  std::string item;
  while (in >> item) out.push_back(to_double(item));
  if (out.empty()) throw BadValue{"expected at least one number"};
  return out;
}

bool to_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw BadValue{"expected true or false, got '" + std::string(s) + "'"};
}

double in_open_unit(double v) {
  if (!(v > 0.0 && v < 1.0)) throw BadValue{"must lie strictly between 0 and 1"};
  return v;
}
double in_half_open_unit(double v) {
  if (!(v > 0.0 && v <= 1.0)) throw BadValue{"must lie in (0, 1]"};
  return v;
}
double positive(double v) {
  if (!(v > 0.0)) throw BadValue{"must be positive"};
  return v;
}
std::uint64_t at_least(std::uint64_t v, std::uint64_t lo) {
  if (v < lo) throw BadValue{"must be at least " + std::to_string(lo)};
  return v;
}

std::string show(double v) {
  if (v == kUnbounded) return "inf";
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}
std::string show(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + show(v[k]);
  return out;
}

const char* crossover_name(CrossoverKind k) {
  switch (k) {
    case CrossoverKind::OnePoint:
      return "one_point";
    case CrossoverKind::KPoint:
      return "k_point";
    case CrossoverKind::Uniform:
      return "uniform";
  }
  return "one_point";
}

struct Entry {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {"problem.name", [](RunConfig& c, std::string_view v) { c.problem.name = std::string(trim(v)); },
       [](const RunConfig& c) { return c.problem.name; }},
      {"problem.cutoffs",
       [](RunConfig& c, std::string_view v) {
         c.problem.cutoffs = to_list(v);
         for (double a : c.problem.cutoffs) positive(a);
       },
       [](const RunConfig& c) {
         return c.problem.cutoffs.empty() ? std::string("default") : show(c.problem.cutoffs);
       }},
      {"problem.gamma", [](RunConfig& c, std::string_view v) { c.problem.gamma = positive(to_double(v)); },
       [](const RunConfig& c) {
         return show(c.problem.gamma.value_or(TwinEllipsoid10d::kDefaultGamma));
       }},
      {"problem.command",
       [](RunConfig& c, std::string_view v) { c.problem.command = std::string(trim(v)); },
       [](const RunConfig& c) { return c.problem.command; }},
      {"problem.lower", [](RunConfig& c, std::string_view v) { c.problem.lower = to_list(v); },
       [](const RunConfig& c) { return show(c.problem.lower); }},
      {"problem.upper", [](RunConfig& c, std::string_view v) { c.problem.upper = to_list(v); },
       [](const RunConfig& c) { return show(c.problem.upper); }},

      {"ladder.p", [](RunConfig& c, std::string_view v) { c.ladder.p = in_open_unit(to_double(v)); },
       [](const RunConfig& c) { return show(c.ladder.p); }},
      {"ladder.s", [](RunConfig& c, std::string_view v) { c.ladder.s = at_least(to_unsigned(v), 1); },
       [](const RunConfig& c) { return std::to_string(c.ladder.s); }},
      {"ladder.s_n", [](RunConfig& c, std::string_view v) { c.ladder.s_n = to_unsigned(v); },
       [](const RunConfig& c) { return std::to_string(c.ladder.s_n); }},
      {"ladder.max_rungs",
       [](RunConfig& c, std::string_view v) { c.ladder.max_rungs = at_least(to_unsigned(v), 1); },
       [](const RunConfig& c) { return std::to_string(c.ladder.max_rungs); }},
      {"ladder.cluster_cap",
       [](RunConfig& c, std::string_view v) { c.ladder.cluster_cap = at_least(to_unsigned(v), 2); },
       [](const RunConfig& c) { return std::to_string(c.ladder.cluster_cap); }},
      {"ladder.max_k",
       [](RunConfig& c, std::string_view v) { c.ladder.clustering.max_k = at_least(to_unsigned(v), 1); },
       [](const RunConfig& c) { return std::to_string(c.ladder.clustering.max_k); }},
      {"ladder.ridge",
       [](RunConfig& c, std::string_view v) { c.ladder.clustering.ridge = positive(to_double(v)); },
       [](const RunConfig& c) { return show(c.ladder.clustering.ridge); }},
      {"ladder.kmeans_restarts",
       [](RunConfig& c, std::string_view v) {
         c.ladder.clustering.restarts = at_least(to_unsigned(v), 1);
       },
       [](const RunConfig& c) { return std::to_string(c.ladder.clustering.restarts); }},

      {"moves.M",
       [](RunConfig& c, std::string_view v) {
         c.ladder.moves.mutations_per_step = at_least(to_unsigned(v), 1);
       },
       [](const RunConfig& c) { return std::to_string(c.ladder.moves.mutations_per_step); }},
      {"moves.pm_burn",
       [](RunConfig& c, std::string_view v) {
         c.ladder.moves.mutation_probability = in_half_open_unit(to_double(v));
       },
       [](const RunConfig& c) { return show(c.ladder.moves.mutation_probability); }},
      {"moves.pm_samp",
       [](RunConfig& c, std::string_view v) { c.pm_samp = in_half_open_unit(to_double(v)); },
       [](const RunConfig& c) { return show(c.pm_samp); }},
      {"moves.omega",
       [](RunConfig& c, std::string_view v) {
         c.ladder.clustering.omega = in_half_open_unit(to_double(v));
       },
       [](const RunConfig& c) { return show(c.ladder.clustering.omega); }},
      {"moves.crossover",
       [](RunConfig& c, std::string_view v) {
         v = trim(v);
         if (v == "one_point") {
           c.ladder.moves.crossover = CrossoverKind::OnePoint;
         } else if (v == "k_point") {
           c.ladder.moves.crossover = CrossoverKind::KPoint;
         } else if (v == "uniform") {
           c.ladder.moves.crossover = CrossoverKind::Uniform;
         } else {
           throw BadValue{"expected one_point, k_point or uniform"};
         }
       },
       [](const RunConfig& c) { return std::string(crossover_name(c.ladder.moves.crossover)); }},
      {"moves.crossover_k",
       [](RunConfig& c, std::string_view v) {
         c.ladder.moves.crossover_points = at_least(to_unsigned(v), 1);
       },
       [](const RunConfig& c) { return std::to_string(c.ladder.moves.crossover_points); }},
      {"moves.cov_scale",
       [](RunConfig& c, std::string_view v) { c.ladder.covariance_scale = positive(to_double(v)); },
       [](const RunConfig& c) { return show(c.ladder.covariance_scale); }},
      {"moves.truncated",
       [](RunConfig& c, std::string_view v) {
         c.ladder.kernel = to_bool(v) ? KernelKind::TruncatedNormal : KernelKind::Normal;
       },
       [](const RunConfig& c) {
         return std::string(c.ladder.kernel == KernelKind::TruncatedNormal ? "true" : "false");
       }},
      {"moves.ordering",
       [](RunConfig& c, std::string_view v) {
         // One-based coordinate indices, most active first.
         c.ladder.moves.ordering.clear();
         for (double k : to_list(v)) {
           if (k < 1 || k != std::floor(k)) throw BadValue{"ordering entries are indices >= 1"};
           c.ladder.moves.ordering.push_back(static_cast<std::size_t>(k) - 1);
         }
       },
       [](const RunConfig& c) {
         std::string out;
         for (std::size_t k = 0; k < c.ladder.moves.ordering.size(); ++k) {
           out += (k ? ", " : "") + std::to_string(c.ladder.moves.ordering[k] + 1);
         }
         return out.empty() ? std::string("natural") : out;
       }},

      {"output.N", [](RunConfig& c, std::string_view v) { c.output.N = at_least(to_unsigned(v), 1); },
       [](const RunConfig& c) { return std::to_string(c.output.N); }},
      {"output.T", [](RunConfig& c, std::string_view v) { c.output.T = at_least(to_unsigned(v), 1); },
       [](const RunConfig& c) { return std::to_string(c.output.T); }},
      {"output.dir", [](RunConfig& c, std::string_view v) { c.output.dir = std::string(trim(v)); },
       [](const RunConfig& c) { return c.output.dir; }},

      {"run.seed", [](RunConfig& c, std::string_view v) { c.seed = to_unsigned(v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"run.threads",
       [](RunConfig& c, std::string_view v) { c.threads = at_least(to_unsigned(v), 1); },
       [](const RunConfig& c) { return std::to_string(c.threads); }},

      {"eff.volume",
       [](RunConfig& c, std::string_view v) { c.eff.volume = in_half_open_unit(to_double(v)); },
       [](const RunConfig& c) { return c.eff.volume ? show(*c.eff.volume) : std::string("none"); }},
      {"eff.chromosomes",
       [](RunConfig& c, std::string_view v) { c.eff.chromosomes = at_least(to_unsigned(v), 1); },
       [](const RunConfig& c) {
         return c.eff.chromosomes ? std::to_string(*c.eff.chromosomes) : std::string("none");
       }},
      {"eff.grid_lo",
       [](RunConfig& c, std::string_view v) { c.eff.grid_lo = in_half_open_unit(to_double(v)); },
       [](const RunConfig& c) { return show(c.eff.grid_lo); }},
      {"eff.grid_hi",
       [](RunConfig& c, std::string_view v) { c.eff.grid_hi = in_half_open_unit(to_double(v)); },
       [](const RunConfig& c) { return show(c.eff.grid_hi); }},
      {"eff.per_decade",
       [](RunConfig& c, std::string_view v) { c.eff.per_decade = at_least(to_unsigned(v), 1); },
       [](const RunConfig& c) { return std::to_string(c.eff.per_decade); }},

      {"oracle.method",
       [](RunConfig& c, std::string_view v) {
         v = trim(v);
         if (v != "rejection" && v != "direct") throw BadValue{"expected rejection or direct"};
         c.oracle.method = std::string(v);
       },
       [](const RunConfig& c) { return c.oracle.method; }},
      {"oracle.max_attempts",
       [](RunConfig& c, std::string_view v) { c.oracle.max_attempts = at_least(to_unsigned(v), 1); },
       [](const RunConfig& c) { return std::to_string(c.oracle.max_attempts); }},
  };
  return table;
}

}  // namespace

MoveConfig RunConfig::sampling_moves() const {
  MoveConfig moves = ladder.moves;
  moves.mutation_probability = pm_samp;
  return moves;
}

RunConfig parse_config(std::string_view text) {
  std::map<std::string_view, const Entry*> lookup;
  for (const auto& e : entries()) lookup.emplace(e.key, &e);

  RunConfig config;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'",
                       std::string(line), line_no);
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = lookup.find(key);
    if (it == lookup.end()) {
      throw ParseError("line " + std::to_string(line_no) + ": unknown key '" + key + "'", key,
                       line_no);
    }
    if (!seen.insert(key).second) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'", key,
                       line_no);
    }
    try {
      it->second->set(config, value);
    } catch (const BadValue& bad) {
      throw ParseError("line " + std::to_string(line_no) + ": " + key + " " + bad.reason, key,
                       line_no);
    }
  }
  if (config.problem.name == "external" && config.problem.command.empty()) {
    throw ParseError("problem.command is required for an external problem", "problem.command",
                     0);
  }
  if (config.eff.grid_lo > config.eff.grid_hi) {
    throw ParseError("eff.grid_lo exceeds eff.grid_hi", "eff.grid_lo", 0);
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read config file '" + path + "'", "", 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::vector<std::pair<std::string, std::string>> describe(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : entries()) out.emplace_back(e.key, e.get(config));
  return out;
}

Membership make_membership(const ProblemConfig& problem) {
  if (problem.name != "external") {
    BuiltinOptions options;
    options.cutoffs = problem.cutoffs;
    if (problem.gamma) options.gamma = *problem.gamma;
    return make_builtin(problem.name, options);
  }
  auto evaluator = std::make_shared<ExternalEvaluator>(problem.command);
  const std::size_t d = evaluator->dimension();
  auto bounds = [d](const std::vector<double>& given, const char* key) {
    if (given.size() == 1) return std::vector<double>(d, given.front());
    if (given.size() != d) {
      throw ContractError(std::string(key) + " needs 1 or " + std::to_string(d) + " values");
    }
    return given;
  };
  std::vector<double> cutoffs = problem.cutoffs;
  if (cutoffs.empty()) cutoffs.assign(evaluator->waves(), 3.0);
  return Membership(evaluator,
                    Box(bounds(problem.lower, "problem.lower"), bounds(problem.upper, "problem.upper")),
                    cutoffs);
}

}  // namespace idemc
