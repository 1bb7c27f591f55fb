#pragma once

// JSON model configuration (schema_version 1) and %.17g CSV helpers.
//
// {
//   "schema_version": 1,
//   "vertices": ["A", "B"],
//   "edges": [{"from": "A", "to": "B", "theta": 0.003}, ...],   // or "lambda"
//   "N": 500, "L": 1500,
//   "selection": [{"fitness": [0, 1], "multiplicity": 1000},
//                 {"gamma": [[0, 1], [-1, 0]], "multiplicity": 400},
//                 {"neutral": true, "multiplicity": 100}],
//   "dfe": {"family": "exponential", "rate": 1, "neutral_weight": 0},
//   "sim": {"dt": 1e-5, "horizon": 1000, "replicates": 8, "seed": 1}
// }
//
// theta_uv = lambda_uv L. Missing "selection" means one neutral class.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wfgraph/dfe.hpp"
#include "wfgraph/errors.hpp"
#include "wfgraph/graph_model.hpp"
#include "wfgraph/multilocus.hpp"
#include "wfgraph/simulator.hpp"

namespace wfg {

inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip-safe text for a double: printf %.17g.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct DfeConfig {
  std::string family = "exponential";  // exponential | gamma
  double rate = 1.0;
  double shape = 1.0;
  double scale = 1.0;
  double neutral_weight = 0.0;

  ContinuousDfe build() const {
    if (family == "exponential") return ContinuousDfe::exponential(rate, neutral_weight);
    if (family == "gamma") return ContinuousDfe::gamma(shape, scale, neutral_weight);
    throw StructuralError("config: dfe.family must be 'exponential' or 'gamma', got '" + family + "'");
  }
};

struct SimSettings {
  double dt = 1e-5;
  double horizon = 1e3;
  std::size_t replicates = 8;
  std::uint64_t seed = 1;
  std::optional<double> x;  // default 1 / N
  std::size_t thinning = 1;
  std::size_t bins = 200;
  double burn_in_fraction = 0.1;
};

struct ModelConfig {
  int schema_version = kSchemaVersion;
  std::string convention;  // "lambda" or "theta"
  AlleleGraph theta;
  double N = 0.0;
  std::uint64_t L = 1;
  std::vector<SelectionClass> classes;
  std::optional<DfeConfig> dfe;
  std::optional<SimSettings> sim;

  AlleleGraph lambda() const { return theta.scaled(1.0 / static_cast<double>(L)); }
  LocusEnsemble ensemble() const { return LocusEnsemble(theta, classes, L, N); }

  const SelectionClass& selection_class(std::size_t j) const {
    if (j >= classes.size()) {
      std::ostringstream msg;
      msg << "selection class " << j << " does not exist (config has " << classes.size() << ")";
      throw DomainError(msg.str());
    }
    return classes[j];
  }

  SimConfig sim_config(std::size_t j = 0, unsigned threads = 0) const {
    const SimSettings s = sim.value_or(SimSettings{});
    SimConfig c;
    c.graph = lambda();
    c.selection = selection_class(j).selection;
    c.x = s.x.value_or(1.0 / N);
    c.dt = s.dt;
    c.horizon = s.horizon;
    c.replicates = s.replicates;
    c.seed = s.seed;
    c.thinning = s.thinning;
    c.bins = s.bins;
    c.burn_in_fraction = s.burn_in_fraction;
    c.threads = threads;
    return c;
  }
};

namespace config_detail {

using nlohmann::json;

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw StructuralError("config: missing field '" + where + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw StructuralError("config: '" + what + "' must be a number");
  return j.get<double>();
}

inline std::uint64_t count(const json& j, const std::string& what) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) throw StructuralError("config: '" + what + "' must be an integer");
  const auto v = j.get<std::int64_t>();
  if (v < 0) throw StructuralError("config: '" + what + "' must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

inline std::vector<double> vector_of(const json& j, const std::string& what) {
  if (!j.is_array()) throw StructuralError("config: '" + what + "' must be an array");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number(x, what));
  return out;
}

inline SelectionSpec selection_of(const json& j, const AlleleGraph& g, const std::string& where) {
  const int kinds = static_cast<int>(j.contains("fitness")) + static_cast<int>(j.contains("gamma")) +
                    static_cast<int>(j.contains("neutral"));
  if (kinds != 1) throw StructuralError("config: " + where + " needs exactly one of 'fitness', 'gamma', 'neutral'");
  if (j.contains("neutral")) {
    if (!j.at("neutral").is_boolean() || !j.at("neutral").get<bool>())
      throw StructuralError("config: " + where + ".neutral must be true");
    return SelectionSpec::neutral(g);
  }
  if (j.contains("fitness")) return gamma_from_fitness(vector_of(j.at("fitness"), where + ".fitness"), g);
  const json& rows = j.at("gamma");
  if (!rows.is_array()) throw StructuralError("config: " + where + ".gamma must be a matrix");
  std::vector<std::vector<double>> m;
  for (const auto& r : rows) m.push_back(vector_of(r, where + ".gamma"));
  return SelectionSpec::from_matrix(g, m);
}

inline ModelConfig parse(const json& j) {
  if (!j.is_object()) throw StructuralError("config: top level must be a JSON object");
  ModelConfig c;
  const json& ver = field(j, "schema_version", "");
  if (!ver.is_number_integer() || ver.get<int>() != kSchemaVersion) {
    throw StructuralError("config: unsupported schema_version " + ver.dump() + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
  }
  const json& verts = field(j, "vertices", "");
  if (!verts.is_array() || verts.empty()) throw StructuralError("config: 'vertices' must be a nonempty array");
  std::vector<std::string> labels;
  for (const auto& v : verts) {
    if (!v.is_string()) throw StructuralError("config: vertex labels must be strings");
    labels.push_back(v.get<std::string>());
  }
  SquareMatrix rates(labels.size());
  auto index = [&](const json& v, const std::string& what) -> std::size_t {
    if (!v.is_string()) throw StructuralError("config: '" + what + "' must be a vertex label");
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == v.get<std::string>()) return i;
    throw StructuralError("config: unknown vertex '" + v.get<std::string>() + "' in " + what);
  };
  const json& edges = field(j, "edges", "");
  if (!edges.is_array()) throw StructuralError("config: 'edges' must be an array");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const json& e = edges[k];
    const std::string where = "edges[" + std::to_string(k) + "]";
    const std::size_t u = index(field(e, "from", where + "."), where + ".from");
    const std::size_t v = index(field(e, "to", where + "."), where + ".to");
    if (u == v) throw StructuralError("config: " + where + " is a self-loop");
    const bool has_l = e.contains("lambda"), has_t = e.contains("theta");
    if (has_l == has_t) throw StructuralError("config: " + where + " needs exactly one of 'lambda' or 'theta'");
    const std::string conv = has_l ? "lambda" : "theta";
    if (c.convention.empty()) c.convention = conv;
    if (c.convention != conv) throw StructuralError("config: edges mix the lambda and theta conventions");
    if (rates(u, v) != 0.0) throw StructuralError("config: duplicate edge " + labels[u] + "->" + labels[v]);
    const double r = number(e.at(conv), where + "." + conv);
    if (!(r > 0.0)) throw StructuralError("config: " + where + " rate must be positive");
    rates(u, v) = r;
  }
  c.N = number(field(j, "N", ""), "N");
  if (j.contains("L")) {
    c.L = count(j.at("L"), "L");
    if (c.L == 0) throw StructuralError("config: 'L' must be positive");
  } else if (c.convention == "theta") {
    throw StructuralError("config: the theta convention needs 'L'");
  }
  if (c.convention == "lambda") {
    for (std::size_t u = 0; u < labels.size(); ++u)
      for (std::size_t v = 0; v < labels.size(); ++v) rates(u, v) *= static_cast<double>(c.L);
  }
  c.theta = AlleleGraph(labels, rates);
  require_valid(c.theta);

  if (j.contains("selection")) {
    const json& sel = j.at("selection");
    if (!sel.is_array() || sel.empty()) throw StructuralError("config: 'selection' must be a nonempty array");
    for (std::size_t k = 0; k < sel.size(); ++k) {
      const std::string where = "selection[" + std::to_string(k) + "]";
      SelectionClass cl;
      cl.selection = selection_of(sel[k], c.theta, where);
      if (sel[k].contains("multiplicity")) {
        cl.multiplicity = count(sel[k].at("multiplicity"), where + ".multiplicity");
      } else if (sel.size() == 1) {
        cl.multiplicity = c.L;
      } else {
        throw StructuralError("config: " + where + " needs a multiplicity");
      }
      c.classes.push_back(std::move(cl));
    }
  } else {
    c.classes.push_back({SelectionSpec::neutral(c.theta), c.L});
  }
  std::uint64_t total = 0;
  for (const auto& cl : c.classes) total += cl.multiplicity;
  if (total != c.L) {
    throw StructuralError("config: selection multiplicities sum to " + std::to_string(total) + " but L = " +
                          std::to_string(c.L));
  }

  if (j.contains("dfe")) {
    const json& d = j.at("dfe");
    DfeConfig dc;
    if (d.contains("family")) {
      if (!d.at("family").is_string()) throw StructuralError("config: dfe.family must be a string");
      dc.family = d.at("family").get<std::string>();
    }
    if (d.contains("rate")) dc.rate = number(d.at("rate"), "dfe.rate");
    if (d.contains("shape")) dc.shape = number(d.at("shape"), "dfe.shape");
    if (d.contains("scale")) dc.scale = number(d.at("scale"), "dfe.scale");
    if (d.contains("neutral_weight")) dc.neutral_weight = number(d.at("neutral_weight"), "dfe.neutral_weight");
    (void)dc.build();
    c.dfe = dc;
  }
  if (j.contains("sim")) {
    const json& s = j.at("sim");
    if (!s.is_object()) throw StructuralError("config: 'sim' must be an object");
    SimSettings ss;
    if (s.contains("dt")) ss.dt = number(s.at("dt"), "sim.dt");
    if (s.contains("horizon")) ss.horizon = number(s.at("horizon"), "sim.horizon");
    if (s.contains("replicates")) ss.replicates = count(s.at("replicates"), "sim.replicates");
    if (s.contains("seed")) ss.seed = count(s.at("seed"), "sim.seed");
    if (s.contains("x")) ss.x = number(s.at("x"), "sim.x");
    if (s.contains("thinning")) ss.thinning = count(s.at("thinning"), "sim.thinning");
    if (s.contains("bins")) ss.bins = count(s.at("bins"), "sim.bins");
    if (s.contains("burn_in_fraction")) ss.burn_in_fraction = number(s.at("burn_in_fraction"), "sim.burn_in_fraction");
    c.sim = ss;
  }
  // Constructing the ensemble checks N and the class sizes.
  (void)c.ensemble();
  return c;
}

}  // namespace config_detail

inline ModelConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    return config_detail::parse(j);
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("config: ") + e.what());
  }
}

inline ModelConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("config: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace wfg
