#pragma once

// Allelic-type graphs: vertices are monomorphic states, each positive rate
// lambda_uv spans a directed unit-interval edge u -> v.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "wfgraph/errors.hpp"

namespace wfg {

/// Dense square matrix, row-major, indexed by vertex insertion order.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  /// Builds from nested rows; throws StructuralError unless the input is square.
  static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    SquareMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) {
        std::ostringstream msg;
        msg << "matrix is not square: row " << i << " has " << rows[i].size() << " entries, expected "
            << rows.size();
        throw StructuralError(msg.str());
      }
      for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> out(n_, std::vector<double>(n_));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) out[i][j] = (*this)(i, j);
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct Edge {
  std::size_t from;
  std::size_t to;
  bool operator==(const Edge&) const = default;
};

/// Unordered pair <u, v> with u < v.
struct VertexPair {
  std::size_t u;
  std::size_t v;
  bool operator==(const VertexPair&) const = default;
};

/// Vertex labels plus per-generation mutation rates lambda_uv (diagonal forced to 0).
/// Construction checks structure only; modeling assumptions are checked by
/// validate_graph().
class AlleleGraph {
 public:
  AlleleGraph() = default;

  AlleleGraph(std::vector<std::string> labels, SquareMatrix rates)
      : labels_(std::move(labels)), rates_(std::move(rates)) {
    if (labels_.empty()) throw StructuralError("graph needs at least one vertex");
    if (rates_.size() != labels_.size()) {
      std::ostringstream msg;
      msg << "rate matrix is " << rates_.size() << "x" << rates_.size() << " but there are "
          << labels_.size() << " vertex labels";
      throw StructuralError(msg.str());
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      for (std::size_t j = i + 1; j < labels_.size(); ++j) {
        if (labels_[i] == labels_[j]) throw StructuralError("duplicate vertex label '" + labels_[i] + "'");
      }
    }
    const std::size_t n = size();
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        const double r = rates_(u, v);
        if (!std::isfinite(r) || r < 0.0) {
          std::ostringstream msg;
          msg << "mutation rate " << labels_[u] << "->" << labels_[v] << " = " << r
              << " must be finite and nonnegative";
          throw StructuralError(msg.str());
        }
      }
      rates_(u, u) = 0.0;
    }
  }

  AlleleGraph(std::vector<std::string> labels, const std::vector<std::vector<double>>& rates)
      : AlleleGraph(std::move(labels), SquareMatrix::from_rows(rates)) {}

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t u) const { return labels_.at(u); }

  std::size_t index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw StructuralError("unknown vertex label '" + label + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  double rate(std::size_t u, std::size_t v) const { return rates_(u, v); }
  const SquareMatrix& rates() const { return rates_; }
  bool has_edge(std::size_t u, std::size_t v) const { return u != v && rates_(u, v) > 0.0; }

  /// lambda_u = sum_v lambda_uv.
  double total_rate(std::size_t u) const {
    double s = 0.0;
    for (std::size_t v = 0; v < size(); ++v) s += rates_(u, v);
    return s;
  }

  /// Directed edges in lexicographic (from, to) order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t u = 0; u < size(); ++u)
      for (std::size_t v = 0; v < size(); ++v)
        if (has_edge(u, v)) out.push_back({u, v});
    return out;
  }

  /// Same topology with every rate multiplied by factor > 0.
  AlleleGraph scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) throw DomainError("rate scale factor must be positive");
    SquareMatrix m = rates_;
    for (std::size_t u = 0; u < size(); ++u)
      for (std::size_t v = 0; v < size(); ++v) m(u, v) *= factor;
    return AlleleGraph(labels_, std::move(m));
  }

 private:
  std::vector<std::string> labels_;
  SquareMatrix rates_;
};

struct ValidationReport {
  bool no_mutational_trap = true;  // i)
  bool reversible = true;          // ii)
  bool strongly_connected = true;  // iii)
  std::vector<std::string> violations;

  bool ok() const { return no_mutational_trap && reversible && strongly_connected; }
};

namespace graph_detail {

inline std::vector<bool> reachable(const AlleleGraph& g, std::size_t start, bool reverse) {
  std::vector<bool> seen(g.size(), false);
  std::queue<std::size_t> todo;
  seen[start] = true;
  todo.push(start);
  while (!todo.empty()) {
    const std::size_t u = todo.front();
    todo.pop();
    for (std::size_t v = 0; v < g.size(); ++v) {
      const bool edge = reverse ? g.has_edge(v, u) : g.has_edge(u, v);
      if (edge && !seen[v]) {
        seen[v] = true;
        todo.push(v);
      }
    }
  }
  return seen;
}

}  // namespace graph_detail

/// Checks assumptions i) lambda_u > 0, ii) lambda_uv > 0 <=> lambda_vu > 0,
/// iii) strong connectivity. Structural problems are rejected earlier by the
/// AlleleGraph constructor.
inline ValidationReport validate_graph(const AlleleGraph& g) {
  ValidationReport report;
  for (std::size_t u = 0; u < g.size(); ++u) {
    if (!(g.total_rate(u) > 0.0)) {
      report.no_mutational_trap = false;
      report.violations.push_back("assumption i): vertex '" + g.label(u) +
                                  "' has zero total mutation rate");
    }
  }
  for (std::size_t u = 0; u < g.size(); ++u) {
    for (std::size_t v = u + 1; v < g.size(); ++v) {
      if (g.has_edge(u, v) != g.has_edge(v, u)) {
        report.reversible = false;
        report.violations.push_back("assumption ii): mutation between '" + g.label(u) + "' and '" +
                                    g.label(v) + "' is not reversible");
      }
    }
  }
  const auto fwd = graph_detail::reachable(g, 0, false);
  const auto bwd = graph_detail::reachable(g, 0, true);
  for (std::size_t u = 0; u < g.size(); ++u) {
    if (!fwd[u] || !bwd[u]) {
      report.strongly_connected = false;
      report.violations.push_back("assumption iii): vertex '" + g.label(u) +
                                  "' is not mutually reachable from '" + g.label(0) + "'");
    }
  }
  return report;
}

/// Throws AssumptionError naming the first violated assumption.
inline void require_valid(const AlleleGraph& g) {
  const ValidationReport r = validate_graph(g);
  if (r.ok()) return;
  const char* which = !r.no_mutational_trap ? "i" : (!r.reversible ? "ii" : "iii");
  throw AssumptionError(which, r.violations.front());
}

/// Connected unordered pairs in lexicographic order; each directed edge
/// belongs to exactly one pair.
inline std::vector<VertexPair> unordered_pairs(const AlleleGraph& g) {
  std::vector<VertexPair> out;
  for (std::size_t u = 0; u < g.size(); ++u)
    for (std::size_t v = u + 1; v < g.size(); ++v)
      if (g.has_edge(u, v) || g.has_edge(v, u)) out.push_back({u, v});
  return out;
}

inline constexpr double kAntisymmetryTolerance = 1e-12;

/// Antisymmetric selection coefficients gamma_uv = -gamma_vu on the edges of
/// a graph. Entries off the edge set are zero.
class SelectionSpec {
 public:
  SelectionSpec() = default;

  /// Accepts any antisymmetric matrix; non-potential matrices are kept but
  /// flagged through cycle_defect().
  static SelectionSpec from_matrix(const AlleleGraph& g, const SquareMatrix& gamma) {
    if (gamma.size() != g.size()) {
      std::ostringstream msg;
      msg << "selection matrix is " << gamma.size() << "x" << gamma.size() << " but graph has "
          << g.size() << " vertices";
      throw StructuralError(msg.str());
    }
    SelectionSpec s;
    s.gamma_ = SquareMatrix(g.size());
    for (std::size_t u = 0; u < g.size(); ++u) {
      for (std::size_t v = 0; v < g.size(); ++v) {
        if (!std::isfinite(gamma(u, v))) throw StructuralError("selection coefficients must be finite");
        if (!g.has_edge(u, v)) continue;
        if (std::abs(gamma(u, v) + gamma(v, u)) > kAntisymmetryTolerance) {
          std::ostringstream msg;
          msg.precision(17);
          msg << "antisymmetry violated on edge " << g.label(u) << "<->" << g.label(v)
              << ": gamma_uv=" << gamma(u, v) << ", gamma_vu=" << gamma(v, u);
          throw AssumptionError("antisymmetry", msg.str());
        }
        s.gamma_(u, v) = gamma(u, v);
      }
    }
    s.cycle_defect_ = compute_cycle_defect(g, s.gamma_);
    s.from_fitness_ = false;
    return s;
  }

  static SelectionSpec from_matrix(const AlleleGraph& g, const std::vector<std::vector<double>>& rows) {
    return from_matrix(g, SquareMatrix::from_rows(rows));
  }

  static SelectionSpec neutral(const AlleleGraph& g) {
    SelectionSpec s;
    s.gamma_ = SquareMatrix(g.size());
    s.from_fitness_ = true;
    return s;
  }

  double gamma(std::size_t u, std::size_t v) const { return gamma_(u, v); }
  const SquareMatrix& matrix() const { return gamma_; }
  std::size_t size() const { return gamma_.size(); }
  bool from_fitness() const { return from_fitness_; }

  /// Largest |sum of gamma around a fundamental cycle|; 0 for potential-derived gamma.
  double cycle_defect() const { return cycle_defect_; }
  bool is_potential(double tol = 1e-9) const { return cycle_defect_ <= tol; }

  bool is_neutral() const {
    for (std::size_t u = 0; u < size(); ++u)
      for (std::size_t v = 0; v < size(); ++v)
        if (gamma_(u, v) != 0.0) return false;
    return true;
  }

  double max_abs() const {
    double m = 0.0;
    for (std::size_t u = 0; u < size(); ++u)
      for (std::size_t v = 0; v < size(); ++v) m = std::max(m, std::abs(gamma_(u, v)));
    return m;
  }

  friend SelectionSpec gamma_from_fitness(const std::vector<double>& fitness, const AlleleGraph& g);

 private:
  // Potential phi by BFS over a spanning tree; every non-tree edge closes one
  // fundamental cycle whose sum is phi_u + gamma_uv - phi_v.
  static double compute_cycle_defect(const AlleleGraph& g, const SquareMatrix& gamma) {
    const std::size_t n = g.size();
    std::vector<double> phi(n, std::numeric_limits<double>::quiet_NaN());
    double worst = 0.0;
    for (std::size_t root = 0; root < n; ++root) {
      if (!std::isnan(phi[root])) continue;
      phi[root] = 0.0;
      std::queue<std::size_t> todo;
      todo.push(root);
      while (!todo.empty()) {
        const std::size_t u = todo.front();
        todo.pop();
        for (std::size_t v = 0; v < n; ++v) {
          if (!g.has_edge(u, v)) continue;
          if (std::isnan(phi[v])) {
            phi[v] = phi[u] + gamma(u, v);
            todo.push(v);
          }
        }
      }
    }
    for (const Edge& e : g.edges()) {
      worst = std::max(worst, std::abs(phi[e.from] + gamma(e.from, e.to) - phi[e.to]));
    }
    return worst;
  }

  SquareMatrix gamma_;
  double cycle_defect_ = 0.0;
  bool from_fitness_ = false;
};

/// gamma_uv = F_v - F_u on every edge of g.
inline SelectionSpec gamma_from_fitness(const std::vector<double>& fitness, const AlleleGraph& g) {
  if (fitness.size() != g.size()) {
    std::ostringstream msg;
    msg << "fitness vector has " << fitness.size() << " entries but graph has " << g.size()
        << " vertices";
    throw StructuralError(msg.str());
  }
  for (double f : fitness)
    if (!std::isfinite(f)) throw StructuralError("fitness values must be finite");
  SelectionSpec s;
  s.gamma_ = SquareMatrix(g.size());
  for (const Edge& e : g.edges()) s.gamma_(e.from, e.to) = fitness[e.to] - fitness[e.from];
  s.cycle_defect_ = 0.0;
  s.from_fitness_ = true;
  return s;
}

}  // namespace wfg
