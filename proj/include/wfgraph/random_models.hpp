#pragma once

// Random reversible graphs and locus ensembles for audits and property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wfgraph/graph_model.hpp"
#include "wfgraph/multilocus.hpp"

namespace wfg {

/// Complete graph with reversible rates r_uv = scale * a_uv * pi_v, a symmetric.
inline AlleleGraph reversible_graph(std::size_t n, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> U(0.2, 1.0);
  std::vector<double> pi(n);
  for (auto& p : pi) p = U(rng);
  SquareMatrix m(n);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    labels.push_back("t" + std::to_string(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = scale * U(rng);
      m(i, j) = a * pi[j];
      m(j, i) = a * pi[i];
    }
  }
  return AlleleGraph(labels, m);
}

/// Fitness uniform on [-half_range, half_range], so |gamma| <= 2 half_range.
inline SelectionSpec random_fitness(const AlleleGraph& g, std::mt19937_64& rng, double half_range) {
  std::uniform_real_distribution<double> U(-half_range, half_range);
  std::vector<double> f(g.size());
  for (auto& x : f) x = U(rng);
  return gamma_from_fitness(f, g);
}

struct EnsembleSpec {
  std::size_t max_types = 5;
  std::size_t max_classes = 4;
  double max_abs_gamma = 10.0;
};

/// Random ensemble: 2..max_types types, theta_u of order 1e-3..1, L in
/// [10, 10^4], N in [10^2, 10^6], mixed selection classes.
inline LocusEnsemble random_ensemble(std::uint64_t seed, const EnsembleSpec& spec = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> types(2, spec.max_types);
  std::uniform_int_distribution<std::size_t> nclass(1, spec.max_classes);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const std::size_t n = types(rng);
  const double theta_scale = std::pow(10.0, -3.0 + 3.0 * U(rng));
  const AlleleGraph theta = reversible_graph(n, rng, theta_scale);
  const auto loci = static_cast<std::uint64_t>(std::pow(10.0, 1.0 + 3.0 * U(rng)));
  const double N = std::pow(10.0, 2.0 + 4.0 * U(rng));
  const std::size_t k = std::min<std::size_t>(nclass(rng), loci);
  std::vector<SelectionClass> classes;
  std::uint64_t left = loci;
  for (std::size_t c = 0; c < k; ++c) {
    const std::uint64_t mult = c + 1 == k ? left : std::max<std::uint64_t>(1, left / (k - c) / 2);
    left -= mult;
    // Every other class is neutral so mixed ensembles are common.
    SelectionSpec s = (c % 2 == 1) ? SelectionSpec::neutral(theta) : random_fitness(theta, rng, 0.5 * spec.max_abs_gamma);
    classes.push_back({s, mult});
  }
  return LocusEnsemble(theta, classes, loci, N);
}

/// Two-type ensemble with common gamma = gamma_uv (u = vertex 0).
inline LocusEnsemble two_type_ensemble(double theta_u, double theta_v, double gamma, std::uint64_t loci, double N) {
  AlleleGraph g({"u", "v"}, {{0, theta_u}, {theta_v, 0}});
  const auto s = SelectionSpec::from_matrix(g, {{0, gamma}, {-gamma, 0}});
  return LocusEnsemble(g, {{s, loci}}, loci, N);
}

}  // namespace wfg
