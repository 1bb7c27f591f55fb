#pragma once

// Data behind the published figures, at the parameters stated in their
// captions. Rows are long format: (quantity, curve, index, x, value).

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wfgraph/dfe.hpp"
#include "wfgraph/errors.hpp"
#include "wfgraph/graph_model.hpp"
#include "wfgraph/multilocus.hpp"
#include "wfgraph/stationary.hpp"

namespace wfg {

struct FigureRow {
  std::string quantity;
  std::string curve;
  std::size_t index;
  double x;
  double value;
};

struct FigureData {
  int figure = 0;
  std::vector<std::pair<std::string, double>> parameters;
  std::vector<FigureRow> rows;

  /// Values of one (quantity, curve) series in index order.
  std::vector<double> series(const std::string& quantity, const std::string& curve) const {
    std::vector<double> out;
    for (const FigureRow& r : rows)
      if (r.quantity == quantity && r.curve == curve) out.push_back(r.value);
    return out;
  }
};

/// Two types, gamma_uv = 1, N = 10^4. Directed densities in the frequency y
/// of v: mu_N(u, v, y), mu_N(v, u, 1 - y) and the pair densities of <u, v>
/// and <v, u>. The caption fixes no lambda; the curves are relative, so a
/// common lambda = 10^-4 only sets the scale.
inline FigureData figure2(int grid = 1000) {
  if (grid < 4) throw DomainError("figure grid must be >= 4");
  const double N = 1e4, lambda = 1e-4, gamma = 1.0;
  AlleleGraph g({"u", "v"}, {{0, lambda}, {lambda, 0}});
  const auto s = SelectionSpec::from_matrix(g, {{0, gamma}, {-gamma, 0}});
  const auto m = approx_stationary(g, s, N);
  FigureData d;
  d.figure = 2;
  d.parameters = {{"N", N}, {"lambda", lambda}, {"gamma_uv", gamma}, {"grid", grid}};
  for (int i = 1; i < grid; ++i) {
    const double y = static_cast<double>(i) / grid;
    const auto idx = static_cast<std::size_t>(i - 1);
    d.rows.push_back({"density", "edge_uv", idx, y, m.density(0, 1, y)});
    d.rows.push_back({"density", "edge_vu_reflected", idx, y, m.density(1, 0, 1.0 - y)});
    d.rows.push_back({"density", "pair_uv", idx, y, pair_density(m, {0, 1}, y)});
    d.rows.push_back({"density", "pair_vu", idx, y, pair_density(m, {1, 0}, y)});
  }
  return d;
}

/// Four types on K4 with F = (0, 1, 1, 0), lambda = N 10^-8, N = 10^4:
/// unfolded and folded spectra.
inline FigureData figure4(int grid = 1000) {
  if (grid < 4) throw DomainError("figure grid must be >= 4");
  const double N = 1e4, lambda = N * 1e-8;
  SquareMatrix r(4);
  for (std::size_t u = 0; u < 4; ++u)
    for (std::size_t v = 0; v < 4; ++v)
      if (u != v) r(u, v) = lambda;
  AlleleGraph g({"u", "v", "w", "z"}, r);
  const auto s = gamma_from_fitness({0, 1, 1, 0}, g);
  const auto m = approx_stationary(g, s, N);
  FigureData d;
  d.figure = 4;
  d.parameters = {{"N", N}, {"lambda", lambda}, {"grid", grid}};
  std::size_t i = 0;
  for (const AfsPoint& p : afs(m, AfsKind::unfolded, grid)) d.rows.push_back({"afs", "unfolded", i++, p.y, p.density});
  i = 0;
  for (const AfsPoint& p : afs(m, AfsKind::folded, grid)) d.rows.push_back({"afs", "folded", i++, p.y, p.density});
  return d;
}

/// DFE densities on negative selection coefficients for the exponential(1),
/// gamma(2, 1) and gamma(0.15, 1) families, plus their mean loads.
inline FigureData figure5(int grid = 1000, double lower = -10.0) {
  if (grid < 4) throw DomainError("figure grid must be >= 4");
  if (!(lower < 0.0)) throw DomainError("figure 5 lower limit must be negative");
  const std::vector<std::pair<std::string, ContinuousDfe>> dfes = {
      {"exponential_1", ContinuousDfe::exponential(1.0)},
      {"gamma_2", ContinuousDfe::gamma(2.0, 1.0)},
      {"gamma_0.15", ContinuousDfe::gamma(0.15, 1.0)}};
  FigureData d;
  d.figure = 5;
  d.parameters = {{"grid", grid}, {"lower", lower}};
  for (const auto& [name, dfe] : dfes) {
    // Right-endpoint grid on [lower, 0) so the gamma(0.15) pole at 0 is skipped.
    for (int i = 0; i < grid; ++i) {
      const double x = lower + (0.0 - lower) * static_cast<double>(i) / grid;
      d.rows.push_back({"density", name, static_cast<std::size_t>(i), x, dfe.density(x)});
    }
    d.rows.push_back({"mean_load", name, 0, 0.0, dfe.mean()});
  }
  return d;
}

/// Two-type pi and segregating sites over gamma in [0, 6] with their bounds
/// 2 theta_eff / L and 2 theta_eff (1 + ln N); N = 500, L = 1500.
inline FigureData figure6(int points = 121) {
  if (points < 3) throw DomainError("figure 6 needs at least 3 points");
  const double N = 500.0;
  const std::uint64_t L = 1500;
  struct Combo {
    const char* name;
    double tu, tv;
  };
  const Combo combos[] = {{"gray", 1.5e-3, 1.5e-3}, {"green", 3e-3, 1e-3}, {"pink", 1e-3, 3e-3}};
  FigureData d;
  d.figure = 6;
  d.parameters = {{"N", N}, {"L", static_cast<double>(L)}, {"gamma_max", 6.0}, {"points", points}};
  for (const Combo& c : combos) {
    AlleleGraph g({"u", "v"}, {{0, c.tu}, {c.tv, 0}});
    for (int i = 0; i < points; ++i) {
      const double gamma = 6.0 * static_cast<double>(i) / (points - 1);
      const auto s = SelectionSpec::from_matrix(g, {{0, gamma}, {-gamma, 0}});
      const LocusEnsemble e(g, {{s, L}}, L, N);
      const double teff = theta_hat_eff(e);
      const auto idx = static_cast<std::size_t>(i);
      d.rows.push_back({"pi", c.name, idx, gamma, diversity_pi(e)});
      d.rows.push_back({"pi_bound", c.name, idx, gamma, 2.0 * teff / e.length()});
      d.rows.push_back({"segregating_sites", c.name, idx, gamma, segregating_sites(e)});
      d.rows.push_back({"segregating_sites_bound", c.name, idx, gamma, 2.0 * teff * (1.0 + std::log(N))});
      d.rows.push_back({"theta_hat", c.name, idx, gamma, theta_hat(e)});
      d.rows.push_back({"theta_hat_eff", c.name, idx, gamma, teff});
    }
  }
  return d;
}

inline FigureData figure(int which) {
  switch (which) {
    case 2: return figure2();
    case 4: return figure4();
    case 5: return figure5();
    case 6: return figure6();
    default: throw DomainError("figures: --which must be one of 2, 4, 5, 6");
  }
}

}  // namespace wfg
