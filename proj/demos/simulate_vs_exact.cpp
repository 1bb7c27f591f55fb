// Short path simulation of a two-type model against its exact stationary
// boundary masses. Usage: simulate_vs_exact [replicates] [horizon] [seed]

#include <cstdio>
#include <cstdlib>

#include "wfgraph/simulator.hpp"
#include "wfgraph/stationary.hpp"

int main(int argc, char** argv) {
  using namespace wfg;
  AlleleGraph g({"u", "v"}, {{0, 0.5}, {0.75, 0}});
  SimConfig c;
  c.graph = g;
  c.selection = SelectionSpec::from_matrix(g, {{0, 1.0}, {-1.0, 0}});
  c.x = 0.02;
  c.dt = 1e-4;
  c.replicates = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 8;
  c.horizon = argc > 2 ? std::atof(argv[2]) : 100.0;
  c.seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;
  try {
    const auto m = simulate_paths(c);
    const auto exact = exact_stationary(g.scaled(1.0 / c.x), c.selection, c.x);
    for (std::size_t u = 0; u < 2; ++u)
      std::printf("%s: simulated %.4f +- %.4f, exact %.4f\n", g.label(u).c_str(), m.boundary_fraction(u),
                  m.boundary_fraction_se(u), exact.boundary_mass(u));
    if (c.replicates > 3) {
      const auto chi = boundary_chi_square(m, {exact.boundary_mass(0), exact.boundary_mass(1)});
      std::printf("chi-square %.3f on %g df, p = %.3f\n", chi.statistic, chi.dof, chi.p_value);
    }
    std::printf("%llu excursions, %llu fixations\n", static_cast<unsigned long long>(m.excursions),
                static_cast<unsigned long long>(m.fixations));
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "simulate_vs_exact: %s\n", ex.what());
    return 1;
  }
}
