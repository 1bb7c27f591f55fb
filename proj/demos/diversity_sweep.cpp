// Two-type diversity over a range of selection strengths, for a chosen
// mutation bias. Usage: diversity_sweep [theta_u theta_v] [N] [L]

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "wfgraph/multilocus.hpp"
#include "wfgraph/random_models.hpp"

int main(int argc, char** argv) {
  const double tu = argc > 2 ? std::atof(argv[1]) : 1e-3;
  const double tv = argc > 2 ? std::atof(argv[2]) : 3e-3;
  const double N = argc > 3 ? std::atof(argv[3]) : 500.0;
  const auto L = static_cast<std::uint64_t>(argc > 4 ? std::atoll(argv[4]) : 1500);
  try {
    std::printf("%6s %14s %14s %14s %14s %8s\n", "gamma", "theta_hat", "theta_eff", "pi", "S", "bias");
    for (int i = 0; i <= 12; ++i) {
      const double gamma = 0.5 * i;
      const auto e = wfg::two_type_ensemble(tu, tv, gamma, L, N);
      std::printf("%6.2f %14.6e %14.6e %14.6e %14.6e %8s\n", gamma, wfg::theta_hat(e), wfg::theta_hat_eff(e),
                  wfg::diversity_pi(e), wfg::segregating_sites(e), wfg::to_string(wfg::bias_ratio(e, gamma).regime));
    }
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "diversity_sweep: %s\n", ex.what());
    return 1;
  }
}
