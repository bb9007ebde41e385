// Circular Kepler orbits from the amended potential, checked against
// r = mu^2 / k and the discrete action oracle.

#include <cstdio>

#include "releq/releq.hpp"

using namespace releq;

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : RELEQ_SYSTEMS_DIR "/kepler.json";
  const auto sys = load_system_file(path);

  std::printf("%8s %14s %14s %12s %8s\n", "mu", "r", "omega", "oracle", "order");
  for (double mu : {0.5, 0.75, 1.0, 1.5, 2.0}) {
    ScanSpec spec;
    spec.mode = ScanMode::fixed_mu;
    spec.mu = Vec::Constant(1, mu);
    for (const auto& rep : scan_seeds(sys, spec).reports) {
      if (!rep.validated) continue;
      const auto v = verify_relative_equilibrium(sys, rep);
      std::printf("%8.3f %14.10f %14.10f %12.3e %8.3f\n", mu, rep.candidate.x[0], rep.candidate.xi.xi[0],
                  v.coarse.max_norm, v.order.value_or(0.0));
    }
  }
  return 0;
}
