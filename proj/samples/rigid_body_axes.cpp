// Free search for the steady rotations of a triaxial body, then the Saari
// quantities along each one.

#include <cstdio>

#include "releq/releq.hpp"

using namespace releq;

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : RELEQ_SYSTEMS_DIR "/rigidbody.json";
  const auto sys = load_system_file(path);
  if (!sys.lie_group()) {
    std::fprintf(stderr, "%s is not a lie_group system\n", path.c_str());
    return 1;
  }

  ScanSpec spec;
  spec.seeds = 200;
  const auto res = scan_seeds(sys, spec);
  std::printf("%d seeds, %zu distinct solutions, %d failures\n", res.seeds_tried, res.reports.size(), res.failures);

  for (const auto& rep : res.reports) {
    const Vec& xi = rep.candidate.xi.xi;
    const auto s = saari_scan(sys, rep);
    const auto v = verify_relative_equilibrium(sys, rep);
    std::printf("xi = (%+.6f, %+.6f, %+.6f)  energy %.4f  naive %.3f  refined %.1e  %s\n", xi[0], xi[1], xi[2],
                rep.energy, s.naive_variation, s.refined_variation, v.passed ? "verified" : v.message.c_str());
  }
  return 0;
}
