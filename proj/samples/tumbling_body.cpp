// Tumbling near the long axis: Euler-Poincare flow, reconstruction and the
// drift of the conserved quantities.

#include <cmath>
#include <cstdio>

#include "releq/releq.hpp"

using namespace releq;

int main(int argc, char** argv) {
  const double T = argc > 1 ? std::atof(argv[1]) : 10.0;
  const double h = argc > 2 ? std::atof(argv[2]) : 1e-3;
  const auto sys = load_system_file(RELEQ_SYSTEMS_DIR "/rigidbody.json");

  Vec xi0(3);
  xi0 << 1.0, 0.01, 0.0;
  const auto body = ep_integrate(sys, {xi0}, T, h);
  const auto group = reconstruct(sys.algebra().rep, body);
  const auto mu = spatial_momentum(sys, body, group);

  double de = 0.0, dm = 0.0, dc = 0.0;
  const double e0 = energy(sys, {Vec(0), Mat(), Vec(0), xi0});
  for (std::size_t k = 0; k < body.times.size(); ++k) {
    de = std::max(de, std::abs(energy(sys, {Vec(0), Mat(), Vec(0), body.xi[k]}) - e0));
    dm = std::max(dm, (mu[k].mu - mu[0].mu).norm());
    dc = std::max(dc, std::abs(body.p[k].norm() - body.p[0].norm()));
    if (k % (body.times.size() / 10) == 0)
      std::printf("t %6.2f  xi (%+.5f, %+.5f, %+.5f)\n", body.times[k], body.xi[k][0], body.xi[k][1], body.xi[k][2]);
  }
  std::printf("steps %zu  energy drift %.2e  momentum drift %.2e  casimir drift %.2e\n", body.times.size() - 1, de,
              dm, dc);
  return 0;
}
