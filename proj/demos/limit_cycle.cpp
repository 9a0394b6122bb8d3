// Locates the attracting cycle of the unforced system just past the Hopf
// point and writes one period as CSV on stdout. Usage: limit_cycle [A]
#include <cstdio>
#include <cstdlib>
#include <exception>

#include "ssir/ssir.hpp"

int main(int argc, char** argv) {
  ssir::ModelParams p;
  p.A = argc > 1 ? std::atof(argv[1]) : 0.97;
  p.a = 0.14;
  p.r = 0.25;
  p.beta0 = 2.0;
  p.mu = 0.2;

  const auto e3 = ssir::classify_equilibrium(*ssir::endemic_e3(p), p);
  std::fprintf(stderr, "E3 = (%.6f, %.6f), eigenvalues %.3g%+.3gi\n", e3.point[0], e3.point[1],
               e3.eigenvalues[1].real(), e3.eigenvalues[1].imag());
  try {
    const auto c = ssir::locate_limit_cycle(p, {{0.8333, 0.3666}});
    std::fprintf(stderr, "period %.6f  multiplier %.8f  exp(int tr J) %.8f\n", c.period, c.multiplier,
                 c.abel_liouville);
    std::printf("t,S,I\n");
    for (std::size_t k = 0; k < c.points.size(); ++k)
      std::printf("%.6f,%.10f,%.10f\n", c.period * static_cast<double>(k) / static_cast<double>(c.points.size()),
                  c.points[k][0], c.points[k][1]);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "no cycle: %s\n", e.what());
    return 1;
  }
}
