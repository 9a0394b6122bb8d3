// Two endemic equilibria below R0 = 1: walks A upward through the
// saddle-node and prints E3/E4 with their stability.
#include <cstdio>
#include <string>

#include "ssir/ssir.hpp"

int main() {
  ssir::ModelParams p;
  p.a = 0.5;
  p.beta0 = 0.6;
  p.r = 0.5;
  p.mu = 0.05;

  p.A = 0.5;
  const double a_star = ssir::thresholds(p).a_star;
  std::printf("saddle-node at A* = %.6f\n\n", a_star);
  std::printf("%8s %8s %-18s %s\n", "A", "R0", "regime", "equilibria");
  for (double A = a_star - 0.05; A < 1.95; A += 0.05) {
    p.A = A;
    const auto g = ssir::detect_regime(p);
    std::printf("%8.4f %8.4f %-18s", A, g.thresholds.r0, std::string(ssir::to_string(g.tag)).c_str());
    for (const auto& e : ssir::equilibria(p)) {
      if (e.label == ssir::EquilibriumLabel::E1) continue;
      std::printf(" %s(%.3f,%.3f) %s", std::string(ssir::to_string(e.label)).c_str(), e.point[ssir::kS],
                  e.point[ssir::kI], std::string(ssir::to_string(e.stability)).c_str());
    }
    std::printf("\n");
  }
}
