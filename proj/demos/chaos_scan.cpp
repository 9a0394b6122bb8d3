// Runs a sweep file (default: configs/chaos_window.json) and prints the
// verdict of each cell with its exponent.
#include <cstdio>
#include <exception>
#include <string>

#include "ssir/io.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : SSIR_DEMO_CONFIGS "/chaos_window.json";
  try {
    const auto cfg = ssir::io::load_sweep_config(path);
    const auto res = ssir::run_sweep(cfg);
    std::fputs(ssir::io::sweep_csv(res).c_str(), stdout);
    for (const auto& [w, f] : res.summary.chaotic_fraction) std::fprintf(stderr, "omega %g: chaotic %.3f\n", w, f);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
