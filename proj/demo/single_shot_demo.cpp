// Prints the optimized single-shot rate against the repeaterless capacity at a
// few distances, then the noisy linear-optics circuit at 10 km.

#include <cstdio>

#include "qpurify/qpurify.hpp"

int main() {
  using namespace qpurify;
  std::printf("%8s %6s %3s %3s %12s %12s %7s\n", "km", "eta", "k", "m", "rate", "capacity", "ratio");
  for (double km : {1.0, 10.0, 50.0, 100.0, 200.0}) {
    const double eta = rates::LinkSpec{km, 0.2}.transmissivity();
    const auto best = rates::optimize_single_shot(eta, 50, 20);
    std::printf("%8.1f %6.4f %3u %3u %12.4e %12.4e %7.4f\n", km, eta, best.code.k, best.code.m, best.result.rate,
                best.result.capacity.value(), best.result.ratio.value_or(0.0));
  }

  fock::ChannelModel ch;
  ch.eta = rates::LinkSpec{10.0, 0.2}.transmissivity();
  ch.nbar = 0.01;
  ch.eta_eff = 0.5;
  ch.dark_nbar = 1e-6;
  const auto lo = fock::linear_optics_rate({1, 2}, ch);
  std::printf("\nnoisy (k=1, m=2) circuit at 10 km: P = %.4f, RCI = %.4f, fidelity = %.4f\n", lo.success_probability,
              lo.rci, lo.fidelity);
}
