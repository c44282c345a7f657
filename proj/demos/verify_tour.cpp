// Compares finite-difference mixing of random networks against the bound.
#include <iostream>

#include "squashscope/verification.hpp"

using namespace squashscope;

int main() {
  int violations = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    VerificationInstance inst = make_verification_instance(seed);
    VerifyResult r = verify_bound(inst.model, inst.graph, inst.pair, inst.box, 16, seed);
    violations += !r.satisfied;
    std::cout << "seed " << seed << ": n=" << inst.graph.n() << " d=" << inst.model.width()
              << " m=" << inst.model.depth() << " " << to_string(inst.model.layers[0].message.family)
              << "  empirical " << r.empirical << " <= bound " << r.theoretical << (r.satisfied ? "" : "  VIOLATED")
              << "\n";
  }
  std::cout << violations << " violation(s)\n";

  // A two-node network that computes tanh(x_v + x_u) reaches the analytic peak.
  MpnnModel toy = pair_sum_emulator(Activation::tanh);
  MessagePassingMatrix A = build_message_matrix(make_path(2), toy.matrix_kind);
  double peak = empirical_max_mixing(toy, A, {0, 1}, InputBox::uniform(2, 1, 0.0, 1.0), 200, 3);
  std::cout << "tanh emulator mixing " << peak << " (analytic 0.7698)\n";
  return violations == 0 ? 0 : 1;
}
