// Mixing bounds, over-squashing and capacity on small graphs.
#include <iostream>

#include "squashscope/bounds.hpp"
#include "squashscope/generators.hpp"

using namespace squashscope;

namespace {

void show(const char* label, const ExtendedReal& x) {
  std::cout << label;
  if (x.is_infinite()) std::cout << "inf\n";
  else std::cout << x.value() << "\n";
}

}  // namespace

int main() {
  MixingConstants c;  // unit weights, linear messages

  Graph p = make_path(7);
  MessagePassingMatrix A = build_message_matrix(p, MatrixKind::sym);
  for (int m = 1; m <= 4; ++m) {
    std::cout << "P7 ends, m=" << m << ": ";
    show("osq_tilde = ", osq_tilde(p, A, c, m, {0, 6}));
  }

  // Root to leaf on a binary tree of depth 2, two layers.
  Graph t = make_tree(2, 2);
  NodePair root_leaf{0, tree_first_leaf(2, 2)};
  BoundReport r = mixing_bound(t, build_message_matrix(t, MatrixKind::sym), c, 1, root_leaf);
  std::cout << "tree root-leaf bound " << r.total_bound << " over " << r.per_k_terms.size() << " term(s)\n";

  MinWeightReport w = min_weight_bound(make_complete(6), {0, 1}, 1.0, 1.0);
  std::cout << "K6 weight needed for unit mixing: " << w.exact << "\n";

  Graph mol = make_molecule_like(14, 2, 5);
  MixingConstants half;
  half.c2 = 0.5;
  MinDepthReport d = min_depth_bound(mol, {0, mol.n() - 1}, half, 1e4);
  std::cout << "molecule min depth: tau/(4 c2) = " << d.tau_term << ", bracket = " << d.bracket
            << ", total = " << d.bound << "\n";

  SpectralBoundReport s = spectral_mixing_bound(mol, half, 3, {0, mol.n() - 1});
  BoundReport exact = mixing_bound(mol, build_message_matrix(mol, MatrixKind::sym), half, 3, {0, mol.n() - 1});
  std::cout << "spectral bound " << s.value << " >= exact bound " << exact.total_bound << "\n";
}
