// Builds a few graphs and prints commute times three ways.
#include <iomanip>
#include <iostream>

#include "squashscope/generators.hpp"
#include "squashscope/spectral.hpp"

using namespace squashscope;

int main() {
  std::cout << std::setprecision(6);

  Graph mol = make_molecule_like(16, 2, 42);
  std::cout << "molecule_like: n=" << mol.n() << " |E|=" << mol.edge_count() << " diameter=" << diameter(mol)
            << " validated=" << mol.validated() << "\n";

  CommuteTable spectral = commute_time_spectral(mol);
  CommuteTable pinv = commute_time_moore_penrose(mol);
  NodePair far{0, 0};
  for (int v = 0; v < mol.n(); ++v)
    for (int u = v + 1; u < mol.n(); ++u)
      if (spectral.tau(v, u) > spectral.tau(far.v, far.u)) far = {v, u};

  MonteCarloEstimate mc = commute_time_monte_carlo(mol, far, 4000, 7);
  std::cout << "largest commute time at (" << far.v << "," << far.u << ")\n"
            << "  spectral       " << spectral.tau(far.v, far.u) << "\n"
            << "  pseudo-inverse " << pinv.tau(far.v, far.u) << "\n"
            << "  random walks   " << mc.mean << " +- " << mc.std_error << "\n";

  // Effective resistances over the edges add up to n - 1.
  double foster = 0.0;
  for (auto [a, b] : mol.edges()) foster += spectral.resistance(a, b);
  std::cout << "sum of edge resistances " << foster << " (n - 1 = " << mol.n() - 1 << ")\n";

  Graph path = make_path(3);
  std::cout << "P3 tau(0,2) = " << commute_time_spectral(path).tau(0, 2) << "\n";
  Graph k6 = make_complete(6);
  std::cout << "K6 tau(0,1) = " << commute_time_spectral(k6).tau(0, 1) << "\n";
}
