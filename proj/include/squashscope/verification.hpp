#pragma once

#include <cstdint>
#include <vector>

#include "certify.hpp"
#include "finite_diff.hpp"
#include "generators.hpp"
#include "mpnn.hpp"

namespace squashscope {

/// One randomized (graph, model, pair, box) configuration for the soundness
/// property suites.
struct VerificationInstance {
  Graph graph;
  MpnnModel model;
  NodePair pair;
  InputBox box;
};

struct VerificationOptions {
  int max_nodes = 12;
  int max_width = 4;
  int max_depth = 4;
  std::vector<MessageFamily> families = {MessageFamily::linear, MessageFamily::gated};
  std::vector<Readout> readouts = {Readout::sum, Readout::mean};
  std::vector<MatrixKind> kinds = {MatrixKind::sym, MatrixKind::rw, MatrixKind::raw};
  Activation activation = Activation::tanh;
  std::vector<GraphKind> graph_kinds = {GraphKind::path, GraphKind::cycle, GraphKind::complete, GraphKind::tree,
                                        GraphKind::grid, GraphKind::erdos_renyi, GraphKind::molecule_like};
};

/// A small connected graph of a kind drawn from `kinds`, n <= max_nodes.
inline Graph random_small_graph(Rng& rng, int max_nodes, std::uint64_t seed, const std::vector<GraphKind>& kinds) {
  if (kinds.empty()) throw InvalidArgument("random_small_graph: no graph kinds to draw from");
  const int cap = std::max(4, max_nodes);
  auto size = [&](int lo) { return lo + static_cast<int>(uniform_below(rng, cap - lo + 1)); };
  switch (kinds[uniform_below(rng, kinds.size())]) {
    case GraphKind::path: return make_path(size(2));
    case GraphKind::cycle: return make_cycle(size(3));
    case GraphKind::complete: return make_complete(std::min(size(2), 7));
    case GraphKind::tree: {
      int arity = 2 + static_cast<int>(uniform_below(rng, 2));
      return make_tree(arity, arity == 2 && cap >= 7 ? 2 : 1);
    }
    case GraphKind::grid: {
      int w = 2 + static_cast<int>(uniform_below(rng, 2));
      return make_grid(w, std::max(2, std::min(cap / w, 4)));
    }
    case GraphKind::erdos_renyi: return make_erdos_renyi(size(5), 0.45, seed);
    case GraphKind::molecule_like: break;
  }
  return make_molecule_like(size(5), 1 + static_cast<int>(uniform_below(rng, 2)), seed);
}

inline VerificationInstance make_verification_instance(std::uint64_t seed, const VerificationOptions& opt = {}) {
  Rng rng(mix_seed(seed, 0));
  VerificationInstance inst{random_small_graph(rng, opt.max_nodes, mix_seed(seed, 1), opt.graph_kinds), {}, {}, {}};
  RandomModelSpec spec;
  spec.width = 1 + static_cast<int>(uniform_below(rng, opt.max_width));
  spec.depth = 1 + static_cast<int>(uniform_below(rng, opt.max_depth));
  spec.family = opt.families[uniform_below(rng, opt.families.size())];
  spec.readout = opt.readouts[uniform_below(rng, opt.readouts.size())];
  spec.matrix_kind = opt.kinds[uniform_below(rng, opt.kinds.size())];
  spec.activation = opt.activation;
  spec.scale = uniform_in(rng, 0.5, 2.5);
  inst.model = random_model(spec, mix_seed(seed, 2));
  const int n = inst.graph.n();
  inst.pair.v = static_cast<int>(uniform_below(rng, n));
  inst.pair.u = static_cast<int>(uniform_below(rng, n));
  const double lo = uniform_in(rng, -1.0, 0.5);
  inst.box = InputBox::uniform(n, spec.width, lo, lo + uniform_in(rng, 0.1, 1.5));
  return inst;
}

}  // namespace squashscope
