#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "../bounds.hpp"
#include "../parallel.hpp"
#include "task.hpp"
#include "trainer.hpp"

namespace squashscope::experiments {

enum class AblationKind { commute_time, depth, mixing };

inline std::string to_string(AblationKind k) {
  switch (k) {
    case AblationKind::commute_time: return "commute";
    case AblationKind::depth: return "depth";
    case AblationKind::mixing: return "mixing";
  }
  return "?";
}

inline AblationKind parse_ablation_kind(const std::string& s) {
  if (s == "commute" || s == "commute_time") return AblationKind::commute_time;
  if (s == "depth") return AblationKind::depth;
  if (s == "mixing") return AblationKind::mixing;
  throw InvalidArgument("unknown ablation '" + s + "'");
}

/// One mixing-task setting of the mixing ablation.
struct MixingSetting {
  MixingKind kind;
  double lo, hi;
};

inline std::string describe(const MixingSetting& s) {
  std::ostringstream os;
  os << (s.kind == MixingKind::tanh_sum ? "tanh" : "exp") << "(" << s.lo << ".." << s.hi << ")";
  return os.str();
}

struct AblationConfig {
  int corpus_size = 200;
  int n_min = 10;
  int n_max = 30;
  std::uint64_t seed = 1;
  TrainConfig train;  // depth is set per grid cell
  int instances_per_graph = 1;
  std::vector<ModelTemplate> templates = all_templates();
  std::vector<double> alphas = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<int> depths = {4, 8, 16};  // the under-reaching floor is always added
  double fixed_alpha = 0.8;
  std::vector<MixingSetting> mixings = {
      {MixingKind::tanh_sum, 0.0, 1.0}, {MixingKind::exp_sum, 0.0, 1.0}, {MixingKind::exp_sum, 0.0, 1.5}};
  int threads = 1;
};

struct AblationRow {
  double grid_value = 0.0;
  ModelTemplate model = ModelTemplate::gcn_like;
  double mae_mean = 0.0;
  double mae_std = 0.0;
  double rel_mae_mean = 0.0;
  double osq_mean = 0.0;  // may be +inf under under-reaching
  std::string status = "ok";
  std::string setting;
  double analytic_max_mixing = std::numeric_limits<double>::quiet_NaN();
  int depth = 0;
};

struct AblationTable {
  AblationKind kind = AblationKind::commute_time;
  int depth_floor = 0;
  std::vector<AblationRow> rows;

  std::vector<const AblationRow*> for_model(ModelTemplate t) const {
    std::vector<const AblationRow*> out;
    for (const AblationRow& r : rows)
      if (r.model == t) out.push_back(&r);
    return out;
  }
};

/// Constants used for the companion over-squashing column: unit weights
/// (including the self-update Omega) and derivative bounds, c2nd = 1 only for
/// the gated template.
inline MixingConstants reference_constants(ModelTemplate t) {
  MixingConstants c;
  c.omega = 1.0;
  c.w = 1.0;
  c.c1 = 0.0;
  c.c2 = 1.0;
  c.c2nd = template_family(t) == MessageFamily::gated ? 1.0 : 0.0;
  c.c_sigma = 1.0;
  return c;
}

/// Mean of the over-squashing proxy over the dataset pairs (one per graph).
inline double mean_osq(ModelTemplate t, const std::vector<Graph>& graphs, const std::vector<NodePair>& pairs, int m) {
  const MixingConstants c = reference_constants(t);
  double sum = 0.0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    MessagePassingMatrix A = build_message_matrix(graphs[i], template_matrix_kind(t));
    ExtendedReal o = osq_tilde(graphs[i], A, c, m, pairs[i]);
    if (o.is_infinite()) return std::numeric_limits<double>::infinity();
    sum += o.value();
  }
  return sum / graphs.size();
}

namespace detail {

struct Cell {
  double grid_value;
  std::string setting;
  double analytic;
  int depth;
  const Dataset* data;
  const std::vector<NodePair>* pairs;
};

inline AblationRow run_cell(const Cell& cell, ModelTemplate t, const std::vector<Graph>& graphs,
                            const AblationConfig& cfg, std::uint64_t cell_seed) {
  AblationRow row;
  row.grid_value = cell.grid_value;
  row.model = t;
  row.setting = cell.setting;
  row.analytic_max_mixing = cell.analytic;
  row.depth = cell.depth;
  row.osq_mean = mean_osq(t, graphs, *cell.pairs, cell.depth);
  std::vector<GraphOperator> ops;
  for (const Graph& g : graphs) ops.push_back(make_operator(g, template_matrix_kind(t)));
  TrainConfig tc = cfg.train;
  tc.depth = cell.depth;
  std::vector<double> maes, rels;
  std::vector<std::string> failures;
  for (int r = 0; r < tc.restarts; ++r) {
    TrainResult res = train_once(t, ops, *cell.data, tc, mix_seed(cell_seed, r));
    if (res.diverged) {
      failures.push_back("restart " + std::to_string(r) + ": " + res.diagnostic);
      continue;
    }
    maes.push_back(res.test_mae);
    rels.push_back(res.test_rel_mae);
  }
  if (maes.empty()) {
    row.status = "failed: " + failures.front();
    row.mae_mean = row.mae_std = row.rel_mae_mean = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  if (!failures.empty()) row.status = "partial: " + std::to_string(failures.size()) + " restart(s) diverged";
  double mean = 0.0, rel = 0.0;
  for (std::size_t i = 0; i < maes.size(); ++i) {
    mean += maes[i];
    rel += rels[i];
  }
  mean /= maes.size();
  rel /= rels.size();
  double var = 0.0;
  for (double x : maes) var += (x - mean) * (x - mean);
  row.mae_mean = mean;
  row.mae_std = maes.size() > 1 ? std::sqrt(var / (maes.size() - 1)) : 0.0;
  row.rel_mae_mean = rel;
  return row;
}

}  // namespace detail

/// Runs one ablation. Rows are sorted by grid value, then by template order.
/// All cells share one feature stream and each template keeps its initial
/// weights across the grid, so neighbouring cells differ only in the swept
/// quantity.
inline AblationTable run_ablation(AblationKind kind, const AblationConfig& cfg) {
  cfg.train.validate();
  if (cfg.templates.empty()) throw InvalidArgument("ablation: no model templates");
  std::vector<Graph> graphs = molecule_corpus(cfg.corpus_size, cfg.n_min, cfg.n_max, mix_seed(cfg.seed, 100));
  AblationTable table;
  table.kind = kind;
  table.depth_floor = under_reaching_floor(graphs);

  // Datasets and pairs must outlive the cells that point at them.
  std::vector<Dataset> datasets;
  std::vector<std::vector<NodePair>> pair_sets;
  std::vector<detail::Cell> cells;
  auto add_task = [&](MixingSetting ms, double alpha) {
    TaskSpec spec;
    spec.mixing_kind = ms.kind;
    spec.lo = ms.lo;
    spec.hi = ms.hi;
    spec.alpha = alpha;
    spec.graphs = graphs;
    spec.seed = mix_seed(cfg.seed, 200);
    spec.instances_per_graph = cfg.instances_per_graph;
    pair_sets.push_back(select_pairs(graphs, alpha));
    datasets.push_back(build_dataset(spec, pair_sets.back()));
  };
  const MixingSetting base{MixingKind::tanh_sum, 0.0, 1.0};
  std::vector<std::pair<std::size_t, detail::Cell>> pending;
  switch (kind) {
    case AblationKind::commute_time:
      if (cfg.alphas.empty()) throw InvalidArgument("ablation: empty alpha grid");
      datasets.reserve(cfg.alphas.size());
      pair_sets.reserve(cfg.alphas.size());
      for (double a : cfg.alphas) {
        add_task(base, a);
        std::ostringstream os;
        os << "alpha=" << a;
        pending.push_back({datasets.size() - 1, {a, os.str(), analytic_max_mixing(base.kind, base.lo, base.hi),
                                                 table.depth_floor, nullptr, nullptr}});
      }
      break;
    case AblationKind::depth: {
      std::vector<int> depths = cfg.depths;
      depths.push_back(table.depth_floor);
      std::sort(depths.begin(), depths.end());
      depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
      if (depths.front() < 1) throw InvalidArgument("ablation: depths must be positive");
      datasets.reserve(1);
      pair_sets.reserve(1);
      add_task(base, cfg.fixed_alpha);
      for (int m : depths) {
        pending.push_back({0, {double(m), "m=" + std::to_string(m), analytic_max_mixing(base.kind, base.lo, base.hi),
                               m, nullptr, nullptr}});
      }
      break;
    }
    case AblationKind::mixing:
      if (cfg.mixings.empty()) throw InvalidArgument("ablation: empty mixing grid");
      datasets.reserve(cfg.mixings.size());
      pair_sets.reserve(cfg.mixings.size());
      for (std::size_t i = 0; i < cfg.mixings.size(); ++i) {
        add_task(cfg.mixings[i], cfg.fixed_alpha);
        pending.push_back({datasets.size() - 1,
                           {double(i), describe(cfg.mixings[i]),
                            analytic_max_mixing(cfg.mixings[i].kind, cfg.mixings[i].lo, cfg.mixings[i].hi),
                            table.depth_floor, nullptr, nullptr}});
      }
      break;
  }
  for (auto& [idx, cell] : pending) {
    cell.data = &datasets[idx];
    cell.pairs = &pair_sets[idx];
    cells.push_back(cell);
  }

  const std::size_t T = cfg.templates.size();
  table.rows.resize(cells.size() * T);
  parallel_for(table.rows.size(), resolve_threads(cfg.threads), [&](std::size_t k) {
    const std::size_t ci = k / T, ti = k % T;
    table.rows[k] = detail::run_cell(cells[ci], cfg.templates[ti], graphs, cfg, mix_seed(cfg.seed, 1000 + ti));
  });
  return table;
}

struct TrendCheck {
  std::string name;
  ModelTemplate model;
  bool holds = false;
};

/// Shape checks on a finished table, one per template and expected trend.
inline std::vector<TrendCheck> check_trends(const AblationTable& t) {
  std::vector<TrendCheck> out;
  std::vector<ModelTemplate> seen;
  for (const AblationRow& r : t.rows)
    if (std::find(seen.begin(), seen.end(), r.model) == seen.end()) seen.push_back(r.model);
  for (ModelTemplate m : seen) {
    auto rows = t.for_model(m);
    auto monotone = [&](auto field, bool increasing, bool strict) {
      for (std::size_t i = 1; i < rows.size(); ++i) {
        const double a = field(rows[i - 1]), b = field(rows[i]);
        if (std::isnan(a) || std::isnan(b)) return false;
        const bool ok = increasing ? (strict ? a < b : a <= b) : (strict ? a > b : a >= b);
        if (!ok) return false;
      }
      return true;
    };
    auto mae = [](const AblationRow* r) { return r->mae_mean; };
    auto rel = [](const AblationRow* r) { return r->rel_mae_mean; };
    auto osq = [](const AblationRow* r) { return r->osq_mean; };
    switch (t.kind) {
      case AblationKind::commute_time:
        out.push_back({"mae_nondecreasing_in_alpha", m, monotone(mae, true, false)});
        out.push_back({"osq_increasing_in_alpha", m, monotone(osq, true, true)});
        break;
      case AblationKind::depth: {
        const AblationRow* floor_row = nullptr;
        for (const AblationRow* r : rows)
          if (r->depth == t.depth_floor) floor_row = r;
        const AblationRow* deepest = rows.back();
        out.push_back({"mae_deepest_below_floor", m,
                       floor_row && deepest != floor_row && deepest->mae_mean < floor_row->mae_mean});
        out.push_back({"osq_decreasing_in_depth", m, monotone(osq, false, true)});
        break;
      }
      case AblationKind::mixing:
        out.push_back({"rel_mae_increasing_with_mixing", m, monotone(rel, true, true)});
        break;
    }
  }
  return out;
}

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

inline void write_ablation_csv(const AblationTable& t, std::ostream& out) {
  out << "grid_value,model,mae_mean,mae_std,rel_mae_mean,osq_mean,status,setting,depth,analytic_max_mixing\n";
  for (const AblationRow& r : t.rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    out << format_number(r.grid_value) << ',' << to_string(r.model) << ',' << format_number(r.mae_mean) << ','
        << format_number(r.mae_std) << ',' << format_number(r.rel_mae_mean) << ',' << format_number(r.osq_mean) << ','
        << status << ',' << r.setting << ',' << r.depth << ',' << format_number(r.analytic_max_mixing) << '\n';
  }
}

}  // namespace squashscope::experiments
