// squashscope: command-line front end for graph generation, commute-time
// analysis, mixing bounds, capacity bounds, soundness checks and ablations.
//
// Exit codes: 0 success, 1 domain error, 2 usage error, 3 verification failure.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "squashscope/experiments/ablation.hpp"
#include "squashscope/graph_io.hpp"
#include "squashscope/model_io.hpp"
#include "squashscope/verification.hpp"

using namespace squashscope;
using nlohmann::json;
namespace ex = squashscope::experiments;

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : Error {
  using Error::Error;
};

enum ExitCode { kOk = 0, kDomain = 1, kUsage = 2, kVerifyFailed = 3 };

json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return std::stod(ex::format_number(x));
}

json num(const ExtendedReal& x) { return num(x.as_double()); }

NodePair parse_pair(const std::string& s) {
  auto comma = s.find(',');
  if (comma == std::string::npos) throw UsageError("pair must look like v,u (got '" + s + "')");
  try {
    std::size_t a = 0, b = 0;
    int v = std::stoi(s.substr(0, comma), &a);
    int u = std::stoi(s.substr(comma + 1), &b);
    if (a != comma || b != s.size() - comma - 1) throw std::invalid_argument(s);
    return {v, u};
  } catch (const std::exception&) {
    throw UsageError("pair must look like v,u (got '" + s + "')");
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Everything needed to rerun a command: its argv, resolved configuration and
/// seeds. The config hash covers the configuration only.
json make_manifest(const std::vector<std::string>& argv, const std::string& command, const json& config,
                   const std::vector<std::uint64_t>& seeds, int threads) {
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config.dump());
  return {{"tool", "squashscope"},      {"version", kVersion},     {"command", command},
          {"command_line", argv},       {"config", config},        {"config_hash", hash.str()},
          {"seeds", seeds},             {"threads", threads},      {"timestamp", utc_timestamp()}};
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
  if (!out) throw Error("write failed for '" + path + "'");
}

MixingConstants load_constants(const std::string& path) {
  if (path.empty()) return MixingConstants{};
  return constants_from_json(read_json_file(path));
}

json graph_summary(const Graph& g) {
  json j = {{"n", g.n()}, {"edges", g.edge_count()}, {"connected", g.connected()}, {"bipartite", g.bipartite()}};
  if (g.connected()) j["diameter"] = diameter(g);
  else j["components"] = g.components().size();
  return j;
}

json bound_report_json(const BoundReport& r) {
  json terms = json::array();
  for (double t : r.per_k_terms) terms.push_back(num(t));
  json j = {{"pair", {r.pair.v, r.pair.u}},
            {"depth", r.depth},
            {"kind", to_string(r.kind)},
            {"distance", r.distance},
            {"under_reaching", r.under_reaching},
            {"per_k_terms", terms},
            {"total_bound", num(r.total_bound)},
            {"osq_tilde", num(r.osq_tilde)}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

struct Options {
  int threads = 0;
  std::string manifest;

  // gen
  std::string kind = "path";
  GeneratorParams gen;
  std::string out;

  // analyze, bound, capacity
  std::string graph_file;
  std::string pairs = "all";
  std::string format = "json";
  std::string pair;
  int depth = 1;
  std::string constants_file;
  std::string matrix_kind = "sym";
  std::string analytic;
  std::string all_pairs_csv;
  double mixing = 1.0;
  std::string mode = "min-weight";

  // verify
  int trials = 100;
  std::uint64_t seed = 1;
  std::string graphs = "all";
  std::string family = "both";
  int samples = 16;
  int max_nodes = 12;
  int max_width = 4;
  int max_depth = 4;

  // experiment
  std::string ablation = "commute";
  ex::AblationConfig abl;
};

int cmd_gen(const Options& o, json& config, std::vector<std::uint64_t>& seeds) {
  GeneratorParams p = o.gen;
  p.kind = parse_graph_kind(o.kind);
  Graph g;
  try {
    g = generate(p);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  config = {{"kind", to_string(p.kind)}, {"n", p.n},         {"arity", p.arity},
            {"depth", p.depth},          {"width", p.width}, {"height", p.height},
            {"p", p.p},                  {"extra_cycles", p.extra_cycles}, {"seed", p.seed}, {"out", o.out}};
  seeds.push_back(p.seed);
  json summary = graph_summary(g);
  if (o.out.empty()) {
    write_edge_list(g, std::cout);
    std::cerr << summary.dump() << "\n";
  } else {
    save_graph(g, o.out);
    std::cout << summary.dump() << "\n";
  }
  return kOk;
}

int cmd_analyze(const Options& o, json& config) {
  config = {{"graph", o.graph_file}, {"pairs", o.pairs}, {"format", o.format}};
  if (o.format != "csv" && o.format != "json") throw UsageError("--format must be csv or json");
  Graph g = load_graph(o.graph_file);
  require_connected(g, "analyze");
  std::vector<NodePair> pairs;
  if (o.pairs == "all") {
    for (int v = 0; v < g.n(); ++v)
      for (int u = v + 1; u < g.n(); ++u) pairs.push_back({v, u});
  } else {
    NodePair p = parse_pair(o.pairs);
    require_pair(g, p, /*allow_equal=*/true);
    pairs.push_back(p);
  }
  CommuteTable t = commute_time_spectral(g);
  if (o.format == "csv") {
    std::cout << "v,u,distance,resistance,tau\n";
    for (NodePair p : pairs)
      std::cout << p.v << ',' << p.u << ',' << shortest_distance(g, p) << ','
                << ex::format_number(t.resistance(p.v, p.u)) << ',' << ex::format_number(t.tau(p.v, p.u)) << '\n';
    return kOk;
  }
  json rows = json::array();
  for (NodePair p : pairs)
    rows.push_back({{"v", p.v},
                    {"u", p.u},
                    {"distance", shortest_distance(g, p)},
                    {"resistance", num(t.resistance(p.v, p.u))},
                    {"tau", num(t.tau(p.v, p.u))}});
  json out = graph_summary(g);
  SpectralData spec = eigendecompose(normalized_laplacian(g), LaplacianKind::normalized);
  out["lambda_1"] = num(spec.lambda(1));
  out["lambda_max"] = num(spec.lambda(g.n() - 1));
  out["gamma"] = num(std::sqrt(double(g.max_degree()) / g.min_degree()));
  out["validated"] = g.validated();
  out["pairs"] = rows;
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int cmd_bound(const Options& o, json& config) {
  config = {{"graph", o.graph_file}, {"pair", o.pair},           {"depth", o.depth},
            {"constants", o.constants_file}, {"kind", o.matrix_kind}, {"analytic", o.analytic}};
  if (o.depth < 1) throw UsageError("--depth must be >= 1");
  Graph g = load_graph(o.graph_file);
  require_connected(g, "bound");
  NodePair pair = parse_pair(o.pair);
  MixingConstants c = load_constants(o.constants_file);
  MessagePassingMatrix A = build_message_matrix(g, parse_matrix_kind(o.matrix_kind));
  BoundReport r = mixing_bound(g, A, c, o.depth, pair);
  json out = bound_report_json(r);
  out["constants"] = constants_to_json(c);
  if (o.analytic == "tree") {
    const int d = g.degree(0);
    const int dist = r.distance;
    out["analytic"] = {{"form", "tree"},
                       {"arity", d},
                       {"distance", dist},
                       {"osq_lower", num(std::pow(c.w, -dist) * std::pow(d + 1.0, dist - 1))}};
  } else if (o.analytic == "complete") {
    out["analytic"] = {{"form", "complete"}, {"osq_lower", num((g.n() - 1) / c.w)}};
  } else if (!o.analytic.empty()) {
    throw UsageError("--analytic must be tree or complete");
  }
  if (!o.all_pairs_csv.empty()) {
    std::ofstream csv(o.all_pairs_csv);
    if (!csv) throw Error("cannot write '" + o.all_pairs_csv + "'");
    write_all_pairs_csv(g, A, c, o.depth, csv);
  }
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int cmd_capacity(const Options& o, json& config) {
  config = {{"graph", o.graph_file}, {"pair", o.pair},           {"mixing", o.mixing},
            {"mode", o.mode},        {"constants", o.constants_file}, {"kind", o.matrix_kind}};
  Graph g = load_graph(o.graph_file);
  NodePair pair = parse_pair(o.pair);
  MixingConstants c = load_constants(o.constants_file);
  json out;
  if (o.mode == "min-weight") {
    MinWeightReport r = min_weight_bound(g, pair, c.c2, o.mixing, parse_matrix_kind(o.matrix_kind));
    out = {{"mode", o.mode},
           {"distance", r.distance},
           {"depth", r.depth},
           {"shortest_paths", r.paths},
           {"walk_weight", num(r.walk_weight)},
           {"min_weight", num(r.exact)},
           {"min_weight_degree_form", num(r.degree_based)}};
  } else if (o.mode == "min-depth") {
    MinDepthReport r = min_depth_bound(g, pair, c, o.mixing);
    out = {{"mode", o.mode},
           {"distance", r.distance},
           {"tau", num(r.tau)},
           {"tau_term", num(r.tau_term)},
           {"mixing_term", num(r.mixing_term)},
           {"correction_term", num(r.correction_term)},
           {"bracket", num(r.bracket)},
           {"min_depth", num(r.bound)},
           {"min_depth_clamped", num(r.clamped_bound)},
           {"lambda_1", num(r.spectrum.lambda_1)},
           {"gamma", num(r.spectrum.gamma)}};
  } else {
    throw UsageError("--mode must be min-weight or min-depth");
  }
  out["pair"] = {pair.v, pair.u};
  out["mixing"] = num(o.mixing);
  out["constants"] = constants_to_json(c);
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int cmd_verify(const Options& o, int threads, json& config, std::vector<std::uint64_t>& seeds) {
  config = {{"trials", o.trials},       {"seed", o.seed},         {"graphs", o.graphs},
            {"family", o.family},       {"samples", o.samples},   {"constants", o.constants_file},
            {"max_nodes", o.max_nodes}, {"max_width", o.max_width}, {"max_depth", o.max_depth}};
  if (o.trials < 1) throw UsageError("--trials must be >= 1");
  if (o.samples < 1) throw UsageError("--samples must be >= 1");
  if (o.max_nodes < 2 || o.max_width < 1 || o.max_depth < 1) throw UsageError("verify: size caps must be positive");
  VerificationOptions opt;
  opt.max_nodes = o.max_nodes;
  opt.max_width = o.max_width;
  opt.max_depth = o.max_depth;
  if (o.family == "linear") opt.families = {MessageFamily::linear};
  else if (o.family == "gated") opt.families = {MessageFamily::gated};
  else if (o.family != "both") throw UsageError("--model-family must be linear, gated or both");
  if (o.graphs != "all") {
    opt.graph_kinds.clear();
    std::stringstream ss(o.graphs);
    for (std::string item; std::getline(ss, item, ',');) {
      try {
        opt.graph_kinds.push_back(parse_graph_kind(item));
      } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
      }
    }
  }
  std::optional<MixingConstants> override_constants;
  if (!o.constants_file.empty()) override_constants = load_constants(o.constants_file);

  int violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  for (int t = 0; t < o.trials; ++t) {
    const std::uint64_t s = mix_seed(o.seed, t);
    seeds.push_back(s);
    VerificationInstance inst = make_verification_instance(s, opt);
    VerifyResult r = verify_bound(inst.model, inst.graph, inst.pair, inst.box, o.samples, s, override_constants,
                                  threads);
    if (!r.satisfied) ++violations;
    worst_slack = std::min(worst_slack, r.slack);
    json line = {{"trial", t},
                 {"seed", s},
                 {"n", inst.graph.n()},
                 {"width", inst.model.width()},
                 {"depth", inst.model.depth()},
                 {"family", to_string(inst.model.layers.front().message.family)},
                 {"kind", to_string(inst.model.matrix_kind)},
                 {"pair", {inst.pair.v, inst.pair.u}},
                 {"empirical", num(r.empirical)},
                 {"theoretical", num(r.theoretical)},
                 {"slack", num(r.slack)},
                 {"satisfied", r.satisfied}};
    std::cout << line.dump() << "\n";
  }
  json summary = {{"trials", o.trials}, {"violations", violations}, {"worst_slack", num(worst_slack)},
                  {"passed", violations == 0}};
  std::cout << summary.dump() << "\n";
  return violations == 0 ? kOk : kVerifyFailed;
}

int cmd_experiment(const Options& o, int threads, const std::vector<std::string>& argv) {
  ex::AblationKind kind;
  try {
    kind = ex::parse_ablation_kind(o.ablation);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  if (o.out.empty()) throw UsageError("--out is required");
  ex::AblationConfig cfg = o.abl;
  cfg.seed = o.seed;
  cfg.threads = threads;
  try {
    cfg.train.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  if (cfg.corpus_size < 1 || cfg.instances_per_graph < 1) throw UsageError("corpus size and instances must be >= 1");

  ex::AblationTable table = ex::run_ablation(kind, cfg);
  std::filesystem::create_directories(o.out);
  const std::string stem = (std::filesystem::path(o.out) / ex::to_string(kind)).string();
  {
    std::ofstream csv(stem + ".csv");
    if (!csv) throw Error("cannot write '" + stem + ".csv'");
    ex::write_ablation_csv(table, csv);
  }
  json templates = json::array();
  for (auto t : cfg.templates) templates.push_back(ex::to_string(t));
  json config = {{"ablation", ex::to_string(kind)},
                 {"corpus_size", cfg.corpus_size},
                 {"n_min", cfg.n_min},
                 {"n_max", cfg.n_max},
                 {"seed", cfg.seed},
                 {"width", cfg.train.width},
                 {"epochs", cfg.train.epochs},
                 {"restarts", cfg.train.restarts},
                 {"learning_rate", cfg.train.learning_rate},
                 {"batch_size", cfg.train.batch_size},
                 {"init_scale", cfg.train.init_scale},
                 {"instances_per_graph", cfg.instances_per_graph},
                 {"fixed_alpha", cfg.fixed_alpha},
                 {"alphas", cfg.alphas},
                 {"depths", cfg.depths},
                 {"templates", templates},
                 {"depth_floor", table.depth_floor}};
  std::vector<std::uint64_t> seeds = {cfg.seed, mix_seed(cfg.seed, 100), mix_seed(cfg.seed, 200)};
  write_json_file(stem + "_manifest.json", make_manifest(argv, "experiment", config, seeds, threads));
  if (!o.manifest.empty()) write_json_file(o.manifest, make_manifest(argv, "experiment", config, seeds, threads));

  json trends = json::array();
  for (const ex::TrendCheck& c : ex::check_trends(table))
    trends.push_back({{"check", c.name}, {"model", ex::to_string(c.model)}, {"holds", c.holds}});
  std::cout << json{{"csv", stem + ".csv"}, {"rows", table.rows.size()}, {"depth_floor", table.depth_floor},
                    {"trends", trends}}
                   .dump(2)
            << "\n";
  return kOk;
}

int run(const std::vector<std::string>& argv);

int cmd_replay(const std::string& path) {
  json m = read_json_file(path);
  if (!m.contains("command_line") || !m["command_line"].is_array()) throw ParseError("manifest has no command_line");
  auto argv = m["command_line"].get<std::vector<std::string>>();
  if (argv.size() < 2 || argv[1] == "replay") throw ParseError("manifest command_line is not replayable");
  return run(argv);
}

int run(const std::vector<std::string>& argv) {
  CLI::App app{"Over-squashing measures, mixing bounds and their verification for message-passing networks"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--threads", o.threads, "Worker threads (default: SQUASHSCOPE_THREADS or 1)")->check(CLI::NonNegativeNumber);
  app.add_option("--manifest", o.manifest, "Write a run manifest to this file");

  auto* gen = app.add_subcommand("gen", "Generate a graph");
  gen->add_option("--kind", o.kind, "path|cycle|complete|tree|grid|erdos_renyi|molecule_like")->required();
  gen->add_option("--n", o.gen.n, "Node count");
  gen->add_option("--arity", o.gen.arity, "Tree arity");
  gen->add_option("--depth", o.gen.depth, "Tree depth");
  gen->add_option("--width", o.gen.width, "Grid width");
  gen->add_option("--height", o.gen.height, "Grid height");
  gen->add_option("--p", o.gen.p, "Edge probability");
  gen->add_option("--extra-cycles", o.gen.extra_cycles, "Chords added to the spanning tree");
  gen->add_option("--seed", o.gen.seed, "Generator seed");
  gen->add_option("-o,--out", o.out, "Output file (.json or edge list); stdout when omitted");

  auto* analyze = app.add_subcommand("analyze", "Commute times, resistances and spectrum");
  analyze->add_option("graph", o.graph_file, "Graph file")->required();
  analyze->add_option("--pairs", o.pairs, "all or v,u");
  analyze->add_option("--format", o.format, "csv or json");

  auto* bound = app.add_subcommand("bound", "Mixing bound and over-squashing proxy for one pair");
  bound->add_option("graph", o.graph_file, "Graph file")->required();
  bound->add_option("--pair", o.pair, "v,u")->required();
  bound->add_option("--depth", o.depth, "Number of layers")->required();
  bound->add_option("--constants", o.constants_file, "Constants JSON");
  bound->add_option("--kind", o.matrix_kind, "sym|rw|raw");
  bound->add_option("--analytic", o.analytic, "tree or complete: print the closed form as well");
  bound->add_option("--all-pairs-csv", o.all_pairs_csv, "Also write the bound for every ordered pair");

  auto* capacity = app.add_subcommand("capacity", "Minimum weight norm or depth for a target mixing");
  capacity->add_option("graph", o.graph_file, "Graph file")->required();
  capacity->add_option("--pair", o.pair, "v,u")->required();
  capacity->add_option("--mixing", o.mixing, "Target mixing")->required();
  capacity->add_option("--mode", o.mode, "min-weight or min-depth");
  capacity->add_option("--constants", o.constants_file, "Constants JSON");
  capacity->add_option("--kind", o.matrix_kind, "sym|rw|raw (min-weight only)");

  auto* verify = app.add_subcommand("verify", "Check the mixing bound against finite differences");
  verify->add_option("--trials", o.trials, "Random instances");
  verify->add_option("--seed", o.seed, "Base seed");
  verify->add_option("--graphs", o.graphs, "Comma-separated generator kinds, or all");
  verify->add_option("--model-family", o.family, "linear, gated or both");
  verify->add_option("--samples", o.samples, "Input samples per instance");
  verify->add_option("--constants", o.constants_file, "Use these constants instead of certified ones");
  verify->add_option("--max-nodes", o.max_nodes);
  verify->add_option("--max-width", o.max_width);
  verify->add_option("--max-depth", o.max_depth);

  auto* experiment = app.add_subcommand("experiment", "Run a synthetic mixing ablation");
  experiment->add_option("--ablation", o.ablation, "commute, depth or mixing")->required();
  experiment->add_option("--out", o.out, "Output directory")->required();
  experiment->add_option("--seed", o.seed, "Base seed");
  experiment->add_option("--corpus-size", o.abl.corpus_size);
  experiment->add_option("--width", o.abl.train.width);
  experiment->add_option("--epochs", o.abl.train.epochs);
  experiment->add_option("--restarts", o.abl.train.restarts);
  experiment->add_option("--lr", o.abl.train.learning_rate);
  experiment->add_option("--instances-per-graph", o.abl.instances_per_graph);

  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "Rerun the command recorded in a manifest");
  replay->add_option("manifest", manifest_path, "Manifest JSON")->required();

  std::vector<std::string> args(argv.rbegin(), argv.rend() - 1);
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  const int threads = resolve_threads(o.threads);
  if (*replay) return cmd_replay(manifest_path);
  if (*experiment) return cmd_experiment(o, threads, argv);

  json config;
  std::vector<std::uint64_t> seeds;
  int code = kOk;
  std::string name;
  if (*gen) {
    name = "gen";
    code = cmd_gen(o, config, seeds);
  } else if (*analyze) {
    name = "analyze";
    code = cmd_analyze(o, config);
  } else if (*bound) {
    name = "bound";
    code = cmd_bound(o, config);
  } else if (*capacity) {
    name = "capacity";
    code = cmd_capacity(o, config);
  } else {
    name = "verify";
    code = cmd_verify(o, threads, config, seeds);
  }
  if (!o.manifest.empty()) write_json_file(o.manifest, make_manifest(argv, name, config, seeds, threads));
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    return run(args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomain;
  }
}
