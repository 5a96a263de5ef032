#include "cli.hpp"

#include "rigel/analytics.hpp"
#include "rigel/embedder.hpp"
#include "rigel/errors.hpp"
#include "rigel/generate.hpp"
#include "rigel/graph.hpp"
#include "rigel/parallel.hpp"
#include "rigel/paths.hpp"
#include "rigel/query.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

namespace rigel::cli {

using json = nlohmann::ordered_json;

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

namespace {

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& argv) : command_(command) {
    doc_["command"] = std::move(command);
    doc_["argv"] = argv;
    doc_["config"] = json::object();
    doc_["inputs"] = json::object();
    doc_["timings_seconds"] = json::object();
    doc_["results"] = json::object();
    doc_["tags"] = json::array();
  }

  json& config() { return doc_["config"]; }
  void input(const std::string& path) { doc_["inputs"][path] = hex(fnv1a_file(path)); }
  void output(const std::string& path) { outputs_.push_back(path); }
  void timing(const std::string& key, double seconds) { doc_["timings_seconds"][key] = seconds; }
  template <typename T>
  void result(const std::string& key, const T& value) {
    doc_["results"][key] = value;
  }
  void tag(const std::string& t) { doc_["tags"].push_back(t); }

  std::string write(const std::string& explicit_path) {
    json outs = json::array();
    for (const auto& p : outputs_) outs.push_back({{"path", p}, {"fnv1a", hex(fnv1a_file(p))}});
    doc_["outputs"] = outs;
    std::string path = explicit_path;
    if (path.empty())
      path = outputs_.empty() ? "rigel-" + command_ + ".manifest.json"
                              : outputs_.front() + ".manifest.json";
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write manifest " + path);
    f << doc_.dump(2) << '\n';
    return path;
  }

 private:
  std::string command_;
  json doc_;
  std::vector<std::string> outputs_;
};

// Echo of every option of a subcommand, given or defaulted.
json echo_options(const CLI::App& sub) {
  json j = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt == sub.get_help_ptr()) continue;
    const std::string key = opt->get_single_name();
    if (opt->get_expected_max() == 0) {
      j[key] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& r = opt->results();
      if (opt->get_expected_max() > 1)
        j[key] = r;
      else
        j[key] = r.back();
    } else {
      j[key] = opt->get_default_str();
    }
  }
  return j;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::string_view(magic, 4) == "RGL1") {
    in.seekg(0);
    return load_binary(in);
  }
  return load_edge_list_file(path).graph;
}

Embedding load_matching_embedding(const std::string& path, const Graph& graph) {
  Embedding e = load_embedding_file(path);
  if (e.node_count() != graph.node_count())
    throw FormatError(path + ": embedding has " + std::to_string(e.node_count()) +
                      " nodes, graph has " + std::to_string(graph.node_count()));
  return e;
}

NodeId resolve(const Graph& graph, const std::string& label) {
  auto id = graph.id_of(label);
  if (!id) throw UsageError("unknown node '" + label + "'");
  return *id;
}

const std::string& label(const Graph& graph, NodeId u) { return graph.labels()[u]; }

std::pair<NodeId, NodeId> parse_pair(const Graph& graph, const std::string& text) {
  std::istringstream is(text);
  std::string a, b, extra;
  if (!(is >> a >> b) || (is >> extra)) throw UsageError("pair must be \"<u> <v>\": '" + text + "'");
  return {resolve(graph, a), resolve(graph, b)};
}

struct PairSource {
  std::vector<std::string> pairs;
  std::string pairs_file;
  std::size_t random = 0;
  std::uint64_t seed = 1;

  void add_to(CLI::App* sub) {
    sub->add_option("--pairs", pairs, "node pairs as \"<u> <v>\"");
    sub->add_option("--pairs-file", pairs_file, "file with one \"<u> <v>\" per line");
    sub->add_option("--random", random, "sample this many random pairs");
    sub->add_option("--seed", seed);
  }

  std::vector<std::pair<NodeId, NodeId>> collect(const Graph& graph) const {
    const int sources = !pairs.empty() + !pairs_file.empty() + (random > 0);
    if (sources != 1) throw UsageError("give exactly one of --pairs, --pairs-file, --random");
    if (random > 0) return sample_pairs(graph, random, seed);
    std::vector<std::pair<NodeId, NodeId>> out;
    for (const auto& p : pairs) out.push_back(parse_pair(graph, p));
    if (!pairs_file.empty()) {
      std::ifstream in(pairs_file);
      if (!in) throw std::runtime_error("cannot read " + pairs_file);
      std::string line;
      while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        out.push_back(parse_pair(graph, line));
      }
    }
    return out;
  }
};

struct EmbedFlags {
  double curvature = -1.0;
  int dimension = 10;
  std::uint32_t landmarks = 100;
  std::uint32_t primaries = 16;
  std::uint32_t refs = 16;
  std::uint32_t local_landmarks = 1;
  std::string objective = "squared_abs";
  unsigned workers = 1;
  std::uint64_t seed = 1;
  int max_iterations = 0;
  double tolerance = 1e-6;

  void add_to(CLI::App* sub) {
    sub->add_option("--curvature", curvature, "negative for hyperboloid, 0 for Euclidean");
    sub->add_option("--dim", dimension);
    sub->add_option("--landmarks", landmarks);
    sub->add_option("--primaries", primaries);
    sub->add_option("--refs", refs, "references per node");
    sub->add_option("--local-landmarks", local_landmarks, "1-hop references per node");
    sub->add_option("--objective", objective)
        ->check(CLI::IsMember({"squared_abs", "abs", "squared_rel"}));
    sub->add_option("--workers", workers)->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed);
    sub->add_option("--max-iterations", max_iterations, "0 selects 500 * dim");
    sub->add_option("--tolerance", tolerance);
  }

  EmbedConfig config() const {
    EmbedConfig c;
    c.space = Space::from_curvature(curvature, dimension);
    c.landmark_count = landmarks;
    c.primary_count = primaries;
    c.refs_per_node = refs;
    c.local_landmarks = local_landmarks;
    c.objective = objective_from_string(objective);
    c.workers = workers;
    c.seed = seed;
    c.optimizer.max_iterations = max_iterations;
    c.optimizer.tolerance = tolerance;
    c.validate();
    return c;
  }
};

struct LatencyStats {
  double mean = 0, median = 0, p99 = 0;
};

LatencyStats latency_stats(std::vector<double> ns) {
  LatencyStats s;
  if (ns.empty()) return s;
  std::sort(ns.begin(), ns.end());
  s.mean = std::accumulate(ns.begin(), ns.end(), 0.0) / double(ns.size());
  s.median = ns[ns.size() / 2];
  const auto idx = static_cast<std::size_t>(std::ceil(0.99 * double(ns.size()))) - 1;
  s.p99 = ns[std::min(idx, ns.size() - 1)];
  return s;
}

double elapsed_ns(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - t0).count();
}

// Estimates must be positive for the ratio metrics; coincident coordinates
// of distinct nodes are floored.
constexpr double kEstimateFloor = 1e-6;

std::vector<std::size_t> parse_sizes(const std::vector<std::size_t>& v, const char* what) {
  if (v.empty()) throw UsageError(std::string(what) + " must not be empty");
  for (auto k : v)
    if (k == 0) throw UsageError(std::string(what) + " entries must be > 0");
  return v;
}

using Action = std::function<void(Manifest&, std::ostream&)>;

// ---------------------------------------------------------------- generate

struct GenerateOpts {
  std::string kind, out;
  std::size_t nodes = 0, k = 10, m = 3, rows = 0, cols = 0;
  double p = 0.1;
  std::uint64_t seed = 1;
  bool binary = false;
};

void cmd_generate(const GenerateOpts& o, Manifest& m, std::ostream& out) {
  Graph g;
  try {
    if (o.kind == "grid") {
      if (o.rows == 0 || o.cols == 0) throw UsageError("grid needs --rows and --cols");
      g = generate::grid(o.rows, o.cols);
    } else {
      if (o.nodes == 0) throw UsageError(o.kind + " needs --nodes");
      if (o.kind == "path") g = generate::path(o.nodes);
      else if (o.kind == "star") g = generate::star(o.nodes);
      else if (o.kind == "smallworld") g = generate::small_world(o.nodes, o.k, o.p, o.seed);
      else g = generate::scale_free(o.nodes, o.m, o.seed);
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  auto f = open_out(o.out);
  if (o.binary) save_binary(g, f);
  else write_edge_list(g, f);
  f.close();
  m.output(o.out);
  out << "nodes=" << g.node_count() << "\nedges=" << g.edge_count() << '\n';
  m.result("nodes", g.node_count());
  m.result("edges", g.edge_count());
}

// ---------------------------------------------------------------- embed

struct EmbedOpts {
  std::string graph, out;
  EmbedFlags flags;
};

void cmd_embed(const EmbedOpts& o, Manifest& m, std::ostream& out) {
  const EmbedConfig cfg = o.flags.config();
  m.input(o.graph);
  Stopwatch load;
  const Graph g = load_graph(o.graph);
  m.timing("load_graph", load.seconds());
  const Embedding e = embed_graph(g, cfg);
  save_embedding_file(e, o.out);
  m.output(o.out);

  const auto& t = e.diagnostics.timings;
  m.timing("landmark_bfs", t.landmark_bfs_seconds);
  m.timing("bootstrap", t.landmark_bootstrap_seconds);
  m.timing("partition", t.partition_seconds);
  m.timing("embedding", t.embedding_seconds);
  const std::string mode = cfg.local_landmarks == 0 ? "Raw Rigel" : "Rigel";
  m.tag(mode);
  m.result("excluded_nodes", e.excluded_count());
  m.result("bootstrap_objective", e.diagnostics.bootstrap_objective);
  out << "mode=" << mode << '\n'
      << "nodes=" << e.node_count() << '\n'
      << "excluded=" << e.excluded_count() << '\n'
      << "bootstrap_objective=" << format_double(e.diagnostics.bootstrap_objective) << '\n'
      << "seconds.landmark_bfs=" << format_double(t.landmark_bfs_seconds) << '\n'
      << "seconds.bootstrap=" << format_double(t.landmark_bootstrap_seconds) << '\n'
      << "seconds.partition=" << format_double(t.partition_seconds) << '\n'
      << "seconds.embedding=" << format_double(t.embedding_seconds) << '\n';
}

// ---------------------------------------------------------------- query

struct QueryOpts {
  std::string graph, embedding, out;
  PairSource pairs;
  bool no_local_opt = false, exact = false;
  unsigned parallel = 1;
};

void cmd_query(const QueryOpts& o, Manifest& m, std::ostream& out) {
  m.input(o.graph);
  m.input(o.embedding);
  const Graph g = load_graph(o.graph);
  const Embedding e = load_matching_embedding(o.embedding, g);
  const auto pairs = o.pairs.collect(g);
  const QueryConfig qc{!o.no_local_opt};
  const std::string mode = o.no_local_opt ? "Rigel-S" : "Rigel";
  m.tag(mode);

  auto answer = [&](std::size_t i) -> std::optional<double> {
    const auto [u, v] = pairs[i];
    if (e.is_excluded(u) || e.is_excluded(v)) return std::nullopt;
    return estimate_distance(g, e, u, v, qc);
  };
  std::vector<std::optional<double>> est(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) est[i] = answer(i);  // warm-up pass

  out << "mode=" << mode << "\nqueries=" << pairs.size() << '\n';
  if (o.parallel > 1) {
    Stopwatch sw;
    parallel_round_robin(pairs.size(), o.parallel, [&](std::size_t i) { est[i] = answer(i); });
    const double qps = double(pairs.size()) / sw.seconds();
    m.result("throughput_qps", qps);
    out << "workers=" << o.parallel << "\nthroughput_qps=" << format_double(qps) << '\n';
  } else {
    std::vector<double> ns(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      est[i] = answer(i);
      ns[i] = elapsed_ns(t0);
    }
    const auto s = latency_stats(ns);
    m.result("latency_ns", json{{"mean", s.mean}, {"median", s.median}, {"p99", s.p99}});
    out << "latency_ns.mean=" << format_double(s.mean) << '\n'
        << "latency_ns.median=" << format_double(s.median) << '\n'
        << "latency_ns.p99=" << format_double(s.p99) << '\n';
  }

  std::vector<std::string> header{"u", "v", "estimate"};
  if (o.exact) header.insert(header.end(), {"truth", "abs_error"});
  CsvTable table(header);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [u, v] = pairs[i];
    std::vector<std::string> row{label(g, u), label(g, v), est[i] ? format_double(*est[i]) : "NA"};
    if (o.exact) {
      const HopCount d = bfs_pair_distance(g, u, v);
      const bool ok = d != kUnreachable;
      row.push_back(ok ? std::to_string(d) : "NA");
      row.push_back(ok && est[i] ? format_double(std::abs(*est[i] - double(d))) : "NA");
    }
    table.add_row(std::move(row));
  }
  if (o.out.empty()) {
    table.write(out);
  } else {
    auto f = open_out(o.out);
    table.write(f);
    f.close();
    m.output(o.out);
  }
}

// ---------------------------------------------------------------- path

struct PathOpts {
  std::string graph, embedding, out, admission = "parent";
  PairSource pairs;
  double delta = 0.3;
  std::size_t c_max = 30, max_hops = 0;
  bool no_retry = false, no_local_opt = false, oracle = false;
};

void cmd_path(const PathOpts& o, Manifest& m, std::ostream& out) {
  m.input(o.graph);
  m.input(o.embedding);
  const Graph g = load_graph(o.graph);
  const Embedding e = load_matching_embedding(o.embedding, g);
  const auto pairs = o.pairs.collect(g);
  PathConfig pc;
  pc.delta = o.delta;
  pc.c_max = o.c_max;
  pc.max_hops = o.max_hops;
  pc.relax_retry = !o.no_retry;
  pc.admission = o.admission == "source" ? AdmissionRule::FromSource : AdmissionRule::FromParent;
  pc.query.local_optimization = !o.no_local_opt;
  pc.validate();

  std::vector<std::string> header{"u", "v", "status", "length", "path"};
  if (o.oracle) header.insert(header.end(), {"bfs", "exact"});
  CsvTable table(header);
  std::size_t found = 0, failed = 0, skipped = 0, exact = 0, retried = 0;
  std::map<long, std::size_t> histogram;
  std::vector<double> ns;
  ns.reserve(pairs.size());

  for (const auto& [a, b] : pairs) {
    if (a == b || e.is_excluded(a) || e.is_excluded(b)) {
      ++skipped;
      std::vector<std::string> row{label(g, a), label(g, b), "skipped", "NA", ""};
      if (o.oracle) row.insert(row.end(), {"NA", "NA"});
      table.add_row(std::move(row));
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto r = find_path(g, e, a, b, pc);
    ns.push_back(elapsed_ns(t0));
    std::vector<std::string> row{label(g, a), label(g, b)};
    if (!r) {
      ++failed;
      row.insert(row.end(), {"failed", "NA", ""});
      if (o.oracle) {
        const HopCount d = bfs_pair_distance(g, a, b);
        row.insert(row.end(), {d == kUnreachable ? "NA" : std::to_string(d), "NA"});
      }
    } else {
      if (!is_valid_path(g, r->path, a, b))
        throw std::logic_error("invalid path returned for " + label(g, a) + " " + label(g, b));
      ++found;
      retried += r->retried;
      std::string walk;
      for (std::size_t i = 0; i < r->path.size(); ++i) walk += (i ? " " : "") + label(g, r->path[i]);
      row.insert(row.end(), {"found", std::to_string(r->length()), walk});
      if (o.oracle) {
        const HopCount d = check_exact(g, *r);
        exact += *r->exact;
        ++histogram[long(r->length()) - long(d)];
        row.insert(row.end(), {std::to_string(d), *r->exact ? "1" : "0"});
      }
    }
    table.add_row(std::move(row));
  }

  const auto s = latency_stats(ns);
  const double attempted = double(found + failed);
  const double failure_rate = attempted > 0 ? double(failed) / attempted : 0.0;
  out << "pairs=" << pairs.size() << "\nfound=" << found << "\nfailed=" << failed
      << "\nskipped=" << skipped << "\nretried=" << retried
      << "\nfailure_rate=" << format_double(failure_rate)
      << "\nlatency_ns.mean=" << format_double(s.mean)
      << "\nlatency_ns.median=" << format_double(s.median)
      << "\nlatency_ns.p99=" << format_double(s.p99) << '\n';
  m.result("found", found);
  m.result("failed", failed);
  m.result("skipped", skipped);
  m.result("failure_rate", failure_rate);
  m.result("latency_ns", json{{"mean", s.mean}, {"median", s.median}, {"p99", s.p99}});
  if (o.oracle) {
    const double frac = found ? double(exact) / double(found) : 0.0;
    out << "exact_fraction=" << format_double(frac) << '\n';
    json hist = json::object();
    for (auto [err, count] : histogram) {
      out << "abs_error_hops." << err << '=' << count << '\n';
      hist[std::to_string(err)] = count;
    }
    m.result("exact_fraction", frac);
    m.result("abs_error_hops", hist);
  }
  if (!o.out.empty()) {
    auto f = open_out(o.out);
    table.write(f);
    f.close();
    m.output(o.out);
  }
}

// ---------------------------------------------------------------- fit

struct FitOpts {
  std::string graph, long_coords, short_coords, out;
  std::size_t pairs = 5000;
  std::uint64_t seed = 1;
  int theta_min = 1, theta_max = 18;
  double bin_width = 1.0, alpha = 1.0;
};

std::vector<HopCount> true_distances(const Graph& g,
                                     const std::vector<std::pair<NodeId, NodeId>>& pairs) {
  std::vector<HopCount> d(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    d[i] = bfs_pair_distance(g, pairs[i].first, pairs[i].second);
  return d;
}

void cmd_fit(const FitOpts& o, Manifest& m, std::ostream& out) {
  for (const auto* p : {&o.graph, &o.long_coords, &o.short_coords}) m.input(*p);
  const Graph g = load_graph(o.graph);
  const Embedding el = load_matching_embedding(o.long_coords, g);
  const Embedding es = load_matching_embedding(o.short_coords, g);
  const auto pairs = sample_pairs(g, o.pairs, o.seed);
  const auto truth = true_distances(g, pairs);
  std::vector<HoldoutPair> holdout;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (truth[i] != kUnreachable) holdout.push_back({pairs[i].first, pairs[i].second, truth[i]});
  const auto fit = fit_likelihood_model(g, el, es, holdout, o.theta_min, o.theta_max, o.bin_width,
                                        o.alpha);
  auto f = open_out(o.out);
  save_likelihood_model(fit.model, f);
  f.close();
  m.output(o.out);
  const std::size_t skipped = fit.skipped_pairs + (pairs.size() - holdout.size());
  out << "used_pairs=" << fit.used_pairs << "\nskipped_pairs=" << skipped
      << "\nempty_thetas=" << fit.empty_thetas.size() << '\n';
  m.result("used_pairs", fit.used_pairs);
  m.result("skipped_pairs", skipped);
  m.result("empty_thetas", fit.empty_thetas);
}

// ---------------------------------------------------------------- eval

struct EvalOpts {
  std::string graph, embedding, short_coords, model, csv;
  std::size_t pairs = 2000;
  std::uint64_t seed = 1;
  bool no_local_opt = false;
  std::vector<double> sweep;
  EmbedFlags flags;
};

struct Bucket {
  std::size_t count = 0;
  std::vector<double> abs_sum, rel_sum;
};

void cmd_eval_sweep(const EvalOpts& o, Manifest& m, std::ostream& out) {
  m.input(o.graph);
  const Graph g = load_graph(o.graph);
  const auto pairs = sample_pairs(g, o.pairs, o.seed);
  const auto truth = true_distances(g, pairs);
  const QueryConfig qc{!o.no_local_opt};
  CsvTable table({"curvature", "model", "pairs", "are", "aae"});
  for (double c : o.sweep) {
    EmbedFlags flags = o.flags;
    flags.curvature = c;
    const Embedding e = embed_graph(g, flags.config());
    m.timing("embed_c=" + format_double(c), e.diagnostics.timings.embedding_seconds);
    std::vector<EstimatePair> ep;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto [u, v] = pairs[i];
      if (truth[i] == kUnreachable || e.is_excluded(u) || e.is_excluded(v)) continue;
      ep.push_back({std::max(kEstimateFloor, estimate_distance(g, e, u, v, qc)), double(truth[i])});
    }
    const auto r = error_metrics(ep);
    const std::string model(to_string(e.space.model));
    table.add_row({format_double(c), model, std::to_string(r.pair_count), format_double(r.are),
                   format_double(r.aae)});
    out << "c=" << format_double(c) << " model=" << model << " are=" << format_double(r.are)
        << " aae=" << format_double(r.aae) << '\n';
  }
  if (!o.csv.empty()) {
    auto f = open_out(o.csv);
    table.write(f);
    f.close();
    m.output(o.csv);
  }
}

void cmd_eval(const EvalOpts& o, Manifest& m, std::ostream& out) {
  if (!o.sweep.empty()) {
    if (!o.embedding.empty()) throw UsageError("--sweep-curvature embeds from --graph; drop --embedding");
    return cmd_eval_sweep(o, m, out);
  }
  if (o.embedding.empty()) throw UsageError("--embedding is required");
  const bool hybrid = !o.model.empty();
  if (hybrid != !o.short_coords.empty()) throw UsageError("--hybrid needs both --short and --model");

  m.input(o.graph);
  m.input(o.embedding);
  const Graph g = load_graph(o.graph);
  const Embedding el = load_matching_embedding(o.embedding, g);
  Embedding es;
  LikelihoodModel model;
  if (hybrid) {
    m.input(o.short_coords);
    m.input(o.model);
    es = load_matching_embedding(o.short_coords, g);
    std::ifstream in(o.model);
    if (!in) throw std::runtime_error("cannot read " + o.model);
    model = load_likelihood_model(in);
  }
  const QueryConfig qc{!o.no_local_opt};
  const auto pairs = sample_pairs(g, o.pairs, o.seed);
  const auto truth = true_distances(g, pairs);

  const std::size_t columns = hybrid ? 3 : 1;
  std::map<HopCount, Bucket> buckets;
  std::vector<std::vector<EstimatePair>> all(columns);
  std::size_t skipped = 0, floored = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [u, v] = pairs[i];
    const HopCount d = truth[i];
    if (d == kUnreachable || el.is_excluded(u) || el.is_excluded(v) ||
        (hybrid && (es.is_excluded(u) || es.is_excluded(v)))) {
      ++skipped;
      continue;
    }
    std::vector<double> est{estimate_distance(g, el, u, v, qc)};
    if (hybrid) {
      est.push_back(estimate_distance(g, es, u, v, qc));
      est.push_back(qc.local_optimization
                        ? estimate_distance_hybrid(g, el, es, model, u, v)
                        : double(mle_estimate(model, coordinate_distance(el, u, v),
                                              coordinate_distance(es, u, v))
                                     .theta));
    }
    Bucket& b = buckets[d];
    if (b.count++ == 0) b.abs_sum.assign(columns, 0.0), b.rel_sum.assign(columns, 0.0);
    for (std::size_t c = 0; c < columns; ++c) {
      const double err = std::abs(est[c] - double(d));
      b.abs_sum[c] += err;
      b.rel_sum[c] += err / double(d);
      if (est[c] < kEstimateFloor) ++floored;
      all[c].push_back({std::max(kEstimateFloor, est[c]), double(d)});
    }
  }
  if (buckets.empty()) throw std::runtime_error("eval: every sampled pair was skipped");

  const std::vector<std::string> names =
      hybrid ? std::vector<std::string>{"long", "short", "hybrid"} : std::vector<std::string>{""};
  std::vector<std::string> header{"distance", "count"};
  for (const char* metric : {"aae", "are"})
    for (const auto& n : names) header.push_back(n.empty() ? metric : std::string(metric) + "_" + n);
  CsvTable table(header);
  const HopCount max_d = buckets.rbegin()->first;
  for (HopCount d = 1; d <= max_d; ++d) {
    std::vector<std::string> row{std::to_string(d)};
    auto it = buckets.find(d);
    const std::size_t n = it == buckets.end() ? 0 : it->second.count;
    row.push_back(std::to_string(n));
    for (int which = 0; which < 2; ++which)
      for (std::size_t c = 0; c < columns; ++c) {
        if (n == 0) {
          row.push_back("NA");
          continue;
        }
        const auto& sums = which == 0 ? it->second.abs_sum : it->second.rel_sum;
        row.push_back(format_double(sums[c] / double(n)));
      }
    table.add_row(std::move(row));
  }

  out << "mode=" << (o.no_local_opt ? "Rigel-S" : "Rigel") << "\npairs=" << pairs.size()
      << "\nskipped=" << skipped << "\nfloored_estimates=" << floored << '\n';
  m.result("skipped", skipped);
  for (std::size_t c = 0; c < columns; ++c) {
    const auto r = error_metrics(all[c]);
    const std::string prefix = names[c].empty() ? "" : names[c] + ".";
    write_key_values(out, r, prefix);
    m.result(prefix + "are", r.are);
    m.result(prefix + "aae", r.aae);
  }
  if (!o.csv.empty()) {
    auto f = open_out(o.csv);
    table.write(f);
    f.close();
    m.output(o.csv);
  } else {
    table.write(out);
  }
}

// ---------------------------------------------------------------- app

struct AppOpts {
  std::string kind, graph, embedding, csv;
  std::uint64_t seed = 1;
  bool no_local_opt = false;
  std::size_t sample = 500, candidates = 200, references = 1000, queries = 10, responders = 100;
  std::vector<std::size_t> ks;
};

DistanceFn estimate_fn(const Graph& g, const Embedding& e, QueryConfig qc) {
  return [&g, &e, qc](NodeId u, NodeId v) -> std::optional<double> {
    if (e.is_excluded(u) || e.is_excluded(v)) return std::nullopt;
    return estimate_distance(g, e, u, v, qc);
  };
}

// Exact distances for pairs whose first node is one of `sources`.
DistanceFn exact_fn(const std::vector<DistanceVector>& bfs, const std::vector<NodeId>& sources) {
  auto index = std::make_shared<std::unordered_map<NodeId, std::size_t>>();
  for (std::size_t i = 0; i < sources.size(); ++i) index->emplace(sources[i], i);
  return [&bfs, index](NodeId u, NodeId v) -> std::optional<double> {
    const auto it = index->find(u);
    const auto& vec = it != index->end() ? bfs[it->second] : bfs[index->at(v)];
    const NodeId other = it != index->end() ? v : u;
    if (!vec.reachable(other)) return std::nullopt;
    return double(vec.dist[other]);
  };
}

void write_table(const CsvTable& t, const std::string& path, Manifest& m, std::ostream& out) {
  if (path.empty()) {
    t.write(out);
    return;
  }
  auto f = open_out(path);
  t.write(f);
  f.close();
  m.output(path);
}

void cmd_app(const AppOpts& o, Manifest& m, std::ostream& out) {
  m.input(o.graph);
  m.input(o.embedding);
  const Graph g = load_graph(o.graph);
  const Embedding e = load_matching_embedding(o.embedding, g);
  const QueryConfig qc{!o.no_local_opt};
  const DistanceFn est = estimate_fn(g, e, qc);
  const std::size_t n = g.node_count();
  m.tag(o.kind);

  if (o.kind == "separation") {
    const auto sample = sample_nodes(g, std::min(o.sample, n), o.seed);
    std::vector<DistanceVector> bfs;
    for (NodeId s : sample) bfs.push_back(bfs_distances(g, s));
    const auto exact = separation_metrics(exact_fn(bfs, sample), sample);
    const auto approx = separation_metrics(est, sample);
    write_key_values(out, approx, "estimated.");
    write_key_values(out, exact, "exact.");
    CsvTable t({"metric", "estimated", "exact", "difference"});
    auto row = [&](const char* name, double a, double x) {
      t.add_row({name, format_double(a), format_double(x), format_double(a - x)});
      m.result(std::string("estimated.") + name, a);
      m.result(std::string("exact.") + name, x);
    };
    row("radius", approx.radius, exact.radius);
    row("diameter", approx.diameter, exact.diameter);
    row("avg_path_length", approx.avg_path_length, exact.avg_path_length);
    write_table(t, o.csv, m, out);
    return;
  }

  std::vector<std::size_t> ks =
      o.ks.empty() ? (o.kind == "centrality" ? std::vector<std::size_t>{5, 10, 15, 20, 25, 30, 35, 40, 45, 50}
                                             : std::vector<std::size_t>{5, 10, 20})
                   : parse_sizes(o.ks, "--k");
  const std::size_t kmax = *std::max_element(ks.begin(), ks.end());

  if (o.kind == "centrality") {
    const auto cands = sample_nodes(g, std::min(o.candidates, n), o.seed);
    const auto refs = sample_nodes(g, std::min(o.references, n), o.seed + 1);
    if (kmax > cands.size()) throw UsageError("--k exceeds the candidate count");
    std::vector<DistanceVector> bfs;
    for (NodeId c : cands) bfs.push_back(bfs_distances(g, c));
    const auto truth = centrality_topk(exact_fn(bfs, cands), cands, refs, kmax);
    const auto approx = centrality_topk(est, cands, refs, kmax);
    CsvTable t({"k", "overlap"});
    for (auto k : ks) {
      const double ov = topk_overlap(approx, truth, k);
      t.add_row({std::to_string(k), format_double(ov)});
      m.result("overlap_k" + std::to_string(k), ov);
    }
    out << "candidates=" << cands.size() << "\nreferences=" << refs.size() << '\n';
    write_table(t, o.csv, m, out);
    return;
  }

  // search
  if (o.queries == 0) throw UsageError("--queries must be > 0");
  if (o.responders + 1 > n) throw UsageError("--responders must be < node count");
  if (kmax > o.responders) throw UsageError("--k exceeds --responders");
  std::vector<double> sums(ks.size(), 0.0);
  for (std::size_t q = 0; q < o.queries; ++q) {
    auto nodes = sample_nodes(g, o.responders + 1, o.seed + q);
    const NodeId query = nodes.front();
    const std::vector<NodeId> responders(nodes.begin() + 1, nodes.end());
    const std::vector<DistanceVector> bfs{bfs_distances(g, query)};
    const auto truth = social_search(exact_fn(bfs, {query}), query, responders, kmax);
    const auto approx = social_search(est, query, responders, kmax);
    for (std::size_t i = 0; i < ks.size(); ++i) sums[i] += topk_overlap(approx, truth, ks[i]);
  }
  CsvTable t({"k", "mean_overlap"});
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double ov = sums[i] / double(o.queries);
    t.add_row({std::to_string(ks[i]), format_double(ov)});
    m.result("overlap_k" + std::to_string(ks[i]), ov);
  }
  out << "queries=" << o.queries << "\nresponders=" << o.responders << '\n';
  write_table(t, o.csv, m, out);
}

// ---------------------------------------------------------------- bench

struct BenchOpts {
  std::string graph, embedding;
  std::size_t queries = 10000, bfs_queries = 100;
  std::uint64_t seed = 1;
  bool no_local_opt = false;
  std::vector<unsigned> speedup;
  EmbedFlags flags;
};

void cmd_bench(const BenchOpts& o, Manifest& m, std::ostream& out) {
  if (o.embedding.empty() && o.speedup.empty())
    throw UsageError("bench needs --embedding (latency) or --speedup (parallel embedding)");
  m.input(o.graph);
  const Graph g = load_graph(o.graph);

  if (!o.embedding.empty()) {
    m.input(o.embedding);
    const Embedding e = load_matching_embedding(o.embedding, g);
    const QueryConfig qc{!o.no_local_opt};
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (auto p : sample_pairs(g, o.queries + o.bfs_queries, o.seed))
      if (!e.is_excluded(p.first) && !e.is_excluded(p.second)) pairs.push_back(p);
    volatile double sink = 0;
    for (auto [u, v] : pairs) sink = sink + estimate_distance(g, e, u, v, qc);
    std::vector<double> est_ns;
    for (std::size_t i = 0; i < std::min(o.queries, pairs.size()); ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      sink = sink + estimate_distance(g, e, pairs[i].first, pairs[i].second, qc);
      est_ns.push_back(elapsed_ns(t0));
    }
    std::vector<double> bfs_ns;
    for (std::size_t i = 0; i < std::min(o.bfs_queries, pairs.size()); ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      sink = sink + bfs_pair_distance(g, pairs[i].first, pairs[i].second);
      bfs_ns.push_back(elapsed_ns(t0));
    }
    const auto se = latency_stats(est_ns), sb = latency_stats(bfs_ns);
    const double ratio = se.mean > 0 ? sb.mean / se.mean : 0.0;
    const std::string mode = o.no_local_opt ? "Rigel-S" : "Rigel";
    out << "mode=" << mode << "\nestimate_ns.mean=" << format_double(se.mean)
        << "\nestimate_ns.median=" << format_double(se.median)
        << "\nestimate_ns.p99=" << format_double(se.p99) << "\nbfs_ns.mean=" << format_double(sb.mean)
        << "\nbfs_ns.median=" << format_double(sb.median) << "\nbfs_ns.p99=" << format_double(sb.p99)
        << "\nspeedup=" << format_double(ratio) << '\n';
    m.tag(mode);
    m.result("estimate_ns", json{{"mean", se.mean}, {"median", se.median}, {"p99", se.p99}});
    m.result("bfs_ns", json{{"mean", sb.mean}, {"median", sb.median}, {"p99", sb.p99}});
    m.result("speedup", ratio);
  }

  if (!o.speedup.empty()) {
    std::optional<Embedding> base;
    double base_seconds = 0;
    for (unsigned w : o.speedup) {
      EmbedFlags flags = o.flags;
      flags.workers = w;
      Embedding e = embed_graph(g, flags.config());
      const double s = e.diagnostics.timings.embedding_seconds;
      if (!base) base_seconds = s;
      const bool identical = !base || (base->coords == e.coords && base->excluded == e.excluded);
      if (!base) base = std::move(e);
      const double sp = s > 0 ? base_seconds / s : 0.0;
      out << "workers=" << w << " embedding_seconds=" << format_double(s)
          << " speedup=" << format_double(sp) << " identical=" << (identical ? 1 : 0) << '\n';
      m.timing("embedding_w" + std::to_string(w), s);
      m.result("identical_w" + std::to_string(w), identical);
    }
  }
}

// ---------------------------------------------------------------- replay

int cmd_replay(const std::string& path, std::ostream& out, std::ostream& err) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  const json doc = json::parse(in);
  const auto args = doc.at("argv").get<std::vector<std::string>>();
  if (!args.empty() && args.front() == "replay") throw UsageError("manifest records a replay");
  const int code = run(args, out, err);
  if (code != kExitOk) return code;
  std::size_t mismatches = 0;
  for (const auto& o : doc.at("outputs")) {
    const auto p = o.at("path").get<std::string>();
    const bool same = hex(fnv1a_file(p)) == o.at("fnv1a").get<std::string>();
    out << "replay." << p << '=' << (same ? "identical" : "DIFFERENT") << '\n';
    mismatches += !same;
  }
  return mismatches ? kExitRuntime : kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph coordinate system: embed graphs in hyperbolic space and query distances",
               "rigel"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  std::string manifest_path;
  std::vector<std::pair<CLI::App*, Action>> commands;
  auto command = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--manifest", manifest_path, "manifest path (default <first output>.manifest.json)");
    return sub;
  };

  GenerateOpts gen;
  {
    auto* s = command("generate", "write a synthetic graph");
    s->add_option("kind,--kind", gen.kind)
        ->required()
        ->check(CLI::IsMember({"path", "star", "grid", "smallworld", "scalefree"}));
    s->add_option("--nodes,-n", gen.nodes);
    s->add_option("--k", gen.k, "smallworld lattice degree (even)");
    s->add_option("--p", gen.p, "smallworld rewiring probability");
    s->add_option("--m", gen.m, "scalefree edges per new node");
    s->add_option("--rows", gen.rows);
    s->add_option("--cols", gen.cols);
    s->add_option("--seed", gen.seed);
    s->add_option("--out,-o", gen.out)->required();
    s->add_flag("--binary", gen.binary, "write the RGL1 binary format");
    commands.emplace_back(s, [&](Manifest& m, std::ostream& o) { cmd_generate(gen, m, o); });
  }

  EmbedOpts emb;
  {
    auto* s = command("embed", "embed a graph and write an RGE1 file");
    s->add_option("--graph,-g", emb.graph)->required();
    s->add_option("--out,-o", emb.out)->required();
    emb.flags.add_to(s);
    commands.emplace_back(s, [&](Manifest& m, std::ostream& o) { cmd_embed(emb, m, o); });
  }

  QueryOpts qry;
  {
    auto* s = command("query", "estimate distances for node pairs");
    s->add_option("--graph,-g", qry.graph)->required();
    s->add_option("--embedding,-e", qry.embedding)->required();
    qry.pairs.add_to(s);
    s->add_flag("--no-local-opt", qry.no_local_opt, "skip the exact 1/2-hop shortcut (Rigel-S)");
    s->add_flag("--exact", qry.exact, "add BFS truth and error columns");
    s->add_option("--parallel", qry.parallel, "worker threads (throughput mode)")->check(CLI::PositiveNumber);
    s->add_option("--out,-o", qry.out, "CSV output (default stdout)");
    commands.emplace_back(s, [&](Manifest& m, std::ostream& o) { cmd_query(qry, m, o); });
  }

  PathOpts pth;
  {
    auto* s = command("path", "find paths guided by coordinates");
    s->add_option("--graph,-g", pth.graph)->required();
    s->add_option("--embedding,-e", pth.embedding)->required();
    pth.pairs.add_to(s);
    s->add_option("--delta", pth.delta);
    s->add_option("--cmax", pth.c_max);
    s->add_option("--max-hops", pth.max_hops, "0 selects 2*ceil(estimate)+2");
    s->add_option("--admission", pth.admission)->check(CLI::IsMember({"parent", "source"}));
    s->add_flag("--no-retry", pth.no_retry);
    s->add_flag("--no-local-opt", pth.no_local_opt);
    s->add_flag("--oracle", pth.oracle, "compare against BFS");
    s->add_option("--out,-o", pth.out, "CSV of paths");
    commands.emplace_back(s, [&](Manifest& m, std::ostream& o) { cmd_path(pth, m, o); });
  }

  FitOpts fit;
  {
    auto* s = command("fit", "fit the likelihood model for the hybrid estimator");
    s->add_option("--graph,-g", fit.graph)->required();
    s->add_option("--long", fit.long_coords, "embedding tuned for long distances")->required();
    s->add_option("--short", fit.short_coords, "embedding tuned for short distances")->required();
    s->add_option("--pairs", fit.pairs, "holdout pair count");
    s->add_option("--seed", fit.seed);
    s->add_option("--theta-min", fit.theta_min);
    s->add_option("--theta-max", fit.theta_max);
    s->add_option("--bin-width", fit.bin_width);
    s->add_option("--alpha", fit.alpha);
    s->add_option("--out,-o", fit.out)->required();
    commands.emplace_back(s, [&](Manifest& m, std::ostream& o) { cmd_fit(fit, m, o); });
  }

  EvalOpts evl;
  {
    auto* s = command("eval", "error metrics bucketed by true distance");
    s->add_option("--graph,-g", evl.graph)->required();
    s->add_option("--embedding,-e", evl.embedding, "embedding (the long one with --hybrid)");
    s->add_option("--short", evl.short_coords);
    s->add_option("--hybrid", evl.model, "likelihood model file");
    s->add_option("--pairs", evl.pairs);
    s->add_flag("--no-local-opt", evl.no_local_opt);
    s->add_option("--sweep-curvature", evl.sweep, "comma list; 0 means Euclidean")->delimiter(',');
    s->add_option("--csv", evl.csv);
    // --seed doubles as the embedding seed in sweep mode.
    evl.flags.add_to(s);
    commands.emplace_back(s, [&](Manifest& m, std::ostream& o) {
      evl.seed = evl.flags.seed;
      cmd_eval(evl, m, o);
    });
  }

  AppOpts ap;
  {
    auto* s = command("app", "separation, centrality or social search");
    s->add_option("kind", ap.kind)->required()->check(CLI::IsMember({"separation", "centrality", "search"}));
    s->add_option("--graph,-g", ap.graph)->required();
    s->add_option("--embedding,-e", ap.embedding)->required();
    s->add_option("--seed", ap.seed);
    s->add_flag("--no-local-opt", ap.no_local_opt);
    s->add_option("--sample", ap.sample, "separation sample size");
    s->add_option("--candidates", ap.candidates, "centrality candidates");
    s->add_option("--references", ap.references, "centrality reference set size");
    s->add_option("--queries", ap.queries, "search queries");
    s->add_option("--responders", ap.responders, "search responders per query");
    s->add_option("--k", ap.ks, "comma list of k")->delimiter(',');
    s->add_option("--csv", ap.csv);
    commands.emplace_back(s, [&](Manifest& m, std::ostream& o) { cmd_app(ap, m, o); });
  }

  BenchOpts bn;
  {
    auto* s = command("bench", "query latency against BFS, or parallel embedding speedup");
    s->add_option("--graph,-g", bn.graph)->required();
    s->add_option("--embedding,-e", bn.embedding);
    s->add_option("--queries", bn.queries);
    s->add_option("--bfs-queries", bn.bfs_queries);
    s->add_flag("--no-local-opt", bn.no_local_opt);
    s->add_option("--speedup", bn.speedup, "comma list of worker counts")->delimiter(',');
    bn.flags.add_to(s);
    commands.emplace_back(s, [&](Manifest& m, std::ostream& o) {
      bn.seed = bn.flags.seed;
      cmd_bench(bn, m, o);
    });
  }

  std::string replay_path;
  CLI::App* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay->add_option("manifest", replay_path)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (replay->parsed()) return cmd_replay(replay_path, out, err);
    for (auto& [sub, action] : commands) {
      if (!sub->parsed()) continue;
      Manifest manifest(sub->get_name(), args);
      manifest.config() = echo_options(*sub);
      Stopwatch total;
      action(manifest, out);
      manifest.timing("total", total.seconds());
      out << "manifest=" << manifest.write(manifest_path) << '\n';
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace rigel::cli
