#include "rigel/graph.hpp"

#include "binary_io.hpp"
#include "rigel/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rigel {

Graph Graph::from_edges(std::size_t node_count, std::span<const std::pair<NodeId, NodeId>> edges) {
  if (node_count > std::numeric_limits<NodeId>::max()) {
    throw std::out_of_range("node count exceeds 32-bit id space");
  }
  std::vector<std::uint64_t> degree(node_count + 1, 0);
  for (auto [u, v] : edges) {
    if (u >= node_count || v >= node_count) throw std::out_of_range("edge endpoint out of range");
    if (u == v) continue;
    ++degree[u + 1];
    ++degree[v + 1];
  }
  std::vector<std::uint64_t> offsets(node_count + 1, 0);
  for (std::size_t i = 1; i <= node_count; ++i) offsets[i] = offsets[i - 1] + degree[i];

  std::vector<NodeId> neighbors(offsets.back());
  std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
  for (auto [u, v] : edges) {
    if (u == v) continue;
    neighbors[cursor[u]++] = v;
    neighbors[cursor[v]++] = u;
  }

  // sort + dedup each list, then compact
  std::vector<std::uint64_t> compact(node_count + 1, 0);
  std::uint64_t write = 0;
  for (std::size_t u = 0; u < node_count; ++u) {
    auto first = neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[u]);
    auto last = neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[u + 1]);
    std::sort(first, last);
    last = std::unique(first, last);
    compact[u] = write;
    for (auto it = first; it != last; ++it) neighbors[write++] = *it;
  }
  compact[node_count] = write;
  neighbors.resize(write);
  neighbors.shrink_to_fit();

  Graph g;
  g.offsets_ = std::move(compact);
  g.neighbors_ = std::move(neighbors);
  return g;
}

Graph Graph::from_csr(std::vector<std::uint64_t> offsets, std::vector<NodeId> neighbors) {
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != neighbors.size()) {
    throw std::invalid_argument("CSR offsets inconsistent with neighbor array");
  }
  const std::size_t n = offsets.size() - 1;
  for (std::size_t u = 0; u < n; ++u) {
    if (offsets[u] > offsets[u + 1]) throw std::invalid_argument("CSR offsets not monotone");
    for (auto i = offsets[u]; i < offsets[u + 1]; ++i) {
      const NodeId v = neighbors[i];
      if (v >= n) throw std::invalid_argument("CSR neighbor id out of range");
      if (v == u) throw std::invalid_argument("CSR contains a self-loop");
      if (i > offsets[u] && neighbors[i - 1] >= v)
        throw std::invalid_argument("CSR adjacency not strictly ascending");
    }
  }
  Graph g;
  g.offsets_ = std::move(offsets);
  g.neighbors_ = std::move(neighbors);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v : g.neighbors(u))
      if (!g.adjacent(v, u)) throw std::invalid_argument("CSR adjacency is not symmetric");
  return g;
}

bool Graph::adjacent(NodeId u, NodeId v) const noexcept {
  // search the shorter list
  if (degree(u) > degree(v)) std::swap(u, v);
  auto adj = neighbors(u);
  return std::binary_search(adj.begin(), adj.end(), v);
}

std::optional<NodeId> Graph::common_neighbor(NodeId u, NodeId v) const noexcept {
  auto a = neighbors(u);
  auto b = neighbors(v);
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      return *i;
    }
  }
  return std::nullopt;
}

std::optional<NodeId> Graph::id_of(std::string_view label) const {
  if (labels_.empty()) {
    // default labels are the decimal ids
    NodeId id = 0;
    auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), id);
    if (ec != std::errc{} || ptr != label.data() + label.size() || id >= node_count())
      return std::nullopt;
    return id;
  }
  auto it = label_index_.find(std::string(label));
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

void Graph::set_labels(std::vector<std::string> labels) {
  if (!labels.empty() && labels.size() != node_count()) {
    throw std::invalid_argument("label count does not match node count");
  }
  labels_ = std::move(labels);
  label_index_.clear();
  label_index_.reserve(labels_.size());
  for (NodeId i = 0; i < labels_.size(); ++i) label_index_.emplace(labels_[i], i);
}

LoadedGraph load_edge_list(std::istream& in) {
  LoadedGraph result;
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> index;
  std::vector<std::pair<NodeId, NodeId>> edges;

  auto intern = [&](const std::string& label) {
    auto [it, inserted] = index.emplace(label, static_cast<NodeId>(labels.size()));
    if (inserted) labels.push_back(label);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    std::istringstream tokens(line);
    std::string a, b, extra;
    if (!(tokens >> a >> b) || (tokens >> extra)) {
      throw ParseError(lineno, "expected exactly two labels, got \"" + line + "\"");
    }
    const NodeId u = intern(a);
    const NodeId v = intern(b);
    if (u == v) {
      ++result.stats.self_loops_dropped;
      continue;
    }
    edges.emplace_back(u, v);
  }
  result.stats.lines = lineno;
  result.graph = Graph::from_edges(labels.size(), edges);
  result.stats.duplicate_edges = edges.size() - result.graph.edge_count();
  result.graph.set_labels(std::move(labels));
  return result;
}

LoadedGraph load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file " + path);
  return load_edge_list(in);
}

void write_edge_list(const Graph& graph, std::ostream& out) {
  const auto& labels = graph.labels();
  auto label = [&](NodeId u) { return labels.empty() ? std::to_string(u) : labels[u]; };
  for (NodeId u = 0; u < graph.node_count(); ++u)
    for (NodeId v : graph.neighbors(u))
      if (u < v) out << label(u) << ' ' << label(v) << '\n';
}

void save_binary(const Graph& graph, std::ostream& out) {
  out.write("RGL1", 4);
  io::write_le<std::uint64_t>(out, graph.node_count());
  io::write_le<std::uint64_t>(out, graph.edge_count());
  for (auto o : graph.offsets()) io::write_le<std::uint64_t>(out, o);
  if (graph.offsets().empty()) io::write_le<std::uint64_t>(out, 0);
  for (auto v : graph.neighbor_array()) io::write_le<std::uint32_t>(out, v);
}

Graph load_binary(std::istream& in) {
  const std::string bytes = io::slurp(in);
  io::Reader r(bytes);
  r.expect_magic("RGL1");
  const auto n = r.read<std::uint64_t>("node count");
  const auto e = r.read<std::uint64_t>("edge count");
  const std::uint64_t expected = (n + 1) * 8 + 2 * e * 4;
  if (r.remaining() != expected) {
    throw FormatError("RGL1 body size " + std::to_string(r.remaining()) + " does not match header (" +
                      std::to_string(expected) + ")");
  }
  std::vector<std::uint64_t> offsets(n + 1);
  for (auto& o : offsets) o = r.read<std::uint64_t>("offsets");
  std::vector<NodeId> neighbors(2 * e);
  for (auto& v : neighbors) v = r.read<std::uint32_t>("neighbors");
  try {
    return Graph::from_csr(std::move(offsets), std::move(neighbors));
  } catch (const std::invalid_argument& ex) {
    throw FormatError(std::string("RGL1 structure invalid: ") + ex.what());
  }
}

namespace {

void check_id(const Graph& graph, NodeId u, const char* what) {
  if (u >= graph.node_count()) {
    throw std::out_of_range(std::string(what) + " id " + std::to_string(u) +
                            " out of range [0, " + std::to_string(graph.node_count()) + ")");
  }
}

}  // namespace

DistanceVector bfs_distances(const Graph& graph, NodeId source) {
  check_id(graph, source, "bfs source");
  DistanceVector out{source, std::vector<HopCount>(graph.node_count(), kUnreachable)};
  std::vector<NodeId> queue;
  queue.reserve(graph.node_count());
  out.dist[source] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId u = queue[head];
    const HopCount next = out.dist[u] + 1;
    for (NodeId v : graph.neighbors(u)) {
      if (out.dist[v] == kUnreachable) {
        out.dist[v] = next;
        queue.push_back(v);
      }
    }
  }
  return out;
}

HopCount bfs_pair_distance(const Graph& graph, NodeId source, NodeId target) {
  check_id(graph, source, "bfs source");
  check_id(graph, target, "bfs target");
  if (source == target) return 0;
  std::vector<HopCount> dist(graph.node_count(), kUnreachable);
  std::vector<NodeId> queue;
  dist[source] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId u = queue[head];
    const HopCount next = dist[u] + 1;
    for (NodeId v : graph.neighbors(u)) {
      if (dist[v] != kUnreachable) continue;
      if (v == target) return next;
      dist[v] = next;
      queue.push_back(v);
    }
  }
  return kUnreachable;
}

std::optional<std::vector<NodeId>> shortest_path(const Graph& graph, NodeId u, NodeId v) {
  check_id(graph, u, "path source");
  check_id(graph, v, "path target");
  if (u == v) return std::vector<NodeId>{u};
  constexpr NodeId kNone = std::numeric_limits<NodeId>::max();
  std::vector<NodeId> parent(graph.node_count(), kNone);
  std::vector<NodeId> queue{u};
  parent[u] = u;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId x = queue[head];
    for (NodeId y : graph.neighbors(x)) {
      if (parent[y] != kNone) continue;
      parent[y] = x;
      if (y == v) {
        std::vector<NodeId> path{v};
        for (NodeId w = v; w != u;) path.push_back(w = parent[w]);
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(y);
    }
  }
  return std::nullopt;
}

std::vector<NodeId> sample_nodes(const Graph& graph, std::size_t k, std::uint64_t seed) {
  const std::size_t n = graph.node_count();
  if (k > n) {
    throw std::invalid_argument("sample size " + std::to_string(k) + " exceeds node count " +
                                std::to_string(n));
  }
  std::vector<NodeId> ids(n);
  for (NodeId i = 0; i < n; ++i) ids[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(k);
  return ids;
}

std::vector<std::pair<NodeId, NodeId>> sample_pairs(const Graph& graph, std::size_t count,
                                                    std::uint64_t seed) {
  const std::size_t n = graph.node_count();
  if (n < 2) throw std::invalid_argument("sample_pairs: need at least 2 nodes");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(count);
  while (pairs.size() < count) {
    const NodeId u = pick(rng);
    const NodeId v = pick(rng);
    if (u != v) pairs.emplace_back(u, v);
  }
  return pairs;
}

std::vector<std::uint32_t> connected_components(const Graph& graph) {
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> comp(graph.node_count(), kNone);
  std::vector<NodeId> stack;
  std::uint32_t next = 0;
  for (NodeId s = 0; s < graph.node_count(); ++s) {
    if (comp[s] != kNone) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      for (NodeId v : graph.neighbors(u))
        if (comp[v] == kNone) {
          comp[v] = next;
          stack.push_back(v);
        }
    }
    ++next;
  }
  return comp;
}

}  // namespace rigel
