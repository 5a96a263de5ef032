#include "rigel/paths.hpp"

#include "rigel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace rigel {

void PathConfig::validate() const {
  if (!(delta >= 0.0)) throw std::invalid_argument("path delta must be >= 0");
  if (c_max < 1) throw std::invalid_argument("path c_max must be >= 1");
}

namespace {

struct Candidate {
  double estimate;
  NodeId node;

  friend bool operator<(const Candidate& x, const Candidate& y) {
    return x.estimate != y.estimate ? x.estimate < y.estimate : x.node < y.node;
  }
};

// With local optimization, an estimate not produced by the 1/2-hop shortcut
// belongs to a pair at least 3 hops apart.
double search_estimate(const Graph& graph, const Embedding& embedding, NodeId v, NodeId b,
                       const QueryConfig& query) {
  if (!query.local_optimization) return estimate_distance(graph, embedding, v, b, query);
  if (auto exact = local_shortcut(graph, v, b)) return *exact;
  return std::max(3.0, coordinate_distance(embedding, v, b));
}

std::optional<PathResult> search(const Graph& graph, const Embedding& embedding, NodeId a,
                                 NodeId b, double total_estimate, double delta, std::size_t c_max,
                                 std::size_t max_hops, const PathConfig& config) {
  const QueryConfig& query = config.query;
  PathResult result;
  std::unordered_set<NodeId> visited{a};
  std::unordered_map<NodeId, NodeId> parent;
  std::unordered_map<NodeId, double> estimates;
  std::vector<NodeId> frontier{a};
  std::vector<double> frontier_est{total_estimate};
  std::vector<Candidate> candidates;

  for (std::size_t hop = 1; hop <= max_hops && !frontier.empty(); ++hop) {
    result.hops_explored = hop;
    candidates.clear();
    for (std::size_t fi = 0; fi < frontier.size(); ++fi) {
      const NodeId x = frontier[fi];
      const double expected = config.admission == AdmissionRule::FromParent
                                  ? frontier_est[fi] - 1.0
                                  : total_estimate - double(hop);
      const double slack = expected * (1.0 + delta);
      for (NodeId v : graph.neighbors(x)) {
        if (visited.contains(v) || embedding.is_excluded(v)) continue;
        auto [it, fresh] = estimates.try_emplace(v, 0.0);
        if (fresh) {
          it->second = search_estimate(graph, embedding, v, b, query);
          ++result.nodes_explored;
        }
        const double est = it->second;
        if (est <= slack && parent.emplace(v, x).second) candidates.push_back({est, v});
      }
    }
    std::sort(candidates.begin(), candidates.end());
    if (candidates.size() > c_max) candidates.resize(c_max);
    result.max_candidates = std::max(result.max_candidates, candidates.size());

    for (const auto& c : candidates) {
      if (!graph.adjacent(c.node, b)) continue;
      result.path.push_back(b);
      for (NodeId w = c.node; w != a; w = parent.at(w)) result.path.push_back(w);
      result.path.push_back(a);
      std::reverse(result.path.begin(), result.path.end());
      return result;
    }
    for (const auto& c : candidates) visited.insert(c.node);
    frontier.clear();
    frontier_est.clear();
    for (const auto& c : candidates) {
      frontier.push_back(c.node);
      frontier_est.push_back(c.estimate);
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<PathResult> find_path(const Graph& graph, const Embedding& embedding, NodeId a,
                                    NodeId b, const PathConfig& config) {
  config.validate();
  if (a == b) throw std::invalid_argument("find_path: source and target are the same node");
  if (a >= graph.node_count() || b >= graph.node_count())
    throw std::out_of_range("find_path: node id out of range");
  if (embedding.is_excluded(a) || embedding.is_excluded(b))
    throw QueryError("find_path: endpoint excluded from the embedding");

  PathResult direct;
  if (graph.adjacent(a, b)) {
    direct.path = {a, b};
    return direct;
  }
  if (auto w = graph.common_neighbor(a, b)) {
    direct.path = {a, *w, b};
    return direct;
  }

  const double total = search_estimate(graph, embedding, a, b, config.query);
  const std::size_t max_hops =
      config.max_hops > 0 ? config.max_hops : 2 * static_cast<std::size_t>(std::ceil(total)) + 2;

  if (auto found = search(graph, embedding, a, b, total, config.delta, config.c_max, max_hops, config))
    return found;
  if (!config.relax_retry) return std::nullopt;
  auto retry = search(graph, embedding, a, b, total, 2 * config.delta, 2 * config.c_max, max_hops,
                      config);
  if (retry) retry->retried = true;
  return retry;
}

bool is_valid_path(const Graph& graph, const std::vector<NodeId>& path, NodeId a, NodeId b) {
  if (path.empty() || path.front() != a || path.back() != b) return false;
  std::unordered_set<NodeId> seen;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] >= graph.node_count() || !seen.insert(path[i]).second) return false;
    if (i > 0 && !graph.adjacent(path[i - 1], path[i])) return false;
  }
  return true;
}

HopCount check_exact(const Graph& graph, PathResult& result) {
  const HopCount truth = bfs_pair_distance(graph, result.path.front(), result.path.back());
  result.exact = truth != kUnreachable && result.length() == truth;
  return truth;
}

}  // namespace rigel
