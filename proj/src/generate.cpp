#include "rigel/generate.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace rigel::generate {

namespace {

using Edge = std::pair<NodeId, NodeId>;

std::uint64_t edge_key(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (std::uint64_t{u} << 32) | v;
}

}  // namespace

Graph path(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(NodeId(i - 1), NodeId(i));
  return Graph::from_edges(n, edges);
}

Graph star(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(NodeId(0), NodeId(i));
  return Graph::from_edges(n, edges);
}

Graph cycle(std::size_t n) {
  if (n < 3) throw std::invalid_argument("cycle needs at least 3 nodes");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.emplace_back(NodeId(i), NodeId((i + 1) % n));
  return Graph::from_edges(n, edges);
}

Graph grid(std::size_t rows, std::size_t cols) {
  std::vector<Edge> edges;
  auto id = [cols](std::size_t r, std::size_t c) { return NodeId(r * cols + c); };
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  return Graph::from_edges(rows * cols, edges);
}

Graph small_world(std::size_t n, std::size_t k, double p, std::uint64_t seed) {
  if (k % 2 != 0 || k < 2 || k >= n) {
    throw std::invalid_argument("small_world: k must be even with 2 <= k < n");
  }
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("small_world: p must be in [0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any(0, n - 1);

  std::vector<Edge> edges;
  std::unordered_set<std::uint64_t> present;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t j = 1; j <= k / 2; ++j) {
      const auto v = NodeId((u + j) % n);
      edges.emplace_back(NodeId(u), v);
      present.insert(edge_key(NodeId(u), v));
    }
  // rewire the far endpoint, lattice pass by pass
  for (std::size_t j = 1; j <= k / 2; ++j)
    for (std::size_t u = 0; u < n; ++u) {
      if (coin(rng) >= p) continue;
      Edge& e = edges[u * (k / 2) + (j - 1)];
      NodeId w;
      std::size_t attempts = 0;
      do {
        w = NodeId(any(rng));
      } while ((w == e.first || present.contains(edge_key(e.first, w))) && ++attempts < 64);
      if (attempts >= 64) continue;
      present.erase(edge_key(e.first, e.second));
      e.second = w;
      present.insert(edge_key(e.first, w));
    }
  return Graph::from_edges(n, edges);
}

Graph scale_free(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m < 1 || m >= n) throw std::invalid_argument("scale_free: m must satisfy 1 <= m < n");
  std::mt19937_64 rng(seed);
  std::vector<Edge> edges;
  std::vector<NodeId> endpoints;  // each node repeated once per incident edge
  for (std::size_t u = 0; u <= m; ++u)
    for (std::size_t v = u + 1; v <= m; ++v) {
      edges.emplace_back(NodeId(u), NodeId(v));
      endpoints.push_back(NodeId(u));
      endpoints.push_back(NodeId(v));
    }
  std::vector<NodeId> targets;
  for (std::size_t u = m + 1; u < n; ++u) {
    targets.clear();
    while (targets.size() < m) {
      std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
      const NodeId t = endpoints[pick(rng)];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) {
      edges.emplace_back(NodeId(u), t);
      endpoints.push_back(NodeId(u));
      endpoints.push_back(t);
    }
  }
  return Graph::from_edges(n, edges);
}

}  // namespace rigel::generate
