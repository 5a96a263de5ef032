#include "rigel/errors.hpp"
#include "rigel/generate.hpp"
#include "rigel/graph.hpp"

#include <doctest.h>

#include <algorithm>
#include <deque>
#include <random>
#include <set>
#include <sstream>

using namespace rigel;

namespace {

Graph parse(const std::string& text, LoadStats* stats = nullptr) {
  std::istringstream in(text);
  auto loaded = load_edge_list(in);
  if (stats) *stats = loaded.stats;
  return loaded.graph;
}

std::set<std::pair<NodeId, NodeId>> edge_set(const Graph& g) {
  std::set<std::pair<NodeId, NodeId>> s;
  for (NodeId u = 0; u < g.node_count(); ++u)
    for (NodeId v : g.neighbors(u))
      if (u < v) s.emplace(u, v);
  return s;
}

// Textbook BFS over an adjacency-set copy, independent of the CSR code.
std::vector<long> oracle_bfs(const Graph& g, NodeId s) {
  std::vector<std::set<NodeId>> adj(g.node_count());
  for (auto [u, v] : edge_set(g)) adj[u].insert(v), adj[v].insert(u);
  std::vector<long> d(g.node_count(), -1);
  std::deque<NodeId> q{s};
  d[s] = 0;
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    for (NodeId v : adj[u])
      if (d[v] < 0) d[v] = d[u] + 1, q.push_back(v);
  }
  return d;
}

void check_structure(const Graph& g) {
  for (NodeId u = 0; u < g.node_count(); ++u) {
    auto nb = g.neighbors(u);
    CHECK(std::is_sorted(nb.begin(), nb.end()));
    CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
    for (NodeId v : nb) {
      CHECK(v != u);
      CHECK(v < g.node_count());
      CHECK(g.adjacent(v, u));
    }
  }
}

}  // namespace

TEST_CASE("edge list examples") {
  Graph g = parse("0 1\n1 2");
  CHECK(g.node_count() == 3);
  CHECK(edge_set(g) == std::set<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}});

  LoadStats st;
  g = parse("a b\nb a\na b", &st);
  CHECK(g.node_count() == 2);
  CHECK(g.edge_count() == 1);
  CHECK(st.duplicate_edges == 2);
  CHECK(g.labels() == std::vector<std::string>{"a", "b"});
  CHECK(g.id_of("b") == NodeId(1));
  CHECK_FALSE(g.id_of("zzz").has_value());

  g = parse("x x", &st);
  CHECK(g.edge_count() == 0);
  CHECK(st.self_loops_dropped == 1);
}

TEST_CASE("comments, blank lines and parse errors") {
  Graph g = parse("# header\n\n  \n7 9\n# more\n9 4\n");
  CHECK(g.node_count() == 3);
  CHECK(g.labels()[0] == "7");
  try {
    parse("0 1\n1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse("0 1 2\n"), ParseError);
}

TEST_CASE("bfs examples") {
  const Graph p = generate::path(3);
  CHECK(bfs_distances(p, 0).dist == std::vector<HopCount>{0, 1, 2});

  const Graph s = generate::star(6);
  const auto ds = bfs_distances(s, 0);
  for (NodeId v = 1; v < 6; ++v) CHECK(ds.dist[v] == 1);

  const std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {2, 3}};
  const Graph two = Graph::from_edges(4, edges);
  const auto d = bfs_distances(two, 0);
  CHECK(d.reachable(1));
  CHECK_FALSE(d.reachable(2));
  CHECK(d.dist[3] == kUnreachable);
  CHECK(bfs_pair_distance(two, 0, 3) == kUnreachable);
  CHECK_THROWS_AS(bfs_distances(two, 4), std::out_of_range);
}

TEST_CASE("shortest path examples") {
  const Graph p = generate::path(3);
  CHECK(shortest_path(p, 0, 2) == std::vector<NodeId>{0, 1, 2});
  CHECK(shortest_path(p, 1, 1) == std::vector<NodeId>{1});
  const std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {2, 3}};
  CHECK_FALSE(shortest_path(Graph::from_edges(4, edges), 0, 3).has_value());
  // 4-cycle: two shortest 0->2 paths, the lower-id expansion wins.
  CHECK(shortest_path(generate::cycle(4), 0, 2) == std::vector<NodeId>{0, 1, 2});
}

TEST_CASE("sample_nodes") {
  const Graph g = generate::path(20);
  CHECK(sample_nodes(g, 0, 1).empty());
  auto all = sample_nodes(g, 20, 9);
  std::sort(all.begin(), all.end());
  for (NodeId i = 0; i < 20; ++i) CHECK(all[i] == i);
  CHECK(sample_nodes(g, 7, 42) == sample_nodes(g, 7, 42));
  CHECK(sample_nodes(g, 7, 42) != sample_nodes(g, 7, 43));
  CHECK_THROWS_AS(sample_nodes(g, 21, 1), std::invalid_argument);
  const auto pairs = sample_pairs(g, 100, 3);
  CHECK(pairs.size() == 100);
  for (auto [u, v] : pairs) CHECK(u != v);
  CHECK(pairs == sample_pairs(g, 100, 3));
}

TEST_CASE("adjacency helpers") {
  const Graph g = generate::grid(3, 3);
  CHECK(g.adjacent(0, 1));
  CHECK_FALSE(g.adjacent(0, 4));
  CHECK(g.common_neighbor(0, 4) == NodeId(1));
  CHECK_FALSE(g.common_neighbor(0, 8).has_value());
}

TEST_CASE("bfs matches oracle and is edge-Lipschitz on random graphs") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Graph g = seed % 2 ? generate::small_world(300, 4, 0.2, seed) : generate::scale_free(300, 2, seed);
    check_structure(g);
    for (NodeId s : sample_nodes(g, 5, seed)) {
      const auto d = bfs_distances(g, s);
      const auto want = oracle_bfs(g, s);
      for (NodeId v = 0; v < g.node_count(); ++v) {
        CHECK((want[v] < 0 ? d.dist[v] == kUnreachable : long(d.dist[v]) == want[v]));
        CHECK(bfs_pair_distance(g, s, v) == d.dist[v]);
      }
      for (NodeId u = 0; u < g.node_count(); ++u)
        for (NodeId v : g.neighbors(u))
          if (d.reachable(u)) CHECK(long(d.dist[u]) - long(d.dist[v]) <= 1);
      for (NodeId t : sample_nodes(g, 10, seed + 100)) {
        const auto path = shortest_path(g, s, t);
        REQUIRE(path.has_value());
        CHECK(path->size() - 1 == d.dist[t]);
        for (std::size_t i = 1; i < path->size(); ++i) CHECK(g.adjacent((*path)[i - 1], (*path)[i]));
      }
    }
  }
}

TEST_CASE("text and binary round trips") {
  const Graph g = generate::scale_free(200, 3, 4);
  std::stringstream text;
  write_edge_list(g, text);
  const Graph back = load_edge_list(text).graph;
  CHECK(back.node_count() == g.node_count());
  // Labels are the original decimal ids, so map through them.
  std::set<std::pair<NodeId, NodeId>> relabeled;
  for (auto [u, v] : edge_set(back)) {
    NodeId a = std::stoul(back.labels()[u]), b = std::stoul(back.labels()[v]);
    relabeled.emplace(std::min(a, b), std::max(a, b));
  }
  CHECK(relabeled == edge_set(g));

  std::stringstream bin;
  save_binary(g, bin);
  const Graph b2 = load_binary(bin);
  CHECK(b2.offsets() == g.offsets());
  CHECK(b2.neighbor_array() == g.neighbor_array());
}

TEST_CASE("binary layout and format errors") {
  std::stringstream bin;
  save_binary(generate::path(3), bin);
  const std::string bytes = bin.str();
  CHECK(bytes.substr(0, 4) == "RGL1");
  CHECK(bytes.size() == 4 + 8 + 8 + 4 * 8 + 4 * 4);
  CHECK(static_cast<unsigned char>(bytes[4]) == 3);  // N, little-endian

  std::istringstream bad_magic("XXXX" + bytes.substr(4));
  CHECK_THROWS_AS(load_binary(bad_magic), FormatError);
  std::istringstream truncated(bytes.substr(0, bytes.size() - 1));
  CHECK_THROWS_AS(load_binary(truncated), FormatError);
  std::istringstream trailing(bytes + "x");
  CHECK_THROWS_AS(load_binary(trailing), FormatError);
}

TEST_CASE("from_csr validation") {
  CHECK_NOTHROW(Graph::from_csr({0, 1, 2}, {1, 0}));
  CHECK_THROWS_AS(Graph::from_csr({0, 1, 1}, {1}), std::invalid_argument);  // asymmetric
  CHECK_THROWS_AS(Graph::from_csr({0, 1, 2}, {0, 1}), std::invalid_argument);  // self-loops
  const std::vector<std::pair<NodeId, NodeId>> bad{{0, 5}};
  CHECK_THROWS_AS(Graph::from_edges(2, bad), std::out_of_range);
}

TEST_CASE("connected components") {
  const std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {2, 3}, {3, 4}};
  const auto c = connected_components(Graph::from_edges(6, edges));
  CHECK(c == std::vector<std::uint32_t>{0, 0, 1, 1, 1, 2});
}
