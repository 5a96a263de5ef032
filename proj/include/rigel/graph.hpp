// Immutable undirected graph in CSR form plus the exact BFS oracle.
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rigel {

using NodeId = std::uint32_t;
using HopCount = std::uint32_t;

inline constexpr HopCount kUnreachable = std::numeric_limits<HopCount>::max();

/// Undirected simple graph over dense ids 0..N-1. Adjacency lists are sorted
/// ascending and free of duplicates and self-loops.
class Graph {
 public:
  Graph() = default;

  /// Builds from an undirected edge list. Self-loops and duplicate edges
  /// (in either orientation) are dropped. Throws std::out_of_range on ids >= n.
  static Graph from_edges(std::size_t node_count,
                          std::span<const std::pair<NodeId, NodeId>> edges);

  /// Adopts CSR arrays; validates symmetry, ordering and range.
  /// Throws std::invalid_argument if the structure is not a simple undirected graph.
  static Graph from_csr(std::vector<std::uint64_t> offsets, std::vector<NodeId> neighbors);

  std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return neighbors_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId u) const noexcept {
    return {neighbors_.data() + offsets_[u], neighbors_.data() + offsets_[u + 1]};
  }
  std::size_t degree(NodeId u) const noexcept { return offsets_[u + 1] - offsets_[u]; }

  /// O(log deg(u)).
  bool adjacent(NodeId u, NodeId v) const noexcept;

  /// Smallest common neighbor of u and v, via sorted-list intersection.
  std::optional<NodeId> common_neighbor(NodeId u, NodeId v) const noexcept;

  const std::vector<std::uint64_t>& offsets() const noexcept { return offsets_; }
  const std::vector<NodeId>& neighbor_array() const noexcept { return neighbors_; }

  /// External label of each internal id. Defaults to the decimal id.
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<NodeId> id_of(std::string_view label) const;

  void set_labels(std::vector<std::string> labels);

 private:
  std::vector<std::uint64_t> offsets_;
  std::vector<NodeId> neighbors_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> label_index_;
};

struct LoadStats {
  std::size_t lines = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicate_edges = 0;
};

struct LoadedGraph {
  Graph graph;
  LoadStats stats;
};

/// Parses "<label> <label>" lines; '#' starts a comment line, blank lines are
/// skipped. Labels become ids in first-appearance order.
/// Throws ParseError (with line number) on a line without exactly two tokens.
LoadedGraph load_edge_list(std::istream& in);
LoadedGraph load_edge_list_file(const std::string& path);

/// One "<label> <label>" line per undirected edge, u < v by internal id.
void write_edge_list(const Graph& graph, std::ostream& out);

/// Binary CSR cache: "RGL1", u64 N, u64 E, (N+1) u64 offsets, 2E u32 neighbors,
/// all little-endian. Labels are not stored.
void save_binary(const Graph& graph, std::ostream& out);
Graph load_binary(std::istream& in);

struct DistanceVector {
  NodeId source = 0;
  std::vector<HopCount> dist;

  bool reachable(NodeId v) const noexcept { return dist[v] != kUnreachable; }
};

/// Exact hop distances from `source`. Throws std::out_of_range on a bad id.
DistanceVector bfs_distances(const Graph& graph, NodeId source);

/// Hop distance between one pair, stopping as soon as `target` is settled.
HopCount bfs_pair_distance(const Graph& graph, NodeId source, NodeId target);

/// A shortest path from u to v (inclusive), or nullopt if disconnected. The
/// search expands neighbors in ascending id order so the result is unique.
std::optional<std::vector<NodeId>> shortest_path(const Graph& graph, NodeId u, NodeId v);

/// k distinct ids drawn uniformly without replacement, deterministic in seed.
/// Throws std::invalid_argument if k > N.
std::vector<NodeId> sample_nodes(const Graph& graph, std::size_t k, std::uint64_t seed);

/// `count` ordered pairs (u != v), each endpoint uniform, deterministic in seed.
/// Throws std::invalid_argument if the graph has fewer than 2 nodes.
std::vector<std::pair<NodeId, NodeId>> sample_pairs(const Graph& graph, std::size_t count,
                                                    std::uint64_t seed);

/// Connected-component id per node (components numbered in order of their smallest id).
std::vector<std::uint32_t> connected_components(const Graph& graph);

}  // namespace rigel
