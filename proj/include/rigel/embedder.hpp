// Landmark-based graph embedding.
//
// Pipeline (embed_graph):
//   1. BFS from each of the l highest-degree landmarks, spread over W workers.
//   2. Landmark bootstrap: a seeded subset of primary landmarks is placed by
//      minimizing the joint pairwise objective; the remaining landmarks
//      ("expanders") are then placed one at a time against every landmark
//      placed before them.
//   3. Every other node is placed against refs_per_node references. Nodes are
//      processed level by level, where a node's level is its hop distance to
//      the nearest landmark. Up to n_local references are already-embedded
//      1-hop neighbors from lower levels; the rest are random landmarks.
//      Nodes of one level only read coordinates from lower levels, so they
//      are embedded in parallel and the result does not depend on W.
#pragma once

#include "rigel/geometry.hpp"
#include "rigel/graph.hpp"
#include "rigel/simplex.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rigel {

enum class ObjectiveKind : std::uint8_t { SquaredAbs = 0, Abs = 1, SquaredRel = 2 };

std::string_view to_string(ObjectiveKind kind) noexcept;
ObjectiveKind objective_from_string(std::string_view name);

/// Per-reference error term err(embedded, graph).
inline double objective_term(ObjectiveKind kind, double embedded, double graph_distance) {
  const double diff = embedded - graph_distance;
  switch (kind) {
    case ObjectiveKind::SquaredAbs:
      return diff * diff;
    case ObjectiveKind::Abs:
      return diff < 0 ? -diff : diff;
    case ObjectiveKind::SquaredRel: {
      const double rel = diff / (graph_distance < 1.0 ? 1.0 : graph_distance);
      return rel * rel;
    }
  }
  return diff * diff;
}

struct EmbedConfig {
  Space space{};
  std::uint32_t landmark_count = 100;
  std::uint32_t primary_count = 16;
  std::uint32_t refs_per_node = 16;
  std::uint32_t local_landmarks = 1;  // 0 = no 1-hop references
  std::uint64_t seed = 1;
  unsigned workers = 1;
  ObjectiveKind objective = ObjectiveKind::SquaredAbs;
  OptimizerConfig optimizer{};
  int bootstrap_sweeps = 20;  // cap on block-coordinate passes over the primaries

  void validate() const;
};

struct PhaseTimings {
  double landmark_bfs_seconds = 0;
  double landmark_bootstrap_seconds = 0;
  double partition_seconds = 0;
  double embedding_seconds = 0;
};

/// Diagnostics recorded while embedding; not persisted.
struct EmbedDiagnostics {
  double bootstrap_objective = 0;  // joint objective over all landmark pairs
  int bootstrap_sweeps_run = 0;
  std::vector<double> initial_residual;  // objective at each node's start point
  std::vector<double> final_residual;
  std::vector<std::uint8_t> reference_count;        // refs used per node (0 for landmarks)
  std::vector<std::uint8_t> local_reference_count;  // of which 1-hop neighbors
  PhaseTimings timings;
};

/// Node coordinates (one column per node) plus landmark metadata. Excluded
/// nodes have no meaningful coordinate (stored as zeros).
struct Embedding {
  Space space{};
  EmbedConfig config{};
  Eigen::MatrixXd coords;  // dimension x N
  std::vector<NodeId> landmarks;
  std::vector<NodeId> primaries;  // subset of landmarks placed jointly
  std::vector<DistanceVector> landmark_bfs;  // empty after load_embedding
  std::vector<bool> excluded;
  EmbedDiagnostics diagnostics;

  std::size_t node_count() const noexcept { return static_cast<std::size_t>(coords.cols()); }
  std::size_t excluded_count() const;
  bool is_excluded(NodeId u) const { return excluded[u]; }
  auto point(NodeId u) const { return coords.col(u); }
};

struct CascadeLevels {
  std::vector<HopCount> level;  // kUnreachable for excluded nodes
  HopCount max_level = 0;
};

/// The l highest-degree nodes, ties broken by ascending id.
/// Throws std::invalid_argument if l > N.
std::vector<NodeId> select_landmarks(const Graph& graph, std::size_t l);

/// Seeded-uniform choice of `count` primaries among `landmarks`, returned in
/// landmark order.
std::vector<NodeId> choose_primaries(const std::vector<NodeId>& landmarks, std::size_t count,
                                     std::uint64_t seed);

struct NodeFit {
  Point point;
  double initial_residual = 0;
  double final_residual = 0;
  int iterations = 0;
};

/// Minimizes sum_j err(dist(p, ref_points.col(j)), ref_distances(j)) starting
/// at the reference with the smallest graph distance.
/// Throws std::invalid_argument on empty or mismatched references.
NodeFit embed_node(const Eigen::Ref<const Eigen::MatrixXd>& ref_points,
                   const Eigen::Ref<const Eigen::VectorXd>& ref_distances, const Space& space,
                   ObjectiveKind objective, const OptimizerConfig& optimizer);

/// Places landmarks only. landmark_bfs[i] must be the BFS vector of landmarks[i].
/// The returned embedding has coords for landmarks; other columns are zero.
/// Throws BootstrapError if two landmarks are mutually unreachable.
Embedding bootstrap_landmarks(const Graph& graph, const std::vector<NodeId>& landmarks,
                              std::vector<DistanceVector> landmark_bfs, const EmbedConfig& config);

/// Level of every node from the embedding's stored landmark BFS vectors.
CascadeLevels cascade_levels(const Graph& graph, const Embedding& embedding);

/// The full three-phase pipeline. Throws std::invalid_argument on invalid
/// configuration and propagates BootstrapError.
Embedding embed_graph(const Graph& graph, const EmbedConfig& config);

/// Sum of pairwise objective terms over landmark pairs, using the stored BFS.
double landmark_objective(const Embedding& embedding);

/// "RGE1" binary format; see README for the layout.
void save_embedding(const Embedding& embedding, std::ostream& out);
Embedding load_embedding(std::istream& in);
void save_embedding_file(const Embedding& embedding, const std::string& path);
Embedding load_embedding_file(const std::string& path);

}  // namespace rigel
