// Coordinate-guided path search.
//
// From the source, each hop admits the unvisited neighbors of the previous
// hop's candidates whose estimated distance to the target is within a
// (1 + delta) slack of the expected remaining distance, keeps the c_max best,
// and stops once a candidate touches the target.
//
// The expected remaining distance of a neighbor is its parent's estimate minus
// one (AdmissionRule::FromParent), or the source estimate minus the hop count
// (AdmissionRule::FromSource). Estimates that did not come from the 1/2-hop
// shortcut are raised to at least 3, since the shortcut already ruled out
// anything closer.
#pragma once

#include "rigel/embedder.hpp"
#include "rigel/graph.hpp"
#include "rigel/query.hpp"

#include <optional>
#include <vector>

namespace rigel {

enum class AdmissionRule : std::uint8_t { FromParent, FromSource };

struct PathConfig {
  double delta = 0.3;
  std::size_t c_max = 30;
  std::size_t max_hops = 0;  // 0 selects 2 * ceil(estimate) + 2
  bool relax_retry = true;   // on failure, retry once with delta and c_max doubled
  AdmissionRule admission = AdmissionRule::FromParent;
  QueryConfig query{};

  void validate() const;
};

struct PathResult {
  std::vector<NodeId> path;
  std::optional<bool> exact;  // set by check_exact()
  std::size_t hops_explored = 0;
  std::size_t nodes_explored = 0;   // distance estimates evaluated
  std::size_t max_candidates = 0;   // largest per-hop candidate set
  bool retried = false;

  std::size_t length() const noexcept { return path.empty() ? 0 : path.size() - 1; }
};

/// nullopt means no path was found (after the optional relaxed retry).
/// Throws std::invalid_argument if a == b, QueryError on excluded endpoints.
std::optional<PathResult> find_path(const Graph& graph, const Embedding& embedding, NodeId a,
                                    NodeId b, const PathConfig& config = {});

/// Consecutive entries adjacent, endpoints as requested, no repeated nodes.
bool is_valid_path(const Graph& graph, const std::vector<NodeId>& path, NodeId a, NodeId b);

/// Fills result.exact from a BFS oracle and returns the exact hop distance.
HopCount check_exact(const Graph& graph, PathResult& result);

}  // namespace rigel
