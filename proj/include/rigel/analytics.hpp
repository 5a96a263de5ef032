// Distortion metrics and the distance-driven graph applications: separation
// metrics, centrality ranking and distance-ranked social search. Every
// application takes a caller-supplied distance function so the same code
// runs on exact BFS distances and on coordinate estimates.
#pragma once

#include "rigel/graph.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rigel {

/// nullopt marks an unreachable or unembedded pair.
using DistanceFn = std::function<std::optional<double>(NodeId, NodeId)>;

struct MetricsReport {
  double are = 0;   // mean |est - d| / d
  double aae = 0;   // mean |est - d|
  double aer = 1;   // mean est/d over expanded pairs (est >= d)
  double acr = 1;   // mean d/est over contracted pairs (est < d)
  double aspd = 1;  // mean max(est/d, d/est)
  double sd = 1;    // max(est/d) * max(d/est)
  std::size_t pair_count = 0;
};

struct EstimatePair {
  double estimate;
  double truth;
};

/// Throws std::invalid_argument on empty input, estimate <= 0 or truth < 1.
MetricsReport error_metrics(std::span<const EstimatePair> pairs);

struct SeparationReport {
  double radius = 0;
  double diameter = 0;
  double avg_path_length = 0;
  std::size_t sample_size = 0;
  std::size_t skipped_pairs = 0;
};

/// Eccentricity over the sample; radius/diameter are its min/max and the
/// average is over unordered pairs. distance_fn is assumed symmetric.
/// Throws std::invalid_argument if the sample has fewer than 2 nodes.
SeparationReport separation_metrics(const DistanceFn& distance_fn,
                                    const std::vector<NodeId>& sample);

/// Candidates ordered by mean distance to the reference set (a candidate's
/// own entry is skipped), ties by id; the first k are returned.
std::vector<NodeId> centrality_topk(const DistanceFn& distance_fn,
                                    const std::vector<NodeId>& candidates,
                                    const std::vector<NodeId>& reference_set, std::size_t k);

/// Responders ordered by distance to the query node (unreachable last), ties
/// by id; the first k are returned.
std::vector<NodeId> social_search(const DistanceFn& distance_fn, NodeId query,
                                  const std::vector<NodeId>& responders, std::size_t k);

/// |top-k(a) ∩ top-k(b)| / k. Throws std::invalid_argument on k == 0 or short lists.
double topk_overlap(const std::vector<NodeId>& a, const std::vector<NodeId>& b, std::size_t k);

/// "key=value" lines.
void write_key_values(std::ostream& out, const MetricsReport& report, const std::string& prefix = "");
void write_key_values(std::ostream& out, const SeparationReport& report,
                      const std::string& prefix = "");

/// Minimal CSV table writer: header first, then rows of equal width.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> row);
  void write(std::ostream& out) const;
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string format_double(double value);

}  // namespace rigel
