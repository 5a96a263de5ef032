// Distance queries over an embedding, and the maximum-likelihood hybrid that
// fuses two embeddings (one tuned for long distances, one for short ones).
#pragma once

#include "rigel/embedder.hpp"
#include "rigel/graph.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace rigel {

class LikelihoodModel;

struct QueryConfig {
  bool local_optimization = true;  // exact answers for 1- and 2-hop pairs
};

/// 0 if u == v; with local optimization 1 for adjacent pairs and 2 for pairs
/// sharing a neighbor; otherwise the coordinate distance.
/// Throws QueryError if u or v is excluded from the embedding.
double estimate_distance(const Graph& graph, const Embedding& embedding, NodeId u, NodeId v,
                         const QueryConfig& config = {});

/// Coordinate distance only (no adjacency shortcut).
double coordinate_distance(const Embedding& embedding, NodeId u, NodeId v);

/// Exact answer from adjacency lists for u == v, 1-hop and 2-hop pairs.
std::optional<double> local_shortcut(const Graph& graph, NodeId u, NodeId v);

/// Discrete conditional distributions P(bin | theta) for two estimators,
/// theta ranging over [theta_min, theta_max]. Bins have width bin_width and
/// are centered on multiples of it, starting at 0; out-of-support estimates
/// are clamped to the nearest bin.
class LikelihoodModel {
 public:
  LikelihoodModel() = default;
  LikelihoodModel(int theta_min, int theta_max, double bin_width, double alpha);

  int theta_min() const noexcept { return theta_min_; }
  int theta_max() const noexcept { return theta_max_; }
  int theta_count() const noexcept { return theta_max_ - theta_min_ + 1; }
  double bin_width() const noexcept { return bin_width_; }
  double alpha() const noexcept { return alpha_; }
  Eigen::Index bin_count() const noexcept { return long_table_.cols(); }

  /// Rows are theta - theta_min, columns are bins.
  const Eigen::MatrixXd& long_table() const noexcept { return long_table_; }
  const Eigen::MatrixXd& short_table() const noexcept { return short_table_; }
  Eigen::MatrixXd& long_table() noexcept { return long_table_; }
  Eigen::MatrixXd& short_table() noexcept { return short_table_; }

  struct Bin {
    Eigen::Index index;
    bool clamped;
  };
  Bin bin_of(double estimate) const noexcept;

  /// Checks rows are normalized and strictly positive.
  void validate() const;

 private:
  int theta_min_ = 1;
  int theta_max_ = 18;
  double bin_width_ = 1.0;
  double alpha_ = 1.0;
  Eigen::MatrixXd long_table_;
  Eigen::MatrixXd short_table_;
};

struct HoldoutPair {
  NodeId u;
  NodeId v;
  HopCount truth;
};

struct LikelihoodFit {
  LikelihoodModel model;
  std::size_t used_pairs = 0;
  std::size_t skipped_pairs = 0;  // truth outside the theta range, or excluded nodes
  std::vector<int> empty_thetas;  // rows left smoothed-uniform
};

/// Histograms raw coordinate distances of both embeddings per true distance,
/// Laplace-smoothed with `alpha`. A theta with no samples gets a uniform row.
LikelihoodFit fit_likelihood_model(const Graph& graph, const Embedding& long_coords,
                                   const Embedding& short_coords,
                                   const std::vector<HoldoutPair>& holdout, int theta_min = 1,
                                   int theta_max = 18, double bin_width = 1.0, double alpha = 1.0);

struct MleResult {
  int theta;
  bool clamped;  // an observation fell outside the bin support
};

/// argmax over theta of P_L(bin(x_long) | theta) * P_S(bin(x_short) | theta);
/// ties go to the smaller theta.
MleResult mle_estimate(const LikelihoodModel& model, double x_long, double x_short);

/// Local shortcut first, otherwise the MLE over both coordinate distances.
double estimate_distance_hybrid(const Graph& graph, const Embedding& long_coords,
                                const Embedding& short_coords, const LikelihoodModel& model,
                                NodeId u, NodeId v);

/// Text format: header lines "theta_min", "theta_max", "bin_width", "alpha",
/// "bins", then one "L|S theta p_0 ... p_{B-1}" row per theta per table.
void save_likelihood_model(const LikelihoodModel& model, std::ostream& out);
LikelihoodModel load_likelihood_model(std::istream& in);

}  // namespace rigel
