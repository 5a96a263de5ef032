#include "rigel/query.hpp"

#include "rigel/errors.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace rigel {

namespace {

void require_embedded(const Embedding& e, NodeId u) {
  if (u >= e.node_count()) throw std::out_of_range("node id " + std::to_string(u) + " out of range");
  if (e.is_excluded(u))
    throw QueryError("node " + std::to_string(u) + " is excluded from the embedding");
}

}  // namespace

std::optional<double> local_shortcut(const Graph& graph, NodeId u, NodeId v) {
  if (u == v) return 0.0;
  if (graph.adjacent(u, v)) return 1.0;
  if (graph.common_neighbor(u, v)) return 2.0;
  return std::nullopt;
}

double coordinate_distance(const Embedding& embedding, NodeId u, NodeId v) {
  require_embedded(embedding, u);
  require_embedded(embedding, v);
  return distance_unchecked(embedding.space, embedding.point(u), embedding.point(v));
}

double estimate_distance(const Graph& graph, const Embedding& embedding, NodeId u, NodeId v,
                         const QueryConfig& config) {
  require_embedded(embedding, u);
  require_embedded(embedding, v);
  if (u == v) return 0.0;
  if (config.local_optimization) {
    if (auto exact = local_shortcut(graph, u, v)) return *exact;
  }
  return distance_unchecked(embedding.space, embedding.point(u), embedding.point(v));
}

LikelihoodModel::LikelihoodModel(int theta_min, int theta_max, double bin_width, double alpha)
    : theta_min_(theta_min), theta_max_(theta_max), bin_width_(bin_width), alpha_(alpha) {
  if (theta_min < 1 || theta_max < theta_min)
    throw std::invalid_argument("likelihood model: need 1 <= theta_min <= theta_max");
  if (!(bin_width > 0.0)) throw std::invalid_argument("likelihood model: bin width must be > 0");
  if (!(alpha >= 0.0)) throw std::invalid_argument("likelihood model: alpha must be >= 0");
  // bins cover [0, theta_max]; the last bin absorbs larger estimates
  const auto bins = static_cast<Eigen::Index>(std::llround(theta_max / bin_width)) + 1;
  long_table_ = Eigen::MatrixXd::Constant(theta_count(), bins, 1.0 / double(bins));
  short_table_ = long_table_;
}

LikelihoodModel::Bin LikelihoodModel::bin_of(double estimate) const noexcept {
  const double scaled = std::floor(estimate / bin_width_ + 0.5);
  const auto last = static_cast<double>(bin_count() - 1);
  if (!(scaled >= 0.0)) return {0, true};
  if (scaled > last) return {bin_count() - 1, true};
  return {static_cast<Eigen::Index>(scaled), false};
}

void LikelihoodModel::validate() const {
  for (const auto* table : {&long_table_, &short_table_}) {
    if (table->rows() != theta_count() || table->cols() < 1)
      throw FormatError("likelihood table has the wrong shape");
    for (Eigen::Index r = 0; r < table->rows(); ++r) {
      if ((table->row(r).array() <= 0.0).any())
        throw FormatError("likelihood table has a non-positive probability");
      if (std::abs(table->row(r).sum() - 1.0) > 1e-9)
        throw FormatError("likelihood table row does not sum to 1");
    }
  }
}

LikelihoodFit fit_likelihood_model(const Graph& graph, const Embedding& long_coords,
                                   const Embedding& short_coords,
                                   const std::vector<HoldoutPair>& holdout, int theta_min,
                                   int theta_max, double bin_width, double alpha) {
  LikelihoodFit fit;
  fit.model = LikelihoodModel(theta_min, theta_max, bin_width, alpha);
  auto& model = fit.model;
  Eigen::MatrixXd long_counts = Eigen::MatrixXd::Zero(model.theta_count(), model.bin_count());
  Eigen::MatrixXd short_counts = long_counts;
  Eigen::VectorXd samples = Eigen::VectorXd::Zero(model.theta_count());

  for (const auto& pair : holdout) {
    if (pair.u >= graph.node_count() || pair.v >= graph.node_count())
      throw std::out_of_range("holdout pair references a node outside the graph");
    const auto truth = static_cast<long long>(pair.truth);
    if (pair.truth == kUnreachable || truth < theta_min || truth > theta_max ||
        long_coords.is_excluded(pair.u) || long_coords.is_excluded(pair.v) ||
        short_coords.is_excluded(pair.u) || short_coords.is_excluded(pair.v)) {
      ++fit.skipped_pairs;
      continue;
    }
    const auto row = static_cast<Eigen::Index>(truth - theta_min);
    long_counts(row, model.bin_of(coordinate_distance(long_coords, pair.u, pair.v)).index) += 1;
    short_counts(row, model.bin_of(coordinate_distance(short_coords, pair.u, pair.v)).index) += 1;
    samples(row) += 1;
    ++fit.used_pairs;
  }

  auto normalize = [&](Eigen::MatrixXd& counts, Eigen::MatrixXd& table) {
    for (Eigen::Index r = 0; r < counts.rows(); ++r) {
      if (samples(r) == 0) {
        table.row(r).setConstant(1.0 / double(counts.cols()));
        continue;
      }
      table.row(r) = (counts.row(r).array() + alpha).matrix();
      table.row(r) /= table.row(r).sum();
    }
  };
  normalize(long_counts, model.long_table());
  normalize(short_counts, model.short_table());
  for (Eigen::Index r = 0; r < samples.size(); ++r)
    if (samples(r) == 0) fit.empty_thetas.push_back(theta_min + static_cast<int>(r));
  return fit;
}

MleResult mle_estimate(const LikelihoodModel& model, double x_long, double x_short) {
  const auto bl = model.bin_of(x_long);
  const auto bs = model.bin_of(x_short);
  const auto likelihood =
      (model.long_table().col(bl.index).array() * model.short_table().col(bs.index).array()).eval();
  Eigen::Index best = 0;
  for (Eigen::Index r = 1; r < likelihood.size(); ++r)
    if (likelihood(r) > likelihood(best)) best = r;
  return {model.theta_min() + static_cast<int>(best), bl.clamped || bs.clamped};
}

double estimate_distance_hybrid(const Graph& graph, const Embedding& long_coords,
                                const Embedding& short_coords, const LikelihoodModel& model,
                                NodeId u, NodeId v) {
  require_embedded(long_coords, u);
  require_embedded(long_coords, v);
  require_embedded(short_coords, u);
  require_embedded(short_coords, v);
  if (auto exact = local_shortcut(graph, u, v)) return *exact;
  return mle_estimate(model, coordinate_distance(long_coords, u, v),
                      coordinate_distance(short_coords, u, v))
      .theta;
}

void save_likelihood_model(const LikelihoodModel& model, std::ostream& out) {
  out << "# rigel likelihood model\n";
  out << "theta_min " << model.theta_min() << '\n';
  out << "theta_max " << model.theta_max() << '\n';
  out << std::setprecision(17);
  out << "bin_width " << model.bin_width() << '\n';
  out << "alpha " << model.alpha() << '\n';
  out << "bins " << model.bin_count() << '\n';
  auto rows = [&](char tag, const Eigen::MatrixXd& table) {
    for (Eigen::Index r = 0; r < table.rows(); ++r) {
      out << tag << ' ' << model.theta_min() + r;
      for (Eigen::Index b = 0; b < table.cols(); ++b) out << ' ' << table(r, b);
      out << '\n';
    }
  };
  rows('L', model.long_table());
  rows('S', model.short_table());
}

LikelihoodModel load_likelihood_model(std::istream& in) {
  int theta_min = 0, theta_max = 0;
  long long bins = -1;
  double bin_width = 0, alpha = -1;
  std::string line;
  int header_fields = 0;
  while (header_fields < 5 && std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    bool ok = true;
    if (key == "theta_min") ok = static_cast<bool>(ls >> theta_min);
    else if (key == "theta_max") ok = static_cast<bool>(ls >> theta_max);
    else if (key == "bin_width") ok = static_cast<bool>(ls >> bin_width);
    else if (key == "alpha") ok = static_cast<bool>(ls >> alpha);
    else if (key == "bins") ok = static_cast<bool>(ls >> bins);
    else throw FormatError("unexpected header key \"" + key + "\" in likelihood model");
    if (!ok) throw FormatError("bad value for \"" + key + "\" in likelihood model");
    ++header_fields;
  }
  if (header_fields < 5) throw FormatError("truncated likelihood model header");
  LikelihoodModel model;
  try {
    model = LikelihoodModel(theta_min, theta_max, bin_width, alpha);
  } catch (const std::invalid_argument& ex) {
    throw FormatError(ex.what());
  }
  if (bins != model.bin_count()) throw FormatError("bin count inconsistent with theta_max/bin_width");

  std::vector<bool> seen_long(model.theta_count(), false), seen_short(model.theta_count(), false);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    int theta = 0;
    if (!(ls >> tag >> theta) || (tag != "L" && tag != "S"))
      throw FormatError("bad likelihood row: " + line);
    if (theta < theta_min || theta > theta_max) throw FormatError("likelihood row theta out of range");
    auto& table = tag == "L" ? model.long_table() : model.short_table();
    auto& seen = tag == "L" ? seen_long : seen_short;
    const auto r = static_cast<Eigen::Index>(theta - theta_min);
    for (Eigen::Index b = 0; b < table.cols(); ++b)
      if (!(ls >> table(r, b))) throw FormatError("short likelihood row: " + line);
    std::string extra;
    if (ls >> extra) throw FormatError("long likelihood row: " + line);
    seen[static_cast<std::size_t>(r)] = true;
  }
  for (std::size_t r = 0; r < seen_long.size(); ++r)
    if (!seen_long[r] || !seen_short[r]) throw FormatError("likelihood model is missing rows");
  model.validate();
  return model;
}

}  // namespace rigel
