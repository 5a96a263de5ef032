#include "rigel/embedder.hpp"
#include "rigel/errors.hpp"
#include "rigel/generate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <sstream>

using namespace rigel;

namespace {

std::vector<DistanceVector> bfs_all(const Graph& g, const std::vector<NodeId>& ids) {
  std::vector<DistanceVector> out;
  for (NodeId id : ids) out.push_back(bfs_distances(g, id));
  return out;
}

EmbedConfig small_config(std::uint32_t l, std::uint32_t primaries, int dim = 10) {
  EmbedConfig c;
  c.space = Space::hyperboloid(-1, dim);
  c.landmark_count = l;
  c.primary_count = primaries;
  c.refs_per_node = std::min<std::uint32_t>(16, l);
  c.local_landmarks = c.refs_per_node > 1 ? 1 : 0;
  return c;
}

double dist(const Embedding& e, NodeId a, NodeId b) {
  return distance(e.space, Point(e.point(a)), Point(e.point(b)));
}

}  // namespace

TEST_CASE("landmark selection") {
  CHECK(select_landmarks(generate::star(7), 1) == std::vector<NodeId>{0});
  CHECK(select_landmarks(generate::cycle(4), 2) == std::vector<NodeId>{0, 1});
  const Graph p = generate::path(5);
  CHECK(select_landmarks(p, 5) == std::vector<NodeId>{1, 2, 3, 0, 4});
  CHECK_THROWS_AS(select_landmarks(p, 6), std::invalid_argument);
}

TEST_CASE("primary choice is seeded and ordered") {
  std::vector<NodeId> lms(100);
  for (NodeId i = 0; i < 100; ++i) lms[i] = 1000 - i;
  const auto a = choose_primaries(lms, 16, 5);
  CHECK(a.size() == 16);
  CHECK(a == choose_primaries(lms, 16, 5));
  CHECK(a != choose_primaries(lms, 16, 6));
  CHECK(std::is_sorted(a.rbegin(), a.rend()));  // landmark order, which is descending here
  CHECK(choose_primaries(lms, 100, 1) == lms);
}

TEST_CASE("two primaries at graph distance 4") {
  const Graph g = generate::path(5);
  const std::vector<NodeId> lms{0, 4};
  const Embedding e = bootstrap_landmarks(g, lms, bfs_all(g, lms), small_config(2, 2));
  CHECK(std::abs(dist(e, 0, 4) - 4.0) <= 0.4);
}

TEST_CASE("single landmark sits at the origin") {
  const Graph g = generate::path(3);
  const std::vector<NodeId> lms{1};
  const Embedding e = bootstrap_landmarks(g, lms, bfs_all(g, lms), small_config(1, 1));
  CHECK(e.point(1).norm() == 0.0);
}

TEST_CASE("triangle of landmarks against a grid search in two dimensions") {
  const Graph g = generate::cycle(3);
  const std::vector<NodeId> lms{0, 1, 2};
  const Embedding e = bootstrap_landmarks(g, lms, bfs_all(g, lms), small_config(3, 3, 2));
  auto objective = [&](const Point& a, const Point& b, const Point& c) {
    const Space s = e.space;
    return std::pow(distance(s, a, b) - 1, 2) + std::pow(distance(s, a, c) - 1, 2) +
           std::pow(distance(s, b, c) - 1, 2);
  };
  const double achieved = objective(e.point(0), e.point(1), e.point(2));
  // Distances are invariant under hyperbolic isometries, so fix the first
  // point at the origin and the second on the positive x axis.
  double best = 1e300;
  Point o = Point::Zero(2), b(2), c(2);
  for (double r = 0.0; r <= 1.5; r += 0.01) {
    b << r, 0.0;
    for (double x = -1.5; x <= 1.5; x += 0.02)
      for (double y = 0.0; y <= 1.5; y += 0.02) {
        c << x, y;
        best = std::min(best, objective(o, b, c));
      }
  }
  CHECK(achieved <= best + 1e-4);
  for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 2}}) CHECK(std::abs(dist(e, i, j) - 1.0) <= 0.2);
}

TEST_CASE("bootstrap error names the disconnected pair") {
  const std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {0, 2}, {3, 4}, {3, 5}};
  const Graph g = Graph::from_edges(6, edges);
  const std::vector<NodeId> lms{0, 3};
  try {
    bootstrap_landmarks(g, lms, bfs_all(g, lms), small_config(2, 2));
    FAIL("expected BootstrapError");
  } catch (const BootstrapError& err) {
    const std::string what = err.what();
    CHECK(what.find('0') != std::string::npos);
    CHECK(what.find('3') != std::string::npos);
  }
}

TEST_CASE("embed_node examples") {
  const Space s = Space::hyperboloid(-1, 10);
  Eigen::MatrixXd refs(10, 1);
  refs.col(0) = Point::LinSpaced(10, -0.5, 0.5);
  Eigen::VectorXd d(1);
  d << 0.0;
  auto fit = embed_node(refs, d, s, ObjectiveKind::SquaredAbs, {});
  CHECK(distance(s, fit.point, Point(refs.col(0))) < 1e-3);
  CHECK(fit.final_residual <= fit.initial_residual);

  Eigen::MatrixXd two = Eigen::MatrixXd::Zero(10, 2);
  two(0, 0) = 1.0;
  two(0, 1) = -1.0;
  Eigen::VectorXd dd(2);
  dd << 2.0, 2.0;
  fit = embed_node(two, dd, s, ObjectiveKind::SquaredAbs, {});
  const double a = distance(s, fit.point, Point(two.col(0)));
  const double b = distance(s, fit.point, Point(two.col(1)));
  CHECK(std::abs(a - b) <= 0.05 * std::max(a, b));

  CHECK_THROWS_AS(embed_node(Eigen::MatrixXd(10, 0), Eigen::VectorXd(0), s, ObjectiveKind::Abs, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(embed_node(two, Eigen::VectorXd::Ones(3), s, ObjectiveKind::Abs, {}),
                  std::invalid_argument);
}

TEST_CASE("landmark embedded against itself keeps its coordinate") {
  const Graph g = generate::small_world(200, 6, 0.1, 3);
  EmbedConfig cfg = small_config(20, 8);
  const Embedding e = embed_graph(g, cfg);
  const NodeId lm = e.landmarks[3];
  Eigen::MatrixXd refs(10, 4);
  Eigen::VectorXd d(4);
  refs.col(0) = e.point(lm);
  d[0] = 0;
  for (int j = 1; j < 4; ++j) {
    refs.col(j) = e.point(e.landmarks[j + 5]);
    d[j] = dist(e, lm, e.landmarks[j + 5]);
  }
  const auto fit = embed_node(refs, d, e.space, ObjectiveKind::SquaredAbs, {});
  CHECK(distance(e.space, fit.point, Point(e.point(lm))) < 1e-3);
}

TEST_CASE("objective terms") {
  CHECK(objective_term(ObjectiveKind::SquaredAbs, 3, 1) == 4);
  CHECK(objective_term(ObjectiveKind::Abs, 1, 3) == 2);
  CHECK(objective_term(ObjectiveKind::SquaredRel, 3, 2) == 0.25);
  CHECK(objective_term(ObjectiveKind::SquaredRel, 1, 0) == 1);
  CHECK(objective_from_string(to_string(ObjectiveKind::SquaredRel)) == ObjectiveKind::SquaredRel);
  CHECK_THROWS_AS(objective_from_string("cubic"), std::invalid_argument);
}

TEST_CASE("config validation") {
  EmbedConfig c;
  CHECK_NOTHROW(c.validate());
  c.refs_per_node = 101;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.local_landmarks = 16;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.primary_count = 101;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.workers = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  const Graph g = generate::path(10);
  CHECK_THROWS_AS(embed_graph(g, EmbedConfig{}), std::invalid_argument);  // l > N
}

TEST_CASE("cascade levels and exclusion") {
  // Star on 0..5 plus a separate edge 6-7 that holds no landmark.
  const std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {0, 2}, {0, 3}, {0, 4}, {4, 5}, {6, 7}};
  const Graph g = Graph::from_edges(8, edges);
  EmbedConfig cfg = small_config(2, 2);
  const Embedding e = embed_graph(g, cfg);
  CHECK(e.landmarks == std::vector<NodeId>{0, 4});
  const auto lv = cascade_levels(g, e);
  CHECK(lv.level[0] == 0);
  CHECK(lv.level[4] == 0);
  CHECK(lv.level[1] == 1);
  CHECK(lv.level[5] == 1);
  CHECK(lv.level[6] == kUnreachable);
  CHECK(e.is_excluded(6));
  CHECK(e.is_excluded(7));
  CHECK(e.excluded_count() == 2);
  CHECK_FALSE(e.is_excluded(5));
}

TEST_CASE("pipeline on a 1k-node small world") {
  const Graph g = generate::small_world(1000, 10, 0.1, 7);
  EmbedConfig cfg;
  cfg.seed = 4;
  const Embedding e = embed_graph(g, cfg);
  CHECK(e.excluded_count() == 0);
  CHECK(e.coords.allFinite());
  const auto& d = e.diagnostics;
  double init = 0, fin = 0;
  std::size_t counted = 0;
  std::vector<bool> is_landmark(g.node_count(), false);
  for (NodeId l : e.landmarks) is_landmark[l] = true;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (is_landmark[u]) continue;
    CHECK(d.final_residual[u] <= d.initial_residual[u]);
    CHECK(d.reference_count[u] == cfg.refs_per_node);
    CHECK(d.local_reference_count[u] <= cfg.local_landmarks);
    init += d.initial_residual[u];
    fin += d.final_residual[u];
    ++counted;
  }
  CHECK(counted == 900);
  CHECK(std::isfinite(fin));
  CHECK(fin <= init);
  CHECK(d.timings.embedding_seconds > 0);
}

TEST_CASE("raw mode uses landmark references only") {
  const Graph g = generate::small_world(300, 6, 0.1, 2);
  EmbedConfig cfg = small_config(30, 8);
  cfg.local_landmarks = 0;
  const Embedding e = embed_graph(g, cfg);
  for (NodeId u = 0; u < g.node_count(); ++u) CHECK(e.diagnostics.local_reference_count[u] == 0);

  cfg.local_landmarks = 4;
  const Embedding cascade = embed_graph(g, cfg);
  std::size_t with_local = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    CHECK(cascade.diagnostics.local_reference_count[u] <= 4);
    with_local += cascade.diagnostics.local_reference_count[u] > 0;
  }
  CHECK(with_local > 0);
}

TEST_CASE("worker count does not change the result") {
  const Graph g = generate::scale_free(600, 3, 9);
  EmbedConfig cfg = small_config(40, 10);
  cfg.seed = 77;
  cfg.workers = 1;
  const Embedding one = embed_graph(g, cfg);
  for (unsigned w : {2u, 8u}) {
    cfg.workers = w;
    const Embedding many = embed_graph(g, cfg);
    CHECK(many.coords == one.coords);
    CHECK(many.landmarks == one.landmarks);
    CHECK(many.primaries == one.primaries);
  }
  cfg.seed = 78;
  CHECK(embed_graph(g, cfg).coords != one.coords);
}

TEST_CASE("save and load") {
  const std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {3, 4}, {5, 6}};
  const Graph g = Graph::from_edges(7, edges);
  EmbedConfig cfg = small_config(3, 2, 4);
  cfg.space = Space::hyperboloid(-2.5, 4);
  const Embedding e = embed_graph(g, cfg);

  std::stringstream buf;
  save_embedding(e, buf);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 4) == "RGE1");
  const Embedding back = load_embedding(buf);
  CHECK(back.coords == e.coords);
  CHECK(back.space == e.space);
  CHECK(back.landmarks == e.landmarks);
  CHECK(back.primaries == e.primaries);
  CHECK(back.excluded == e.excluded);
  CHECK(back.config.seed == cfg.seed);
  CHECK(back.config.local_landmarks == cfg.local_landmarks);
  CHECK(back.config.refs_per_node == cfg.refs_per_node);

  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_embedding(truncated), FormatError);
  std::istringstream bad_magic("RGE2" + bytes.substr(4));
  CHECK_THROWS_AS(load_embedding(bad_magic), FormatError);
  std::string wrong_dim = bytes;
  wrong_dim[13] = 5;  // u32 dimension follows magic, model tag and curvature
  std::istringstream dim_stream(wrong_dim);
  CHECK_THROWS_AS(load_embedding(dim_stream), FormatError);
  std::istringstream empty("");
  CHECK_THROWS_AS(load_embedding(empty), FormatError);
}

TEST_CASE("euclidean embeddings round trip too") {
  const Graph g = generate::grid(6, 6);
  EmbedConfig cfg = small_config(8, 4, 3);
  cfg.space = Space::euclidean(3);
  const Embedding e = embed_graph(g, cfg);
  std::stringstream buf;
  save_embedding(e, buf);
  const Embedding back = load_embedding(buf);
  CHECK(back.space.model == Model::Euclidean);
  CHECK(back.coords == e.coords);
}
