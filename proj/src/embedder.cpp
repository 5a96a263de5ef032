#include "rigel/embedder.hpp"

#include "binary_io.hpp"
#include "rigel/errors.hpp"
#include "rigel/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace rigel {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent stream per (seed, purpose, index) so results do not depend on
// which worker handles which node.
std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(purpose ^ splitmix64(index))));
}

constexpr std::uint64_t kPrimaryStream = 0x7072696d61727931ULL;
constexpr std::uint64_t kNodeStream = 0x6e6f64657265667aULL;

struct ReferenceObjective {
  const Eigen::Ref<const Eigen::MatrixXd>& points;
  const Eigen::Ref<const Eigen::VectorXd>& distances;
  const Space& space;
  ObjectiveKind kind;

  double operator()(const Eigen::VectorXd& p) const {
    double total = 0;
    for (Eigen::Index j = 0; j < points.cols(); ++j)
      total += objective_term(kind, distance_unchecked(space, p, points.col(j)), distances(j));
    return total;
  }
};

NodeFit fit_from(const Eigen::Ref<const Eigen::MatrixXd>& ref_points,
                 const Eigen::Ref<const Eigen::VectorXd>& ref_distances, const Space& space,
                 ObjectiveKind kind, const OptimizerConfig& optimizer, const Point& start) {
  ReferenceObjective objective{ref_points, ref_distances, space, kind};
  NodeFit fit;
  fit.initial_residual = objective(start);
  auto result = minimize(objective, start, optimizer);
  fit.point = std::move(result.argmin);
  fit.final_residual = result.value;
  fit.iterations = result.iterations;
  return fit;
}

// Gathers reference columns of `coords` into a dense matrix.
Eigen::MatrixXd gather(const Eigen::MatrixXd& coords, const std::vector<NodeId>& ids) {
  Eigen::MatrixXd out(coords.rows(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t j = 0; j < ids.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = coords.col(ids[j]);
  return out;
}

}  // namespace

std::string_view to_string(ObjectiveKind kind) noexcept {
  switch (kind) {
    case ObjectiveKind::SquaredAbs:
      return "squared_abs";
    case ObjectiveKind::Abs:
      return "abs";
    case ObjectiveKind::SquaredRel:
      return "squared_rel";
  }
  return "unknown";
}

ObjectiveKind objective_from_string(std::string_view name) {
  if (name == "squared_abs") return ObjectiveKind::SquaredAbs;
  if (name == "abs") return ObjectiveKind::Abs;
  if (name == "squared_rel") return ObjectiveKind::SquaredRel;
  throw std::invalid_argument("unknown objective \"" + std::string(name) + "\"");
}

void EmbedConfig::validate() const {
  space.validate();
  optimizer.validate();
  if (landmark_count < 1) throw std::invalid_argument("landmark_count must be >= 1");
  if (primary_count < 1 || primary_count > landmark_count)
    throw std::invalid_argument("primary_count must be in [1, landmark_count]");
  if (refs_per_node < 1 || refs_per_node > landmark_count)
    throw std::invalid_argument("refs_per_node must be in [1, landmark_count]");
  if (refs_per_node > 255) throw std::invalid_argument("refs_per_node must be <= 255");
  if (local_landmarks >= refs_per_node)
    throw std::invalid_argument("local_landmarks must be < refs_per_node");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (bootstrap_sweeps < 0) throw std::invalid_argument("bootstrap_sweeps must be >= 0");
}

std::size_t Embedding::excluded_count() const {
  return static_cast<std::size_t>(std::count(excluded.begin(), excluded.end(), true));
}

std::vector<NodeId> select_landmarks(const Graph& graph, std::size_t l) {
  const std::size_t n = graph.node_count();
  if (l > n) {
    throw std::invalid_argument("landmark count " + std::to_string(l) + " exceeds node count " +
                                std::to_string(n));
  }
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), NodeId{0});
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(l), ids.end(),
                    [&](NodeId a, NodeId b) {
                      const auto da = graph.degree(a), db = graph.degree(b);
                      return da != db ? da > db : a < b;
                    });
  ids.resize(l);
  return ids;
}

std::vector<NodeId> choose_primaries(const std::vector<NodeId>& landmarks, std::size_t count,
                                     std::uint64_t seed) {
  if (count > landmarks.size()) throw std::invalid_argument("more primaries than landmarks");
  std::vector<std::size_t> idx(landmarks.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto rng = stream_for(seed, kPrimaryStream, 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  std::vector<NodeId> out;
  out.reserve(count);
  for (auto i : idx) out.push_back(landmarks[i]);
  return out;
}

NodeFit embed_node(const Eigen::Ref<const Eigen::MatrixXd>& ref_points,
                   const Eigen::Ref<const Eigen::VectorXd>& ref_distances, const Space& space,
                   ObjectiveKind objective, const OptimizerConfig& optimizer) {
  if (ref_points.cols() == 0) throw std::invalid_argument("embed_node: no references");
  if (ref_points.cols() != ref_distances.size())
    throw std::invalid_argument("embed_node: reference point/distance count mismatch");
  if (ref_points.rows() != space.dimension)
    throw std::invalid_argument("embed_node: reference dimension does not match space");
  if (!ref_distances.allFinite() || (ref_distances.array() < 0).any())
    throw std::invalid_argument("embed_node: reference distances must be finite and >= 0");
  Eigen::Index nearest = 0;
  ref_distances.minCoeff(&nearest);
  const Point start = ref_points.col(nearest);
  return fit_from(ref_points, ref_distances, space, objective, optimizer, start);
}

Embedding bootstrap_landmarks(const Graph& graph, const std::vector<NodeId>& landmarks,
                              std::vector<DistanceVector> landmark_bfs, const EmbedConfig& config) {
  config.validate();
  const std::size_t n = graph.node_count();
  const std::size_t l = landmarks.size();
  if (l == 0) throw std::invalid_argument("bootstrap_landmarks: no landmarks");
  if (landmark_bfs.size() != l)
    throw std::invalid_argument("bootstrap_landmarks: one BFS vector per landmark required");
  for (std::size_t i = 0; i < l; ++i) {
    if (landmarks[i] >= n) throw std::out_of_range("landmark id out of range");
    if (landmark_bfs[i].source != landmarks[i] || landmark_bfs[i].dist.size() != n)
      throw std::invalid_argument("bootstrap_landmarks: BFS vector does not match its landmark");
  }
  {
    auto sorted = landmarks;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("bootstrap_landmarks: duplicate landmark ids");
  }
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = i + 1; j < l; ++j)
      if (!landmark_bfs[i].reachable(landmarks[j]))
        throw BootstrapError("landmarks " + std::to_string(landmarks[i]) + " and " +
                             std::to_string(landmarks[j]) + " are in different components");

  const auto dim = config.space.dimension;
  Embedding e;
  e.space = config.space;
  e.config = config;
  e.coords = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(n));
  e.landmarks = landmarks;
  e.landmark_bfs = std::move(landmark_bfs);
  e.excluded.assign(n, false);
  for (NodeId u = 0; u < n; ++u) e.excluded[u] = !e.landmark_bfs[0].reachable(u);
  e.diagnostics.initial_residual.assign(n, 0.0);
  e.diagnostics.final_residual.assign(n, 0.0);
  e.diagnostics.reference_count.assign(n, 0);
  e.diagnostics.local_reference_count.assign(n, 0);

  const std::size_t primary_count = std::min<std::size_t>(config.primary_count, l);
  e.primaries = choose_primaries(landmarks, primary_count, config.seed);

  std::vector<std::size_t> primary_idx, expander_idx;  // indices into landmarks
  {
    std::size_t p = 0;
    for (std::size_t i = 0; i < l; ++i) {
      if (p < e.primaries.size() && e.primaries[p] == landmarks[i]) {
        primary_idx.push_back(i);
        ++p;
      } else {
        expander_idx.push_back(i);
      }
    }
  }

  auto hop = [&](std::size_t i, std::size_t j) {
    return static_cast<double>(e.landmark_bfs[i].dist[landmarks[j]]);
  };
  auto fit_against = [&](std::size_t target, const std::vector<std::size_t>& refs,
                         const Point* start) {
    std::vector<NodeId> ids;
    Eigen::VectorXd d(static_cast<Eigen::Index>(refs.size()));
    for (std::size_t k = 0; k < refs.size(); ++k) {
      ids.push_back(landmarks[refs[k]]);
      d(static_cast<Eigen::Index>(k)) = hop(target, refs[k]);
    }
    const Eigen::MatrixXd pts = gather(e.coords, ids);
    return start ? fit_from(pts, d, e.space, config.objective, config.optimizer, *start)
                 : embed_node(pts, d, e.space, config.objective, config.optimizer);
  };
  auto joint_primary_objective = [&]() {
    double total = 0;
    for (std::size_t a = 0; a < primary_idx.size(); ++a)
      for (std::size_t b = a + 1; b < primary_idx.size(); ++b) {
        const auto i = primary_idx[a], j = primary_idx[b];
        total += objective_term(config.objective,
                                distance_unchecked(e.space, e.coords.col(landmarks[i]),
                                                   e.coords.col(landmarks[j])),
                                hop(i, j));
      }
    return total;
  };

  // Primaries: greedy initial placement, then block-coordinate descent on the
  // joint objective (each block is one primary's coordinates).
  std::vector<std::size_t> placed;
  for (std::size_t i : primary_idx) {
    if (!placed.empty()) {
      auto fit = fit_against(i, placed, nullptr);
      e.coords.col(landmarks[i]) = fit.point;
    }
    placed.push_back(i);
  }
  if (primary_idx.size() > 1) {
    double current = joint_primary_objective();
    for (int sweep = 0; sweep < config.bootstrap_sweeps; ++sweep) {
      for (std::size_t i : primary_idx) {
        std::vector<std::size_t> others;
        for (std::size_t j : primary_idx)
          if (j != i) others.push_back(j);
        const Point start = e.coords.col(landmarks[i]);
        auto fit = fit_against(i, others, &start);
        if (fit.final_residual <= fit.initial_residual) e.coords.col(landmarks[i]) = fit.point;
      }
      e.diagnostics.bootstrap_sweeps_run = sweep + 1;
      const double next = joint_primary_objective();
      const bool stalled = current - next <= 1e-5 * std::max(current, 1e-12);
      current = next;
      if (stalled) break;
    }
  }

  // Expanders, one at a time against everything placed so far.
  for (std::size_t i : expander_idx) {
    auto fit = fit_against(i, placed, nullptr);
    e.coords.col(landmarks[i]) = fit.point;
    e.diagnostics.initial_residual[landmarks[i]] = fit.initial_residual;
    e.diagnostics.final_residual[landmarks[i]] = fit.final_residual;
    placed.push_back(i);
  }

  e.diagnostics.bootstrap_objective = landmark_objective(e);
  return e;
}

double landmark_objective(const Embedding& e) {
  double total = 0;
  const auto& lm = e.landmarks;
  for (std::size_t i = 0; i < lm.size(); ++i)
    for (std::size_t j = i + 1; j < lm.size(); ++j)
      total += objective_term(e.config.objective,
                              distance_unchecked(e.space, e.coords.col(lm[i]), e.coords.col(lm[j])),
                              static_cast<double>(e.landmark_bfs[i].dist[lm[j]]));
  return total;
}

CascadeLevels cascade_levels(const Graph& graph, const Embedding& embedding) {
  if (embedding.landmark_bfs.size() != embedding.landmarks.size() || embedding.landmarks.empty())
    throw std::invalid_argument("cascade_levels: embedding carries no landmark BFS vectors");
  CascadeLevels out;
  out.level.assign(graph.node_count(), kUnreachable);
  for (const auto& bfs : embedding.landmark_bfs)
    for (std::size_t u = 0; u < out.level.size(); ++u)
      out.level[u] = std::min(out.level[u], bfs.dist[u]);
  for (auto lv : out.level)
    if (lv != kUnreachable) out.max_level = std::max(out.max_level, lv);
  return out;
}

Embedding embed_graph(const Graph& graph, const EmbedConfig& config) {
  config.validate();
  if (graph.node_count() == 0) throw std::invalid_argument("embed_graph: empty graph");
  const std::size_t n = graph.node_count();
  const unsigned workers = config.workers;

  // Phase 1: landmark BFS.
  auto t = Clock::now();
  const auto landmarks = select_landmarks(graph, config.landmark_count);
  std::vector<DistanceVector> bfs(landmarks.size());
  parallel_round_robin(landmarks.size(), workers,
                       [&](std::size_t i) { bfs[i] = bfs_distances(graph, landmarks[i]); });
  const double bfs_seconds = seconds_since(t);

  // Phase 2: landmark coordinates.
  t = Clock::now();
  Embedding e = bootstrap_landmarks(graph, landmarks, std::move(bfs), config);
  e.diagnostics.timings.landmark_bfs_seconds = bfs_seconds;
  e.diagnostics.timings.landmark_bootstrap_seconds = seconds_since(t);

  // Partition nodes into cascade levels (ascending id inside each level).
  t = Clock::now();
  const auto levels = cascade_levels(graph, e);
  std::vector<std::vector<NodeId>> by_level(levels.max_level + 1);
  for (NodeId u = 0; u < n; ++u) {
    e.excluded[u] = levels.level[u] == kUnreachable;
    if (!e.excluded[u]) by_level[levels.level[u]].push_back(u);
  }
  std::vector<std::uint32_t> landmark_slot(n, UINT32_MAX);
  for (std::uint32_t i = 0; i < landmarks.size(); ++i) landmark_slot[landmarks[i]] = i;
  e.diagnostics.timings.partition_seconds = seconds_since(t);

  // Phase 3: per-node embedding, one level at a time.
  t = Clock::now();
  const std::size_t refs = config.refs_per_node;
  const std::size_t l = landmarks.size();
  auto embed_one = [&](NodeId u, HopCount level) {
    auto rng = stream_for(config.seed, kNodeStream, u);
    std::vector<NodeId> ids;
    std::vector<double> dist;
    ids.reserve(refs);
    dist.reserve(refs);

    if (config.local_landmarks > 0) {
      std::vector<NodeId> lower;
      for (NodeId v : graph.neighbors(u))
        if (levels.level[v] < level) lower.push_back(v);
      const std::size_t take = std::min<std::size_t>(config.local_landmarks, lower.size());
      for (std::size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, lower.size() - 1);
        std::swap(lower[i], lower[pick(rng)]);
        ids.push_back(lower[i]);
        dist.push_back(1.0);
      }
    }
    const std::size_t local = ids.size();

    std::vector<std::uint32_t> slots(l);
    std::iota(slots.begin(), slots.end(), 0u);
    for (std::size_t i = 0; i < l && ids.size() < refs; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, l - 1);
      std::swap(slots[i], slots[pick(rng)]);
      const NodeId lm = landmarks[slots[i]];
      if (std::find(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(local), lm) !=
          ids.begin() + static_cast<std::ptrdiff_t>(local))
        continue;
      ids.push_back(lm);
      dist.push_back(static_cast<double>(e.landmark_bfs[slots[i]].dist[u]));
    }

    const Eigen::MatrixXd pts = gather(e.coords, ids);
    const Eigen::Map<const Eigen::VectorXd> d(dist.data(), static_cast<Eigen::Index>(dist.size()));
    auto fit = embed_node(pts, d, e.space, config.objective, config.optimizer);
    e.coords.col(u) = fit.point;
    e.diagnostics.initial_residual[u] = fit.initial_residual;
    e.diagnostics.final_residual[u] = fit.final_residual;
    e.diagnostics.reference_count[u] = static_cast<std::uint8_t>(ids.size());
    e.diagnostics.local_reference_count[u] = static_cast<std::uint8_t>(local);
  };
  for (HopCount level = 1; level < by_level.size(); ++level) {
    const auto& nodes = by_level[level];
    parallel_round_robin(nodes.size(), workers, [&](std::size_t i) { embed_one(nodes[i], level); });
  }
  e.diagnostics.timings.embedding_seconds = seconds_since(t);
  return e;
}

void save_embedding(const Embedding& e, std::ostream& out) {
  const auto n = static_cast<std::uint64_t>(e.node_count());
  out.write("RGE1", 4);
  io::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(e.space.model));
  io::write_le<double>(out, e.space.curvature);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.space.dimension));
  io::write_le<std::uint64_t>(out, n);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.landmarks.size()));
  io::write_le<std::uint64_t>(out, e.config.seed);
  io::write_le<std::uint32_t>(out, e.config.local_landmarks);
  for (NodeId id : e.landmarks) io::write_le<std::uint32_t>(out, id);
  for (Eigen::Index u = 0; u < e.coords.cols(); ++u)
    for (Eigen::Index k = 0; k < e.coords.rows(); ++k) io::write_le<double>(out, e.coords(k, u));
  std::vector<std::uint8_t> bitmap((n + 7) / 8, 0);
  for (std::uint64_t u = 0; u < n; ++u)
    if (e.excluded[u]) bitmap[u / 8] |= static_cast<std::uint8_t>(1u << (u % 8));
  for (auto b : bitmap) io::write_le<std::uint8_t>(out, b);
  // trailer: remaining configuration
  io::write_le<std::uint32_t>(out, e.config.primary_count);
  io::write_le<std::uint32_t>(out, e.config.refs_per_node);
  io::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(e.config.objective));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.primaries.size()));
  for (NodeId id : e.primaries) io::write_le<std::uint32_t>(out, id);
}

Embedding load_embedding(std::istream& in) {
  const std::string bytes = io::slurp(in);
  io::Reader r(bytes);
  r.expect_magic("RGE1");
  Embedding e;
  const auto model = r.read<std::uint8_t>("model tag");
  if (model > 1) throw FormatError("unknown model tag " + std::to_string(model));
  e.space.model = static_cast<Model>(model);
  e.space.curvature = r.read<double>("curvature");
  e.space.dimension = static_cast<int>(r.read<std::uint32_t>("dimension"));
  try {
    e.space.validate();
  } catch (const std::invalid_argument& ex) {
    throw FormatError(std::string("invalid space in header: ") + ex.what());
  }
  const auto n = r.read<std::uint64_t>("node count");
  const auto l = r.read<std::uint32_t>("landmark count");
  e.config.seed = r.read<std::uint64_t>("seed");
  e.config.local_landmarks = r.read<std::uint32_t>("local landmarks");
  e.config.space = e.space;
  e.config.landmark_count = l;

  const std::uint64_t dim = static_cast<std::uint64_t>(e.space.dimension);
  const std::uint64_t body = 4ULL * l + 8ULL * dim * n + (n + 7) / 8;
  r.need(body, "landmarks/coordinates/bitmap");

  e.landmarks.resize(l);
  for (auto& id : e.landmarks) {
    id = r.read<std::uint32_t>("landmark ids");
    if (id >= n) throw FormatError("landmark id out of range");
  }
  e.coords.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  for (Eigen::Index u = 0; u < e.coords.cols(); ++u)
    for (Eigen::Index k = 0; k < e.coords.rows(); ++k) e.coords(k, u) = r.read<double>("coordinates");
  e.excluded.assign(n, false);
  const auto bitmap = r.take((n + 7) / 8, "excluded bitmap");
  for (std::uint64_t u = 0; u < n; ++u)
    e.excluded[u] = (static_cast<unsigned char>(bitmap[u / 8]) >> (u % 8)) & 1u;

  e.config.primary_count = r.read<std::uint32_t>("primary count");
  e.config.refs_per_node = r.read<std::uint32_t>("refs per node");
  const auto objective = r.read<std::uint8_t>("objective");
  if (objective > 2) throw FormatError("unknown objective tag");
  e.config.objective = static_cast<ObjectiveKind>(objective);
  const auto p = r.read<std::uint32_t>("primary id count");
  r.need(4ULL * p, "primary ids");
  e.primaries.resize(p);
  for (auto& id : e.primaries) id = r.read<std::uint32_t>("primary ids");
  if (r.remaining() != 0) {
    throw FormatError("trailing bytes after embedding (dimension header does not match records?)");
  }
  return e;
}

void save_embedding_file(const Embedding& embedding, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write embedding file " + path);
  save_embedding(embedding, out);
  if (!out) throw std::runtime_error("failed writing embedding file " + path);
}

Embedding load_embedding_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding file " + path);
  return load_embedding(in);
}

}  // namespace rigel
