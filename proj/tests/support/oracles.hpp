// Reference implementations used only by tests. Deliberately naive.
#pragma once

#include "rigel/graph.hpp"
#include "rigel/query.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

namespace oracle {

using Adjacency = std::vector<std::vector<std::uint32_t>>;

inline Adjacency adjacency(const rigel::Graph& g) {
  Adjacency adj(g.node_count());
  for (rigel::NodeId u = 0; u < g.node_count(); ++u)
    for (rigel::NodeId v : g.neighbors(u)) adj[u].push_back(v);
  return adj;
}

// -1 marks unreachable.
inline std::vector<int> bfs(const Adjacency& adj, std::uint32_t s) {
  std::vector<int> d(adj.size(), -1);
  std::deque<std::uint32_t> q{s};
  d[s] = 0;
  while (!q.empty()) {
    const auto u = q.front();
    q.pop_front();
    for (auto v : adj[u])
      if (d[v] < 0) {
        d[v] = d[u] + 1;
        q.push_back(v);
      }
  }
  return d;
}

template <typename Vec>
long double hyperboloid(const Vec& x, const Vec& y, long double c) {
  long double xx = 0, yy = 0, xy = 0;
  for (long i = 0; i < (long)x.size(); ++i) {
    xx += (long double)x[i] * x[i];
    yy += (long double)y[i] * y[i];
    xy += (long double)x[i] * y[i];
  }
  long double arg = std::sqrt((1 + xx) * (1 + yy)) - xy;
  if (arg < 1) arg = 1;
  return std::acosh(arg) * std::fabs(c);
}

// Exhaustive theta scan; bins are unit-width multiples of bin_width,
// nearest center, clamped; the first maximum wins.
inline int mle_argmax(const rigel::LikelihoodModel& m, double xl, double xs) {
  auto bin = [&](double x) {
    const long b = std::lround(std::floor(x / m.bin_width() + 0.5));
    return std::clamp<long>(b, 0, m.bin_count() - 1);
  };
  const long bl = bin(xl), bs = bin(xs);
  int best = m.theta_min();
  double best_p = -1;
  for (int t = m.theta_min(); t <= m.theta_max(); ++t) {
    const double p = m.long_table()(t - m.theta_min(), bl) * m.short_table()(t - m.theta_min(), bs);
    if (p > best_p) {
      best_p = p;
      best = t;
    }
  }
  return best;
}

}  // namespace oracle
