// Deterministic synthetic graphs for desk-scale experiments.
#pragma once

#include "rigel/graph.hpp"

#include <cstdint>

namespace rigel::generate {

Graph path(std::size_t n);
Graph star(std::size_t n);  // node 0 is the center
Graph grid(std::size_t rows, std::size_t cols);
Graph cycle(std::size_t n);

/// Watts-Strogatz: ring lattice with k/2 neighbors per side, each lattice edge
/// rewired with probability p. Requires k even, 2 <= k < n.
Graph small_world(std::size_t n, std::size_t k, double p, std::uint64_t seed);

/// Barabasi-Albert preferential attachment: a clique on m + 1 seed nodes, then
/// each new node attaches to m distinct existing nodes. Requires 1 <= m < n.
Graph scale_free(std::size_t n, std::size_t m, std::uint64_t seed);

}  // namespace rigel::generate
