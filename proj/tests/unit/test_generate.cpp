#include "rigel/generate.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

using namespace rigel;

TEST_CASE("path of three nodes") {
  std::ostringstream os;
  write_edge_list(generate::path(3), os);
  CHECK(os.str() == "0 1\n1 2\n");
}

TEST_CASE("small shapes") {
  CHECK(generate::star(5).degree(0) == 4);
  CHECK(generate::grid(3, 4).edge_count() == 3 * 3 + 2 * 4);
  CHECK(generate::cycle(6).edge_count() == 6);
}

TEST_CASE("small world is deterministic and keeps the edge count") {
  const Graph a = generate::small_world(1000, 10, 0.1, 7);
  const Graph b = generate::small_world(1000, 10, 0.1, 7);
  CHECK(a.neighbor_array() == b.neighbor_array());
  CHECK(a.edge_count() == 5000);
  CHECK(generate::small_world(1000, 10, 0.1, 8).neighbor_array() != a.neighbor_array());
  const auto comp = connected_components(a);
  CHECK(*std::max_element(comp.begin(), comp.end()) == 0);
}

TEST_CASE("scale free is heavy tailed") {
  const Graph g = generate::scale_free(1000, 5, 3);
  CHECK(g.node_count() == 1000);
  std::size_t max_deg = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) max_deg = std::max(max_deg, g.degree(u));
  const double mean = 2.0 * double(g.edge_count()) / double(g.node_count());
  CHECK(double(max_deg) > 5 * mean);
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(generate::small_world(10, 3, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate::small_world(10, 10, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate::small_world(10, 4, 1.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate::scale_free(5, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate::scale_free(5, 0, 1), std::invalid_argument);
}
