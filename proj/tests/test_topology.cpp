#include <catch_amalgamated.hpp>

#include <random>

#include "dacsim/topology.hpp"

using namespace dacsim;

namespace {

TimedTopology paper_graph() {
  TimedTopology t;
  t.n = 8;
  for (auto [a, b] : {std::pair{1, 2}, {2, 3}, {3, 4}, {1, 4}, {5, 6}, {6, 7}, {7, 8},
                      {5, 8}, {2, 7}, {4, 5}})
    t.base_edges.push_back(make_edge(a, b));
  t.changes.push_back({6.0, make_edge(2, 7), EdgeAction::Remove});
  t.changes.push_back({6.0, make_edge(4, 5), EdgeAction::Remove});
  return t;
}

Matrix adjacency_from_edges(int n, std::initializer_list<std::pair<int, int>> edges) {
  Matrix a(n, n);
  for (auto [i, j] : edges) {
    a(i - 1, j - 1) = 1.0;
    a(j - 1, i - 1) = 1.0;
  }
  return a;
}

}  // namespace

TEST_CASE("graph_at applies scheduled changes") {
  const TimedTopology topo = paper_graph();
  const Matrix before = graph_at(topo, 3.0);
  CHECK(before(1, 6) == 1.0);  // (2,7)
  CHECK(before(3, 4) == 1.0);  // (4,5)
  const Matrix after = graph_at(topo, 6.0);
  CHECK(after(1, 6) == 0.0);
  CHECK(after(3, 4) == 0.0);

  TimedTopology plain = topo;
  plain.changes.clear();
  const Matrix a100 = graph_at(plain, 100.0);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) CHECK(a100(i, j) == before(i, j));
}

TEST_CASE("graph_at rejects inconsistent changes") {
  TimedTopology topo = paper_graph();
  topo.changes.push_back({7.0, make_edge(2, 7), EdgeAction::Remove});  // already gone
  CHECK_THROWS_AS(graph_at(topo, 8.0), std::runtime_error);
  CHECK_NOTHROW(graph_at(topo, 6.5));  // not yet due

  TimedTopology topo2 = paper_graph();
  topo2.changes.insert(topo2.changes.begin(), {1.0, make_edge(1, 2), EdgeAction::Add});
  CHECK_THROWS_AS(graph_at(topo2, 2.0), std::runtime_error);
}

TEST_CASE("topology validation") {
  TimedTopology t;
  t.n = 3;
  t.base_edges = {make_edge(1, 2)};
  CHECK_NOTHROW(validate_topology(t));

  CHECK_THROWS_AS(make_edge(2, 2), std::invalid_argument);

  TimedTopology bad = t;
  bad.base_edges.push_back(Edge{2, 5});
  CHECK_THROWS_AS(validate_topology(bad), std::invalid_argument);

  TimedTopology unsorted = t;
  unsorted.changes = {{2.0, make_edge(1, 2), EdgeAction::Remove},
                      {1.0, make_edge(1, 2), EdgeAction::Add}};
  CHECK_THROWS_AS(validate_topology(unsorted), std::invalid_argument);
}

TEST_CASE("laplacian definition") {
  const Matrix path = adjacency_from_edges(3, {{1, 2}, {2, 3}});
  const Matrix lap = laplacian(path);
  const double want[3][3] = {{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(lap(i, j) == want[i][j]);

  const Matrix single = laplacian(Matrix(1, 1));
  CHECK(single(0, 0) == 0.0);

  const Matrix k4 = laplacian(adjacency_from_edges(4, {{1, 2}, {1, 3}, {1, 4}, {2, 3},
                                                       {2, 4}, {3, 4}}));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(k4(i, j) == (i == j ? 3.0 : -1.0));
}

TEST_CASE("laplacian row sums are exactly zero") {
  std::mt19937 gen(42);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 12);
    Matrix adj(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (gen() % 2) adj(i, j) = adj(j, i) = 1.0;
    const Matrix lap = laplacian(adj);
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int j = 0; j < n; ++j) row += lap(i, j);
      CHECK(row == 0.0);
    }
  }
}

TEST_CASE("lambda2 known spectra") {
  const Matrix k4 = laplacian(adjacency_from_edges(4, {{1, 2}, {1, 3}, {1, 4}, {2, 3},
                                                       {2, 4}, {3, 4}}));
  CHECK_THAT(lambda2(k4), Catch::Matchers::WithinRel(4.0, 1e-9));

  const Matrix path = laplacian(adjacency_from_edges(3, {{1, 2}, {2, 3}}));
  CHECK_THAT(lambda2(path), Catch::Matchers::WithinRel(1.0, 1e-9));

  const Matrix isolated = laplacian(Matrix(2, 2));
  CHECK(lambda2(isolated) == 0.0);

  Matrix nonsym(2, 2);
  nonsym(0, 1) = 1.0;
  CHECK_THROWS_AS(lambda2(nonsym), std::invalid_argument);
}

TEST_CASE("pseudoinverse basic cases") {
  const Matrix zero(3, 3);
  const Matrix pz = laplacian_pseudoinverse(zero);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(pz(i, j) == 0.0);

  const Matrix k2 = laplacian(adjacency_from_edges(2, {{1, 2}}));
  const Matrix pk2 = laplacian_pseudoinverse(k2);
  CHECK_THAT(pk2(0, 0), Catch::Matchers::WithinAbs(0.25, 1e-12));
  CHECK_THAT(pk2(0, 1), Catch::Matchers::WithinAbs(-0.25, 1e-12));
}

TEST_CASE("L L-dagger equals the centering projector on connected graphs") {
  std::mt19937 gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 10);
    // random spanning tree plus extra edges keeps the graph connected
    Matrix adj(n, n);
    for (int v = 1; v < n; ++v) {
      const int u = static_cast<int>(gen() % v);
      adj(u, v) = adj(v, u) = 1.0;
    }
    for (int extra = 0; extra < n; ++extra) {
      const int a = static_cast<int>(gen() % n);
      const int b = static_cast<int>(gen() % n);
      if (a != b) adj(a, b) = adj(b, a) = 1.0;
    }
    const Matrix lap = laplacian(adj);
    const Matrix pinv = laplacian_pseudoinverse(lap);
    const Matrix m = lap * pinv;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double want = (i == j ? 1.0 : 0.0) - 1.0 / n;
        CHECK_THAT(m(i, j), Catch::Matchers::WithinAbs(want, 1e-8));
      }
    // Penrose identities
    const Matrix p1 = (lap * pinv) * lap - lap;
    const Matrix p2 = (pinv * lap) * pinv - pinv;
    CHECK(p1.frobenius_norm() < 1e-8);
    CHECK(p2.frobenius_norm() < 1e-8);
  }
}

TEST_CASE("components partition") {
  const TimedTopology topo = paper_graph();
  const auto post = components(graph_at(topo, 6.0));
  REQUIRE(post.size() == 2);
  CHECK(post[0] == std::vector<int>{1, 2, 3, 4});
  CHECK(post[1] == std::vector<int>{5, 6, 7, 8});

  const auto pre = components(graph_at(topo, 0.0));
  REQUIRE(pre.size() == 1);
  CHECK(pre[0].size() == 8);

  const auto singletons = components(Matrix(3, 3));
  REQUIRE(singletons.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(singletons[i] == std::vector<int>{i + 1});
}
