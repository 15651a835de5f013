#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "dacsim/linalg.hpp"

namespace dacsim {

// Undirected edge between 1-based agent ids, stored with first < second.
struct Edge {
  int first = 0;
  int second = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend bool operator<(const Edge& a, const Edge& b) {
    return std::tie(a.first, a.second) < std::tie(b.first, b.second);
  }
};

inline Edge make_edge(int a, int b) {
  if (a == b) throw std::invalid_argument("edge: self-loop (" + std::to_string(a) + ")");
  if (a > b) std::swap(a, b);
  return Edge{a, b};
}

enum class EdgeAction { Add, Remove };

struct EdgeChange {
  double time = 0.0;
  Edge edge;
  EdgeAction action = EdgeAction::Remove;
};

// Time-varying undirected graph: a base edge set plus a schedule of
// add/remove changes. A change takes effect for every query time >= its
// scheduled time.
struct TimedTopology {
  int n = 0;
  std::vector<Edge> base_edges;
  std::vector<EdgeChange> changes;
};

inline void validate_topology(const TimedTopology& topo) {
  if (topo.n < 1) throw std::invalid_argument("topology: agent count must be >= 1");
  auto check_edge = [&](const Edge& e) {
    if (e.first == e.second) throw std::invalid_argument("topology: self-loop");
    if (e.first < 1 || e.second < 1 || e.first > topo.n || e.second > topo.n)
      throw std::invalid_argument("topology: edge endpoint outside [1, n]");
    if (e.first > e.second) throw std::invalid_argument("topology: edge not normalized");
  };
  for (const Edge& e : topo.base_edges) check_edge(e);
  std::vector<Edge> sorted_base = topo.base_edges;
  std::sort(sorted_base.begin(), sorted_base.end());
  if (std::adjacent_find(sorted_base.begin(), sorted_base.end()) != sorted_base.end())
    throw std::invalid_argument("topology: duplicate base edge");
  for (std::size_t i = 0; i < topo.changes.size(); ++i) {
    check_edge(topo.changes[i].edge);
    if (topo.changes[i].time < 0.0) throw std::invalid_argument("topology: negative change time");
    if (i > 0) {
      const EdgeChange& a = topo.changes[i - 1];
      const EdgeChange& b = topo.changes[i];
      if (a.time > b.time || (a.time == b.time && b.edge < a.edge))
        throw std::invalid_argument("topology: changes not sorted by (time, edge)");
    }
  }
}

// Adjacency (0/1, symmetric, zero diagonal) after applying all changes
// with scheduled time <= t. Throws on inconsistent changes: removing an
// absent edge or adding a present one.
inline Matrix graph_at(const TimedTopology& topo, double t) {
  if (t < 0.0) throw std::invalid_argument("graph_at: t must be >= 0");
  Matrix adj(topo.n, topo.n);
  auto set_edge = [&](const Edge& e, double v) {
    adj(e.first - 1, e.second - 1) = v;
    adj(e.second - 1, e.first - 1) = v;
  };
  for (const Edge& e : topo.base_edges) set_edge(e, 1.0);
  for (const EdgeChange& ch : topo.changes) {
    if (ch.time > t) break;
    const double present = adj(ch.edge.first - 1, ch.edge.second - 1);
    if (ch.action == EdgeAction::Remove) {
      if (present == 0.0)
        throw std::runtime_error("graph_at: removing absent edge (" +
                                 std::to_string(ch.edge.first) + "," +
                                 std::to_string(ch.edge.second) + ")");
      set_edge(ch.edge, 0.0);
    } else {
      if (present != 0.0)
        throw std::runtime_error("graph_at: adding already-present edge (" +
                                 std::to_string(ch.edge.first) + "," +
                                 std::to_string(ch.edge.second) + ")");
      set_edge(ch.edge, 1.0);
    }
  }
  return adj;
}

inline Matrix laplacian(const Matrix& adjacency) {
  const int n = adjacency.rows();
  Matrix lap(n, n);
  for (int i = 0; i < n; ++i) {
    double deg = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      deg += adjacency(i, j);
      lap(i, j) = -adjacency(i, j);
    }
    lap(i, i) = deg;
  }
  return lap;
}

// Second-smallest eigenvalue (algebraic connectivity); 0 for a
// disconnected graph.
inline double lambda2(const Matrix& lap) {
  if (!lap.is_symmetric(1e-12)) throw std::invalid_argument("lambda2: non-symmetric input");
  if (lap.rows() < 2) return 0.0;
  EigenDecomposition d = jacobi_eigen(lap);
  double v = d.values[1];
  return v < 1e-9 ? 0.0 : v;
}

// Moore-Penrose inverse via eigendecomposition; eigenvalues with
// |lambda| < 1e-9 are treated as zero.
inline Matrix laplacian_pseudoinverse(const Matrix& lap) {
  if (!lap.is_symmetric(1e-12))
    throw std::invalid_argument("laplacian_pseudoinverse: non-symmetric input");
  const int n = lap.rows();
  EigenDecomposition d = jacobi_eigen(lap);
  Matrix pinv(n, n);
  for (int k = 0; k < n; ++k) {
    if (std::abs(d.values[k]) < 1e-9) continue;
    const double inv = 1.0 / d.values[k];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) pinv(i, j) += inv * d.vectors(i, k) * d.vectors(j, k);
  }
  return pinv;
}

// Connected components as disjoint sorted lists of 1-based agent ids,
// ordered by smallest member.
inline std::vector<std::vector<int>> components(const Matrix& adjacency) {
  const int n = adjacency.rows();
  std::vector<int> label(n, -1);
  std::vector<std::vector<int>> comps;
  for (int s = 0; s < n; ++s) {
    if (label[s] != -1) continue;
    std::vector<int> stack{s};
    std::vector<int> members;
    label[s] = static_cast<int>(comps.size());
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      members.push_back(u + 1);
      for (int w = 0; w < n; ++w) {
        if (adjacency(u, w) != 0.0 && label[w] == -1) {
          label[w] = label[s];
          stack.push_back(w);
        }
      }
    }
    std::sort(members.begin(), members.end());
    comps.push_back(std::move(members));
  }
  return comps;
}

struct SpectralSummary {
  Matrix laplacian;
  double lambda2 = 0.0;
  Matrix pseudoinverse;
  std::vector<std::vector<int>> components;
};

inline SpectralSummary spectral_summary(const Matrix& adjacency) {
  SpectralSummary s;
  s.laplacian = laplacian(adjacency);
  s.lambda2 = lambda2(s.laplacian);
  s.pseudoinverse = laplacian_pseudoinverse(s.laplacian);
  s.components = components(adjacency);
  return s;
}

}  // namespace dacsim
