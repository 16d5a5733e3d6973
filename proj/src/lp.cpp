#include <cmath>
#include <deque>
#include <vector>

#include "uot/lp.hpp"

namespace uot {

namespace {

// Basis of the transportation simplex: a spanning tree on the bipartite graph
// with row vertices 0..n-1 and column vertices n..2n-1, edges = basic cells.
struct Basis {
  Eigen::Index n;
  std::vector<std::vector<Eigen::Index>> adj;  // vertex -> incident vertices

  explicit Basis(Eigen::Index n_) : n(n_), adj(2 * n_) {}

  void add(Eigen::Index i, Eigen::Index j) {
    adj[i].push_back(n + j);
    adj[n + j].push_back(i);
  }

  void remove(Eigen::Index i, Eigen::Index j) {
    auto drop = [](std::vector<Eigen::Index>& list, Eigen::Index x) {
      for (auto it = list.begin(); it != list.end(); ++it)
        if (*it == x) {
          list.erase(it);
          return;
        }
    };
    drop(adj[i], n + j);
    drop(adj[n + j], i);
  }

  // path of vertices from `from` to `to` through basis edges (unique: tree)
  std::vector<Eigen::Index> path(Eigen::Index from, Eigen::Index to) const {
    std::vector<Eigen::Index> parent(2 * n, -1);
    std::deque<Eigen::Index> queue{from};
    parent[from] = from;
    while (!queue.empty()) {
      Eigen::Index x = queue.front();
      queue.pop_front();
      if (x == to) break;
      for (Eigen::Index y : adj[x])
        if (parent[y] < 0) {
          parent[y] = x;
          queue.push_back(y);
        }
    }
    std::vector<Eigen::Index> out;
    for (Eigen::Index x = to; x != from; x = parent[x]) out.push_back(x);
    out.push_back(from);
    std::reverse(out.begin(), out.end());
    return out;
  }
};

}  // namespace

LpResult exact_ot_lp(const CostMatrix& C, const Measure& a, const Measure& b) {
  const Eigen::Index n = C.n();
  if (a.size() != n || b.size() != n)
    throw std::invalid_argument("exact_ot_lp: dimension mismatch");
  double rel = std::abs(a.total() - b.total()) / std::max(a.total(), b.total());
  if (rel > 1e-12) throw std::invalid_argument("exact_ot_lp: measure totals differ");

  MatrixXd X = MatrixXd::Zero(n, n);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> basic(n, n);
  basic.setConstant(false);
  Basis tree(n);

  // northwest-corner starting basis (2n-1 cells, degenerate zeros allowed)
  {
    VectorXd ar = a.weights(), br = b.weights();
    Eigen::Index i = 0, j = 0;
    while (true) {
      double amt = std::min(ar[i], br[j]);
      X(i, j) = amt;
      basic(i, j) = true;
      tree.add(i, j);
      ar[i] -= amt;
      br[j] -= amt;
      if (i == n - 1 && j == n - 1) break;
      // advance exactly one index per step so the basis has 2n-1 cells;
      // ties (both residuals zero) prefer the row move
      if (ar[i] == 0.0 && i < n - 1)
        ++i;
      else if (j < n - 1)
        ++j;
      else
        ++i;
    }
  }

  const double tol = 1e-11 * std::max(1.0, C.max_abs());
  const long bland_after = 10 * static_cast<long>(n) * static_cast<long>(n);
  const long hard_cap = bland_after + 2000000;

  VectorXd u(n), v(n);
  long pivots = 0;
  while (true) {
    // tree-structured duals: u_0 = 0, u_i + v_j = C_ij on basic cells
    std::vector<bool> seen(2 * n, false);
    std::deque<Eigen::Index> queue{0};
    seen[0] = true;
    u[0] = 0.0;
    while (!queue.empty()) {
      Eigen::Index x = queue.front();
      queue.pop_front();
      for (Eigen::Index y : tree.adj[x]) {
        if (seen[y]) continue;
        seen[y] = true;
        if (x < n)
          v[y - n] = C(x, y - n) - u[x];
        else
          u[y] = C(y, x - n) - v[x - n];
        queue.push_back(y);
      }
    }

    // entering cell: Dantzig (most negative reduced cost), Bland past the guard
    Eigen::Index ei = -1, ej = -1;
    const bool bland = pivots >= bland_after;
    double best = -tol;
    for (Eigen::Index i = 0; i < n && (!bland || ei < 0); ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (basic(i, j)) continue;
        double r = C(i, j) - u[i] - v[j];
        if (r < best) {
          ei = i;
          ej = j;
          if (bland) break;  // first improving cell in index order
          best = r;
        }
      }
    }
    if (ei < 0) break;  // optimal

    if (++pivots > hard_cap) throw std::runtime_error("exact_ot_lp: cycling guard exceeded");

    // unique cycle through the entering cell; signs alternate starting with +
    std::vector<Eigen::Index> verts = tree.path(ei, n + ej);
    // path edges (verts[k], verts[k+1]); even k decreases, odd k increases
    double theta = std::numeric_limits<double>::infinity();
    Eigen::Index li = -1, lj = -1;
    for (std::size_t k = 0; k + 1 < verts.size(); k += 2) {
      Eigen::Index ri = verts[k] < n ? verts[k] : verts[k + 1];
      Eigen::Index cj = (verts[k] < n ? verts[k + 1] : verts[k]) - n;
      if (X(ri, cj) < theta ||
          (X(ri, cj) == theta && (li < 0 || ri * n + cj < li * n + lj))) {
        theta = X(ri, cj);
        li = ri;
        lj = cj;
      }
    }
    for (std::size_t k = 0; k + 1 < verts.size(); ++k) {
      Eigen::Index ri = verts[k] < n ? verts[k] : verts[k + 1];
      Eigen::Index cj = (verts[k] < n ? verts[k + 1] : verts[k]) - n;
      X(ri, cj) += (k % 2 == 0) ? -theta : theta;
    }
    X(li, lj) = 0.0;
    X(ei, ej) = theta;
    basic(li, lj) = false;
    basic(ei, ej) = true;
    tree.remove(li, lj);
    tree.add(ei, ej);
  }

  // complementary slackness certificate
  const double cert_tol = 1e-9 * std::max(1.0, C.max_abs());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double r = C(i, j) - u[i] - v[j];
      if (r < -cert_tol) throw std::runtime_error("exact_ot_lp: dual feasibility violated");
      if (X(i, j) > 1e-12 && std::abs(r) > cert_tol)
        throw std::runtime_error("exact_ot_lp: complementary slackness violated");
    }
  }

  double value = (C.entries().array() * X.array()).sum();
  return LpResult{value, FeasiblePlan(X.cwiseMax(0.0), a, b), u, v, pivots};
}

}  // namespace uot
