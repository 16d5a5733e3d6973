#include <algorithm>
#include <cmath>
#include <vector>

#include "uot/solvers.hpp"

namespace uot {

namespace {

// Half-width of the band around sij = 0 treated as "on the kink" for
// nonsmooth cells (tstar < 0): within it the subdifferential machinery below
// owns the hinge contribution.
constexpr double kKinkTol = 1e-9;

// Reduced objective in (u, v) after eliminating the t-block in closed form.
// For fixed potentials the t entry minimizes ghat_t*t + s*t^2/(4 eta) over
// t >= max{0, u_i+v_j-C_ij}; the unconstrained minimizer is t*_ij.
struct ReducedProblem {
  const UotProblem& problem;
  double eta;
  double s;       // 1 + theta/mu
  double c0;      // split coefficient
  VectorXd gu;    // effective linear term over u
  VectorXd gv;    // effective linear term over v
  MatrixXd gt;    // effective linear term over t
  MatrixXd tstar; // unconstrained t minimizers

  // value and gradient at z = [u | v]
  double eval(const VectorXd& z, VectorXd* grad) const {
    const Eigen::Index n = problem.n();
    auto u = z.head(n);
    auto v = z.tail(n);
    double val = gu.dot(u) + gv.dot(v) + s * c0 * (u.squaredNorm() + v.squaredNorm());
    if (grad) {
      grad->resize(2 * n);
      grad->head(n) = gu + 2.0 * s * c0 * u;
      grad->tail(n) = gv + 2.0 * s * c0 * v;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        double sij = u[i] + v[j] - problem.cost()(i, j);
        double that = std::max(tstar(i, j), std::max(0.0, sij));
        val += gt(i, j) * that + s * that * that / (4.0 * eta);
        // gradient: zero-choice subgradient at kink cells (tstar < 0 means the
        // hinge is nonsmooth at sij = 0; cells within the kink band are
        // handled by the subdifferential machinery, not here)
        bool active = sij > tstar(i, j) && sij > (tstar(i, j) < 0.0 ? kKinkTol : 0.0);
        if (grad && active) {
          double dq = gt(i, j) + s * sij / (2.0 * eta);
          (*grad)[i] += dq;
          (*grad)[n + j] += dq;
        }
      }
    }
    return val;
  }

  // generalized Hessian at z (piecewise quadratic; hinge terms where active)
  MatrixXd hessian(const VectorXd& z) const {
    const Eigen::Index n = problem.n();
    MatrixXd H = MatrixXd::Zero(2 * n, 2 * n);
    H.diagonal().setConstant(2.0 * s * c0);
    const double w = s / (2.0 * eta);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        double sij = z[i] + z[n + j] - problem.cost()(i, j);
        if (sij > 0.0 && sij > tstar(i, j)) {
          H(i, i) += w;
          H(n + j, n + j) += w;
          H(i, n + j) += w;
          H(n + j, i) += w;
        }
      }
    }
    return H;
  }
};

VectorXd clamp_box(const VectorXd& z, const BoxV& box) {
  const Eigen::Index n = box.u_lo.size();
  VectorXd out(2 * n);
  out.head(n) = z.head(n).cwiseMax(box.u_lo).cwiseMin(box.upper);
  out.tail(n) = z.tail(n).cwiseMax(box.v_lo).cwiseMin(box.upper);
  return out;
}

// The reduced objective is only piecewise-C^1: whenever tstar_ij < 0 the
// hinge cell (i, j) has a kink along u_i + v_j = C_ij with slope jump
// gt_ij > 0. Minimizers are routinely pulled exactly onto such kinks, so the
// solver needs the subdifferential there, not a single gradient.
struct Kink {
  Eigen::Index i;
  Eigen::Index j;
  double weight;  // slope jump gt_ij
};

std::vector<Kink> kink_set(const ReducedProblem& rp, const VectorXd& z) {
  const Eigen::Index n = rp.problem.n();
  std::vector<Kink> kinks;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double sij = z[i] + z[n + j] - rp.problem.cost()(i, j);
      if (std::abs(sij) <= kKinkTol && rp.tstar(i, j) < 0.0)
        kinks.push_back({i, j, rp.gt(i, j)});
    }
  }
  return kinks;
}

// Minimum-norm element of the box-projected subdifferential at z: minimizes
// ||P(g0 + sum_k lambda_k w_k (e_i + e_{n+j}))|| over lambda in [0, 1]^K by
// projected coordinate descent, where P zeroes coordinates pinned at a bound
// with an outward gradient. Returns the minimizing subgradient.
VectorXd min_norm_subgradient(const VectorXd& g0, const std::vector<Kink>& kinks,
                              const VectorXd& z, const BoxV& box) {
  if (kinks.empty()) return g0;
  const Eigen::Index n = box.u_lo.size();
  std::vector<double> lambda(kinks.size(), 0.0);
  VectorXd g = g0;
  auto free_mask = [&](const VectorXd& grad, Eigen::Index k) {
    const double edge = 1e-14;
    double lo = (k < n) ? box.u_lo[k] : box.v_lo[k - n];
    bool pinned = (z[k] <= lo + edge && grad[k] > 0.0) ||
                  (z[k] >= box.upper - edge && grad[k] < 0.0);
    return pinned ? 0.0 : 1.0;
  };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double moved = 0.0;
    for (std::size_t k = 0; k < kinks.size(); ++k) {
      const Eigen::Index ci = kinks[k].i;
      const Eigen::Index cj = n + kinks[k].j;
      const double w = kinks[k].weight;
      double mi = free_mask(g, ci), mj = free_mask(g, cj);
      double denom = w * w * (mi + mj);
      if (denom <= 0.0) continue;
      double delta = -(w * (g[ci] * mi + g[cj] * mj)) / denom;
      double next = std::clamp(lambda[k] + delta, 0.0, 1.0);
      double applied = next - lambda[k];
      if (applied != 0.0) {
        g[ci] += applied * w;
        g[cj] += applied * w;
        lambda[k] = next;
        moved = std::max(moved, std::abs(applied) * w);
      }
    }
    if (moved <= 1e-15) break;
  }
  return g;
}

// Exact directional derivative of the reduced objective for a displacement
// dz: linear model of the smooth part plus the positive-part terms the kinks
// contribute when the displacement crosses to the active side.
double directional_linear_model(const VectorXd& g0, const std::vector<Kink>& kinks,
                                Eigen::Index n, const VectorXd& dz) {
  double out = g0.dot(dz);
  for (const Kink& k : kinks) out += k.weight * std::max(0.0, dz[k.i] + dz[n + k.j]);
  return out;
}

}  // namespace

ProxResult prox_map(const VectorXd& g, const DualPoint& x0, double theta, const BoxV& box,
                    const UotProblem& problem, double eta, const DerivedConstants& constants,
                    double inner_tol, int inner_max_iters) {
  if (!(theta > 0.0)) throw std::invalid_argument("prox_map: theta must be > 0");
  const Eigen::Index n = problem.n();
  if (g.size() != x0.flat_size()) throw std::invalid_argument("prox_map: gradient size mismatch");

  const double ratio = theta / constants.mu;
  ReducedProblem rp{problem, eta, 1.0 + ratio, constants.c0, VectorXd(), VectorXd(),
                    MatrixXd(), MatrixXd()};

  // effective linear term ghat = g - (theta/mu) * grad w_eta(x0)
  rp.gu = g.head(n) - ratio * 2.0 * constants.c0 * x0.u;
  rp.gv = g.segment(n, n) - ratio * 2.0 * constants.c0 * x0.v;
  rp.gt.resize(n, n);
  rp.tstar.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      rp.gt(i, j) = g[2 * n + i * n + j] - ratio * x0.t(i, j) / (2.0 * eta);
      rp.tstar(i, j) = -2.0 * eta * rp.gt(i, j) / rp.s;
    }
  }

  VectorXd z(2 * n);
  z.head(n) = x0.u;
  z.tail(n) = x0.v;
  z = clamp_box(z, box);

  VectorXd grad;
  double val = rp.eval(z, &grad);
  std::vector<Kink> kinks = kink_set(rp, z);
  VectorXd gmin = min_norm_subgradient(grad, kinks, z, box);
  double residual = (z - clamp_box(z - gmin, box)).norm();

  int iter = 0;
  for (; iter < inner_max_iters && residual > inner_tol; ++iter) {
    // active set: coordinates pinned at a bound with the subgradient pushing out
    const double edge = 1e-14;
    std::vector<Eigen::Index> free_idx;
    free_idx.reserve(2 * n);
    for (Eigen::Index k = 0; k < 2 * n; ++k) {
      double lo = (k < n) ? box.u_lo[k] : box.v_lo[k - n];
      bool pinned = (z[k] <= lo + edge && gmin[k] > 0.0) ||
                    (z[k] >= box.upper - edge && gmin[k] < 0.0);
      if (!pinned) free_idx.push_back(k);
    }

    VectorXd d = VectorXd::Zero(2 * n);
    bool newton_ok = false;
    if (!free_idx.empty()) {
      MatrixXd H = rp.hessian(z);
      const Eigen::Index m = static_cast<Eigen::Index>(free_idx.size());
      MatrixXd Hf(m, m);
      VectorXd gf(m);
      for (Eigen::Index r = 0; r < m; ++r) {
        gf[r] = gmin[free_idx[r]];
        for (Eigen::Index c = 0; c < m; ++c) Hf(r, c) = H(free_idx[r], free_idx[c]);
      }
      Eigen::LDLT<MatrixXd> ldlt(Hf);
      if (ldlt.info() == Eigen::Success) {
        VectorXd df = ldlt.solve(-gf);
        if (df.allFinite()) {
          for (Eigen::Index r = 0; r < m; ++r) d[free_idx[r]] = df[r];
          newton_ok = directional_linear_model(grad, kinks, n, d) < 0.0;
        }
      }
    }
    if (!newton_ok) d = -gmin;

    // Armijo backtracking on the box-projected step; the sufficient-decrease
    // model is the exact directional derivative, including kink crossings
    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      VectorXd zc = clamp_box(z + step * d, box);
      VectorXd dz = zc - z;
      double model = directional_linear_model(grad, kinks, n, dz);
      double vc = rp.eval(zc, nullptr);
      if (model < 0.0 && vc <= val + 1e-4 * model) {
        z = zc;
        val = vc;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;  // numerically stuck at the floating-point floor
    val = rp.eval(z, &grad);
    kinks = kink_set(rp, z);
    gmin = min_norm_subgradient(grad, kinks, z, box);
    residual = (z - clamp_box(z - gmin, box)).norm();
  }

  ProxResult out;
  out.residual = residual;
  out.exact = residual <= inner_tol;
  out.x.u = z.head(n);
  out.x.v = z.tail(n);
  out.x.t.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out.x.t(i, j) = std::max(rp.tstar(i, j),
                               std::max(0.0, z[i] + z[n + j] - problem.cost()(i, j)));
  return out;
}

}  // namespace uot
