// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

// Accelerated projected gradient for one subproblem. C6 is equivalent to
// 0 <= s <= 1, so the feasible set is a polyhedron: per-element 3-D polytopes
// in (x, s, a), the per-block occupancy halfspaces and the power budget.
// Projection onto their intersection uses Dykstra's alternating scheme.

#include "allocator/subproblem_eval.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace otfsim {
namespace {

using Vec3 = Eigen::Vector3d;

constexpr int kDykstraIters = 300;

struct ActiveSet {
  std::array<int, 3> idx{};
  int count = 0;
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();    // active normals as rows
  Eigen::Matrix3d inv = Eigen::Matrix3d::Zero();  // (G G^T)^-1
};

struct ElementPolytope {
  std::array<Vec3, 7> g;
  std::array<double, 7> h;
  std::vector<ActiveSet> sets;  // nonsingular active sets, smallest first
};

ElementPolytope element_polytope(double eps, double c7, double d7, double s_m) {
  ElementPolytope p;
  p.g = {Vec3(-1, 0, 0), Vec3(1, -1, 0), Vec3(-1, 1, 0), Vec3(0, -1, 0), Vec3(0, 1, 0), Vec3(0, d7, -1),
         Vec3(0, 0, -1)};
  p.h = {0.0, 0.0, 1.0 - eps, 0.0, 1.0, d7 * s_m - c7, 0.0};
  auto add = [&](std::initializer_list<int> idx) {
    ActiveSet a;
    a.count = static_cast<int>(idx.size());
    int q = 0;
    for (int i : idx) {
      a.idx[q] = i;
      a.G.row(q++) = p.g[i].transpose();
    }
    const Eigen::MatrixXd Gk = a.G.topRows(a.count);
    const Eigen::MatrixXd gg = Gk * Gk.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gg);
    if (lu.rank() < a.count) return;
    a.inv.topLeftCorner(a.count, a.count) = lu.inverse();
    p.sets.push_back(a);
  };
  for (int a = 0; a < 7; ++a) add({a});
  for (int a = 0; a < 7; ++a)
    for (int b = a + 1; b < 7; ++b) add({a, b});
  for (int a = 0; a < 7; ++a)
    for (int b = a + 1; b < 7; ++b)
      for (int c = b + 1; c < 7; ++c) add({a, b, c});
  return p;
}

bool inside(const ElementPolytope& p, const Vec3& z, double slack = 1e-12) {
  for (int q = 0; q < 7; ++q) {
    if (p.g[q].dot(z) > p.h[q] + slack) return false;
  }
  return true;
}

// An active set whose equality projection is feasible with nonnegative
// multipliers satisfies KKT, so its point is the projection. Degenerate
// vertices fall back to the nearest feasible candidate.
Vec3 project_element(const ElementPolytope& p, const Vec3& y) {
  if (inside(p, y)) return y;
  Vec3 best = y;
  double best_d = std::numeric_limits<double>::infinity();
  for (const ActiveSet& a : p.sets) {
    Vec3 r = a.G * y;
    for (int q = 0; q < a.count; ++q) r[q] -= p.h[a.idx[q]];
    const Vec3 lambda = a.inv * r;
    const Vec3 z = y - a.G.transpose() * lambda;
    if (!inside(p, z)) continue;
    if (lambda.head(a.count).minCoeff() >= -1e-12) return z;
    const double d = (z - y).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = z;
    }
  }
  return best;
}

class Projector {
 public:
  explicit Projector(const SubproblemSpec& spec, const detail::SubproblemEval& ev)
      : n_(spec.size()), mn_(spec.M * spec.N), K_(spec.K) {
    for (int t = 0; t < n_; ++t) polys_.push_back(element_polytope(spec.eps, ev.c7[t], ev.d7[t], spec.s_m[t]));
  }

  // z stacked as (x, s, a).
  RVector project(const RVector& y) const {
    RVector z = y;
    RVector p = RVector::Zero(3 * n_), q = RVector::Zero(3 * n_), r = RVector::Zero(3 * n_);
    for (int it = 0; it < kDykstraIters; ++it) {
      const RVector z_old = z;
      RVector w = z + p;
      RVector za = project_elements(w);
      p = w - za;
      w = za + q;
      RVector zb = project_occupancy(w);
      q = w - zb;
      w = zb + r;
      RVector zc = project_budget(w);
      r = w - zc;
      z = zc;
      if ((z - z_old).lpNorm<Eigen::Infinity>() <= 1e-12 && (za - zc).lpNorm<Eigen::Infinity>() <= 1e-10) break;
    }
    return project_elements(z);
  }

 private:
  RVector project_elements(const RVector& w) const {
    RVector out(3 * n_);
    for (int t = 0; t < n_; ++t) {
      const Vec3 z = project_element(polys_[t], Vec3(w[t], w[n_ + t], w[2 * n_ + t]));
      out[t] = z[0];
      out[n_ + t] = z[1];
      out[2 * n_ + t] = z[2];
    }
    return out;
  }

  RVector project_occupancy(const RVector& w) const {
    RVector out = w;
    for (int c = 0; c < mn_; ++c) {
      double sum = 0.0;
      for (int i = 0; i < K_; ++i) sum += w[n_ + c + i * mn_];
      if (sum > 1.0) {
        for (int i = 0; i < K_; ++i) out[n_ + c + i * mn_] -= (sum - 1.0) / K_;
      }
    }
    return out;
  }

  RVector project_budget(const RVector& w) const {
    RVector out = w;
    const double sum = w.head(n_).sum();
    if (sum > 1.0) out.head(n_).array() -= (sum - 1.0) / n_;
    return out;
  }

  int n_, mn_, K_;
  std::vector<ElementPolytope> polys_;
};

}  // namespace

SubproblemResult solve_subproblem_pg(const SubproblemSpec& spec, double tol, int max_iter) {
  const detail::SubproblemEval ev(spec);
  const Projector proj(spec, ev);
  const int n = spec.size();

  auto phi = [&](const RVector& z) { return ev.phi(z.head(n), z.tail(n)); };
  auto grad = [&](const RVector& z) {
    RVector gx;
    double ga = 0.0;
    ev.grad_phi(z.head(n), gx, ga);
    RVector g = RVector::Zero(3 * n);
    g.head(n) = gx;
    g.tail(n).setConstant(ga);
    return g;
  };

  RVector z0(3 * n);
  z0 << spec.x_m, spec.s_m, ev.c7;
  RVector z = proj.project(z0);
  RVector y = z;
  double f = phi(z);
  double tk = 1.0, L = 1.0;
  int iter = 0;
  double gm = 0.0;
  for (iter = 1; iter <= max_iter; ++iter) {
    const RVector gy = grad(y);
    const double fy = phi(y);
    RVector zn;
    double fn = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      zn = proj.project(y - gy / L);
      fn = phi(zn);
      const RVector dz = zn - y;
      if (std::isfinite(fn) && fn <= fy + gy.dot(dz) + 0.5 * L * dz.squaredNorm() + 1e-15 * std::abs(fy)) break;
      L *= 2.0;
    }
    gm = L * (zn - y).lpNorm<Eigen::Infinity>();
    if (fn > f) {
      // restart momentum whenever the objective goes up
      y = z;
      tk = 1.0;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    y = zn + ((tk - 1.0) / t_next) * (zn - z);
    const double change = f - fn;
    z = zn;
    f = fn;
    tk = t_next;
    L *= 0.9;
    if (gm <= tol * (1.0 + gy.lpNorm<Eigen::Infinity>()) || change <= 1e-14 * std::max(1.0, std::abs(f))) {
      if (gm <= std::sqrt(tol)) break;
    }
  }
  SubproblemResult res;
  res.state = detail::to_state(spec, z.head(n), z.segment(n, n), z.tail(n));
  res.objective = ev.objective(z.head(n), z.tail(n));
  res.iterations = std::min(iter, max_iter);
  res.dual_residual = gm;
  res.gap = 0.0;
  res.method = "pg";
  return res;
}

}  // namespace otfsim
