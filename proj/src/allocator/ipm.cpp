// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

// Primal-dual interior point for one subproblem. Variables z = (x, s, a) in
// normalized units; every inequality is written as u(z) > 0. The Newton
// system eliminates a (diagonal), then s (K x K blocks per grid cell), and
// factors the remaining dense system in x.

#include "allocator/subproblem_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace otfsim {
namespace {

using detail::SubproblemEval;

struct Slacks {
  double u1 = 0.0;  // 1 - sum x
  RVector u2;       // x
  RVector u3;       // s - x
  RVector u5;       // 1 - eps + x - s
  RVector u4;       // 1 - sum_i s, per block
  RVector u6;       // s - s^2
  RVector u7;       // a - c7 - d7 (s - s_m)
  RVector u8;       // a
};

struct Duals {
  double l1 = 0.0;
  RVector l2, l3, l5, l4, l6, l7, l8;
};

class Ipm {
 public:
  Ipm(const SubproblemSpec& spec, double tol) : spec_(spec), ev_(spec), tol_(tol) {
    n_ = spec.size();
    mn_ = spec.M * spec.N;
    m_ = 1 + 6 * n_ + mn_;
  }

  SubproblemResult run();

 private:
  Slacks slacks(const RVector& x, const RVector& s, const RVector& a) const {
    Slacks u;
    u.u1 = 1.0 - x.sum();
    u.u2 = x;
    u.u3 = s - x;
    u.u5 = (1.0 - spec_.eps) + x.array() - s.array();
    u.u4 = RVector::Ones(mn_);
    for (int i = 0; i < spec_.K; ++i) u.u4 -= s.segment(static_cast<Eigen::Index>(i) * mn_, mn_);
    u.u6 = s.array() - s.array().square();
    u.u7 = a.array() - ev_.c7.array() - ev_.d7.array() * (s - spec_.s_m).array();
    u.u8 = a;
    return u;
  }

  static bool positive(const Slacks& u) {
    return u.u1 > 0.0 && (u.u2.array() > 0.0).all() && (u.u3.array() > 0.0).all() &&
           (u.u5.array() > 0.0).all() && (u.u4.array() > 0.0).all() && (u.u6.array() > 0.0).all() &&
           (u.u7.array() > 0.0).all() && (u.u8.array() > 0.0).all();
  }

  static double gap(const Slacks& u, const Duals& l) {
    return u.u1 * l.l1 + u.u2.dot(l.l2) + u.u3.dot(l.l3) + u.u5.dot(l.l5) + u.u4.dot(l.l4) + u.u6.dot(l.l6) +
           u.u7.dot(l.l7) + u.u8.dot(l.l8);
  }

  RVector block_of_s(const RVector& v4) const { return v4.replicate(spec_.K, 1); }

  // r_dual = grad phi + sum lambda_i grad f_i, stacked (x, s, a).
  RVector dual_residual(const RVector& gx, const RVector& s, const Duals& l) const {
    RVector r(3 * n_);
    r.segment(0, n_) = gx.array() + l.l1 - l.l2.array() + l.l3.array() - l.l5.array();
    r.segment(n_, n_) = -l.l3.array() + l.l5.array() + block_of_s(l.l4).array() +
                        l.l6.array() * (2.0 * s.array() - 1.0) + l.l7.array() * ev_.d7.array();
    r.segment(2 * n_, n_) = spec_.xi - l.l7.array() - l.l8.array();
    return r;
  }

  double residual_norm(const RVector& gx, const RVector& s, const Slacks& u, const Duals& l, double t) const {
    const double inv_t = 1.0 / t;
    double acc = dual_residual(gx, s, l).squaredNorm();
    auto cent = [&](const RVector& uu, const RVector& ll) {
      acc += ((ll.array() * uu.array()) - inv_t).matrix().squaredNorm();
    };
    acc += std::pow(l.l1 * u.u1 - inv_t, 2);
    cent(u.u2, l.l2);
    cent(u.u3, l.l3);
    cent(u.u5, l.l5);
    cent(u.u4, l.l4);
    cent(u.u6, l.l6);
    cent(u.u7, l.l7);
    cent(u.u8, l.l8);
    return std::sqrt(acc);
  }

  const SubproblemSpec& spec_;
  SubproblemEval ev_;
  double tol_;
  int n_ = 0, mn_ = 0, m_ = 0;
};

SubproblemResult Ipm::run() {
  const int K = spec_.K;
  // strictly interior point blended with the warm start
  const double s_c = 1.0 / (2.0 * K);
  const double x_c = std::min(s_c / 2.0, 0.5 / n_);
  RVector x = 0.99 * spec_.x_m.array() + 0.01 * x_c;
  RVector s = 0.99 * spec_.s_m.array() + 0.01 * s_c;
  RVector a(n_);
  for (int t = 0; t < n_; ++t) {
    const double warm_a = ev_.c7[t];
    const double center_a = std::max(0.0, ev_.c7[t] + ev_.d7[t] * (s_c - spec_.s_m[t])) + 1.0;
    a[t] = 0.99 * warm_a + 0.01 * center_a;
  }
  Slacks u = slacks(x, s, a);
  if (!positive(u)) throw SolverError("interior point: warm start is not strictly feasible", 0, 0.0, 0.0);

  Duals l;
  l.l1 = 1.0 / u.u1;
  l.l2 = u.u2.cwiseInverse();
  l.l3 = u.u3.cwiseInverse();
  l.l5 = u.u5.cwiseInverse();
  l.l4 = u.u4.cwiseInverse();
  l.l6 = u.u6.cwiseInverse();
  l.l7 = u.u7.cwiseInverse();
  l.l8 = u.u8.cwiseInverse();

  constexpr double kMu = 10.0;
  constexpr int kMaxIter = 300;
  double eta = gap(u, l);
  double rdual = std::numeric_limits<double>::infinity();
  RVector gx;
  double ga = 0.0;

  double scale_g = 1.0 + spec_.xi, scale_f = 1.0;
  int stalled = 0;
  auto near_converged = [&] { return rdual <= 1e3 * tol_ * scale_g && eta <= 1e3 * tol_ * scale_f; };
  int used = 0;
  for (int iter = 1; iter <= kMaxIter; ++iter) {
    used = iter;
    const double t = kMu * m_ / eta;
    const double inv_t = 1.0 / t;
    ev_.grad_phi(x, gx, ga);

    RVector T, I;
    ev_.model.totals(x, spec_.n0, T, I);
    const RMatrix hq = ev_.model.hess_Q(T);

    const double w1 = l.l1 / u.u1;
    const RVector w2 = l.l2.cwiseQuotient(u.u2), w3 = l.l3.cwiseQuotient(u.u3), w5 = l.l5.cwiseQuotient(u.u5);
    const RVector w4 = l.l4.cwiseQuotient(u.u4), w6 = l.l6.cwiseQuotient(u.u6);
    const RVector w7 = l.l7.cwiseQuotient(u.u7), w8 = l.l8.cwiseQuotient(u.u8);
    const RVector& d = ev_.d7;

    const RVector rx = gx.array() + inv_t * (1.0 / u.u1 - u.u2.cwiseInverse().array() +
                                             u.u3.cwiseInverse().array() - u.u5.cwiseInverse().array());
    const RVector rs = inv_t * (-u.u3.cwiseInverse().array() + u.u5.cwiseInverse().array() +
                                block_of_s(u.u4.cwiseInverse()).array() +
                                (2.0 * s.array() - 1.0) / u.u6.array() + d.array() / u.u7.array());
    const RVector ra = ga + inv_t * (-u.u7.cwiseInverse().array() - u.u8.cwiseInverse().array());

    const RVector alpha = w7 + w8;
    const RVector beta = -(d.array() * w7.array()).matrix();
    const RVector tau = -(w3 + w5);
    const RVector sigma = w3.array() + w5.array() + w6.array() * (2.0 * s.array() - 1.0).square() +
                          2.0 * l.l6.array() + w7.array() * d.array().square() -
                          beta.array().square() / alpha.array();
    const RVector rs_t = -rs.array() + beta.array() * ra.array() / alpha.array();

    // x-system: Hq replicated over user pairs, plus rank-one C1 term and diagonal
    RMatrix h(n_, n_);
    for (int i = 0; i < K; ++i) {
      for (int j = 0; j < K; ++j) h.block(i * mn_, j * mn_, mn_, mn_) = hq;
    }
    h.array() += w1;
    h.diagonal() += w2 + w3 + w5;

    // per-block inverse of diag(sigma) + w4 11^T (Sherman-Morrison)
    RMatrix binv(K * K, mn_);
    for (int c = 0; c < mn_; ++c) {
      double sum_dinv = 0.0;
      for (int i = 0; i < K; ++i) sum_dinv += 1.0 / sigma[c + i * mn_];
      const double denom = 1.0 + w4[c] * sum_dinv;
      for (int i = 0; i < K; ++i) {
        const double di = 1.0 / sigma[c + i * mn_];
        for (int j = 0; j < K; ++j) {
          const double dj = 1.0 / sigma[c + j * mn_];
          binv(i + K * j, c) = (i == j ? di : 0.0) - w4[c] * di * dj / denom;
        }
      }
    }
    auto apply_binv = [&](const RVector& v) {
      RVector out = RVector::Zero(n_);
      for (int c = 0; c < mn_; ++c) {
        for (int i = 0; i < K; ++i) {
          double acc = 0.0;
          for (int j = 0; j < K; ++j) acc += binv(i + K * j, c) * v[c + j * mn_];
          out[c + i * mn_] = acc;
        }
      }
      return out;
    };
    for (int c = 0; c < mn_; ++c) {
      for (int i = 0; i < K; ++i) {
        for (int j = 0; j < K; ++j) {
          h(c + i * mn_, c + j * mn_) -= tau[c + i * mn_] * binv(i + K * j, c) * tau[c + j * mn_];
        }
      }
    }
    const RVector rhs = -rx - tau.cwiseProduct(apply_binv(rs_t));

    RVector dx;
    Eigen::LLT<RMatrix> llt(h);
    if (llt.info() == Eigen::Success) {
      dx = llt.solve(rhs);
    } else {
      dx = h.ldlt().solve(rhs);
    }
    if (!dx.allFinite()) {
      throw SolverError("interior point: Newton system is singular", iter, rdual, eta);
    }
    const RVector ds = apply_binv(rs_t - tau.cwiseProduct(dx));
    const RVector da = (-ra - beta.cwiseProduct(ds)).cwiseQuotient(alpha);

    // linearized slack changes and dual steps
    Slacks du;
    du.u1 = -dx.sum();
    du.u2 = dx;
    du.u3 = ds - dx;
    du.u5 = dx - ds;
    du.u4 = RVector::Zero(mn_);
    for (int i = 0; i < K; ++i) du.u4 -= ds.segment(static_cast<Eigen::Index>(i) * mn_, mn_);
    du.u6 = (1.0 - 2.0 * s.array()) * ds.array();
    du.u7 = da - d.cwiseProduct(ds);
    du.u8 = da;

    auto dual_step = [&](const RVector& lam, const RVector& uu, const RVector& duu) -> RVector {
      return -lam.array() - lam.array() * duu.array() / uu.array() + inv_t / uu.array();
    };
    Duals dl;
    dl.l1 = -l.l1 - l.l1 * du.u1 / u.u1 + inv_t / u.u1;
    dl.l2 = dual_step(l.l2, u.u2, du.u2);
    dl.l3 = dual_step(l.l3, u.u3, du.u3);
    dl.l5 = dual_step(l.l5, u.u5, du.u5);
    dl.l4 = dual_step(l.l4, u.u4, du.u4);
    dl.l6 = dual_step(l.l6, u.u6, du.u6);
    dl.l7 = dual_step(l.l7, u.u7, du.u7);
    dl.l8 = dual_step(l.l8, u.u8, du.u8);

    double step = 1.0;
    auto limit = [&](double lam, double dlam) {
      if (dlam < 0.0) step = std::min(step, -lam / dlam);
    };
    auto limit_v = [&](const RVector& lam, const RVector& dlam) {
      for (Eigen::Index q = 0; q < lam.size(); ++q) limit(lam[q], dlam[q]);
    };
    limit(l.l1, dl.l1);
    limit_v(l.l2, dl.l2);
    limit_v(l.l3, dl.l3);
    limit_v(l.l5, dl.l5);
    limit_v(l.l4, dl.l4);
    limit_v(l.l6, dl.l6);
    limit_v(l.l7, dl.l7);
    limit_v(l.l8, dl.l8);
    step = std::min(1.0, 0.99 * step);

    auto advance = [&](const Duals& base, double st) {
      Duals out;
      out.l1 = base.l1 + st * dl.l1;
      out.l2 = base.l2 + st * dl.l2;
      out.l3 = base.l3 + st * dl.l3;
      out.l5 = base.l5 + st * dl.l5;
      out.l4 = base.l4 + st * dl.l4;
      out.l6 = base.l6 + st * dl.l6;
      out.l7 = base.l7 + st * dl.l7;
      out.l8 = base.l8 + st * dl.l8;
      return out;
    };

    const double r0 = residual_norm(gx, s, u, l, t);
    RVector xn, sn, an;
    Slacks un;
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt, step *= 0.5) {
      xn = x + step * dx;
      sn = s + step * ds;
      an = a + step * da;
      un = slacks(xn, sn, an);
      if (!positive(un)) continue;
      RVector gxn;
      double gan = 0.0;
      ev_.grad_phi(xn, gxn, gan);
      const Duals ln = advance(l, step);
      if (residual_norm(gxn, sn, un, ln, t) <= (1.0 - 0.01 * step) * r0) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (near_converged()) break;
      throw SolverError("interior point: line search failed", iter, rdual, eta);
    }
    x = xn;
    s = sn;
    a = an;
    u = un;
    l = advance(l, step);
    eta = gap(u, l);

    ev_.grad_phi(x, gx, ga);
    const RVector rd = dual_residual(gx, s, l);
    rdual = rd.lpNorm<Eigen::Infinity>();
    scale_g = 1.0 + gx.lpNorm<Eigen::Infinity>() + spec_.xi;
    scale_f = std::max(1.0, std::abs(ev_.q_bar(x)));
    if (rdual <= tol_ * scale_g && eta <= tol_ * scale_f) {
      SubproblemResult res;
      res.state = detail::to_state(spec_, x, s, a);
      res.objective = ev_.objective(x, a);
      res.iterations = iter;
      res.dual_residual = rdual;
      res.gap = eta;
      res.method = "ipm";
      return res;
    }
    // Steps collapse once the Newton system is too ill-conditioned to make
    // progress; stop there if the point is already close.
    stalled = step < 1e-8 ? stalled + 1 : 0;
    if (stalled >= 3 || iter == kMaxIter) {
      if (near_converged()) break;
      throw SolverError(stalled >= 3 ? "interior point: stalled" : "interior point: iteration limit reached", iter,
                        rdual, eta);
    }
  }
  SubproblemResult res;
  res.state = detail::to_state(spec_, x, s, a);
  res.objective = ev_.objective(x, a);
  res.iterations = used;
  res.dual_residual = rdual;
  res.gap = eta;
  res.method = "ipm";
  return res;
}

}  // namespace

SubproblemResult solve_subproblem(const SubproblemSpec& spec, double tol) {
  if (spec.x_m.size() != spec.size() || spec.s_m.size() != spec.size() || spec.grad_Z.size() != spec.size()) {
    throw DimensionError("subproblem spec vectors do not match M*N*K");
  }
  Ipm ipm(spec, tol);
  return ipm.run();
}

}  // namespace otfsim
