// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "allocator/dc_model.hpp"
#include "otfsim/allocator.hpp"

#include <cmath>

namespace otfsim {
namespace detail {

DcModel::DcModel(const std::vector<UserChannel>& ch, int M, int N, int K)
    : M_(M), N_(N), K_(K), mn_(M * N), w_(K), back_(K), fwd_(K) {
  if (static_cast<int>(ch.size()) != K) throw DimensionError("one channel per user required");
  const FrameParams p{M, N, 15e3, 1.0 / 15e3};
  for (int i = 0; i < K; ++i) {
    ch[i].validate(p);
    const auto& paths = ch[i].paths;
    const int P = static_cast<int>(paths.size());
    back_[i].resize(static_cast<std::size_t>(P) * mn_);
    fwd_[i].resize(static_cast<std::size_t>(P) * mn_);
    for (int a = 0; a < P; ++a) {
      w_[i].push_back(std::norm(paths[a].gain));
      for (int r = 0; r < mn_; ++r) {
        const int l = r % M, k = r / M;
        const int c = wrap(l - paths[a].delay_tap, M) + M * wrap(static_cast<long long>(k) - paths[a].doppler_tap, N);
        back_[i][a * mn_ + r] = c;
        fwd_[i][a * mn_ + c] = r;
      }
    }
  }
}

void DcModel::totals(const RVector& x, double n0, RVector& T, RVector& I) const {
  RVector S = RVector::Zero(mn_);
  for (int i = 0; i < K_; ++i) S += x.segment(static_cast<Eigen::Index>(i) * mn_, mn_);
  T.resize(size());
  I.resize(size());
  for (int i = 0; i < K_; ++i) {
    const int P = static_cast<int>(w_[i].size());
    for (int r = 0; r < mn_; ++r) {
      const int c1 = back_[i][r];
      const double own = x[c1 + static_cast<Eigen::Index>(i) * mn_];
      double rest = n0 + w_[i][0] * (S[c1] - own);
      for (int a = 1; a < P; ++a) rest += w_[i][a] * S[back_[i][a * mn_ + r]];
      I[r + i * mn_] = rest;
      T[r + i * mn_] = rest + w_[i][0] * own;
    }
  }
}

double DcModel::log_sum(const RVector& v) {
  double acc = 0.0;
  for (Eigen::Index t = 0; t < v.size(); ++t) acc += std::log2(v[t]);
  return acc;
}

RVector DcModel::grad_Q(const RVector& T) const {
  RVector g = RVector::Zero(mn_);
  for (int i = 0; i < K_; ++i) {
    const int P = static_cast<int>(w_[i].size());
    for (int a = 0; a < P; ++a) {
      for (int c = 0; c < mn_; ++c) g[c] += w_[i][a] / T[fwd_[i][a * mn_ + c] + i * mn_];
    }
  }
  return g * kInvLn2;
}

RVector DcModel::grad_Z(const RVector& I) const {
  RVector g(size());
#pragma omp parallel for schedule(static)
  for (int c = 0; c < mn_; ++c) {
    double common = 0.0;
    for (int i = 0; i < K_; ++i) {
      const int P = static_cast<int>(w_[i].size());
      for (int a = 0; a < P; ++a) common += w_[i][a] / I[fwd_[i][a * mn_ + c] + i * mn_];
    }
    for (int j = 0; j < K_; ++j) {
      // user j's own main-path term is the desired signal, not part of Z
      const double own = w_[j][0] / I[fwd_[j][c] + j * mn_];
      g[c + static_cast<Eigen::Index>(j) * mn_] = kInvLn2 * (common - own);
    }
  }
  return g;
}

RVector DcModel::grad_Z_scatter(const RVector& I) const {
  RVector g = RVector::Zero(size());
  for (int i = 0; i < K_; ++i) {
    const int P = static_cast<int>(w_[i].size());
    for (int r = 0; r < mn_; ++r) {
      const double inv = kInvLn2 / I[r + i * mn_];
      for (int a = 0; a < P; ++a) {
        const int c = back_[i][a * mn_ + r];
        for (int j = 0; j < K_; ++j) {
          if (j == i && a == 0) continue;
          g[c + static_cast<Eigen::Index>(j) * mn_] += w_[i][a] * inv;
        }
      }
    }
  }
  return g;
}

RMatrix DcModel::hess_Q(const RVector& T) const {
  RMatrix h = RMatrix::Zero(mn_, mn_);
  for (int i = 0; i < K_; ++i) {
    const int P = static_cast<int>(w_[i].size());
    for (int r = 0; r < mn_; ++r) {
      const double t = T[r + i * mn_];
      const double coef = kInvLn2 / (t * t);
      for (int a = 0; a < P; ++a) {
        const int ca = back_[i][a * mn_ + r];
        for (int b = 0; b < P; ++b) h(ca, back_[i][b * mn_ + r]) += w_[i][a] * w_[i][b] * coef;
      }
    }
  }
  return h;
}

}  // namespace detail

namespace {

detail::DcModel model_for(const PowerGrid& rho, const std::vector<UserChannel>& ch) {
  return detail::DcModel(ch, rho.M, rho.N, rho.K);
}

}  // namespace

DcTerms dc_decompose(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0) {
  const auto model = model_for(rho, ch);
  RVector T, I;
  model.totals(rho.rho, n0, T, I);
  return {detail::DcModel::log_sum(T), detail::DcModel::log_sum(I), RVector()};
}

DcTerms dc_decompose_with_grad(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0) {
  const auto model = model_for(rho, ch);
  RVector T, I;
  model.totals(rho.rho, n0, T, I);
  return {detail::DcModel::log_sum(T), detail::DcModel::log_sum(I), model.grad_Z(I)};
}

RVector grad_Zbar(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0) {
  const auto model = model_for(rho, ch);
  RVector T, I;
  model.totals(rho.rho, n0, T, I);
  return model.grad_Z(I);
}

RVector grad_Zbar_serial(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0) {
  const auto model = model_for(rho, ch);
  RVector T, I;
  model.totals(rho.rho, n0, T, I);
  return model.grad_Z_scatter(I);
}

RVector grad_Qbar(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0) {
  const auto model = model_for(rho, ch);
  RVector T, I;
  model.totals(rho.rho, n0, T, I);
  return model.grad_Q(T).replicate(rho.K, 1);
}

double linearize_Z(const PowerGrid& rho, const PowerGrid& rho_m, const DcTerms& at_m) {
  if (at_m.grad_Z.size() != rho.rho.size() || rho.rho.size() != rho_m.rho.size()) {
    throw DimensionError("linearize_Z: shapes do not conform (was the gradient computed?)");
  }
  return at_m.Z_bar + at_m.grad_Z.dot(rho.rho - rho_m.rho);
}

}  // namespace otfsim
