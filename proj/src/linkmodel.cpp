// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "otfsim/linkmodel.hpp"

#include <cmath>
#include <string>

namespace otfsim {

PowerGrid PowerGrid::zeros(const FrameParams& p, int K, Domain domain) {
  if (K < 1) throw DimensionError("power grid needs K >= 1");
  return {domain, p.M, p.N, K, RVector::Zero(static_cast<Eigen::Index>(p.size()) * K)};
}

RVector PowerGrid::per_block_total() const {
  const int mn = M * N;
  RVector s = RVector::Zero(mn);
  for (int i = 0; i < K; ++i) s += rho.segment(static_cast<Eigen::Index>(i) * mn, mn);
  return s;
}

void PowerGrid::validate(const FrameParams& p) const {
  if (M != p.M || N != p.N || K < 1 || rho.size() != static_cast<Eigen::Index>(M) * N * K) {
    throw DimensionError("power grid shape does not match the frame");
  }
  if ((rho.array() < 0.0).any()) throw ConfigError("power grid has negative entries");
}

LinkBudget LinkBudget::from_snr_db(double P0, double snr_db, const FrameParams& p) {
  if (!(P0 > 0.0)) throw ConfigError("P0 must be positive");
  return {P0, P0 / (p.size() * std::pow(10.0, snr_db / 10.0))};
}

cd effective_coeff(int l, int k, const Path& path, const FrameParams& p) {
  const long long mn = p.size();
  const int d = l - path.delay_tap;
  long long e = static_cast<long long>(path.doppler_tap) * wrap(d, p.M);
  if (d < 0) e -= static_cast<long long>(k) * p.M;
  return path.gain * std::polar(1.0, kTwoPi * static_cast<double>(wrap(e, static_cast<int>(mn))) / mn);
}

namespace {

void check_users(const std::vector<UserChannel>& ch, int K, const FrameParams& p) {
  if (static_cast<int>(ch.size()) != K) {
    throw DimensionError("expected " + std::to_string(K) + " user channels, got " + std::to_string(ch.size()));
  }
  for (const auto& c : ch) c.validate(p);
}

FrameParams frame_of(const PowerGrid& rho) { return {rho.M, rho.N, 15e3, 1.0 / 15e3}; }

// Flat (l,k) index of the transmit block that path p maps onto receive (l,k).
int back_index(int l, int k, const Path& path, int M, int N) {
  return wrap(l - path.delay_tap, M) + M * wrap(static_cast<long long>(k) - path.doppler_tap, N);
}

}  // namespace

SymbolwiseOutput symbolwise_output(const std::vector<DDGrid>& x, const std::vector<UserChannel>& ch, int i,
                                   int l, int k, const FrameParams& p) {
  if (x.empty() || i < 0 || i >= static_cast<int>(ch.size())) throw DimensionError("symbolwise_output: bad user");
  for (const auto& g : x) {
    if (g.rows() != p.M || g.cols() != p.N) throw DimensionError("symbolwise_output: grid size mismatch");
  }
  if (l < 0 || l >= p.M || k < 0 || k >= p.N) throw DimensionError("symbolwise_output: index outside grid");
  SymbolwiseOutput out{};
  const auto& paths = ch[i].paths;
  for (std::size_t a = 0; a < paths.size(); ++a) {
    const cd g = effective_coeff(l, k, paths[a], p);
    const int ls = wrap(l - paths[a].delay_tap, p.M);
    const int ks = wrap(static_cast<long long>(k) - paths[a].doppler_tap, p.N);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const cd term = g * x[j](ls, ks);
      if (static_cast<int>(j) != i) {
        out.mui += term;
      } else if (a == 0) {
        out.desired += term;
      } else {
        out.mpsi += term;
      }
    }
  }
  out.value = out.desired + out.mpsi + out.mui;
  return out;
}

DDGrid symbolwise_grid(const std::vector<DDGrid>& x, const std::vector<UserChannel>& ch, int i,
                       const FrameParams& p) {
  DDGrid y = DDGrid::zeros(p);
  for (int k = 0; k < p.N; ++k) {
    for (int l = 0; l < p.M; ++l) y(l, k) = symbolwise_output(x, ch, i, l, k, p).value;
  }
  return y;
}

InterferenceBreakdown otfs_breakdown(int i, int l, int k, const PowerGrid& rho,
                                     const std::vector<UserChannel>& ch, double n0) {
  const int M = rho.M, N = rho.N;
  InterferenceBreakdown b;
  b.noise = n0;
  const auto& paths = ch.at(i).paths;
  for (std::size_t a = 0; a < paths.size(); ++a) {
    const double w = std::norm(paths[a].gain);
    const int src = back_index(l, k, paths[a], M, N);
    for (int j = 0; j < rho.K; ++j) {
      const double pw = w * rho.rho[src + static_cast<Eigen::Index>(j) * M * N];
      if (j != i) {
        b.mui += pw;
      } else if (a == 0) {
        b.desired += pw;
      } else {
        b.mpsi += pw;
      }
    }
  }
  return b;
}

double otfs_sinr(int i, int l, int k, const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0) {
  const auto b = otfs_breakdown(i, l, k, rho, ch, n0);
  return b.desired / (b.mpsi + b.mui + b.noise);
}

RVector otfs_sinr_grid_serial(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0) {
  const FrameParams p = frame_of(rho);
  check_users(ch, rho.K, p);
  const int M = rho.M, N = rho.N, mn = M * N;
  RVector out(rho.rho.size());
  for (int i = 0; i < rho.K; ++i) {
    const auto& paths = ch[i].paths;
    for (int k = 0; k < N; ++k) {
      for (int l = 0; l < M; ++l) {
        const double num = std::norm(paths[0].gain) * rho.rho[back_index(l, k, paths[0], M, N) + i * mn];
        double den = n0;
        for (std::size_t a = 1; a < paths.size(); ++a) {
          den += std::norm(paths[a].gain) * rho.rho[back_index(l, k, paths[a], M, N) + i * mn];
        }
        for (int j = 0; j < rho.K; ++j) {
          if (j == i) continue;
          for (const auto& path : paths) {
            den += std::norm(path.gain) * rho.rho[back_index(l, k, path, M, N) + j * mn];
          }
        }
        out[tensor_index(M, N, i, l, k)] = num / den;
      }
    }
  }
  return out;
}

RVector otfs_sinr_grid(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0) {
  const FrameParams p = frame_of(rho);
  check_users(ch, rho.K, p);
  const int M = rho.M, N = rho.N, mn = M * N, K = rho.K;
  const RVector total = rho.per_block_total();
  RVector out(rho.rho.size());
#pragma omp parallel for collapse(2) schedule(static)
  for (int i = 0; i < K; ++i) {
    for (int r = 0; r < mn; ++r) {
      const auto& paths = ch[i].paths;
      const int l = r % M, k = r / M;
      const int src1 = back_index(l, k, paths[0], M, N);
      const double own = rho.rho[src1 + static_cast<Eigen::Index>(i) * mn];
      // other users' power on the main path, written without cancellation
      double interf = n0 + std::norm(paths[0].gain) * (total[src1] - own);
      for (std::size_t a = 1; a < paths.size(); ++a) {
        interf += std::norm(paths[a].gain) * total[back_index(l, k, paths[a], M, N)];
      }
      out[r + static_cast<Eigen::Index>(i) * mn] = std::norm(paths[0].gain) * own / interf;
    }
  }
  return out;
}

std::vector<double> otfs_user_rates(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0) {
  const RVector g = otfs_sinr_grid(rho, ch, n0);
  const int mn = rho.M * rho.N;
  std::vector<double> rates(rho.K, 0.0);
  for (int i = 0; i < rho.K; ++i) {
    double acc = 0.0;
    for (int r = 0; r < mn; ++r) acc += std::log2(1.0 + g[r + static_cast<Eigen::Index>(i) * mn]);
    rates[i] = 0.5 * acc;
  }
  return rates;
}

double otfs_sum_rate(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0) {
  double r = 0.0;
  for (double v : otfs_user_rates(rho, ch, n0)) r += v;
  return r;
}

OfdmBlocks ofdm_block_channels(const EffectiveChannel& h_tf, const FrameParams& p) {
  const int M = p.M, N = p.N;
  if (h_tf.matrix.rows() != p.size() || h_tf.matrix.cols() != p.size()) {
    throw DimensionError("ofdm_block_channels: expected MN x MN matrix");
  }
  OfdmBlocks b;
  double kept = 0.0;
  for (int n = 0; n < N; ++n) {
    b.h0.push_back(h_tf.matrix.block(n * M, n * M, M, M));
    b.h1.push_back(n >= 1 ? CMatrix(h_tf.matrix.block(n * M, (n - 1) * M, M, M)) : CMatrix::Zero(M, M));
    kept += b.h0.back().squaredNorm() + b.h1.back().squaredNorm();
  }
  b.residual_energy = std::max(0.0, h_tf.matrix.squaredNorm() - kept);
  return b;
}

OfdmBlocks ofdm_blocks_from_channel(const UserChannel& ch, const FrameParams& p, const CfoModel& cfo) {
  ch.validate(p);
  const int M = p.M, N = p.N, mn = p.size();
  std::vector<CMatrix> d0(N, CMatrix::Zero(M, M)), d1(N, CMatrix::Zero(M, M));
  CMatrix rest = CMatrix::Zero(M, M);
  // A delay below M moves a sample at most one slot forward; only the
  // frame wrap from the last slot into slot 0 falls outside (n,n), (n,n-1).
  for (const auto& path : ch.paths) {
    for (int col = 0; col < mn; ++col) {
      const int row = wrap(col + path.delay_tap, mn);
      const cd v = path.gain * std::polar(1.0, kTwoPi * static_cast<double>(wrap(
                                                             static_cast<long long>(path.doppler_tap) * col, mn)) /
                                                   mn);
      const int rs = row / M, cs = col / M;
      if (rs == cs) {
        d0[rs](row % M, col % M) += v;
      } else if (rs == cs + 1) {
        d1[rs](row % M, col % M) += v;
      } else {
        rest(row % M, col % M) += v;
      }
    }
  }
  if (cfo.epsilon != 0.0) {
    for (int n = 0; n < N; ++n) {
      for (int r = 0; r < M; ++r) {
        const cd ph = std::polar(1.0, kTwoPi * cfo.epsilon * static_cast<double>(n * M + r) / M);
        d0[n].row(r) *= ph;
        d1[n].row(r) *= ph;
      }
    }
  }
  const CMatrix fm = dft_matrix(M);
  OfdmBlocks b;
  for (int n = 0; n < N; ++n) {
    b.h0.push_back(fm * d0[n] * fm.adjoint());
    b.h1.push_back(fm * d1[n] * fm.adjoint());
  }
  // the CFO ramp has unit modulus, so it does not change this energy
  b.residual_energy = rest.squaredNorm();
  return b;
}

namespace {

void check_blocks(const PowerGrid& rho, const std::vector<OfdmBlocks>& blocks) {
  if (rho.domain != Domain::kTF) throw DimensionError("OFDM rates need a TF-domain power grid");
  if (static_cast<int>(blocks.size()) != rho.K) throw DimensionError("one OfdmBlocks per user required");
  for (const auto& b : blocks) {
    if (static_cast<int>(b.h0.size()) != rho.N || static_cast<int>(b.h1.size()) != rho.N) {
      throw DimensionError("OfdmBlocks has the wrong number of blocks");
    }
  }
}

}  // namespace

OfdmBreakdown ofdm_breakdown(int i, int m, int n, const PowerGrid& rho, const std::vector<OfdmBlocks>& blocks,
                             double n0) {
  check_blocks(rho, blocks);
  const int M = rho.M;
  OfdmBreakdown b;
  b.noise = n0;
  const auto& h0 = blocks[i].h0[n];
  for (int j = 0; j < rho.K; ++j) {
    for (int mp = 0; mp < M; ++mp) {
      const double pw = std::norm(h0(m, mp)) * rho(j, mp, n);
      if (j == i && mp == m) {
        b.desired += pw;
      } else {
        b.ici += pw;
      }
      if (n >= 1) b.isi += std::norm(blocks[i].h1[n](m, mp)) * rho(j, mp, n - 1);
    }
  }
  return b;
}

double ofdm_sum_rate(const PowerGrid& rho, const std::vector<OfdmBlocks>& blocks, double n0) {
  check_blocks(rho, blocks);
  const int M = rho.M, N = rho.N, K = rho.K, mn = M * N;
  const RVector total = rho.per_block_total();
  double rate = 0.0;
#pragma omp parallel for collapse(2) reduction(+ : rate) schedule(static)
  for (int i = 0; i < K; ++i) {
    for (int n = 0; n < N; ++n) {
      const RVector s_n = total.segment(static_cast<Eigen::Index>(n) * M, M);
      RMatrix g0 = blocks[i].h0[n].cwiseAbs2();
      const RVector gain = g0.diagonal();
      g0.diagonal().setZero();
      RVector interf = g0 * s_n;
      if (n >= 1) interf += blocks[i].h1[n].cwiseAbs2() * total.segment(static_cast<Eigen::Index>(n - 1) * M, M);
      for (int m = 0; m < M; ++m) {
        const double own = rho.rho[m + static_cast<Eigen::Index>(n) * M + static_cast<Eigen::Index>(i) * mn];
        const double desired = gain[m] * own;
        // other users on the same subcarrier count as interference
        const double rest = interf[m] + gain[m] * (s_n[m] - own) + n0;
        rate += 0.5 * std::log2(1.0 + desired / rest);
      }
    }
  }
  return rate;
}

}  // namespace otfsim
