// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "otfsim/rxchain.hpp"

#include "otfsim/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace otfsim {

std::string modulation_name(Modulation m) { return m == Modulation::kQpsk ? "QPSK" : "16QAM"; }

Modulation parse_modulation(const std::string& s) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), ::toupper);
  if (t == "QPSK") return Modulation::kQpsk;
  if (t == "16QAM" || t == "QAM16") return Modulation::kQam16;
  throw ConfigError("unknown modulation '" + s + "'");
}

Constellation::Constellation(Modulation order) : order_(order) {
  const int half = order == Modulation::kQpsk ? 1 : 2;  // bits per axis
  bits_ = 2 * half;
  levels_ = 1 << half;
  // E|x|^2 = 2 * mean(a^2) over levels a = -(L-1), ..., L-1 step 2
  scale_ = std::sqrt(2.0 * (levels_ * levels_ - 1) / 3.0);
  axis_gray_.resize(levels_);
  for (int a = 0; a < levels_; ++a) axis_gray_[a] = static_cast<unsigned>(a ^ (a >> 1));
  std::vector<int> amp_of_label(levels_);
  for (int a = 0; a < levels_; ++a) amp_of_label[axis_gray_[a]] = a;
  points_.resize(static_cast<std::size_t>(1) << bits_);
  for (unsigned label = 0; label < points_.size(); ++label) {
    const int ai = amp_of_label[label >> half];
    const int aq = amp_of_label[label & ((1u << half) - 1)];
    points_[label] = cd(2 * ai - (levels_ - 1), 2 * aq - (levels_ - 1)) / scale_;
  }
}

unsigned Constellation::demap(cd y) const {
  const int half = bits_ / 2;
  auto axis = [&](double v) {
    const double a = std::round((v * scale_ + (levels_ - 1)) / 2.0);
    return axis_gray_[static_cast<int>(std::clamp(a, 0.0, static_cast<double>(levels_ - 1)))];
  };
  return (axis(y.real()) << half) | axis(y.imag());
}

LmmseFilter::LmmseFilter(const CMatrix& H, double n0, double rho_bar) : h_(H) {
  if (H.rows() != H.cols()) throw DimensionError("LMMSE: channel must be square");
  if (!(n0 > 0.0) || !(rho_bar > 0.0)) throw ConfigError("LMMSE: N0 and symbol power must be positive");
  CMatrix a = H * H.adjoint();
  a.diagonal().array() += n0 / rho_bar;
  llt_.compute(a);
  if (llt_.info() != Eigen::Success) throw DimensionError("LMMSE: regularized Gram matrix is not positive definite");
}

CVector LmmseFilter::apply(const CVector& y) const {
  if (y.size() != h_.rows()) throw DimensionError("LMMSE: received vector length mismatch");
  return h_.adjoint() * llt_.solve(y);
}

CVector lmmse_detect(const CVector& y, const CMatrix& H, double n0, double rho_bar) {
  return LmmseFilter(H, n0, rho_bar).apply(y);
}

CVector matched_filter_detect(const CVector& y, const CMatrix& H) {
  if (y.size() != H.rows()) throw DimensionError("matched filter: received vector length mismatch");
  CVector x = H.adjoint() * y;
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    const double e = H.col(c).squaredNorm();
    x[c] = e > 0.0 ? x[c] / e : cd{};
  }
  return x;
}

namespace {

cd lattice_phase(long long k, long long q, int mn) {
  const long long e = wrap((k % mn) * (q % mn), mn);
  return std::polar(1.0, kTwoPi * static_cast<double>(e) / mn);
}

cd cfo_phase(double eps, long long q, int M) { return std::polar(1.0, kTwoPi * eps * static_cast<double>(q) / M); }

}  // namespace

SparseCMatrix sparse_H_TD(const UserChannel& ch, const FrameParams& p, const CfoModel& cfo) {
  ch.validate(p);
  const int mn = p.size();
  std::vector<Eigen::Triplet<cd>> t;
  t.reserve(ch.paths.size() * mn);
  for (const auto& path : ch.paths) {
    for (int col = 0; col < mn; ++col) {
      const int row = wrap(col + path.delay_tap, mn);
      t.emplace_back(row, col, path.gain * lattice_phase(path.doppler_tap, col, mn) * cfo_phase(cfo.epsilon, row, p.M));
    }
  }
  SparseCMatrix h(mn, mn);
  h.setFromTriplets(t.begin(), t.end());
  return h;
}

SparseLmmseFilter::SparseLmmseFilter(const SparseCMatrix& H, double n0, double rho_bar) : h_(H) {
  if (H.rows() != H.cols()) throw DimensionError("LMMSE: channel must be square");
  if (!(n0 > 0.0) || !(rho_bar > 0.0)) throw ConfigError("LMMSE: N0 and symbol power must be positive");
  SparseCMatrix eye(H.rows(), H.cols());
  eye.setIdentity();
  const SparseCMatrix a = SparseCMatrix(H * H.adjoint()) + (n0 / rho_bar) * eye;
  llt_.compute(a);
  if (llt_.info() != Eigen::Success) throw DimensionError("LMMSE: regularized Gram matrix is not positive definite");
}

CVector SparseLmmseFilter::apply(const CVector& y) const {
  if (y.size() != h_.rows()) throw DimensionError("LMMSE: received vector length mismatch");
  const CVector z = llt_.solve(y);
  return h_.adjoint() * z;
}

OnetapOutput ofdm_onetap_detect(const TFGrid& y, const CMatrix& gains) {
  if (gains.rows() != y.rows() || gains.cols() != y.cols()) throw DimensionError("one-tap: gain grid size mismatch");
  OnetapOutput out{TFGrid(CMatrix::Zero(y.rows(), y.cols())), std::vector<std::uint8_t>(gains.size(), 0), 0};
  for (int n = 0; n < y.cols(); ++n) {
    for (int m = 0; m < y.rows(); ++m) {
      const cd g = gains(m, n);
      if (std::abs(g) < kErasureGain) {
        out.erased[m + static_cast<std::size_t>(n) * y.rows()] = 1;
        ++out.erasures;
      } else {
        out.x(m, n) = y(m, n) / g;
      }
    }
  }
  return out;
}

CMatrix ofdm_onetap_gains(const UserChannel& ch, const FrameParams& p, const CfoModel& cfo) {
  ch.validate(p);
  const int M = p.M, N = p.N, mn = p.size();
  CMatrix g = CMatrix::Zero(M, N);
  for (const auto& path : ch.paths) {
    const int lp = path.delay_tap;
    for (int n = 0; n < N; ++n) {
      // in-slot samples b -> b + lp of block (n,n); the DFT pair leaves
      // only the delay phase depending on m
      cd acc{};
      for (int b = 0; b + lp < M; ++b) {
        const long long q = static_cast<long long>(n) * M + b;
        acc += path.gain * lattice_phase(path.doppler_tap, q, mn) * cfo_phase(cfo.epsilon, q + lp, M);
      }
      acc /= static_cast<double>(M);
      for (int m = 0; m < M; ++m) {
        g(m, n) += acc * std::polar(1.0, -kTwoPi * static_cast<double>(wrap(static_cast<long long>(m) * lp, M)) / M);
      }
    }
  }
  return g;
}

CVector zc_pilot(int M, int root) {
  if (M < 1) throw ConfigError("ZC pilot: length must be positive");
  if (root < 1 || std::gcd(root, M) != 1) {
    throw ConfigError("ZC pilot: root " + std::to_string(root) + " must be positive and coprime with " + std::to_string(M));
  }
  CVector z(M);
  const long long twice_m = 2LL * M;
  for (long long m = 0; m < M; ++m) {
    // phase = pi * u * e / M, reduced mod 2M to keep the argument small
    const long long e = M % 2 == 0 ? m * m : m * (m + 1);
    const long long r = (static_cast<long long>(root) % twice_m) * (e % twice_m) % twice_m;
    z[m] = std::polar(1.0, kPi * static_cast<double>(r) / M);
  }
  return z;
}

CVector ls_channel_estimate(const CVector& y_pilot, const CVector& pilot) {
  if (y_pilot.size() != pilot.size()) throw DimensionError("LS estimate: pilot length mismatch");
  return y_pilot.cwiseQuotient(pilot);
}

double moose_cfo_estimate(const CVector& y1, const CVector& y2) {
  if (y1.size() != y2.size()) throw DimensionError("Moose: the two pilot blocks differ in length");
  const cd c = y1.dot(y2);  // sum conj(y1) y2
  if (std::abs(c) == 0.0) throw ChannelError("Moose: zero correlation between pilot blocks");
  return std::arg(c) / kTwoPi;
}

CVector cfo_compensate(const CVector& r, double eps_hat, const FrameParams& p) {
  if (r.size() != p.size()) throw DimensionError("cfo_compensate: length must be MN");
  CVector out(r.size());
  for (Eigen::Index q = 0; q < r.size(); ++q) out[q] = r[q] * cfo_phase(-eps_hat, q, p.M);
  return out;
}

std::string ber_scheme_name(BerScheme s) {
  switch (s) {
    case BerScheme::kOtfsLmmse: return "OTFS-LMMSE";
    case BerScheme::kOfdmOnetap: return "OFDM-1tap";
    case BerScheme::kOfdmPractical: return "OFDM-practical";
  }
  return "?";
}

BerScheme parse_ber_scheme(const std::string& s) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), ::tolower);
  for (auto scheme : kAllBerSchemes) {
    std::string n = ber_scheme_name(scheme);
    std::transform(n.begin(), n.end(), n.begin(), ::tolower);
    if (n == t) return scheme;
  }
  throw ConfigError("unknown BER scheme '" + s + "'");
}

void BerConfig::validate() const {
  frame.validate();
  if (frames < 1) throw ConfigError("ber: frames must be at least 1");
  if (snr_db.empty()) throw ConfigError("ber: empty SNR list");
  if (epsilon.empty()) throw ConfigError("ber: empty epsilon list");
  if (schemes.empty()) throw ConfigError("ber: no schemes selected");
  if (pilot_slots < 2 || pilot_slots >= frame.N) {
    throw ConfigError("ber: pilot_slots must be in [2, N-1] (Moose needs two repeated blocks)");
  }
  zc_pilot(frame.M, zc_root);
}

namespace {

enum StreamTag : std::uint64_t { kChannelTag = 1, kDataTag = 2, kNoiseTag = 3 };

struct Point {
  BerScheme scheme;
  double snr_db;
  double epsilon;
};

// Everything a frame shares across points: channel, labels, noise.
struct FrameDraw {
  UserChannel channel;
  std::vector<unsigned> labels;  // column-major over the M x N grid
  CVector noise;                 // unit variance
};

FrameDraw draw_frame(const BerConfig& cfg, const Constellation& con, long f) {
  const FrameParams& p = cfg.frame;
  FrameDraw d;
  Rng ch_rng = substream(cfg.seed, {kChannelTag, static_cast<std::uint64_t>(f)});
  d.channel = realize_channel(cfg.profile, p, ch_rng);
  Rng data_rng = substream(cfg.seed, {kDataTag, static_cast<std::uint64_t>(f)});
  std::uniform_int_distribution<unsigned> pick(0, static_cast<unsigned>(con.size() - 1));
  d.labels.resize(p.size());
  for (auto& l : d.labels) l = pick(data_rng);
  Rng noise_rng = substream(cfg.seed, {kNoiseTag, static_cast<std::uint64_t>(f)});
  d.noise = CVector::Zero(p.size());
  add_awgn(d.noise, 1.0, noise_rng);
  return d;
}

int bit_errors(unsigned a, unsigned b) { return std::popcount(a ^ b); }

double n0_for(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

// Returns bit errors; *bits receives the bits carried.
long long run_point(const BerConfig& cfg, const Constellation& con, const FrameDraw& d, const Point& pt,
                    const SparseCMatrix& h_td, long long* bits) {
  const FrameParams& p = cfg.frame;
  const int M = p.M, N = p.N, mn = p.size();
  const double n0 = n0_for(pt.snr_db);
  const double sigma = std::sqrt(n0);
  CMatrix x(M, N);
  for (int t = 0; t < mn; ++t) x(t % M, t / M) = con.map(d.labels[t]);
  const CVector pilot = zc_pilot(M, cfg.zc_root);
  const int first_data = pt.scheme == BerScheme::kOfdmPractical ? cfg.pilot_slots : 0;
  for (int n = 0; n < first_data; ++n) x.col(n) = pilot;

  const PulseShape rect = PulseShape::rectangular(M);
  const CVector s = pt.scheme == BerScheme::kOtfsLmmse ? otfs_modulate(DDGrid(x), rect, p) : heisenberg(vec(x), p);
  const CVector r = h_td * s + sigma * d.noise;

  CMatrix xhat;
  switch (pt.scheme) {
    case BerScheme::kOtfsLmmse: {
      const SparseLmmseFilter f(h_td, n0, 1.0);
      xhat = otfs_demodulate(f.apply(r), rect, p).data;
      break;
    }
    case BerScheme::kOfdmOnetap: {
      const TFGrid y(unvec(wigner(r, p), M, N));
      xhat = ofdm_onetap_detect(y, ofdm_onetap_gains(d.channel, p, {pt.epsilon})).x.data;
      break;
    }
    case BerScheme::kOfdmPractical: {
      const double eps_hat = moose_cfo_estimate(r.segment(0, M), r.segment(M, M));
      const CMatrix y = unvec(wigner(cfo_compensate(r, eps_hat, p), p), M, N);
      CVector h_hat = CVector::Zero(M);
      for (int n = 0; n < cfg.pilot_slots; ++n) h_hat += ls_channel_estimate(y.col(n), pilot);
      h_hat /= static_cast<double>(cfg.pilot_slots);
      const TFGrid yd(y);
      xhat = ofdm_onetap_detect(yd, h_hat.replicate(1, N)).x.data;
      break;
    }
  }

  long long errors = 0;
  for (int n = first_data; n < N; ++n) {
    for (int m = 0; m < M; ++m) errors += bit_errors(con.demap(xhat(m, n)), d.labels[m + n * M]);
  }
  *bits = static_cast<long long>(N - first_data) * M * con.bits_per_symbol();
  return errors;
}

// Per-frame work over all points; one H_TD per epsilon.
void run_frame(const BerConfig& cfg, const Constellation& con, long f, const std::vector<Point>& points,
               std::vector<long long>& errors, std::vector<long long>& bits) {
  const FrameDraw d = draw_frame(cfg, con, f);
  double eps = std::nan("");
  SparseCMatrix h_td;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (!(points[k].epsilon == eps)) {
      eps = points[k].epsilon;
      h_td = sparse_H_TD(d.channel, cfg.frame, {eps});
    }
    long long b = 0;
    errors[k] += run_point(cfg, con, d, points[k], h_td, &b);
    bits[k] += b;
  }
}

std::vector<Point> sweep_points(const BerConfig& cfg) {
  std::vector<Point> pts;
  for (double eps : cfg.epsilon) {
    for (double snr : cfg.snr_db) {
      for (auto s : cfg.schemes) pts.push_back({s, snr, eps});
    }
  }
  return pts;
}

}  // namespace

long long ber_frame(const BerConfig& cfg, BerScheme scheme, double snr_db, double epsilon, long frame,
                    long long* bits) {
  cfg.validate();
  const Constellation con(cfg.modulation);
  std::vector<long long> e(1, 0), b(1, 0);
  run_frame(cfg, con, frame, {{scheme, snr_db, epsilon}}, e, b);
  if (bits) *bits += b[0];
  return e[0];
}

std::vector<BerResult> ber_monte_carlo(const BerConfig& cfg) {
  cfg.validate();
  const Constellation con(cfg.modulation);
  const auto points = sweep_points(cfg);
  const std::size_t np = points.size();
  std::vector<long long> errors(np, 0), bits(np, 0);
  long failed_frame = -1;
  std::string failure;
  ErrorCategory failed_category = ErrorCategory::kChannel;

#pragma omp parallel
  {
    std::vector<long long> e(np, 0), b(np, 0);
#pragma omp for schedule(dynamic)
    for (long f = 0; f < cfg.frames; ++f) {
      try {
        run_frame(cfg, con, f, points, e, b);
      } catch (const Error& ex) {
#pragma omp critical(otfsim_ber_error)
        if (failed_frame < 0 || f < failed_frame) {
          failed_frame = f;
          failure = ex.what();
          failed_category = ex.category();
        }
      }
    }
#pragma omp critical(otfsim_ber_reduce)
    for (std::size_t k = 0; k < np; ++k) {
      errors[k] += e[k];
      bits[k] += b[k];
    }
  }
  if (failed_frame >= 0) throw Error(failed_category, "ber: frame " + std::to_string(failed_frame) + ": " + failure);

  std::vector<BerResult> out;
  out.reserve(np);
  for (std::size_t k = 0; k < np; ++k) {
    out.push_back({points[k].scheme, points[k].snr_db, points[k].epsilon, cfg.frames, bits[k], errors[k],
                   static_cast<double>(errors[k]) / static_cast<double>(bits[k]), cfg.seed});
  }
  return out;
}

void write_ber_csv(std::ostream& out, const std::vector<BerResult>& rows) {
  out << "scheme,snr_db,epsilon,frames,bits,errors,ber,seed\n";
  char buf[64];
  for (const auto& r : rows) {
    out << ber_scheme_name(r.scheme) << ",";
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,", r.snr_db, r.epsilon);
    out << buf << r.frames << "," << r.bits << "," << r.errors << ",";
    std::snprintf(buf, sizeof buf, "%.10g", r.ber);
    out << buf << "," << r.seed << "\n";
  }
}

}  // namespace otfsim
