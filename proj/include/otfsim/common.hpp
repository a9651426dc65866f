// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace otfsim {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cd kJ{0.0, 1.0};

/// Broad error families; the CLI maps each to its own exit code.
enum class ErrorCategory { kDimension, kConfig, kChannel, kSolver, kIo };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorCategory::kDimension, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::kConfig, what) {}
};

class ChannelError : public Error {
 public:
  explicit ChannelError(const std::string& what) : Error(ErrorCategory::kChannel, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::kIo, what) {}
};

/// Geometry of one delay-Doppler frame: M delay bins (subcarriers) by N
/// Doppler bins (time slots), subcarrier spacing delta_f and slot length T.
struct FrameParams {
  int M = 64;
  int N = 16;
  double delta_f = 15e3;
  double T = 1.0 / 15e3;

  static FrameParams make(int M, int N, double delta_f = 15e3) {
    FrameParams p{M, N, delta_f, 1.0 / delta_f};
    p.validate();
    return p;
  }

  void validate() const;

  int size() const { return M * N; }
};

/// Positive modulo; [a]_n in the usual notation.
constexpr int wrap(long long a, int n) {
  const long long r = a % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

/// Flat index of (user i, delay l, Doppler k) in an M x N x K tensor,
/// delay fastest, so each user's slice is the column-major vec of its grid.
constexpr int tensor_index(int M, int N, int i, int l, int k) { return l + M * (k + N * i); }

}  // namespace otfsim
