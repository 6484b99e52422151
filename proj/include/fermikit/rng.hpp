#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "fermikit/numlin.hpp"

namespace fermikit {

/// Deterministic splitmix64-based generator. All randomness in the toolkit
/// derives from one recorded seed through named sub-streams, so reports and
/// certificates are reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  cplx gaussian_cplx() {
    const double re = gaussian();
    const double im = gaussian();
    return {re, im};
  }

  CMat matrix(Index rows, Index cols) {
    CMat m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = gaussian_cplx();
    return m;
  }

  CMat hermitian(Index d) {
    CMat m = matrix(d, d);
    return CMat(0.5 * (m + m.adjoint()));
  }

  /// Random density matrix (PSD, trace one).
  CMat density(Index d) {
    CMat g = matrix(d, d);
    CMat rho = g * g.adjoint();
    rho /= rho.trace();
    return rho;
  }

  CVec vector(Index d) {
    CVec v(d);
    for (Index i = 0; i < d; ++i) v(i) = gaussian_cplx();
    return v;
  }

  CVec unit_vector(Index d) {
    CVec v = vector(d);
    return v / v.norm();
  }

  /// Derive an independent sub-stream from a label.
  Rng fork(std::string_view label) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
      h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
      h *= 0x100000001b3ULL;
    }
    return Rng(state_ ^ h);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace fermikit
