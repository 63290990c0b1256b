#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>

#include "lrvmc/rng.hpp"

namespace lrvmc {

// A computational-basis state: length-N vector whose entries are exactly +1.0
// or -1.0. Stored as doubles so configurations feed straight into matrix ops.
using SpinVector = Eigen::VectorXd;

// A batch of configurations, one per column (N x B).
using SpinBatch = Eigen::MatrixXd;

// Real log-amplitude callbacks. The batched form takes configurations as
// columns and returns one log-amplitude per column.
using LogPsiFn = std::function<double(const SpinVector&)>;
using BatchedLogPsiFn = std::function<Eigen::VectorXd(const SpinBatch&)>;

inline bool is_valid_configuration(const SpinVector& s) {
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] != 1.0 && s[i] != -1.0) return false;
  }
  return s.size() >= 1;
}

// Cyclic shift: element i of the result is s[(i + offset) mod N].
inline SpinVector shifted(const SpinVector& s, Eigen::Index offset) {
  const Eigen::Index n = s.size();
  SpinVector out(n);
  offset = ((offset % n) + n) % n;
  for (Eigen::Index i = 0; i < n; ++i) out[i] = s[(i + offset) % n];
  return out;
}

// Bit encoding used by the exact-diagonalization basis: bit i set <=> spin i is -1,
// so index 0 is the all-up state.
inline std::uint64_t config_bits(const SpinVector& s) {
  std::uint64_t bits = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] < 0.0) bits |= (std::uint64_t{1} << i);
  }
  return bits;
}

inline SpinVector config_from_bits(std::uint64_t bits, Eigen::Index n) {
  SpinVector s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s[i] = (bits >> i) & 1 ? -1.0 : 1.0;
  }
  return s;
}

inline SpinVector random_configuration(Eigen::Index n, std::mt19937_64& rng) {
  SpinVector s(n);
  for (Eigen::Index i = 0; i < n; ++i) s[i] = uniform01(rng) < 0.5 ? 1.0 : -1.0;
  return s;
}

}  // namespace lrvmc
