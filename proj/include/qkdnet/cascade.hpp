#pragma once

#include <cstdint>
#include <vector>

#include "qkdnet/bits.hpp"
#include "qkdnet/channel.hpp"

namespace qkdnet {

/// Outcome of one reconciliation session.
struct ReconciliationResult {
  Bits corrected_key;          ///< Bob's key after correction
  std::uint64_t leak_bits = 0; ///< every parity bit disclosed (lambda_EC)
  double f_ec = 0.0;           ///< leak / (n * H2(observed qber)), NaN if degenerate
  bool verified = false;       ///< filled in by verify()
  int verify_cost_bits = 0;
  std::vector<std::size_t> flipped;  ///< positions Bob flipped (error locations)
};

/// Pass-1 block size, ceil(0.73 / qber_est). Throws std::domain_error unless
/// 0 < qber_est <= 0.5; callers clamp to a floor (default 0.005) beforehand.
int initial_block_size(double qber_est);

/// Error-reconciliation efficiency leak / (n_z * H2(qber)).
double fec_efficiency(std::uint64_t leak_bits, std::uint64_t n_z, double qber);

/// Full cascade between Alice (key_a, reference, never modified) and Bob
/// (key_b, corrected in place on the returned copy). Pass 1 uses blocks of
/// initial_block_size(qber_est); each later pass applies a publicly seeded
/// permutation and doubles the block size. Mismatched parities trigger a
/// dichotomic search; every flip re-checks previously satisfied blocks in
/// all passes (cascade backtracking). All disclosed parities flow through
/// `channel` and are counted in leak_bits.
/// `qber_est` below `qber_floor` is clamped.
ReconciliationResult run_cascade(const Bits& key_a, const Bits& key_b, double qber_est, int iterations,
                                 ClassicalChannel& channel, Rng& public_rng, double qber_floor = 0.005);

/// Error verification: t-bit Toeplitz hash with t = ceil(log2(1/eps_corr))
/// under a fresh public seed. `hash_bits_override` (> 0) substitutes a
/// scaled-down width for statistical tests. Returns (verified, t).
std::pair<bool, int> verify(const Bits& key_a, const Bits& key_b, double eps_corr,
                            ClassicalChannel& channel, Rng& seed_rng, int hash_bits_override = 0);

}  // namespace qkdnet
