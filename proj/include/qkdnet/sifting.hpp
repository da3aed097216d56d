#pragma once

#include <functional>
#include <span>
#include <vector>

#include "qkdnet/bits.hpp"
#include "qkdnet/qsim.hpp"

namespace qkdnet {

/// Result of basis reconciliation for one block: the paired Z-basis bit
/// strings plus the per-basis / per-intensity tallies the decoy analysis
/// consumes. Intensity tags are public once sifting is done.
struct SiftedBlock {
  Bits bits_alice;  // Z-basis key bits, Alice side
  Bits bits_bob;    // Z-basis key bits, Bob side
  std::vector<Intensity> intensity;  // per kept Z bit, aligned with the key strings
  std::uint64_t n_z_mu1 = 0, n_z_mu2 = 0;
  std::uint64_t n_x_mu1 = 0, n_x_mu2 = 0;
  std::uint64_t m_x_mu1 = 0, m_x_mu2 = 0;
  std::uint64_t dropped = 0;  // basis-mismatched records
  double qber_z_observed = 0.0;  // simulator-side diagnostic (direct comparison)
  double qber_x_observed = 0.0;

  std::uint64_t n_z() const { return n_z_mu1 + n_z_mu2; }
  std::uint64_t n_x() const { return n_x_mu1 + n_x_mu2; }
};

using PreparationLookup = std::function<PreparedState(std::uint64_t slot)>;

/// Core sifting pass: for every record, keep it iff Bob's measured basis
/// equals the prepared basis. Z matches contribute key bits; X matches
/// contribute only counts (outcome 1 = error against the single X state).
/// Records must be slot-sorted and unique; `n_slots` bounds valid slots.
SiftedBlock sift(const PreparationLookup& preparation_at, std::uint64_t n_slots,
                 std::span<const DetectionRecord> records);

/// Convenience overload over explicit preparations. Throws on records that
/// reference unknown slots or duplicate a slot.
SiftedBlock sift(std::span<const PreparedState> preparations, std::span<const DetectionRecord> records);

}  // namespace qkdnet
