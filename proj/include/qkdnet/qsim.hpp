#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qkdnet/core.hpp"

namespace qkdnet {

enum class Basis : std::uint8_t { Z = 0, X = 1 };
enum class Intensity : std::uint8_t { signal = 0, decoy = 1 };

/// One pulse as prepared by Alice. In the three-state protocol the X basis
/// carries a single fixed state, so `bit` is always 0 there.
struct PreparedState {
  std::uint64_t slot = 0;
  Basis basis = Basis::Z;
  std::uint8_t bit = 0;
  Intensity intensity = Intensity::signal;
};

/// One time-tagged click at Bob, before any post-processing. `is_dark` is
/// simulator ground truth for diagnostics only and is never handed to
/// sifting or anything downstream of it.
struct DetectionRecord {
  std::uint64_t slot = 0;
  Basis basis_measured = Basis::Z;
  std::uint8_t outcome = 0;  // in X basis: 1 means "error outcome"
  double time_offset_s = 0.0;
  bool is_dark = false;
};

/// Deterministic per-slot preparation; generate_states() is a loop over this.
PreparedState prepared_state_at(std::uint64_t slot, const ProtocolParams& protocol, std::uint64_t seed);

std::vector<PreparedState> generate_states(std::uint64_t n, const ProtocolParams& protocol, std::uint64_t seed);

/// Reference engine: walks every slot of `states`, drawing a fixed sequence
/// of variates from a per-slot stream. Exact but O(slots); meant for tests
/// and small runs. `qber_z_intrinsic` is the intrinsic Z flip probability
/// (receiver imperfections other than darks).
std::vector<DetectionRecord> simulate_link(std::span<const PreparedState> states, const LinkParams& link,
                                           const ProtocolParams& protocol, const SourceParams& source,
                                           std::uint64_t seed, double qber_z_intrinsic = 0.0);

/// Sparse engine: skips empty slots with geometric gaps over a thinned
/// candidate process, then resolves each candidate slot exactly. Alice's
/// preparations are taken procedurally from (alice_seed, slot) so the same
/// slots can be re-derived at sifting time. Distribution-identical to the
/// reference engine (cross-checked statistically in tests), but runs in
/// O(detections) instead of O(slots).
std::vector<DetectionRecord> simulate_link_sparse(std::uint64_t n_slots, const LinkParams& link,
                                                  const ProtocolParams& protocol, const SourceParams& source,
                                                  std::uint64_t alice_seed, std::uint64_t bob_seed,
                                                  double qber_z_intrinsic = 0.0);

struct FilterReport {
  std::uint64_t signal_in = 0, signal_kept = 0;
  std::uint64_t dark_in = 0, dark_kept = 0;
  double signal_acceptance() const { return signal_in ? double(signal_kept) / double(signal_in) : 1.0; }
  double dark_acceptance() const { return dark_in ? double(dark_kept) / double(dark_in) : 1.0; }
};

/// Keeps records with |time_offset_s| <= width_s / 2.
std::pair<std::vector<DetectionRecord>, FilterReport> apply_temporal_filter(
    std::span<const DetectionRecord> records, double width_s);

}  // namespace qkdnet
