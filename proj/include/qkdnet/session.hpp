#pragma once

#include <cstdint>
#include <string>

#include "qkdnet/cascade.hpp"
#include "qkdnet/channel.hpp"
#include "qkdnet/core.hpp"
#include "qkdnet/keyrate.hpp"
#include "qkdnet/linkmodel.hpp"

namespace qkdnet {

/// Everything needed to run one link block end to end.
struct SessionConfig {
  std::string link_id;
  LinkParams link;
  ProtocolParams protocol;
  SourceParams source;
  double qber_z_intrinsic = 0.0;
  double qber_est = 0.03;        ///< reconciliation prior for the first block
  std::uint64_t n_z_target = 100000;
  int cascade_iterations = 8;
};

enum class SessionStatus : std::uint8_t {
  success = 0,
  verify_failed,   ///< hash mismatch after reconciliation; block discarded
  bounds_vacuous,  ///< decoy bounds collapsed; no extractable key
  zero_key,        ///< bounds fine but l_secret <= 0 for this block
};

const char* session_status_name(SessionStatus s);

struct SessionResult {
  SessionStatus status = SessionStatus::zero_key;
  std::uint64_t n_z = 0;
  double qber_z = 0.0;  ///< reconciled (public) Z error rate
  double qber_x = 0.0;
  std::uint64_t leak_bits = 0;
  double f_ec = 0.0;
  std::int64_t l_secret = 0;
  double block_time_s = 0.0;
  double skr_bps = 0.0;
  KeyLengthBreakdown breakdown;
  KeyMaterial key_alice, key_bob;  ///< filled only on success
  LeakLedger ledger;
  bool leak_audit_ok = false;
  ClassicalChannel channel;  ///< full transcript of the block
};

/// One complete block: sparse physical simulation, basis sifting over the
/// channel, cascade + hash verification, decoy-bound evaluation with
/// lambda_EC taken from the actual reconciliation transcript, and Toeplitz
/// compression on both sides. Deterministic in (config, epoch, seed).
SessionResult run_block_session(const SessionConfig& config, std::uint64_t epoch, std::uint64_t seed);

}  // namespace qkdnet
