#pragma once

#include <string>
#include <vector>

#include "qkdnet/config.hpp"
#include "qkdnet/kms.hpp"
#include "qkdnet/session.hpp"

namespace qkdnet {

/// One CSV row of a simulation report.
struct BlockRow {
  int block = 0;
  std::uint64_t n_z = 0;
  double qber_z = 0, qber_x = 0;
  std::uint64_t leak_bits = 0;
  double f_ec = 0;
  std::int64_t l_secret = 0;
  double block_time_s = 0;
  double skr_bps = 0;
  std::string status;
};

struct SimulateReport {
  std::vector<BlockRow> rows;
  std::vector<SessionResult> sessions;  ///< filled only when keep_sessions
  bool all_audits_ok = true;
  bool all_success = true;
};

SessionConfig session_config_for(const LinkConfig& link, std::uint64_t n_z_target);

/// Runs `blocks` full desk-scale sessions on one link. `n_z_override` (0 =
/// use scenario default) selects the sifted block size; pass the link's
/// n_z_block for a full-scale run.
SimulateReport run_simulate(const NetworkConfig& config, const std::string& link_id, int blocks,
                            std::uint64_t seed, std::uint64_t n_z_override = 0,
                            bool keep_sessions = false);

struct KeyrateRow {
  std::string link_id;
  KeyLengthBreakdown breakdown;
  double qber_z_model = 0, qber_x_model = 0;
  double reference_skr_bps = 0;
  bool vacuous = false;
};

/// Analytic per-link evaluation (no Monte Carlo); empty filter = all links.
std::vector<KeyrateRow> run_keyrate(const NetworkConfig& config, const std::string& link_filter = "");

struct RelayReport {
  bool ok = false;
  std::string error;
  RelayResult relay;
  std::vector<std::string> exported_files;  ///< one serialized block per endpoint
  bool no_reuse_ok = true;
  std::uint64_t generated_blocks = 0;
};

/// Generates hop keys by desk-scale simulation until every hop has enough
/// fresh material, relays along `path`, and exports both endpoint blocks to
/// `out_dir` (skipped when empty).
RelayReport run_relay(const NetworkConfig& config, const std::vector<std::string>& path,
                      std::uint64_t size_bits, const std::string& out_dir, std::uint64_t seed);

struct DriftReport {
  int blocks = 0, failed = 0;
  double skr_mean = 0, skr_cv = 0;
  std::vector<BlockRow> rows;
};

/// Long-run stability stand-in: sinusoidal drift of visibility and channel
/// attenuation over scenario.drift.blocks desk-scale blocks.
DriftReport run_drift(const NetworkConfig& config, const std::string& link_id, std::uint64_t seed);

std::string rows_to_csv(const std::vector<BlockRow>& rows);
std::string rows_to_json(const std::vector<BlockRow>& rows);

}  // namespace qkdnet
