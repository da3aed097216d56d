#pragma once

#include <cstdint>

#include "qkdnet/core.hpp"

namespace qkdnet {

/// Per-basis, per-intensity detection and error tallies feeding the 1-decoy
/// analysis. Doubles so the same struct carries analytic expectations;
/// Monte Carlo paths fill in integer counts.
struct DecoyCounts {
  double n_z_mu1 = 0, n_z_mu2 = 0;
  double n_x_mu1 = 0, n_x_mu2 = 0;
  double m_x_mu1 = 0, m_x_mu2 = 0;
  double m_z_mu1 = 0, m_z_mu2 = 0;  // known after error correction

  double n_z() const { return n_z_mu1 + n_z_mu2; }
  double n_x() const { return n_x_mu1 + n_x_mu2; }
  double m_z() const { return m_z_mu1 + m_z_mu2; }
  double m_x() const { return m_x_mu1 + m_x_mu2; }
};

/// Finite-key 1-decoy bounds: vacuum and single-photon lower bounds in the
/// key basis and the phase-error upper bound from the check basis.
struct DecoyBounds {
  double s_z0_lower = 0;
  double s_z1_lower = 0;
  double s_x1_lower = 0;
  double v_x1_upper = 0;
  double phi_z_upper = 0.5;
  bool vacuous = false;  ///< true when any required lower bound collapsed to <= 0
};

DecoyBounds decoy_bounds(const DecoyCounts& counts, const ProtocolParams& protocol);

/// Finite-size subtraction: 6 log2(19/eps_sec) + log2(2/eps_corr).
double overhead_bits(const ProtocolParams& protocol);

/// Secret key length: floor of
/// s_z0 + s_z1 (1 - H2(phi)) - lambda_ec - overhead, clamped at 0.
std::int64_t key_length(double s_z0_lower, double s_z1_lower, double phi_z_upper,
                        double lambda_ec, const ProtocolParams& protocol);

/// Secret key rate in bits/second.
double skr(std::int64_t l_secret, double block_time_s);

/// Full accounting for one block.
struct KeyLengthBreakdown {
  double s_z0_lower = 0, s_z1_lower = 0, phi_z_upper = 0.5;
  double lambda_ec = 0;
  double overhead_bits = 0;
  std::int64_t l_secret = 0;
  double block_time_s = 0;
  double skr_bps = 0;
};

KeyLengthBreakdown make_breakdown(const DecoyBounds& bounds, double lambda_ec, double block_time_s,
                                  const ProtocolParams& protocol);

}  // namespace qkdnet
