#pragma once

#include "qkdnet/core.hpp"
#include "qkdnet/keyrate.hpp"

namespace qkdnet {

/// Closed-form expectation model of one link: per-slot click probabilities
/// with dead-time and temporal-filter factors folded in. This is the
/// Monte-Carlo-free path used by the keyrate evaluator and for sizing
/// simulation runs.
struct LinkModel {
  double p_dark_slot = 0;
  double acc_signal = 1, acc_dark = 1;   // temporal filter acceptance
  double f_dead_z = 1, f_dead_x = 1;     // non-paralyzable dead-time survival
  // per-slot sifted event probabilities, by basis and intensity
  double z_mu1 = 0, z_mu2 = 0, x_mu1 = 0, x_mu2 = 0;
  double ez_mu1 = 0, ez_mu2 = 0, ex_mu1 = 0, ex_mu2 = 0;  // error portions
  double qubit_rate_hz = 0;

  static LinkModel build(const LinkParams& link, const ProtocolParams& protocol,
                         const SourceParams& source, double qber_z_intrinsic);

  double z_per_slot() const { return z_mu1 + z_mu2; }
  double qber_z() const { return z_per_slot() > 0 ? (ez_mu1 + ez_mu2) / z_per_slot() : 0; }
  double qber_x() const {
    double x = x_mu1 + x_mu2;
    return x > 0 ? (ex_mu1 + ex_mu2) / x : 0;
  }
  double slots_for_n_z(double n_z) const;
  double block_time_s(double n_z) const;
  DecoyCounts expected_counts(double n_z) const;
};

/// Analytic evaluation of the full finite-key formula for one link at block
/// size n_z, with lambda_EC estimated as f_ec_estimate * n_z * H2(QBER_Z).
KeyLengthBreakdown analytic_keyrate(const LinkParams& link, const ProtocolParams& protocol,
                                    const SourceParams& source, double qber_z_intrinsic,
                                    double f_ec_estimate, double n_z);

}  // namespace qkdnet
