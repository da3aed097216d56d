#pragma once

#include <cstdint>
#include <string>

#include "qkdnet/bits.hpp"

namespace qkdnet {

/// Protocol-level parameters of the 3-state BB84 / 1-decoy scheme.
struct ProtocolParams {
  double mu1 = 0.24;       ///< mean photons/pulse, signal intensity
  double mu2 = 0.11;       ///< mean photons/pulse, decoy intensity
  double p_mu1 = 0.7;      ///< probability of choosing the signal intensity
  double p_za = 0.9048;    ///< Alice's Z-basis probability
  double p_xa = 0.0952;    ///< Alice's X-basis probability
  double eps_sec = 1e-9;   ///< secrecy parameter
  double eps_corr = 1e-12; ///< correctness parameter

  void validate() const;  // throws std::invalid_argument on violation
};

/// Physical parameters of one fiber link plus its receiver.
struct LinkParams {
  double channel_att_db = 14.0;
  double loss_z_db = 1.4;       ///< receiver Z-arm loss
  double loss_x_db = 8.6;       ///< receiver X-arm loss (interferometer)
  double visibility_x = 0.9;    ///< interferometer visibility
  double det_efficiency = 0.2;
  double dark_rate_hz = 2500.0; ///< per detector
  double holdoff_s = 20e-6;     ///< detector dead time
  double filter_width_s = 100e-12;  ///< temporal filter full width
  double jitter_rms_s = 60e-12;     ///< total timing jitter (detector + TDC)

  void validate() const;
};

/// Transmitter timing parameters.
struct SourceParams {
  double qubit_rate_hz = 595e6;
  double bin_separation_s = 800e-12;
  double sync_rate_hz = 145.358e3;
  std::uint32_t prbs_length = 4095;  // 2^12 - 1

  void validate() const;
};

enum class KeyStatus { fresh, reserved, consumed };

/// A finished secret key block with provenance and lifecycle status.
struct KeyMaterial {
  Bits bits;
  std::string link_id;
  std::uint64_t epoch = 0;
  double eps_sec = 1e-9;
  double eps_corr = 1e-12;
  KeyStatus status = KeyStatus::fresh;

  std::size_t length_bits() const { return bits.size(); }
};

/// Binary entropy H2(x), continuously extended to 0 at the endpoints.
/// Throws std::domain_error outside [0,1].
double binary_entropy(double x);

/// 10^(-att_db/10). Throws std::domain_error for negative attenuation.
double db_to_transmittance(double att_db);

/// QBER_X = (1 - vis)/2. Throws std::domain_error outside [0,1].
double qber_from_visibility(double vis);

}  // namespace qkdnet
