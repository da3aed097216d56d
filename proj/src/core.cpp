#include "qkdnet/core.hpp"

#include <cmath>
#include <stdexcept>

namespace qkdnet {

namespace {
void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

void ProtocolParams::validate() const {
  require(mu2 > 0.0 && mu2 < mu1 && mu1 <= 1.0, "ProtocolParams: need 0 < mu2 < mu1 <= 1");
  require(p_za > 0.0 && p_za < 1.0 && p_xa > 0.0 && p_xa < 1.0, "ProtocolParams: basis probabilities must be in (0,1)");
  require(std::abs(p_za + p_xa - 1.0) < 1e-9, "ProtocolParams: p_za + p_xa must equal 1");
  require(p_mu1 > 0.0 && p_mu1 < 1.0, "ProtocolParams: p_mu1 must be in (0,1)");
  require(eps_sec > 0.0 && eps_sec < 1.0, "ProtocolParams: eps_sec must be in (0,1)");
  require(eps_corr > 0.0 && eps_corr < 1.0, "ProtocolParams: eps_corr must be in (0,1)");
}

void LinkParams::validate() const {
  require(channel_att_db >= 0.0 && loss_z_db >= 0.0 && loss_x_db >= 0.0, "LinkParams: dB losses must be >= 0");
  require(visibility_x >= 0.0 && visibility_x <= 1.0, "LinkParams: visibility_x must be in [0,1]");
  require(det_efficiency >= 0.0 && det_efficiency <= 1.0, "LinkParams: det_efficiency must be in [0,1]");
  require(dark_rate_hz >= 0.0 && holdoff_s >= 0.0 && filter_width_s >= 0.0 && jitter_rms_s >= 0.0,
          "LinkParams: rates and times must be >= 0");
}

void SourceParams::validate() const {
  require(qubit_rate_hz > 0.0, "SourceParams: qubit_rate_hz must be > 0");
  require(bin_separation_s > 0.0, "SourceParams: bin_separation_s must be > 0");
  require(bin_separation_s < 1.0 / qubit_rate_hz, "SourceParams: bin separation must fit in one slot");
}

double binary_entropy(double x) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("binary_entropy: argument outside [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;  // continuous extension, 0*log 0 := 0
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double db_to_transmittance(double att_db) {
  if (att_db < 0.0) throw std::domain_error("db_to_transmittance: negative attenuation");
  return std::pow(10.0, -att_db / 10.0);
}

double qber_from_visibility(double vis) {
  if (vis < 0.0 || vis > 1.0) throw std::domain_error("qber_from_visibility: visibility outside [0,1]");
  return (1.0 - vis) / 2.0;
}

}  // namespace qkdnet
