#include "qkdnet/linkmodel.hpp"

#include <cmath>

namespace qkdnet {

namespace {

// Probability that a pulse of mean photon number mu produces at least one
// detection after channel, receiver-path, and detector losses.
double p_signal_click(double mu, double channel_att_db, double path_loss_db, double det_eff) {
  double t = db_to_transmittance(channel_att_db) * db_to_transmittance(path_loss_db) * det_eff;
  return 1.0 - std::exp(-mu * t);
}

}  // namespace

LinkModel LinkModel::build(const LinkParams& link, const ProtocolParams& protocol,
                           const SourceParams& source, double qber_z_intrinsic) {
  link.validate();
  protocol.validate();
  source.validate();

  LinkModel m;
  m.qubit_rate_hz = source.qubit_rate_hz;
  m.p_dark_slot = link.dark_rate_hz / source.qubit_rate_hz;

  // Temporal filter: Gaussian-jittered signals pass with erf(w / (2 sqrt2 s)),
  // darks are uniform in the slot and pass with w * rate (capped at 1).
  if (link.filter_width_s > 0.0) {
    if (link.jitter_rms_s > 0.0)
      m.acc_signal = std::erf(link.filter_width_s / (2.0 * std::sqrt(2.0) * link.jitter_rms_s));
    m.acc_dark = std::min(1.0, link.filter_width_s * source.qubit_rate_hz);
  }

  double p1 = protocol.p_mu1, p2 = 1.0 - protocol.p_mu1;
  double sig_z_mu1 = p_signal_click(protocol.mu1, link.channel_att_db, link.loss_z_db, link.det_efficiency);
  double sig_z_mu2 = p_signal_click(protocol.mu2, link.channel_att_db, link.loss_z_db, link.det_efficiency);
  double sig_x_mu1 = p_signal_click(protocol.mu1, link.channel_att_db, link.loss_x_db, link.det_efficiency);
  double sig_x_mu2 = p_signal_click(protocol.mu2, link.channel_att_db, link.loss_x_db, link.det_efficiency);

  // Raw per-slot click rate on each receiver arm (before dead time). Basis
  // choice is passive: every pulse reaches both arms through the splitter
  // (ratio folded into loss_z/loss_x), regardless of the prepared basis.
  double r_z = p1 * sig_z_mu1 + p2 * sig_z_mu2 + m.p_dark_slot;
  double r_x = p1 * sig_x_mu1 + p2 * sig_x_mu2 + m.p_dark_slot;
  m.f_dead_z = 1.0 / (1.0 + r_z * source.qubit_rate_hz * link.holdoff_s);
  m.f_dead_x = 1.0 / (1.0 + r_x * source.qubit_rate_hz * link.holdoff_s);

  double qx = qber_from_visibility(link.visibility_x);

  // Sifted per-slot rates: prepared basis matches the clicking arm, and the
  // click survived dead time and (by class) the temporal filter.
  auto fill = [&](double p_basis, double sig, double f_dead, double q_err,
                  double p_k, double& kept, double& err) {
    double s = p_basis * p_k * sig * f_dead * m.acc_signal;
    double d = p_basis * p_k * m.p_dark_slot * f_dead * m.acc_dark;
    kept = s + d;
    err = s * q_err + d * 0.5;
  };
  fill(protocol.p_za, sig_z_mu1, m.f_dead_z, qber_z_intrinsic, p1, m.z_mu1, m.ez_mu1);
  fill(protocol.p_za, sig_z_mu2, m.f_dead_z, qber_z_intrinsic, p2, m.z_mu2, m.ez_mu2);
  fill(protocol.p_xa, sig_x_mu1, m.f_dead_x, qx, p1, m.x_mu1, m.ex_mu1);
  fill(protocol.p_xa, sig_x_mu2, m.f_dead_x, qx, p2, m.x_mu2, m.ex_mu2);
  return m;
}

double LinkModel::slots_for_n_z(double n_z) const { return n_z / z_per_slot(); }

double LinkModel::block_time_s(double n_z) const { return slots_for_n_z(n_z) / qubit_rate_hz; }

DecoyCounts LinkModel::expected_counts(double n_z) const {
  double slots = slots_for_n_z(n_z);
  DecoyCounts c;
  c.n_z_mu1 = z_mu1 * slots;
  c.n_z_mu2 = z_mu2 * slots;
  c.n_x_mu1 = x_mu1 * slots;
  c.n_x_mu2 = x_mu2 * slots;
  c.m_x_mu1 = ex_mu1 * slots;
  c.m_x_mu2 = ex_mu2 * slots;
  c.m_z_mu1 = ez_mu1 * slots;
  c.m_z_mu2 = ez_mu2 * slots;
  return c;
}

KeyLengthBreakdown analytic_keyrate(const LinkParams& link, const ProtocolParams& protocol,
                                    const SourceParams& source, double qber_z_intrinsic,
                                    double f_ec_estimate, double n_z) {
  LinkModel m = LinkModel::build(link, protocol, source, qber_z_intrinsic);
  DecoyCounts counts = m.expected_counts(n_z);
  DecoyBounds bounds = decoy_bounds(counts, protocol);
  double lambda_ec = f_ec_estimate * n_z * binary_entropy(m.qber_z());
  return make_breakdown(bounds, lambda_ec, m.block_time_s(n_z), protocol);
}

}  // namespace qkdnet
