#include "qkdnet/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qkdnet {

namespace {

// Poisson photon-number weight tau_n = sum_k p_k e^{-mu_k} mu_k^n / n!.
double tau(int n, const ProtocolParams& p) {
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  return (p.p_mu1 * std::exp(-p.mu1) * std::pow(p.mu1, n) +
          (1.0 - p.p_mu1) * std::exp(-p.mu2) * std::pow(p.mu2, n)) /
         fact;
}

// Finite-size statistics for one basis: Hoeffding-corrected per-intensity
// count/error estimates n_k^{+-} = (e^{mu_k}/p_k)(n_k +- delta).
struct BasisStats {
  double n_mu1_plus, n_mu1_minus, n_mu2_plus, n_mu2_minus;
  double m_mu1_plus, m_mu2_minus, m_mu2_plus;

  BasisStats(double n_mu1, double n_mu2, double m_mu1, double m_mu2, const ProtocolParams& p) {
    double log_term = std::log(19.0 / p.eps_sec);
    auto delta = [log_term](double n) { return std::sqrt(n / 2.0 * log_term); };
    double c1 = std::exp(p.mu1) / p.p_mu1, c2 = std::exp(p.mu2) / (1.0 - p.p_mu1);
    n_mu1_plus = c1 * (n_mu1 + delta(n_mu1));
    n_mu1_minus = c1 * std::max(0.0, n_mu1 - delta(n_mu1));
    n_mu2_plus = c2 * (n_mu2 + delta(n_mu2));
    n_mu2_minus = c2 * std::max(0.0, n_mu2 - delta(n_mu2));
    m_mu1_plus = c1 * (m_mu1 + delta(m_mu1));
    m_mu2_plus = c2 * (m_mu2 + delta(m_mu2));
    m_mu2_minus = c2 * std::max(0.0, m_mu2 - delta(m_mu2));
  }
};

// Vacuum upper bound from decoy-intensity error counts: vacuum events are
// spread over intensities with weight p_k e^{-mu_k}/tau_0 and err with
// probability 1/2, so s_0 <= 2 tau_0 m_mu2^+.
double vacuum_upper(const BasisStats& st, const ProtocolParams& p) {
  return 2.0 * tau(0, p) * st.m_mu2_plus;
}

// Single-photon lower bound from the two-intensity count difference.
double single_photon_lower(const BasisStats& st, double s0_upper, const ProtocolParams& p) {
  double mu1 = p.mu1, mu2 = p.mu2;
  double coef = tau(1, p) * mu1 / (mu2 * (mu1 - mu2));
  double inner = st.n_mu2_minus - (mu2 * mu2) / (mu1 * mu1) * st.n_mu1_plus -
                 (mu1 * mu1 - mu2 * mu2) / (mu1 * mu1) * s0_upper / tau(0, p);
  return coef * inner;
}

// Finite-size correction of the phase-error transfer from the sampled X
// basis to the key basis.
double gamma_correction(double a, double b, double c, double d) {
  if (b <= 0.0) return 0.0;  // limit of sqrt(b log 1/b) at b -> 0
  if (b >= 1.0 || c <= 0.0 || d <= 0.0) return 0.5;
  double t1 = (c + d) * (1.0 - b) * b / (c * d * std::log(2.0));
  double arg = (c + d) / (c * d * (1.0 - b) * b) * (21.0 * 21.0) / (a * a);
  if (arg <= 1.0) return 0.0;
  return std::sqrt(t1 * std::log2(arg));
}

}  // namespace

DecoyBounds decoy_bounds(const DecoyCounts& counts, const ProtocolParams& protocol) {
  protocol.validate();
  DecoyBounds out;

  BasisStats z(counts.n_z_mu1, counts.n_z_mu2, counts.m_z_mu1, counts.m_z_mu2, protocol);
  BasisStats x(counts.n_x_mu1, counts.n_x_mu2, counts.m_x_mu1, counts.m_x_mu2, protocol);
  double mu1 = protocol.mu1, mu2 = protocol.mu2;

  double s_z0_count = tau(0, protocol) / (mu1 - mu2) * (mu1 * z.n_mu2_minus - mu2 * z.n_mu1_plus);
  out.s_z0_lower = std::max(0.0, s_z0_count);

  double s_z0_up = std::min(vacuum_upper(z, protocol), counts.n_z());
  out.s_z1_lower = std::max(0.0, single_photon_lower(z, s_z0_up, protocol));

  double s_x0_up = std::min(vacuum_upper(x, protocol), counts.n_x());
  out.s_x1_lower = std::max(0.0, single_photon_lower(x, s_x0_up, protocol));

  out.v_x1_upper = std::max(0.0, tau(1, protocol) / (mu1 - mu2) * (x.m_mu1_plus - x.m_mu2_minus));
  if (counts.m_x() <= 0.0) out.v_x1_upper = 0.0;

  if (out.s_z1_lower <= 0.0 || out.s_x1_lower <= 0.0) {
    out.vacuous = true;
    out.phi_z_upper = 0.5;
    return out;
  }

  double ratio = out.v_x1_upper / out.s_x1_lower;
  double phi = ratio + gamma_correction(protocol.eps_sec, ratio, out.s_x1_lower, out.s_z1_lower);
  out.phi_z_upper = std::clamp(phi, 0.0, 0.5);
  return out;
}

double overhead_bits(const ProtocolParams& protocol) {
  return 6.0 * std::log2(19.0 / protocol.eps_sec) + std::log2(2.0 / protocol.eps_corr);
}

std::int64_t key_length(double s_z0_lower, double s_z1_lower, double phi_z_upper, double lambda_ec,
                        const ProtocolParams& protocol) {
  if (lambda_ec < 0.0) throw std::invalid_argument("key_length: lambda_ec must be >= 0");
  double rhs = s_z0_lower + s_z1_lower * (1.0 - binary_entropy(std::min(phi_z_upper, 0.5))) -
               lambda_ec - overhead_bits(protocol);
  if (!(rhs > 0.0)) return 0;
  return static_cast<std::int64_t>(std::floor(rhs));
}

double skr(std::int64_t l_secret, double block_time_s) {
  if (block_time_s <= 0.0) throw std::invalid_argument("skr: block_time_s must be > 0");
  return static_cast<double>(l_secret) / block_time_s;
}

KeyLengthBreakdown make_breakdown(const DecoyBounds& bounds, double lambda_ec, double block_time_s,
                                  const ProtocolParams& protocol) {
  KeyLengthBreakdown b;
  b.s_z0_lower = bounds.s_z0_lower;
  b.s_z1_lower = bounds.s_z1_lower;
  b.phi_z_upper = bounds.phi_z_upper;
  b.lambda_ec = lambda_ec;
  b.overhead_bits = overhead_bits(protocol);
  b.l_secret = bounds.vacuous ? 0
                              : key_length(bounds.s_z0_lower, bounds.s_z1_lower, bounds.phi_z_upper,
                                           lambda_ec, protocol);
  b.block_time_s = block_time_s;
  b.skr_bps = block_time_s > 0.0 ? skr(b.l_secret, block_time_s) : 0.0;
  return b;
}

}  // namespace qkdnet
