#include "qkdnet/session.hpp"

#include <cmath>
#include <stdexcept>

#include "qkdnet/privamp.hpp"
#include "qkdnet/qsim.hpp"
#include "qkdnet/sifting.hpp"

namespace qkdnet {

namespace {

// Per-purpose salts for deriving independent deterministic streams.
constexpr std::uint64_t kSaltBobSim = 0x22;
constexpr std::uint64_t kSaltCascade = 0x44;
constexpr std::uint64_t kSaltVerify = 0x55;
constexpr std::uint64_t kSaltPa = 0x66;

void append_u64(Bits& b, std::uint64_t v, int bits) {
  for (int i = bits - 1; i >= 0; --i) b.push_back((v >> i) & 1);
}

}  // namespace

const char* session_status_name(SessionStatus s) {
  switch (s) {
    case SessionStatus::success: return "SUCCESS";
    case SessionStatus::verify_failed: return "VERIFY_FAILED";
    case SessionStatus::bounds_vacuous: return "BOUNDS_VACUOUS";
    case SessionStatus::zero_key: return "ZERO_KEY";
  }
  return "?";
}

SessionResult run_block_session(const SessionConfig& config, std::uint64_t epoch, std::uint64_t seed) {
  LinkModel model = LinkModel::build(config.link, config.protocol, config.source, config.qber_z_intrinsic);
  if (model.z_per_slot() <= 0.0) throw std::runtime_error("run_block_session: link produces no sifted events");
  auto n_slots = static_cast<std::uint64_t>(std::ceil(config.n_z_target / model.z_per_slot()));

  std::uint64_t alice_seed = Rng::mix(seed ^ (epoch * 0x9e3779b97f4a7c15ULL));
  std::uint64_t bob_seed = Rng::stream(seed, kSaltBobSim, epoch).next();

  auto raw = simulate_link_sparse(n_slots, config.link, config.protocol, config.source, alice_seed,
                                  bob_seed, config.qber_z_intrinsic);
  auto [records, filter_report] = apply_temporal_filter(raw, config.link.filter_width_s);

  SessionResult r;
  ClassicalChannel& ch = r.channel;

  // Basis reconciliation over the channel: Bob announces (slot, basis) for
  // every surviving detection; Alice answers with keep flags and, for kept
  // slots, the intensity tag.
  Bits bases;
  for (const auto& rec : records) {
    append_u64(bases, rec.slot, 64);
    bases.push_back(rec.basis_measured == Basis::X);
  }
  ch.send(Direction::b_to_a, MsgKind::sift_bases, bases);
  (void)ch.receive(Direction::b_to_a);  // Alice consumes the announcement
  Bits keep;
  for (const auto& rec : records) {
    PreparedState st = prepared_state_at(rec.slot, config.protocol, alice_seed);
    keep.push_back(st.basis == rec.basis_measured);
    keep.push_back(st.intensity == Intensity::decoy);
  }
  ch.send(Direction::a_to_b, MsgKind::sift_keep, keep);
  (void)ch.receive(Direction::a_to_b);  // Bob consumes the keep flags
  r.ledger.sift_disclosed_bits = bases.size() + keep.size();

  auto lookup = [&](std::uint64_t slot) { return prepared_state_at(slot, config.protocol, alice_seed); };
  SiftedBlock sifted = sift(lookup, n_slots, records);
  r.n_z = sifted.n_z();
  r.qber_x = sifted.qber_x_observed;
  r.block_time_s = double(n_slots) / config.source.qubit_rate_hz;
  if (sifted.n_z() == 0) {
    r.status = SessionStatus::bounds_vacuous;
    r.leak_audit_ok = audit_leak(ch.transcript(), r.ledger);
    return r;
  }

  Rng cascade_rng = Rng::stream(seed, kSaltCascade, epoch);
  ReconciliationResult rec = run_cascade(sifted.bits_alice, sifted.bits_bob, config.qber_est,
                                         config.cascade_iterations, ch, cascade_rng);
  r.leak_bits = rec.leak_bits;
  r.ledger.ec_disclosed_bits = rec.leak_bits;
  r.qber_z = double(rec.flipped.size()) / double(sifted.n_z());
  r.f_ec = rec.f_ec;

  Rng verify_rng = Rng::stream(seed, kSaltVerify, epoch);
  auto [verified, t] = verify(sifted.bits_alice, rec.corrected_key, config.protocol.eps_corr, ch, verify_rng);
  r.ledger.verify_bits = static_cast<std::uint64_t>(t);
  if (!verified) {
    r.status = SessionStatus::verify_failed;
    r.leak_audit_ok = audit_leak(ch.transcript(), r.ledger);
    return r;
  }

  // Bob discloses the corrected-error split by intensity; with the key now
  // reconciled these counts carry no information beyond the parities already
  // on the transcript.
  std::uint64_t m_z_mu1 = 0, m_z_mu2 = 0;
  for (std::size_t idx : rec.flipped)
    (sifted.intensity[idx] == Intensity::signal ? m_z_mu1 : m_z_mu2) += 1;
  Bits counts_msg;
  append_u64(counts_msg, m_z_mu1, 32);
  append_u64(counts_msg, m_z_mu2, 32);
  ch.send(Direction::b_to_a, MsgKind::counts, counts_msg);
  (void)ch.receive(Direction::b_to_a);  // Alice consumes the error split

  DecoyCounts counts;
  counts.n_z_mu1 = double(sifted.n_z_mu1);
  counts.n_z_mu2 = double(sifted.n_z_mu2);
  counts.n_x_mu1 = double(sifted.n_x_mu1);
  counts.n_x_mu2 = double(sifted.n_x_mu2);
  counts.m_x_mu1 = double(sifted.m_x_mu1);
  counts.m_x_mu2 = double(sifted.m_x_mu2);
  counts.m_z_mu1 = double(m_z_mu1);
  counts.m_z_mu2 = double(m_z_mu2);

  DecoyBounds bounds = decoy_bounds(counts, config.protocol);
  r.breakdown = make_breakdown(bounds, double(rec.leak_bits), r.block_time_s, config.protocol);
  r.l_secret = r.breakdown.l_secret;
  r.skr_bps = r.breakdown.skr_bps;

  if (bounds.vacuous) {
    r.status = SessionStatus::bounds_vacuous;
  } else if (r.l_secret <= 0) {
    r.status = SessionStatus::zero_key;
  } else {
    Rng pa_rng = Rng::stream(seed, kSaltPa, epoch);
    r.key_alice = amplify(sifted.bits_alice, std::size_t(r.l_secret), ch, pa_rng, config.link_id,
                          epoch, config.protocol);
    r.key_bob = amplify_receive(rec.corrected_key, std::size_t(r.l_secret), ch, config.link_id,
                                epoch, config.protocol);
    r.ledger.pa_seed_bits = sifted.n_z() + std::uint64_t(r.l_secret) - 1;
    r.status = SessionStatus::success;
  }
  r.leak_audit_ok = audit_leak(ch.transcript(), r.ledger);
  return r;
}

}  // namespace qkdnet
