#include "qkdnet/qsim.hpp"

#include <cmath>
#include <stdexcept>

namespace qkdnet {

namespace {

constexpr std::uint64_t kSaltAlice = 0x11;
constexpr std::uint64_t kSaltBob = 0x22;
constexpr std::uint64_t kSaltCandidates = 0x33;

struct ArmGeometry {
  double t_channel, t_z, t_x, eta;
  double p_dark;       // per slot, per detector
  double slot_s;
  std::uint64_t holdoff_slots;

  ArmGeometry(const LinkParams& link, const SourceParams& source) {
    t_channel = db_to_transmittance(link.channel_att_db);
    t_z = db_to_transmittance(link.loss_z_db);
    t_x = db_to_transmittance(link.loss_x_db);
    eta = link.det_efficiency;
    p_dark = link.dark_rate_hz / source.qubit_rate_hz;
    slot_s = 1.0 / source.qubit_rate_hz;
    holdoff_slots = static_cast<std::uint64_t>(std::llround(link.holdoff_s * source.qubit_rate_hz));
  }

  double p_signal(double mu, Basis arm) const {
    double t = t_channel * (arm == Basis::Z ? t_z : t_x) * eta;
    return 1.0 - std::exp(-mu * t);
  }
};

struct SlotClicks {
  bool click_z = false, click_x = false;      // detector fired (dead time not yet applied)
  bool record_z = false, record_x = false;    // a usable record exists for the arm
  DetectionRecord rec_z, rec_x;
};

// Resolves one slot given the drawn events. Basis choice is passive: the
// receiver splitter routes light to both arms (splitting ratio folded into
// loss_z/loss_x), and the arm that clicks defines the measured basis.
// Within-arm signal+dark with disagreeing outcomes is a double-bin click:
// detector fires, record discarded. Both-arm clicks are resolved by the
// caller.
SlotClicks resolve_slot(std::uint64_t slot, const PreparedState& st, bool sig_z, bool sig_x, bool dark_z,
                        bool dark_x, Rng& rng, const ArmGeometry& g, const LinkParams& link,
                        double qber_z_intrinsic) {
  SlotClicks out;

  auto resolve_arm = [&](Basis arm, bool sig_here, bool dark, bool& click, bool& has_rec,
                         DetectionRecord& rec) {
    std::uint8_t sig_outcome = 0;
    double sig_offset = 0.0;
    if (sig_here) {
      if (arm == Basis::Z) {
        if (st.basis == Basis::Z)
          sig_outcome = st.bit ^ static_cast<std::uint8_t>(rng.bernoulli(qber_z_intrinsic));
        else
          sig_outcome = static_cast<std::uint8_t>(rng.bernoulli(0.5));  // X state in timing basis
      } else {
        if (st.basis == Basis::X)
          sig_outcome = static_cast<std::uint8_t>(rng.bernoulli(qber_from_visibility(link.visibility_x)));
        else
          sig_outcome = static_cast<std::uint8_t>(rng.bernoulli(0.5));  // Z state through the DLI
      }
      sig_offset = rng.gaussian() * link.jitter_rms_s;
    }
    std::uint8_t dark_outcome = static_cast<std::uint8_t>(rng.bernoulli(0.5));
    double dark_offset = (rng.uniform() - 0.5) * g.slot_s;
    if (!sig_here && !dark) return;
    click = true;
    if (sig_here && dark && sig_outcome != dark_outcome) return;  // double bin, discard
    has_rec = true;
    if (sig_here)
      rec = DetectionRecord{slot, arm, sig_outcome, sig_offset, false};
    else
      rec = DetectionRecord{slot, arm, dark_outcome, dark_offset, true};
  };
  // fixed draw order: Z arm first
  resolve_arm(Basis::Z, sig_z, dark_z, out.click_z, out.record_z, out.rec_z);
  resolve_arm(Basis::X, sig_x, dark_x, out.click_x, out.record_x, out.rec_x);
  return out;
}

class DeadTimeTracker {
 public:
  explicit DeadTimeTracker(std::uint64_t holdoff_slots) : holdoff_(holdoff_slots) {}
  bool alive(Basis arm, std::uint64_t slot) const { return slot >= next_free_[static_cast<int>(arm)]; }
  void fired(Basis arm, std::uint64_t slot) { next_free_[static_cast<int>(arm)] = slot + holdoff_ + 1; }

 private:
  std::uint64_t holdoff_;
  std::uint64_t next_free_[2] = {0, 0};
};

void commit_slot(SlotClicks& sc, std::uint64_t slot, DeadTimeTracker& dead,
                 std::vector<DetectionRecord>& out) {
  if (sc.click_z && !dead.alive(Basis::Z, slot)) { sc.click_z = false; sc.record_z = false; }
  if (sc.click_x && !dead.alive(Basis::X, slot)) { sc.click_x = false; sc.record_x = false; }
  if (sc.click_z) dead.fired(Basis::Z, slot);
  if (sc.click_x) dead.fired(Basis::X, slot);
  if (sc.click_z && sc.click_x) return;  // both detectors: discard records
  if (sc.record_z) out.push_back(sc.rec_z);
  if (sc.record_x) out.push_back(sc.rec_x);
}

}  // namespace

PreparedState prepared_state_at(std::uint64_t slot, const ProtocolParams& protocol, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, kSaltAlice, slot);
  PreparedState st;
  st.slot = slot;
  st.basis = rng.bernoulli(protocol.p_za) ? Basis::Z : Basis::X;
  std::uint8_t bit = static_cast<std::uint8_t>(rng.bernoulli(0.5));  // always drawn, used only in Z
  st.bit = (st.basis == Basis::Z) ? bit : 0;
  st.intensity = rng.bernoulli(protocol.p_mu1) ? Intensity::signal : Intensity::decoy;
  return st;
}

std::vector<PreparedState> generate_states(std::uint64_t n, const ProtocolParams& protocol, std::uint64_t seed) {
  std::vector<PreparedState> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(prepared_state_at(i, protocol, seed));
  return out;
}

std::vector<DetectionRecord> simulate_link(std::span<const PreparedState> states, const LinkParams& link,
                                           const ProtocolParams& protocol, const SourceParams& source,
                                           std::uint64_t seed, double qber_z_intrinsic) {
  ArmGeometry g(link, source);
  DeadTimeTracker dead(g.holdoff_slots);
  std::vector<DetectionRecord> out;
  for (const auto& st : states) {
    Rng rng = Rng::stream(seed, kSaltBob, st.slot);
    double mu = (st.intensity == Intensity::signal) ? protocol.mu1 : protocol.mu2;
    bool sig_z = rng.bernoulli(g.p_signal(mu, Basis::Z));
    bool sig_x = rng.bernoulli(g.p_signal(mu, Basis::X));
    bool dark_z = rng.bernoulli(g.p_dark);
    bool dark_x = rng.bernoulli(g.p_dark);
    SlotClicks sc = resolve_slot(st.slot, st, sig_z, sig_x, dark_z, dark_x, rng, g, link, qber_z_intrinsic);
    commit_slot(sc, st.slot, dead, out);
  }
  return out;
}

std::vector<DetectionRecord> simulate_link_sparse(std::uint64_t n_slots, const LinkParams& link,
                                                  const ProtocolParams& protocol, const SourceParams& source,
                                                  std::uint64_t alice_seed, std::uint64_t bob_seed,
                                                  double qber_z_intrinsic) {
  ArmGeometry g(link, source);
  double p_sig_z_max = g.p_signal(protocol.mu1, Basis::Z);
  double p_sig_x_max = g.p_signal(protocol.mu1, Basis::X);
  double one_minus_dark2 = (1.0 - g.p_dark) * (1.0 - g.p_dark);
  double p_cand = 1.0 - (1.0 - p_sig_z_max) * (1.0 - p_sig_x_max) * one_minus_dark2;
  std::vector<DetectionRecord> out;
  if (p_cand <= 0.0) return out;

  DeadTimeTracker dead(g.holdoff_slots);
  Rng cand_rng = Rng::stream(bob_seed, kSaltCandidates, 0);
  const double log1m = std::log1p(-p_cand);
  std::uint64_t slot = 0;
  bool first = true;
  while (true) {
    // geometric gap to the next candidate slot
    double u = cand_rng.uniform();
    while (u <= 0.0) u = cand_rng.uniform();
    std::uint64_t gap = (p_cand >= 1.0) ? 0 : static_cast<std::uint64_t>(std::log(u) / log1m);
    slot += gap + (first ? 0 : 1);
    first = false;
    if (slot >= n_slots) break;

    PreparedState st = prepared_state_at(slot, protocol, alice_seed);
    Rng rng = Rng::stream(bob_seed, kSaltBob, slot);
    double mu = (st.intensity == Intensity::signal) ? protocol.mu1 : protocol.mu2;
    double p_sig_z = g.p_signal(mu, Basis::Z);
    double p_sig_x = g.p_signal(mu, Basis::X);
    double p_any = 1.0 - (1.0 - p_sig_z) * (1.0 - p_sig_x) * one_minus_dark2;
    if (!rng.bernoulli(p_any / p_cand)) continue;  // thinning
    // sample the event tuple conditioned on at least one event: one uniform
    // over the 15 non-empty (sig_z, sig_x, dark_z, dark_x) combinations,
    // whose weights sum to p_any
    bool sig_z = false, sig_x = false, dark_z = false, dark_x = false;
    double u2 = rng.uniform() * p_any;
    for (int m = 1; m < 16; ++m) {
      double w = (m & 8 ? p_sig_z : 1.0 - p_sig_z) * (m & 4 ? p_sig_x : 1.0 - p_sig_x) *
                 (m & 2 ? g.p_dark : 1.0 - g.p_dark) * (m & 1 ? g.p_dark : 1.0 - g.p_dark);
      if (u2 < w || m == 15) {
        sig_z = (m & 8) != 0;
        sig_x = (m & 4) != 0;
        dark_z = (m & 2) != 0;
        dark_x = (m & 1) != 0;
        break;
      }
      u2 -= w;
    }
    SlotClicks sc = resolve_slot(slot, st, sig_z, sig_x, dark_z, dark_x, rng, g, link, qber_z_intrinsic);
    commit_slot(sc, slot, dead, out);
  }
  return out;
}

std::pair<std::vector<DetectionRecord>, FilterReport> apply_temporal_filter(
    std::span<const DetectionRecord> records, double width_s) {
  if (width_s <= 0.0) throw std::invalid_argument("apply_temporal_filter: width must be > 0");
  std::vector<DetectionRecord> kept;
  FilterReport report;
  for (const auto& r : records) {
    bool pass = std::abs(r.time_offset_s) <= width_s / 2.0;
    if (r.is_dark) {
      ++report.dark_in;
      report.dark_kept += pass;
    } else {
      ++report.signal_in;
      report.signal_kept += pass;
    }
    if (pass) kept.push_back(r);
  }
  return {std::move(kept), report};
}

}  // namespace qkdnet
