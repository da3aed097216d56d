// End-to-end acceptance checks for the full stack. Each numbered criterion
// prints exactly one PASS/FAIL line; the process exits nonzero if any fails.
//
// Usage: acceptance <network-config.json>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <new>
#include <string>
#include <vector>

#include "qkdnet/cascade.hpp"
#include "qkdnet/config.hpp"
#include "qkdnet/kms.hpp"
#include "qkdnet/privamp.hpp"
#include "qkdnet/scenario.hpp"

using namespace qkdnet;

// ---------------------------------------------------------------------------
// Heap instrumentation for the streaming-hash memory audit (criterion 4).
// Every allocation is padded with a header recording its size so peak live
// bytes can be tracked without any container (which would itself allocate).

namespace {

std::atomic<long long> g_live_bytes{0};
std::atomic<long long> g_peak_bytes{0};

constexpr std::size_t kHeader = 16;  // keeps 16-byte alignment for the payload

void* tracked_alloc(std::size_t size) {
  void* raw = std::malloc(size + kHeader);
  if (!raw) throw std::bad_alloc();
  *static_cast<std::size_t*>(raw) = size;
  long long live = g_live_bytes.fetch_add(static_cast<long long>(size)) + static_cast<long long>(size);
  long long peak = g_peak_bytes.load();
  while (live > peak && !g_peak_bytes.compare_exchange_weak(peak, live)) {
  }
  return static_cast<char*>(raw) + kHeader;
}

void tracked_free(void* p) noexcept {
  if (!p) return;
  void* raw = static_cast<char*>(p) - kHeader;
  g_live_bytes.fetch_sub(static_cast<long long>(*static_cast<std::size_t*>(raw)));
  std::free(raw);
}

void reset_peak() { g_peak_bytes.store(g_live_bytes.load()); }
long long peak_delta(long long baseline) { return g_peak_bytes.load() - baseline; }

}  // namespace

void* operator new(std::size_t size) { return tracked_alloc(size); }
void* operator new[](std::size_t size) { return tracked_alloc(size); }
void operator delete(void* p) noexcept { tracked_free(p); }
void operator delete[](void* p) noexcept { tracked_free(p); }
void operator delete(void* p, std::size_t) noexcept { tracked_free(p); }
void operator delete[](void* p, std::size_t) noexcept { tracked_free(p); }

// ---------------------------------------------------------------------------

namespace {

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int idx, const std::string& what, bool ok, double elapsed_s, const std::string& detail) {
  std::printf("[%d] %-52s %s (%.1f s)%s%s\n", idx, what.c_str(), ok ? "PASS" : "FAIL", elapsed_s,
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

// Criterion 1: analytic per-link key rates against the published references.
void check_keyrates(const NetworkConfig& config) {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  std::vector<KeyrateRow> rows = run_keyrate(config);
  if (rows.size() != config.links.size()) ok = false;
  for (const auto& r : rows) {
    double ref = r.reference_skr_bps;
    double rel = ref > 0 ? std::abs(r.breakdown.skr_bps - ref) / ref : 1.0;
    if (r.vacuous || rel > 0.20) ok = false;
    detail += r.link_id + " " + std::to_string(int(std::lround(r.breakdown.skr_bps))) + "/" +
              std::to_string(int(std::lround(ref))) + " bps  ";
  }
  double dt = seconds_since(t0);
  if (dt > 5.0) ok = false;
  report(1, "analytic key rates within 20% of reference", ok, dt, detail);
}

// Criterion 2: reconciliation efficiency and zero residual errors on
// 100 kbit key pairs at the three operating error rates.
void check_cascade() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  const double points[3][2] = {{0.0129, 1.28}, {0.0082, 1.25}, {0.0290, 1.26}};
  Rng rng(4242);
  for (const auto& pt : points) {
    double q = pt[0], target = pt[1];
    double f_sum = 0;
    for (int pair = 0; pair < 10; ++pair) {
      const std::size_t n = 100000;
      Bits a = Bits::random(n, rng);
      Bits b = a;
      for (std::size_t i = 0; i < n; ++i)
        if (rng.bernoulli(q)) b.flip(i);
      ClassicalChannel ch;
      Rng pub(rng.next());
      ReconciliationResult r = run_cascade(a, b, q, 8, ch, pub);
      if (!(r.corrected_key == a)) ok = false;  // residual errors
      Rng seed_rng(rng.next());
      if (!verify(a, r.corrected_key, 1e-12, ch, seed_rng).first) ok = false;
      f_sum += r.f_ec;
    }
    double f_mean = f_sum / 10.0;
    if (std::abs(f_mean - target) > 0.15) ok = false;
    char buf[64];
    std::snprintf(buf, sizeof buf, "q=%.2f%% f=%.3f  ", 100 * q, f_mean);
    detail += buf;
  }
  double dt = seconds_since(t0);
  if (dt > 60.0) ok = false;
  report(2, "reconciliation efficiency, zero residual errors", ok, dt, detail);
}

// Criterion 3: ten complete desk-scale blocks on the first link: identical
// verified keys, error rate in band, positive secret length, bit-exact
// disclosure audit.
void check_sessions(const NetworkConfig& config) {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  SimulateReport rep =
      run_simulate(config, "TS-PO", 10, config.scenario.seed, config.scenario.desk_n_z, true);
  double ref_q = config.find_link("TS-PO")->reference_qber_z;
  double q_min = 1, q_max = 0;
  if (rep.sessions.size() != 10) ok = false;
  for (const auto& s : rep.sessions) {
    if (s.status != SessionStatus::success) ok = false;
    if (!(s.key_alice.bits == s.key_bob.bits)) ok = false;
    if (s.l_secret <= 0) ok = false;
    if (std::abs(s.qber_z - ref_q) > 0.005) ok = false;
    if (!s.leak_audit_ok) ok = false;
    if (s.ledger.ec_disclosed_bits != s.leak_bits) ok = false;
    q_min = std::min(q_min, s.qber_z);
    q_max = std::max(q_max, s.qber_z);
  }
  double dt = seconds_since(t0);
  if (dt > 300.0) ok = false;
  char buf[96];
  std::snprintf(buf, sizeof buf, "qber_z in [%.2f%%, %.2f%%], ref %.2f%%", 100 * q_min, 100 * q_max,
                100 * ref_q);
  report(3, "desk-scale blocks: keys identical, audit exact", ok, dt, buf);
}

// Criterion 4: the streaming compression equals the dense matrix definition
// and runs in O(n + l) memory.
void check_toeplitz() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  Rng rng(99);

  auto dense = [](const ToeplitzSpec& spec, const Bits& key) {
    Bits out;
    for (std::size_t i = 0; i < spec.l; ++i) {
      bool acc = false;
      for (std::size_t j = 0; j < spec.n; ++j)
        acc ^= spec.seed.get(j - i + spec.l - 1) && key.get(j);
      out.push_back(acc);
    }
    return out;
  };

  // random shapes up to 4096 input bits
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    std::size_t n = 1 + std::size_t(rng.below(4096));
    std::size_t l = 1 + std::size_t(rng.below(n));
    ToeplitzSpec spec{n, l, Bits::random(n + l - 1, rng)};
    Bits key = Bits::random(n, rng);
    if (!(toeplitz_stream(spec, key) == dense(spec, key))) ok = false;
  }

  // exhaustive over all keys for short inputs
  for (std::size_t n = 1; n <= 10 && ok; ++n) {
    std::size_t l = 1 + std::size_t(rng.below(n));
    ToeplitzSpec spec{n, l, Bits::random(n + l - 1, rng)};
    for (std::uint64_t v = 0; v < (1ull << n) && ok; ++v) {
      Bits key(n);
      for (std::size_t i = 0; i < n; ++i) key.set(i, (v >> i) & 1);
      if (!(toeplitz_stream(spec, key) == dense(spec, key))) ok = false;
    }
  }

  // linearity over random key pairs
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    std::size_t n = 2 + std::size_t(rng.below(1024));
    std::size_t l = 1 + std::size_t(rng.below(n));
    ToeplitzSpec spec{n, l, Bits::random(n + l - 1, rng)};
    Bits a = Bits::random(n, rng);
    Bits b = Bits::random(n, rng);
    Bits sum = a;
    sum.xor_with(b);
    Bits rhs = toeplitz_stream(spec, a);
    rhs.xor_with(toeplitz_stream(spec, b));
    if (!(toeplitz_stream(spec, sum) == rhs)) ok = false;
  }

  // memory audit: a 2e6 -> 1e6 compression must not materialize the matrix
  // (which would be ~250 GB); the O(n + l) path needs well under 8 MB.
  long long mem_mb = -1;
  {
    const std::size_t n = 2'000'000, l = 1'000'000;
    ToeplitzSpec spec{n, l, Bits::random(n + l - 1, rng)};
    Bits key = Bits::random(n, rng);
    reset_peak();
    long long baseline = g_live_bytes.load();
    Bits out = toeplitz_stream(spec, key);
    mem_mb = peak_delta(baseline) / (1 << 20);
    if (peak_delta(baseline) > 8 * (1 << 20)) ok = false;
    if (out.size() != l) ok = false;
  }
  report(4, "streaming compression matches dense matrix, O(n+l) memory", ok, seconds_since(t0),
         "peak extra " + std::to_string(mem_mb) + " MiB at n=2e6");
}

// Criterion 5: verification-hash collision statistics at a scaled-down tag
// width, plus the production tag width implied by the correctness target.
void check_hash_stats() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  Rng rng(12321);
  Bits a = Bits::random(1000, rng);

  int accepts = 0;
  const int trials = 100000;
  for (int s = 0; s < trials; ++s) {
    Bits b = a;
    // random nonzero difference pattern
    std::size_t flips = 1 + std::size_t(rng.below(8));
    for (std::size_t f = 0; f < flips; ++f) b.flip(std::size_t(rng.below(1000)));
    if (b == a) b.flip(0);
    ClassicalChannel ch;
    Rng seed_rng(rng.next());
    if (verify(a, b, 1e-12, ch, seed_rng, 16).first) ++accepts;
  }
  // expected trials * 2^-16 = 1.526, sigma = 1.235; demand <= mean + 3 sigma
  double expected = trials / 65536.0;
  double sigma = std::sqrt(expected * (1.0 - 1.0 / 65536.0));
  if (accepts > int(expected + 3.0 * sigma)) ok = false;

  ClassicalChannel ch;
  Rng seed_rng(1);
  if (verify(a, a, 1e-12, ch, seed_rng).second != 40) ok = false;

  char buf[96];
  std::snprintf(buf, sizeof buf, "%d false accepts in %d trials (expect %.2f, 3-sigma cap %d)",
                accepts, trials, expected, int(expected + 3.0 * sigma));
  report(5, "hash false-accept rate and production tag width", ok, seconds_since(t0), buf);
}

// Criterion 6: end-to-end key relay across all three links, exhaustion
// behavior, and the consumed-range audit under a mixed operation stress run.
void check_relay(const NetworkConfig& config) {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;

  RelayReport rep = run_relay(config, {"RI", "TS", "PO", "LJ"}, 2048, "", config.scenario.seed);
  if (!rep.ok || !rep.no_reuse_ok) ok = false;
  if (!(rep.relay.initiator_key.bits == rep.relay.responder_key.bits)) ok = false;
  if (rep.relay.initiator_key.bits.size() != 2048) ok = false;
  detail = "relay ok, " + std::to_string(rep.generated_blocks) + " blocks generated";

  // exhaustion: with exactly 3000 bits per hop a second 2048-bit relay must
  // fail atomically
  {
    KmsNetwork net;
    for (const char* n : {"RI", "TS", "PO", "LJ"}) net.add_node(n);
    net.add_link("TS-RI", "TS", "RI");
    net.add_link("TS-PO", "TS", "PO");
    net.add_link("PO-LJ", "PO", "LJ");
    Rng mrng(5);
    for (const char* l : {"TS-RI", "TS-PO", "PO-LJ"}) {
      KeyMaterial m;
      m.bits = Bits::random(3000, mrng);
      m.link_id = l;
      net.deliver(l, m);
    }
    std::vector<std::string> path = {"RI", "TS", "PO", "LJ"};
    if (!net.relay(path, 2048, 0).ok) ok = false;
    RelayResult second = net.relay(path, 2048, 1);
    if (second.ok || second.error.empty()) ok = false;
    if (net.store().fresh_bits("TS-RI") != 3000 - 2048) ok = false;  // nothing part-consumed
    if (!net.store().audit_no_reuse()) ok = false;

    // mixed stress: 100 request/ack/release operations, then the audit
    Rng org(6);
    for (int op = 0; op < 100; ++op) {
      const char* link = (op % 3 == 0) ? "TS-RI" : (op % 3 == 1) ? "TS-PO" : "PO-LJ";
      RequestResult r = net.store().request_key(link, 64 + org.below(128));
      if (!r.available) {
        KeyMaterial m;
        m.bits = Bits::random(4096, org);
        m.link_id = link;
        m.epoch = std::uint64_t(op);
        net.deliver(link, m);
        continue;
      }
      if (org.bernoulli(0.3))
        net.store().release(link, r.key_id);
      else
        net.store().ack(link, r.key_id);
    }
    if (!net.store().audit_no_reuse()) ok = false;
  }

  report(6, "three-hop relay, exhaustion handling, no-reuse audit", ok, seconds_since(t0), detail);
}

// Criterion 7: long-run stability under sinusoidal drift of visibility and
// channel attenuation.
void check_drift(const NetworkConfig& config) {
  auto t0 = std::chrono::steady_clock::now();
  DriftReport rep = run_drift(config, "TS-PO", 2);
  bool ok = rep.blocks == config.scenario.drift.blocks && rep.failed == 0 && rep.skr_cv < 0.25;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d blocks, %d failed, skr mean %.0f bps, cv %.3f", rep.blocks,
                rep.failed, rep.skr_mean, rep.skr_cv);
  report(7, "drift run: no failed blocks, stable key rate", ok, seconds_since(t0), buf);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <network-config.json>\n", argv[0]);
    return 2;
  }
  NetworkConfig config;
  try {
    config = load_config(argv[1]);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  check_keyrates(config);
  check_cascade();
  check_sessions(config);
  check_toeplitz();
  check_hash_stats();
  check_relay(config);
  check_drift(config);

  if (g_failures) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all 7 criteria passed\n");
  return 0;
}
