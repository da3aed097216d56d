#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <thread>
#include <vector>

#include "qkdnet/channel.hpp"
#include "qkdnet/session.hpp"

using namespace qkdnet;

TEST_CASE("channel: ordered delivery, counters, transcript") {
  ClassicalChannel ch;
  CHECK_FALSE(ch.pending(Direction::a_to_b));
  ch.send(Direction::a_to_b, MsgKind::seed, Bits::from_string("1010"));
  ch.send(Direction::a_to_b, MsgKind::parity, Bits::from_string("111"));
  ch.send(Direction::b_to_a, MsgKind::status, Bits::from_string("1"));
  CHECK(ch.pending(Direction::a_to_b));
  CHECK(ch.bits_sent(Direction::a_to_b) == 7);
  CHECK(ch.bits_sent(Direction::b_to_a) == 1);

  Message m1 = ch.receive(Direction::a_to_b);
  CHECK(m1.kind == MsgKind::seed);
  CHECK(m1.payload.to_string() == "1010");
  Message m2 = ch.receive(Direction::a_to_b);
  CHECK(m2.kind == MsgKind::parity);
  CHECK_FALSE(ch.pending(Direction::a_to_b));
  CHECK(ch.pending(Direction::b_to_a));
  CHECK_THROWS(ch.receive(Direction::a_to_b));

  // transcript retains everything, including consumed messages
  CHECK(ch.transcript().size() == 3);
  std::string dump = ch.dump_transcript();
  CHECK(dump.find("seed") != std::string::npos);
  CHECK(dump.find("parity") != std::string::npos);
  CHECK(std::count(dump.begin(), dump.end(), '\n') == 3);
}

TEST_CASE("leak audit: empty transcript matches the zero ledger") {
  CHECK(audit_leak({}, LeakLedger{}));
}

TEST_CASE("leak audit: per-category recount and tamper detection") {
  ClassicalChannel ch;
  ch.send(Direction::b_to_a, MsgKind::sift_bases, Bits(130));
  ch.send(Direction::a_to_b, MsgKind::sift_keep, Bits(4));
  ch.send(Direction::a_to_b, MsgKind::parity, Bits(10));
  ch.send(Direction::b_to_a, MsgKind::parity, Bits(7));
  ch.send(Direction::a_to_b, MsgKind::hash, Bits(40));
  ch.send(Direction::a_to_b, MsgKind::pa_seed, Bits(99));
  ch.send(Direction::a_to_b, MsgKind::seed, Bits(64));  // seeds are not leak

  LeakLedger ledger;
  ledger.sift_disclosed_bits = 134;
  ledger.ec_disclosed_bits = 17;
  ledger.verify_bits = 40;
  ledger.pa_seed_bits = 99;
  CHECK(audit_leak(ch.transcript(), ledger));

  // an undeclared parity message must fail the audit
  ch.send(Direction::a_to_b, MsgKind::parity, Bits(1));
  CHECK_FALSE(audit_leak(ch.transcript(), ledger));
  ledger.ec_disclosed_bits = 18;
  CHECK(audit_leak(ch.transcript(), ledger));

  // ...and so must a wrong count in any other category
  ledger.verify_bits = 39;
  CHECK_FALSE(audit_leak(ch.transcript(), ledger));
}

TEST_CASE("wire framing: round trip and partial-buffer handling") {
  Rng rng(5);
  for (std::size_t n : {0, 1, 7, 8, 9, 31, 1000}) {
    Bits payload = Bits::random(n, rng);
    auto frame = encode_frame(MsgKind::parity, payload);
    CHECK(frame.size() == 5 + (n + 7) / 8);

    std::size_t consumed = 0;
    auto out = decode_frame(frame, consumed);
    REQUIRE(out.has_value());
    CHECK(out->first == MsgKind::parity);
    CHECK(out->second == payload);
    CHECK(consumed == frame.size());

    // every strict prefix is incomplete
    for (std::size_t cut = 0; cut < frame.size(); ++cut) {
      std::size_t c = 0;
      CHECK_FALSE(decode_frame(std::span(frame.data(), cut), c).has_value());
      CHECK(c == 0);
    }
  }

  // two frames back to back decode in order
  auto f1 = encode_frame(MsgKind::seed, Bits::from_string("110"));
  auto f2 = encode_frame(MsgKind::hash, Bits::from_string("01"));
  std::vector<std::uint8_t> buf(f1);
  buf.insert(buf.end(), f2.begin(), f2.end());
  std::size_t consumed = 0;
  auto a = decode_frame(buf, consumed);
  REQUIRE(a.has_value());
  CHECK(a->first == MsgKind::seed);
  auto b = decode_frame(std::span(buf.data() + consumed, buf.size() - consumed), consumed);
  REQUIRE(b.has_value());
  CHECK(b->second.to_string() == "01");
}

TEST_CASE("wire framing: survives a byte-stream transport") {
  int fds[2];
  REQUIRE(socketpair(AF_UNIX, SOCK_STREAM, 0, fds) == 0);
  Rng rng(6);
  std::vector<Bits> payloads;
  for (int i = 0; i < 20; ++i) payloads.push_back(Bits::random(std::size_t(rng.below(600)), rng));

  std::thread writer([&] {
    for (const auto& p : payloads) {
      auto f = encode_frame(MsgKind::parity, p);
      std::size_t off = 0;
      while (off < f.size()) {
        ssize_t w = write(fds[0], f.data() + off, f.size() - off);
        REQUIRE(w > 0);
        off += std::size_t(w);
      }
    }
    close(fds[0]);
  });

  std::vector<std::uint8_t> buf;
  std::size_t decoded = 0;
  std::uint8_t tmp[64];  // deliberately small reads to split frames
  for (;;) {
    ssize_t r = read(fds[1], tmp, sizeof tmp);
    if (r <= 0) break;
    buf.insert(buf.end(), tmp, tmp + r);
    std::size_t consumed = 0;
    while (true) {
      std::size_t c = 0;
      auto m = decode_frame(std::span(buf.data() + consumed, buf.size() - consumed), c);
      if (!m) break;
      REQUIRE(decoded < payloads.size());
      CHECK(m->second == payloads[decoded]);
      ++decoded;
      consumed += c;
    }
    buf.erase(buf.begin(), buf.begin() + std::ptrdiff_t(consumed));
  }
  writer.join();
  close(fds[1]);
  CHECK(decoded == payloads.size());
  CHECK(buf.empty());
}

namespace {

SessionConfig friendly_config() {
  SessionConfig c;
  c.link_id = "T1";
  c.link.channel_att_db = 3.0;
  c.link.loss_z_db = 0.5;
  c.link.loss_x_db = 1.0;
  c.link.visibility_x = 1.0;
  c.link.det_efficiency = 0.5;
  c.link.dark_rate_hz = 0.0;
  c.link.holdoff_s = 0.0;
  c.link.filter_width_s = 200e-12;
  c.link.jitter_rms_s = 20e-12;
  c.qber_z_intrinsic = 0.0;
  c.qber_est = 0.01;
  c.n_z_target = 20000;
  return c;
}

}  // namespace

TEST_CASE("block session: clean link produces identical verified keys") {
  SessionConfig cfg = friendly_config();
  SessionResult r = run_block_session(cfg, 0, 12345);
  REQUIRE(r.status == SessionStatus::success);
  CHECK(double(r.n_z) >= 0.9 * double(cfg.n_z_target));
  CHECK(r.qber_z < 0.005);
  CHECK(r.l_secret > 0);
  CHECK(r.key_alice.bits.size() == std::size_t(r.l_secret));
  CHECK(r.key_alice.bits == r.key_bob.bits);
  CHECK(r.leak_audit_ok);
  CHECK(r.ledger.ec_disclosed_bits == r.leak_bits);
  CHECK(r.ledger.pa_seed_bits == r.n_z + std::uint64_t(r.l_secret) - 1);
  CHECK(r.skr_bps > 0.0);

  // deterministic: an identical run yields the identical key
  SessionResult r2 = run_block_session(cfg, 0, 12345);
  CHECK(r2.status == SessionStatus::success);
  CHECK(r2.key_alice.bits == r.key_alice.bits);
  CHECK(r2.leak_bits == r.leak_bits);

  // a different epoch yields a different key
  SessionResult r3 = run_block_session(cfg, 1, 12345);
  CHECK(r3.key_alice.bits != r.key_alice.bits);
}

TEST_CASE("block session: intrinsic errors are corrected and accounted") {
  SessionConfig cfg = friendly_config();
  cfg.qber_z_intrinsic = 0.012;
  cfg.qber_est = 0.013;
  SessionResult r = run_block_session(cfg, 0, 777);
  REQUIRE(r.status == SessionStatus::success);
  CHECK(r.qber_z == doctest::Approx(0.012).epsilon(0.25));
  CHECK(r.key_alice.bits == r.key_bob.bits);
  CHECK(r.f_ec > 1.0);
  CHECK(r.f_ec < 1.6);
  CHECK(r.leak_audit_ok);
}
