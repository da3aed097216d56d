#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "qkdnet/bits.hpp"

namespace qkdnet {

enum class Direction : std::uint8_t { a_to_b = 0, b_to_a = 1 };

enum class MsgKind : std::uint8_t {
  sift_bases = 1,   // Bob -> Alice: (slot, basis) per detection
  sift_keep = 2,    // Alice -> Bob: keep flags + intensity tags
  seed = 3,         // public randomness (cascade permutations, hash seed)
  parity_request = 4,
  parity = 5,       // disclosed parity bits; the only kind counted as EC leak
  hash = 6,         // error-verification hash value
  status = 7,       // verification verdict
  counts = 8,       // disclosed error counts (post-correction)
  pa_seed = 9,      // privacy-amplification Toeplitz seed
};

const char* msg_kind_name(MsgKind k);

struct Message {
  Direction dir;
  MsgKind kind;
  Bits payload;
};

/// In-process authenticated duplex channel: ordered, unmodified delivery,
/// per-direction bit counters, full transcript. Authentication itself is
/// assumed, not implemented; a MAC hook can wrap send() later.
class ClassicalChannel {
 public:
  void send(Direction dir, MsgKind kind, Bits payload);
  /// Pops the oldest undelivered message in the given direction.
  Message receive(Direction dir);
  bool pending(Direction dir) const;

  std::uint64_t bits_sent(Direction dir) const { return bits_sent_[static_cast<int>(dir)]; }
  const std::vector<Message>& transcript() const { return transcript_; }

  /// One record per line: `dir kind bitlen hex-payload`.
  std::string dump_transcript() const;

 private:
  std::vector<Message> transcript_;
  std::deque<std::size_t> queue_[2];  // indices into transcript_
  std::uint64_t bits_sent_[2] = {0, 0};
};

/// Bit-exact accounting of everything disclosed during one block session.
struct LeakLedger {
  std::uint64_t sift_disclosed_bits = 0;
  std::uint64_t ec_disclosed_bits = 0;  // must equal cascade leak_bits
  std::uint64_t verify_bits = 0;
  std::uint64_t pa_seed_bits = 0;       // n_Z + l - 1 for the block
};

/// Recounts disclosed bits by message kind from the raw transcript and
/// compares against the ledger. True iff every category matches exactly.
bool audit_leak(const std::vector<Message>& transcript, const LeakLedger& ledger);

/// Wire framing for the two-process transport:
/// 4-byte big-endian payload bit count, 1-byte message kind, payload bytes
/// (MSB-first, zero-padded).
std::vector<std::uint8_t> encode_frame(MsgKind kind, const Bits& payload);
/// Decodes one frame from the front of `buf`; returns nullopt if incomplete.
/// On success advances `consumed` past the frame.
std::optional<std::pair<MsgKind, Bits>> decode_frame(std::span<const std::uint8_t> buf, std::size_t& consumed);

}  // namespace qkdnet
