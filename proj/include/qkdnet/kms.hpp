#pragma once

#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "qkdnet/core.hpp"

namespace qkdnet {

/// One consumed interval of generated key material, in the bit space of the
/// original block it came from. `source` identifies that block
/// ("pool/link_id/epoch"); the no-reuse audit checks ranges per source are
/// pairwise disjoint.
struct ConsumedRange {
  std::string source;
  std::uint64_t lo = 0, hi = 0;  // [lo, hi)
};

struct RequestResult {
  bool available = false;  ///< false = KEY_UNAVAILABLE; a generation request was logged
  std::uint64_t key_id = 0;
  KeyMaterial material;  ///< status reserved when available
};

/// Synchronized per-pool key store with a fresh -> reserved -> consumed
/// lifecycle, split accounting, optional append-only persistence, and a
/// global consumed-range audit. Pools are named by peer or link id.
class KeyStore {
 public:
  KeyStore() = default;

  /// Replays an existing event log, then appends all further events to it.
  void open_log(const std::string& path);

  void add_key(const std::string& pool, KeyMaterial material);

  /// Reserves the oldest fresh material of `size_bits`, splitting a larger
  /// block (the remainder stays fresh). KEY_UNAVAILABLE bumps the pool's
  /// generation-request counter instead of throwing.
  RequestResult request_key(const std::string& pool, std::uint64_t size_bits);

  bool ack(const std::string& pool, std::uint64_t key_id);      ///< reserved -> consumed
  bool release(const std::string& pool, std::uint64_t key_id);  ///< reserved -> fresh (abort)

  std::uint64_t fresh_bits(const std::string& pool) const;
  std::uint64_t generation_requests(const std::string& pool) const;

  /// Splits the oldest fresh material into floor(len / block_bits) exported
  /// (consumed) serialized blocks; the tail remainder stays fresh.
  std::vector<std::vector<std::uint8_t>> export_blocks(const std::string& pool,
                                                       std::uint32_t block_bits = 2048);

  bool audit_no_reuse() const;
  std::vector<ConsumedRange> consumed_ranges() const;

 private:
  struct Entry {
    std::uint64_t id = 0;
    KeyMaterial material;
    std::string source;        // original block identity
    std::uint64_t offset = 0;  // bit offset inside the original block
  };

  RequestResult request_key_locked(const std::string& pool, std::uint64_t size_bits);
  std::vector<std::vector<std::uint8_t>> export_locked(const std::string& pool, std::uint32_t block_bits);
  bool set_status_locked(const std::string& pool, std::uint64_t key_id, KeyStatus from, KeyStatus to);
  void consume_entry_locked(const std::string& pool, Entry& e);
  void log_event(const std::string& line);

  mutable std::mutex mu_;
  std::map<std::string, std::deque<Entry>> pools_;
  std::map<std::string, std::uint64_t> generation_requests_;
  std::vector<ConsumedRange> consumed_;
  std::uint64_t next_id_ = 1;
  std::ofstream log_;
};

/// Export block wire format: "QKDK1", 2-byte big-endian link_id byte length,
/// link_id UTF-8 bytes, 8-byte big-endian epoch, 4-byte big-endian bit
/// count, key bytes MSB-first.
std::vector<std::uint8_t> serialize_key_block(const KeyMaterial& material);
KeyMaterial parse_key_block(std::span<const std::uint8_t> data);

/// One trusted intermediate node: strip the incoming hop's one-time pad,
/// apply the outgoing hop's.
Bits relay_hop_reencrypt(const Bits& ciphertext, const Bits& key_in, const Bits& key_out);

struct RelayResult {
  bool ok = false;
  std::string error;
  KeyMaterial initiator_key, responder_key;  ///< bit-identical on success
  std::vector<std::string> hop_links;
};

/// Node/link topology wrapped around one KeyStore whose pools are link ids.
/// Each link's pool is the shared secret material held by both endpoints,
/// so consuming it once covers both sides.
class KmsNetwork {
 public:
  void add_node(const std::string& node_id);
  void add_link(const std::string& link_id, const std::string& a, const std::string& b);

  bool has_node(const std::string& node_id) const;
  /// Link id joining two adjacent nodes, or "" if none.
  std::string link_between(const std::string& a, const std::string& b) const;

  void deliver(const std::string& link_id, KeyMaterial material);

  RequestResult request_key(const std::string& node, const std::string& peer, std::uint64_t size_bits);
  bool ack(const std::string& node, const std::string& peer, std::uint64_t key_id);

  /// Hop-by-hop one-time-pad relay along `path` (node ids). The first hop's
  /// key is the end-to-end secret; every intermediate node re-encrypts it
  /// onto the next hop. All hop reservations are taken before any bit is
  /// consumed; on shortage everything is released and ok=false.
  RelayResult relay(std::span<const std::string> path, std::uint64_t size_bits, std::uint64_t epoch);

  KeyStore& store() { return store_; }
  const KeyStore& store() const { return store_; }

 private:
  struct Link {
    std::string id, a, b;
  };
  std::vector<std::string> nodes_;
  std::vector<Link> links_;
  KeyStore store_;
};

}  // namespace qkdnet
