#include "qkdnet/channel.hpp"

#include <sstream>
#include <stdexcept>

namespace qkdnet {

const char* msg_kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::sift_bases: return "sift_bases";
    case MsgKind::sift_keep: return "sift_keep";
    case MsgKind::seed: return "seed";
    case MsgKind::parity_request: return "parity_request";
    case MsgKind::parity: return "parity";
    case MsgKind::hash: return "hash";
    case MsgKind::status: return "status";
    case MsgKind::counts: return "counts";
    case MsgKind::pa_seed: return "pa_seed";
  }
  return "?";
}

void ClassicalChannel::send(Direction dir, MsgKind kind, Bits payload) {
  bits_sent_[static_cast<int>(dir)] += payload.size();
  queue_[static_cast<int>(dir)].push_back(transcript_.size());
  transcript_.push_back(Message{dir, kind, std::move(payload)});
}

Message ClassicalChannel::receive(Direction dir) {
  auto& q = queue_[static_cast<int>(dir)];
  if (q.empty()) throw std::runtime_error("ClassicalChannel::receive: no pending message");
  Message m = transcript_[q.front()];
  q.pop_front();
  return m;
}

bool ClassicalChannel::pending(Direction dir) const { return !queue_[static_cast<int>(dir)].empty(); }

std::string ClassicalChannel::dump_transcript() const {
  std::ostringstream os;
  static const char* hexd = "0123456789abcdef";
  for (const auto& m : transcript_) {
    os << (m.dir == Direction::a_to_b ? "a>b" : "b>a") << ' ' << msg_kind_name(m.kind) << ' '
       << m.payload.size() << ' ';
    for (auto byte : m.payload.to_bytes_msb_first()) os << hexd[byte >> 4] << hexd[byte & 0xF];
    os << '\n';
  }
  return os.str();
}

bool audit_leak(const std::vector<Message>& transcript, const LeakLedger& ledger) {
  LeakLedger seen;
  for (const auto& m : transcript) {
    switch (m.kind) {
      case MsgKind::sift_bases:
      case MsgKind::sift_keep:
        seen.sift_disclosed_bits += m.payload.size();
        break;
      case MsgKind::parity:
        seen.ec_disclosed_bits += m.payload.size();
        break;
      case MsgKind::hash:
        seen.verify_bits += m.payload.size();
        break;
      case MsgKind::pa_seed:
        seen.pa_seed_bits += m.payload.size();
        break;
      default:
        break;  // seeds, requests and statuses reveal nothing about the key
    }
  }
  return seen.sift_disclosed_bits == ledger.sift_disclosed_bits &&
         seen.ec_disclosed_bits == ledger.ec_disclosed_bits &&
         seen.verify_bits == ledger.verify_bits && seen.pa_seed_bits == ledger.pa_seed_bits;
}

std::vector<std::uint8_t> encode_frame(MsgKind kind, const Bits& payload) {
  std::vector<std::uint8_t> out;
  std::uint32_t nbits = static_cast<std::uint32_t>(payload.size());
  out.push_back(static_cast<std::uint8_t>(nbits >> 24));
  out.push_back(static_cast<std::uint8_t>(nbits >> 16));
  out.push_back(static_cast<std::uint8_t>(nbits >> 8));
  out.push_back(static_cast<std::uint8_t>(nbits));
  out.push_back(static_cast<std::uint8_t>(kind));
  auto bytes = payload.to_bytes_msb_first();
  out.insert(out.end(), bytes.begin(), bytes.end());
  return out;
}

std::optional<std::pair<MsgKind, Bits>> decode_frame(std::span<const std::uint8_t> buf, std::size_t& consumed) {
  if (buf.size() < 5) return std::nullopt;
  std::uint32_t nbits = (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
                        (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
  std::size_t nbytes = (nbits + 7) / 8;
  if (buf.size() < 5 + nbytes) return std::nullopt;
  MsgKind kind = static_cast<MsgKind>(buf[4]);
  Bits payload = Bits::from_bytes_msb_first(buf.subspan(5, nbytes), nbits);
  consumed += 5 + nbytes;
  return std::make_pair(kind, std::move(payload));
}

}  // namespace qkdnet
