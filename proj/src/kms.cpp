#include "qkdnet/kms.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace qkdnet {

namespace {

using nlohmann::json;

std::string hex_encode(const std::vector<std::uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 15]);
  }
  return out;
}

std::vector<std::uint8_t> hex_decode(const std::string& s) {
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw std::invalid_argument("bad hex digit");
  };
  std::vector<std::uint8_t> out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::uint8_t(nib(s[2 * i]) << 4 | nib(s[2 * i + 1]));
  return out;
}

void put_be(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) out.push_back(std::uint8_t(v >> (8 * i)));
}

std::uint64_t get_be(std::span<const std::uint8_t> in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v = v << 8 | in[at + i];
  return v;
}

Bits xor_bits(const Bits& a, const Bits& b) {
  Bits out = a;
  out.xor_with(b);
  return out;
}

}  // namespace

void KeyStore::open_log(const std::string& path) {
  std::lock_guard lk(mu_);
  if (log_.is_open()) throw std::logic_error("KeyStore: log already open");
  // Replay before opening for append, so replayed events are not re-logged.
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    std::string op = j.at("op");
    if (op == "add") {
      Entry e;
      e.id = next_id_++;
      auto bytes = hex_decode(j.at("bits").get<std::string>());
      e.material.bits = Bits::from_bytes_msb_first(bytes, j.at("nbits").get<std::uint64_t>());
      e.material.link_id = j.at("link");
      e.material.epoch = j.at("epoch");
      std::string pool = j.at("pool");
      e.source = pool + "#" + std::to_string(e.id);
      pools_[pool].push_back(std::move(e));
    } else if (op == "reserve") {
      request_key_locked(j.at("pool"), j.at("bits").get<std::uint64_t>());
    } else if (op == "ack") {
      set_status_locked(j.at("pool"), j.at("id").get<std::uint64_t>(), KeyStatus::reserved,
                        KeyStatus::consumed);
    } else if (op == "release") {
      set_status_locked(j.at("pool"), j.at("id").get<std::uint64_t>(), KeyStatus::reserved,
                        KeyStatus::fresh);
    } else if (op == "export") {
      // Re-derive the export split deterministically.
      export_locked(j.at("pool"), j.at("block_bits").get<std::uint32_t>());
    }
  }
  in.close();
  log_.open(path, std::ios::app);
  if (!log_) throw std::runtime_error("KeyStore: cannot open log " + path);
}

void KeyStore::log_event(const std::string& line) {
  if (log_.is_open()) {
    log_ << line << "\n";
    log_.flush();
  }
}

void KeyStore::add_key(const std::string& pool, KeyMaterial material) {
  std::lock_guard lk(mu_);
  material.status = KeyStatus::fresh;
  Entry e;
  e.id = next_id_++;
  e.source = pool + "#" + std::to_string(e.id);
  e.offset = 0;
  e.material = std::move(material);
  json j{{"op", "add"},
         {"pool", pool},
         {"link", e.material.link_id},
         {"epoch", e.material.epoch},
         {"nbits", e.material.bits.size()},
         {"bits", hex_encode(e.material.bits.to_bytes_msb_first())}};
  pools_[pool].push_back(std::move(e));
  log_event(j.dump());
}

RequestResult KeyStore::request_key_locked(const std::string& pool, std::uint64_t size_bits) {
  if (size_bits == 0) throw std::invalid_argument("request_key: size_bits must be > 0");
  auto& q = pools_[pool];
  for (auto& e : q) {
    if (e.material.status != KeyStatus::fresh || e.material.bits.size() < size_bits) continue;
    if (e.material.bits.size() == size_bits) {
      e.material.status = KeyStatus::reserved;
      return {true, e.id, e.material};
    }
    // Split: the reserved head becomes a new entry, the remainder keeps the
    // original handle and stays fresh in place.
    Entry head;
    head.id = next_id_++;
    head.material = e.material;
    head.material.bits = e.material.bits.slice(0, size_bits);
    head.material.status = KeyStatus::reserved;
    head.source = e.source;
    head.offset = e.offset;
    e.material.bits = e.material.bits.slice(size_bits, e.material.bits.size() - size_bits);
    e.offset += size_bits;
    RequestResult r{true, head.id, head.material};
    q.push_back(std::move(head));
    return r;
  }
  generation_requests_[pool] += 1;
  return {};
}

RequestResult KeyStore::request_key(const std::string& pool, std::uint64_t size_bits) {
  std::lock_guard lk(mu_);
  RequestResult r = request_key_locked(pool, size_bits);
  if (r.available)
    log_event(json{{"op", "reserve"}, {"pool", pool}, {"id", r.key_id}, {"bits", size_bits}}.dump());
  return r;
}

bool KeyStore::set_status_locked(const std::string& pool, std::uint64_t key_id, KeyStatus from,
                                 KeyStatus to) {
  auto it = pools_.find(pool);
  if (it == pools_.end()) return false;
  for (auto& e : it->second) {
    if (e.id != key_id) continue;
    if (e.material.status != from) return false;
    e.material.status = to;
    if (to == KeyStatus::consumed) consume_entry_locked(pool, e);
    return true;
  }
  return false;
}

void KeyStore::consume_entry_locked(const std::string&, Entry& e) {
  consumed_.push_back({e.source, e.offset, e.offset + e.material.bits.size()});
}

bool KeyStore::ack(const std::string& pool, std::uint64_t key_id) {
  std::lock_guard lk(mu_);
  bool ok = set_status_locked(pool, key_id, KeyStatus::reserved, KeyStatus::consumed);
  if (ok) log_event(json{{"op", "ack"}, {"pool", pool}, {"id", key_id}}.dump());
  return ok;
}

bool KeyStore::release(const std::string& pool, std::uint64_t key_id) {
  std::lock_guard lk(mu_);
  bool ok = set_status_locked(pool, key_id, KeyStatus::reserved, KeyStatus::fresh);
  if (ok) log_event(json{{"op", "release"}, {"pool", pool}, {"id", key_id}}.dump());
  return ok;
}

std::uint64_t KeyStore::fresh_bits(const std::string& pool) const {
  std::lock_guard lk(mu_);
  auto it = pools_.find(pool);
  if (it == pools_.end()) return 0;
  std::uint64_t total = 0;
  for (const auto& e : it->second)
    if (e.material.status == KeyStatus::fresh) total += e.material.bits.size();
  return total;
}

std::uint64_t KeyStore::generation_requests(const std::string& pool) const {
  std::lock_guard lk(mu_);
  auto it = generation_requests_.find(pool);
  return it == generation_requests_.end() ? 0 : it->second;
}

std::vector<std::vector<std::uint8_t>> KeyStore::export_locked(const std::string& pool,
                                                               std::uint32_t block_bits) {
  std::vector<std::vector<std::uint8_t>> out;
  auto it = pools_.find(pool);
  if (it == pools_.end()) return out;
  for (auto& e : it->second) {
    if (e.material.status != KeyStatus::fresh || e.material.bits.size() < block_bits) continue;
    std::uint64_t n_blocks = e.material.bits.size() / block_bits;
    for (std::uint64_t b = 0; b < n_blocks; ++b) {
      KeyMaterial m = e.material;
      m.bits = e.material.bits.slice(b * block_bits, block_bits);
      m.status = KeyStatus::consumed;
      out.push_back(serialize_key_block(m));
      consumed_.push_back({e.source, e.offset + b * block_bits, e.offset + (b + 1) * block_bits});
    }
    std::uint64_t used = n_blocks * block_bits;
    e.material.bits = e.material.bits.slice(used, e.material.bits.size() - used);
    e.offset += used;
    log_event(json{{"op", "export"}, {"pool", pool}, {"id", e.id}, {"blocks", n_blocks},
                   {"block_bits", block_bits}}
                  .dump());
    break;  // oldest eligible block only
  }
  return out;
}

std::vector<std::vector<std::uint8_t>> KeyStore::export_blocks(const std::string& pool,
                                                               std::uint32_t block_bits) {
  if (block_bits == 0) throw std::invalid_argument("export_blocks: block_bits must be > 0");
  std::lock_guard lk(mu_);
  return export_locked(pool, block_bits);
}

bool KeyStore::audit_no_reuse() const {
  std::lock_guard lk(mu_);
  auto ranges = consumed_;
  std::sort(ranges.begin(), ranges.end(), [](const ConsumedRange& a, const ConsumedRange& b) {
    return std::tie(a.source, a.lo) < std::tie(b.source, b.lo);
  });
  for (std::size_t i = 1; i < ranges.size(); ++i)
    if (ranges[i].source == ranges[i - 1].source && ranges[i].lo < ranges[i - 1].hi) return false;
  return true;
}

std::vector<ConsumedRange> KeyStore::consumed_ranges() const {
  std::lock_guard lk(mu_);
  return consumed_;
}

std::vector<std::uint8_t> serialize_key_block(const KeyMaterial& material) {
  std::vector<std::uint8_t> out{'Q', 'K', 'D', 'K', '1'};
  put_be(out, material.link_id.size(), 2);
  out.insert(out.end(), material.link_id.begin(), material.link_id.end());
  put_be(out, material.epoch, 8);
  put_be(out, material.bits.size(), 4);
  auto bytes = material.bits.to_bytes_msb_first();
  out.insert(out.end(), bytes.begin(), bytes.end());
  return out;
}

KeyMaterial parse_key_block(std::span<const std::uint8_t> data) {
  if (data.size() < 5 + 2 + 8 + 4 || data[0] != 'Q' || data[1] != 'K' || data[2] != 'D' ||
      data[3] != 'K' || data[4] != '1')
    throw std::invalid_argument("parse_key_block: bad header");
  std::size_t at = 5;
  std::size_t id_len = get_be(data, at, 2);
  at += 2;
  if (data.size() < at + id_len + 12) throw std::invalid_argument("parse_key_block: truncated");
  KeyMaterial m;
  m.link_id.assign(data.begin() + at, data.begin() + at + id_len);
  at += id_len;
  m.epoch = get_be(data, at, 8);
  at += 8;
  std::size_t nbits = get_be(data, at, 4);
  at += 4;
  if (data.size() < at + (nbits + 7) / 8) throw std::invalid_argument("parse_key_block: truncated key");
  m.bits = Bits::from_bytes_msb_first(data.subspan(at, (nbits + 7) / 8), nbits);
  m.status = KeyStatus::consumed;
  return m;
}

Bits relay_hop_reencrypt(const Bits& ciphertext, const Bits& key_in, const Bits& key_out) {
  return xor_bits(xor_bits(ciphertext, key_in), key_out);
}

void KmsNetwork::add_node(const std::string& node_id) {
  if (!has_node(node_id)) nodes_.push_back(node_id);
}

void KmsNetwork::add_link(const std::string& link_id, const std::string& a, const std::string& b) {
  if (!has_node(a) || !has_node(b)) throw std::invalid_argument("add_link: unknown endpoint");
  if (a == b) throw std::invalid_argument("add_link: loop link");
  links_.push_back({link_id, a, b});
}

bool KmsNetwork::has_node(const std::string& node_id) const {
  return std::find(nodes_.begin(), nodes_.end(), node_id) != nodes_.end();
}

std::string KmsNetwork::link_between(const std::string& a, const std::string& b) const {
  for (const auto& l : links_)
    if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return l.id;
  return "";
}

void KmsNetwork::deliver(const std::string& link_id, KeyMaterial material) {
  store_.add_key(link_id, std::move(material));
}

RequestResult KmsNetwork::request_key(const std::string& node, const std::string& peer,
                                      std::uint64_t size_bits) {
  std::string link = link_between(node, peer);
  if (link.empty()) return {};
  return store_.request_key(link, size_bits);
}

bool KmsNetwork::ack(const std::string& node, const std::string& peer, std::uint64_t key_id) {
  std::string link = link_between(node, peer);
  return !link.empty() && store_.ack(link, key_id);
}

RelayResult KmsNetwork::relay(std::span<const std::string> path, std::uint64_t size_bits,
                              std::uint64_t epoch) {
  RelayResult r;
  if (path.size() < 2) {
    r.error = "path needs at least two nodes";
    return r;
  }
  for (std::size_t i = 0; i < path.size(); ++i)
    for (std::size_t j = i + 1; j < path.size(); ++j)
      if (path[i] == path[j]) {
        r.error = "repeated node in path: " + path[i];
        return r;
      }

  // Phase 1: reserve every hop before consuming anything.
  struct Hold {
    std::string link;
    RequestResult res;
  };
  std::vector<Hold> holds;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    std::string link = link_between(path[i], path[i + 1]);
    if (link.empty()) {
      r.error = "no link between " + path[i] + " and " + path[i + 1];
      for (auto& h : holds) store_.release(h.link, h.res.key_id);
      return r;
    }
    RequestResult res = store_.request_key(link, size_bits);
    if (!res.available) {
      r.error = "insufficient key material on link " + link;
      for (auto& h : holds) store_.release(h.link, h.res.key_id);
      return r;
    }
    holds.push_back({link, std::move(res)});
  }

  // Phase 2: the first hop's key is the end-to-end secret; each trusted
  // intermediate strips the inbound pad and applies the outbound one.
  const Bits& k = holds[0].res.material.bits;
  Bits plain = k;
  if (holds.size() > 1) {
    Bits wire = xor_bits(k, holds[1].res.material.bits);  // leaves the first intermediate
    for (std::size_t j = 2; j < holds.size(); ++j)
      wire = relay_hop_reencrypt(wire, holds[j - 1].res.material.bits, holds[j].res.material.bits);
    plain = xor_bits(wire, holds.back().res.material.bits);  // responder decrypts
  }
  if (!(plain == k)) {
    r.error = "relay invariant violated";
    for (auto& h : holds) store_.release(h.link, h.res.key_id);
    return r;
  }

  for (auto& h : holds) {
    store_.ack(h.link, h.res.key_id);
    r.hop_links.push_back(h.link);
  }

  std::string relay_id = "relay:" + path.front();
  for (std::size_t i = 1; i < path.size(); ++i) relay_id += "-" + path[i];
  KeyMaterial out;
  out.bits = k;
  out.link_id = relay_id;
  out.epoch = epoch;
  out.eps_sec = holds[0].res.material.eps_sec;
  out.eps_corr = holds[0].res.material.eps_corr;
  r.initiator_key = out;
  out.bits = plain;
  r.responder_key = out;
  r.ok = true;
  return r;
}

}  // namespace qkdnet
