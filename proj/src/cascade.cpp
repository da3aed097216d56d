#include "qkdnet/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <tuple>

#include "qkdnet/core.hpp"
#include "qkdnet/privamp.hpp"

namespace qkdnet {

namespace {

/// Keyed bijection on [0, n): a 4-round Feistel network over the smallest
/// even-width bit space covering n, with cycle walking. Both directions are
/// O(1) per element, so no pass needs a stored permutation array.
class KeyedPermutation {
 public:
  KeyedPermutation(std::uint64_t key, std::size_t n, bool identity)
      : key_(key), n_(n), identity_(identity) {
    int bits = 2;
    while ((std::size_t{1} << bits) < n) bits += 2;  // even split
    half_bits_ = bits / 2;
    mask_ = (std::size_t{1} << half_bits_) - 1;
  }

  std::size_t forward(std::size_t pos) const {
    if (identity_) return pos;
    std::size_t v = pos;
    do {
      v = feistel(v, false);
    } while (v >= n_);
    return v;
  }

  std::size_t inverse(std::size_t idx) const {
    if (identity_) return idx;
    std::size_t v = idx;
    do {
      v = feistel(v, true);
    } while (v >= n_);
    return v;
  }

 private:
  std::size_t round_fn(std::size_t half, int round) const {
    return Rng::mix(key_ ^ (std::uint64_t(round) << 56) ^ half) & mask_;
  }

  std::size_t feistel(std::size_t v, bool invert) const {
    std::size_t left = v >> half_bits_, right = v & mask_;
    if (!invert) {
      for (int r = 0; r < 4; ++r) {
        std::size_t nl = right;
        right = left ^ round_fn(right, r);
        left = nl;
      }
    } else {
      for (int r = 3; r >= 0; --r) {
        std::size_t nr = left;
        left = right ^ round_fn(left, r);
        right = nr;
      }
    }
    return (left << half_bits_) | right;
  }

  std::uint64_t key_;
  std::size_t n_;
  bool identity_;
  int half_bits_;
  std::size_t mask_;
};

struct Pass {
  KeyedPermutation perm;
  std::size_t block_size;
  std::size_t n_blocks;
  Bits alice_parity;  // as announced
  Bits bob_parity;    // maintained under flips
};

Bits u64_payload(std::uint64_t v, int bits) {
  Bits b(bits);
  for (int i = 0; i < bits; ++i)
    if ((v >> (bits - 1 - i)) & 1) b.set(i, true);
  return b;
}

std::uint64_t payload_u64(const Bits& b, std::size_t at, int bits) {
  std::uint64_t v = 0;
  for (int i = 0; i < bits; ++i) v = (v << 1) | b.get(at + i);
  return v;
}

}  // namespace

int initial_block_size(double qber_est) {
  if (qber_est <= 0.0 || qber_est > 0.5) throw std::domain_error("initial_block_size: qber_est outside (0, 0.5]");
  return static_cast<int>(std::ceil(0.73 / qber_est));
}

double fec_efficiency(std::uint64_t leak_bits, std::uint64_t n_z, double qber) {
  if (n_z == 0) throw std::domain_error("fec_efficiency: n_z must be > 0");
  if (qber <= 0.0 || qber >= 0.5) throw std::domain_error("fec_efficiency: qber outside (0, 0.5)");
  return double(leak_bits) / (double(n_z) * binary_entropy(qber));
}

ReconciliationResult run_cascade(const Bits& key_a, const Bits& key_b, double qber_est, int iterations,
                                 ClassicalChannel& channel, Rng& public_rng, double qber_floor) {
  const std::size_t n = key_a.size();
  if (n == 0 || key_b.size() != n) throw std::invalid_argument("run_cascade: keys must be equal-length, non-empty");
  if (iterations < 1) throw std::invalid_argument("run_cascade: iterations must be >= 1");

  ReconciliationResult result;
  result.corrected_key = key_b;
  Bits& bob = result.corrected_key;

  double q = std::clamp(qber_est, qber_floor, 0.5);
  const std::size_t k1 = static_cast<std::size_t>(initial_block_size(q));
  std::uint64_t leak = 0;

  std::vector<Pass> passes;
  passes.reserve(iterations);
  // Smallest blocks first, so backtracking localizes errors cheaply.
  std::set<std::tuple<std::size_t, int, std::size_t>> odd;  // (block_size, pass, block)

  auto range_parity = [](const Bits& key, const KeyedPermutation& perm, std::size_t lo, std::size_t hi) {
    bool p = false;
    for (std::size_t pos = lo; pos < hi; ++pos) p ^= key.get(perm.forward(pos));
    return p;
  };

  auto block_bounds = [n](const Pass& pass, std::size_t b) {
    std::size_t lo = b * pass.block_size;
    return std::pair{lo, std::min(lo + pass.block_size, n)};
  };

  auto apply_flip = [&](std::size_t index) {
    bob.flip(index);
    result.flipped.push_back(index);
    for (std::size_t p = 0; p < passes.size(); ++p) {
      std::size_t pos = passes[p].perm.inverse(index);
      std::size_t b = pos / passes[p].block_size;
      passes[p].bob_parity.flip(b);
      auto entry = std::make_tuple(passes[p].block_size, int(p), b);
      if (passes[p].bob_parity.get(b) != passes[p].alice_parity.get(b))
        odd.insert(entry);
      else
        odd.erase(entry);
    }
  };

  auto binary_search_block = [&](int p, std::size_t b) {
    auto [lo, hi] = block_bounds(passes[p], b);
    while (hi - lo > 1) {
      std::size_t mid = lo + (hi - lo + 1) / 2;  // left half [lo, mid)
      // Bob asks for the parity of the left half; Alice answers with 1 bit.
      Bits req;
      req.append(u64_payload(std::uint64_t(p), 16));
      req.append(u64_payload(lo, 48));
      req.append(u64_payload(mid, 48));
      channel.send(Direction::b_to_a, MsgKind::parity_request, req);
      {
        Message m = channel.receive(Direction::b_to_a);
        std::size_t rq_lo = payload_u64(m.payload, 16, 48), rq_hi = payload_u64(m.payload, 64, 48);
        int rq_p = int(payload_u64(m.payload, 0, 16));
        Bits ans(1);
        ans.set(0, range_parity(key_a, passes[rq_p].perm, rq_lo, rq_hi));
        channel.send(Direction::a_to_b, MsgKind::parity, ans);
        leak += 1;
      }
      bool alice_left = channel.receive(Direction::a_to_b).payload.get(0);
      bool bob_left = range_parity(bob, passes[p].perm, lo, mid);
      if (alice_left != bob_left)
        hi = mid;
      else
        lo = mid;
    }
    apply_flip(passes[p].perm.forward(lo));
  };

  for (int it = 0; it < iterations; ++it) {
    std::size_t k = std::min(k1 << it, n);
    std::uint64_t seed = 0;
    if (it > 0) {
      seed = public_rng.next();
      channel.send(Direction::a_to_b, MsgKind::seed, u64_payload(seed, 64));
      seed = payload_u64(channel.receive(Direction::a_to_b).payload, 0, 64);
    }
    Pass pass{KeyedPermutation(seed, n, it == 0), k, (n + k - 1) / k, Bits{}, Bits{}};
    pass.alice_parity = Bits(pass.n_blocks);
    pass.bob_parity = Bits(pass.n_blocks);
    for (std::size_t b = 0; b < pass.n_blocks; ++b) {
      auto [lo, hi] = block_bounds(pass, b);
      pass.alice_parity.set(b, range_parity(key_a, pass.perm, lo, hi));
    }
    channel.send(Direction::a_to_b, MsgKind::parity, pass.alice_parity);
    leak += pass.n_blocks;
    pass.alice_parity = channel.receive(Direction::a_to_b).payload;
    for (std::size_t b = 0; b < pass.n_blocks; ++b) {
      auto [lo, hi] = block_bounds(pass, b);
      pass.bob_parity.set(b, range_parity(bob, pass.perm, lo, hi));
    }
    passes.push_back(std::move(pass));
    std::size_t p_new = passes.size() - 1;
    for (std::size_t b = 0; b < passes[p_new].n_blocks; ++b)
      if (passes[p_new].bob_parity.get(b) != passes[p_new].alice_parity.get(b))
        odd.insert({passes[p_new].block_size, int(p_new), b});

    while (!odd.empty()) {
      auto [bs, p, b] = *odd.begin();
      binary_search_block(p, b);
    }
  }

  result.leak_bits = leak;
  double observed = double(result.flipped.size()) / double(n);
  result.f_ec = (observed > 0.0 && observed < 0.5)
                    ? fec_efficiency(leak, n, observed)
                    : std::numeric_limits<double>::quiet_NaN();
  return result;
}

std::pair<bool, int> verify(const Bits& key_a, const Bits& key_b, double eps_corr,
                            ClassicalChannel& channel, Rng& seed_rng, int hash_bits_override) {
  if (key_a.size() != key_b.size() || key_a.empty())
    throw std::invalid_argument("verify: keys must be equal-length, non-empty");
  if (eps_corr <= 0.0 || eps_corr >= 1.0) throw std::invalid_argument("verify: eps_corr outside (0,1)");
  int t = static_cast<int>(std::ceil(std::log2(1.0 / eps_corr)));
  int width = hash_bits_override > 0 ? hash_bits_override : t;
  ToeplitzSpec spec{key_a.size(), std::size_t(width),
                    Bits::random(key_a.size() + width - 1, seed_rng)};
  channel.send(Direction::a_to_b, MsgKind::seed, spec.seed);
  Bits hash_a = toeplitz_stream(spec, key_a);
  channel.send(Direction::a_to_b, MsgKind::hash, hash_a);

  ToeplitzSpec bob_spec{key_b.size(), std::size_t(width), channel.receive(Direction::a_to_b).payload};
  Bits hash_b = toeplitz_stream(bob_spec, key_b);
  bool ok = channel.receive(Direction::a_to_b).payload == hash_b;
  Bits status(1);
  status.set(0, ok);
  channel.send(Direction::b_to_a, MsgKind::status, status);
  return {ok, t};
}

}  // namespace qkdnet
