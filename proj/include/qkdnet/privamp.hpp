#pragma once

#include "qkdnet/bits.hpp"
#include "qkdnet/channel.hpp"
#include "qkdnet/core.hpp"

namespace qkdnet {

/// Binary Toeplitz matrix T of shape l x n, defined by a seed of n + l - 1
/// bits with the index convention T[i][j] = seed[j - i + l - 1].
struct ToeplitzSpec {
  std::size_t n = 0;  ///< input length
  std::size_t l = 0;  ///< output length, 0 < l <= n
  Bits seed;          ///< |seed| = n + l - 1

  void validate() const;
};

/// T * key over GF(2) without ever materializing the l x n matrix; memory
/// use is O(n + l) bits. Output is bit-identical to the dense definition.
Bits toeplitz_stream(const ToeplitzSpec& spec, const Bits& key);

/// Full privacy-amplification step: Alice draws the seed from `seed_rng`,
/// publishes it on the channel, both sides compress. Returns the KeyMaterial
/// as computed from `key` (call once per party with the same transcript).
/// Throws std::invalid_argument when l_secret is out of range; the caller is
/// expected to discard blocks with l_secret <= 0 before getting here.
KeyMaterial amplify(const Bits& key, std::size_t l_secret, ClassicalChannel& channel, Rng& seed_rng,
                    const std::string& link_id, std::uint64_t epoch, const ProtocolParams& protocol);

/// Bob-side counterpart: reads the published seed and compresses `key`.
KeyMaterial amplify_receive(const Bits& key, std::size_t l_secret, ClassicalChannel& channel,
                            const std::string& link_id, std::uint64_t epoch, const ProtocolParams& protocol);

}  // namespace qkdnet
