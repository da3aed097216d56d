#include "qkdnet/privamp.hpp"

#include <stdexcept>

#include "qkdnet/clmul.hpp"

namespace qkdnet {

void ToeplitzSpec::validate() const {
  if (l == 0 || l > n) throw std::invalid_argument("ToeplitzSpec: need 0 < l <= n");
  if (seed.size() != n + l - 1) throw std::invalid_argument("ToeplitzSpec: |seed| must be n + l - 1");
}

Bits toeplitz_stream(const ToeplitzSpec& spec, const Bits& key) {
  spec.validate();
  if (key.size() != spec.n) throw std::invalid_argument("toeplitz_stream: |key| must equal n");
  const std::size_t n = spec.n, l = spec.l;

  // out[i] = sum_j key[j] * seed[j - i + l - 1]
  //        = coefficient (n - 1 + i) of Key(x) * RevSeed(x) over GF(2),
  // with RevSeed[m] = seed[n + l - 2 - m]. Only the l coefficients starting
  // at n - 1 are computed; everything stays in packed 64-bit words.
  Bits rev(n + l - 1);
  for (std::size_t m = 0; m < n + l - 1; ++m)
    if (spec.seed.get(n + l - 2 - m)) rev.set(m, true);

  const std::size_t lo_word = (n - 1) / 64;
  const std::size_t hi_word = (n + l - 2) / 64 + 1;
  std::vector<std::uint64_t> prod(hi_word, 0);
  gf2_mul_accumulate(key.words().data(), key.words().size(), rev.words().data(), rev.words().size(),
                     prod.data(), lo_word, hi_word);

  Bits out(l);
  for (std::size_t i = 0; i < l; ++i) {
    std::size_t bit = n - 1 + i;
    if ((prod[bit >> 6] >> (bit & 63)) & 1) out.set(i, true);
  }
  return out;
}

KeyMaterial amplify(const Bits& key, std::size_t l_secret, ClassicalChannel& channel, Rng& seed_rng,
                    const std::string& link_id, std::uint64_t epoch, const ProtocolParams& protocol) {
  if (l_secret == 0 || l_secret > key.size())
    throw std::invalid_argument("amplify: l_secret must be in (0, |key|]");
  ToeplitzSpec spec{key.size(), l_secret, Bits::random(key.size() + l_secret - 1, seed_rng)};
  channel.send(Direction::a_to_b, MsgKind::pa_seed, spec.seed);
  return KeyMaterial{toeplitz_stream(spec, key), link_id, epoch, protocol.eps_sec, protocol.eps_corr,
                     KeyStatus::fresh};
}

KeyMaterial amplify_receive(const Bits& key, std::size_t l_secret, ClassicalChannel& channel,
                            const std::string& link_id, std::uint64_t epoch, const ProtocolParams& protocol) {
  Message m = channel.receive(Direction::a_to_b);
  if (m.kind != MsgKind::pa_seed) throw std::runtime_error("amplify_receive: expected pa_seed message");
  ToeplitzSpec spec{key.size(), l_secret, std::move(m.payload)};
  return KeyMaterial{toeplitz_stream(spec, key), link_id, epoch, protocol.eps_sec, protocol.eps_corr,
                     KeyStatus::fresh};
}

}  // namespace qkdnet
