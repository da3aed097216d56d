#include "qkdnet/clmul.hpp"

#if defined(QKDNET_HAVE_PCLMUL)
#include <wmmintrin.h>
#endif

namespace qkdnet {

namespace {

#if defined(QKDNET_HAVE_PCLMUL)
bool cpu_has_clmul() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("pclmul");
#else
  return false;
#endif
}
const bool kUseClmul = cpu_has_clmul();

inline void mul64_hw(std::uint64_t a, std::uint64_t b, std::uint64_t& lo, std::uint64_t& hi) {
  __m128i r = _mm_clmulepi64_si128(_mm_set_epi64x(0, static_cast<long long>(a)),
                                   _mm_set_epi64x(0, static_cast<long long>(b)), 0x00);
  lo = static_cast<std::uint64_t>(_mm_cvtsi128_si64(r));
  hi = static_cast<std::uint64_t>(_mm_cvtsi128_si64(_mm_srli_si128(r, 8)));
}
#else
const bool kUseClmul = false;
#endif

// Portable 64x64 carry-less multiply, 4-bit window.
void mul64_sw(std::uint64_t a, std::uint64_t b, std::uint64_t& lo, std::uint64_t& hi) {
  std::uint64_t tlo[16], thi[16];
  tlo[0] = 0;
  thi[0] = 0;
  tlo[1] = a;
  thi[1] = 0;
  for (int i = 2; i < 16; i += 2) {
    tlo[i] = tlo[i / 2] << 1;
    thi[i] = (thi[i / 2] << 1) | (tlo[i / 2] >> 63);
    tlo[i + 1] = tlo[i] ^ a;
    thi[i + 1] = thi[i];
  }
  std::uint64_t rlo = 0, rhi = 0;
  for (int shift = 60; shift >= 0; shift -= 4) {
    if (shift) {
      rhi = (rhi << 4) | (rlo >> 60);
      rlo <<= 4;
    }
    unsigned nib = static_cast<unsigned>((b >> shift) & 0xF);
    rlo ^= tlo[nib];
    rhi ^= thi[nib];
  }
  lo = rlo;
  hi = rhi;
}

}  // namespace

bool gf2_mul_uses_clmul() { return kUseClmul; }

void gf2_mul_accumulate(const std::uint64_t* a, std::size_t na,
                        const std::uint64_t* b, std::size_t nb,
                        std::uint64_t* out, std::size_t lo_word, std::size_t hi_word) {
  for (std::size_t i = 0; i < na; ++i) {
    if (a[i] == 0) continue;
    // word pair (i, j) writes to product words i+j and i+j+1
    std::size_t jlo = (lo_word > i + 1) ? lo_word - i - 1 : 0;
    std::size_t jhi = (hi_word > i) ? hi_word - i : 0;
    if (jhi > nb) jhi = nb;
    for (std::size_t j = jlo; j < jhi; ++j) {
      if (b[j] == 0) continue;
      std::uint64_t lo, hi;
#if defined(QKDNET_HAVE_PCLMUL)
      if (kUseClmul)
        mul64_hw(a[i], b[j], lo, hi);
      else
        mul64_sw(a[i], b[j], lo, hi);
#else
      mul64_sw(a[i], b[j], lo, hi);
#endif
      std::size_t k = i + j;
      if (k >= lo_word && k < hi_word) out[k] ^= lo;
      if (k + 1 >= lo_word && k + 1 < hi_word) out[k + 1] ^= hi;
    }
  }
}

}  // namespace qkdnet
