#pragma once

#include <cstddef>
#include <cstdint>

namespace qkdnet {

/// XOR-accumulates the GF(2)[x] product of two bit-packed polynomials into
/// `out` (little-endian 64-bit words). Only product words with index in
/// [lo_word, hi_word) are guaranteed to be produced; word pairs that cannot
/// touch that window are skipped. `out` must hold at least hi_word words.
void gf2_mul_accumulate(const std::uint64_t* a, std::size_t na,
                        const std::uint64_t* b, std::size_t nb,
                        std::uint64_t* out, std::size_t lo_word, std::size_t hi_word);

/// True when the fast carry-less multiply instruction path is in use.
bool gf2_mul_uses_clmul();

}  // namespace qkdnet
