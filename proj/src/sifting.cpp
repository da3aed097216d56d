#include "qkdnet/sifting.hpp"

#include <stdexcept>
#include <unordered_map>

namespace qkdnet {

namespace {

SiftedBlock sift_impl(const PreparationLookup& preparation_at, std::span<const DetectionRecord> records) {
  SiftedBlock out;
  std::uint64_t z_errors = 0;
  for (const auto& r : records) {
    PreparedState st = preparation_at(r.slot);
    if (st.basis != r.basis_measured) {
      ++out.dropped;
      continue;
    }
    bool mu1 = st.intensity == Intensity::signal;
    if (st.basis == Basis::Z) {
      out.bits_alice.push_back(st.bit);
      out.bits_bob.push_back(r.outcome);
      out.intensity.push_back(st.intensity);
      (mu1 ? out.n_z_mu1 : out.n_z_mu2)++;
      z_errors += (st.bit != r.outcome);
    } else {
      (mu1 ? out.n_x_mu1 : out.n_x_mu2)++;
      if (r.outcome) (mu1 ? out.m_x_mu1 : out.m_x_mu2)++;
    }
  }
  if (out.n_z() > 0) out.qber_z_observed = double(z_errors) / double(out.n_z());
  if (out.n_x() > 0) out.qber_x_observed = double(out.m_x_mu1 + out.m_x_mu2) / double(out.n_x());
  return out;
}

}  // namespace

SiftedBlock sift(const PreparationLookup& preparation_at, std::uint64_t n_slots,
                 std::span<const DetectionRecord> records) {
  std::uint64_t prev = 0;
  bool first = true;
  for (const auto& r : records) {
    if (r.slot >= n_slots) throw std::invalid_argument("sift: record references unknown slot");
    if (!first && r.slot <= prev)
      throw std::invalid_argument("sift: records must be slot-sorted and unique");
    prev = r.slot;
    first = false;
  }
  return sift_impl(preparation_at, records);
}

SiftedBlock sift(std::span<const PreparedState> preparations, std::span<const DetectionRecord> records) {
  std::unordered_map<std::uint64_t, const PreparedState*> by_slot;
  by_slot.reserve(preparations.size());
  for (const auto& st : preparations) by_slot.emplace(st.slot, &st);
  std::unordered_map<std::uint64_t, bool> seen;
  for (const auto& r : records) {
    if (!by_slot.count(r.slot)) throw std::invalid_argument("sift: record references unknown slot");
    if (seen[r.slot]) throw std::invalid_argument("sift: duplicate record for slot");
    seen[r.slot] = true;
  }
  return sift_impl([&](std::uint64_t slot) { return *by_slot.at(slot); }, records);
}

}  // namespace qkdnet
