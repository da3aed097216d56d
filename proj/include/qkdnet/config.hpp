#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkdnet/core.hpp"

namespace qkdnet {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LinkConfig {
  std::string id;
  std::array<std::string, 2> endpoints;
  LinkParams link;
  ProtocolParams protocol;
  SourceParams source;
  std::uint64_t n_z_block = 100000;   ///< full-scale sifted block size
  double qber_z_intrinsic = 0.0;
  double f_ec_estimate = 1.25;        ///< analytic-path reconciliation efficiency
  double qber_est = 0.03;             ///< cascade prior
  double reference_skr_bps = 0.0;     ///< published value for side-by-side reporting (0 = none)
  double reference_qber_z = 0.0;
};

struct DriftConfig {
  int blocks = 200;
  double period_blocks = 50.0;
  double visibility_amplitude = 0.0;       ///< sinusoidal swing of visibility_x
  double attenuation_amplitude_db = 0.0;   ///< sinusoidal swing of channel attenuation
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  int blocks = 10;
  std::uint64_t desk_n_z = 100000;  ///< default block size for `simulate`
  DriftConfig drift;
};

struct NetworkConfig {
  std::vector<std::string> nodes;
  std::vector<LinkConfig> links;
  ScenarioConfig scenario;

  const LinkConfig* find_link(const std::string& id) const;
  void validate() const;  ///< throws ConfigError naming the offending field
};

/// Parses the JSON text; error messages carry the JSON path of bad fields.
NetworkConfig parse_config(const std::string& json_text);
NetworkConfig load_config(const std::string& path);

}  // namespace qkdnet
