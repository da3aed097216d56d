#include "qkdnet/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qkdnet {

namespace {

using nlohmann::json;

// Optional-with-default field reads, all funneling parse problems into
// ConfigError with the JSON path attached.
template <typename T>
void read(const json& j, const std::string& path, const char* field, T& out, bool required = false) {
  if (!j.contains(field)) {
    if (required) throw ConfigError(path + "." + field + ": missing required field");
    return;
  }
  try {
    out = j.at(field).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + "." + field + ": " + e.what());
  }
}

void read_link_params(const json& j, const std::string& path, LinkParams& p) {
  read(j, path, "channel_att_db", p.channel_att_db);
  read(j, path, "loss_z_db", p.loss_z_db);
  read(j, path, "loss_x_db", p.loss_x_db);
  read(j, path, "visibility_x", p.visibility_x);
  read(j, path, "det_efficiency", p.det_efficiency);
  read(j, path, "dark_rate_hz", p.dark_rate_hz);
  read(j, path, "holdoff_s", p.holdoff_s);
  read(j, path, "filter_width_s", p.filter_width_s);
  read(j, path, "jitter_rms_s", p.jitter_rms_s);
}

void read_protocol_params(const json& j, const std::string& path, ProtocolParams& p) {
  read(j, path, "mu1", p.mu1);
  read(j, path, "mu2", p.mu2);
  read(j, path, "p_mu1", p.p_mu1);
  read(j, path, "p_za", p.p_za);
  read(j, path, "p_xa", p.p_xa);
  read(j, path, "eps_sec", p.eps_sec);
  read(j, path, "eps_corr", p.eps_corr);
}

void read_source_params(const json& j, const std::string& path, SourceParams& p) {
  read(j, path, "qubit_rate_hz", p.qubit_rate_hz);
  read(j, path, "bin_separation_s", p.bin_separation_s);
  read(j, path, "sync_rate_hz", p.sync_rate_hz);
  read(j, path, "prbs_length", p.prbs_length);
}

}  // namespace

const LinkConfig* NetworkConfig::find_link(const std::string& id) const {
  for (const auto& l : links)
    if (l.id == id) return &l;
  return nullptr;
}

void NetworkConfig::validate() const {
  if (nodes.empty()) throw ConfigError("nodes: must declare at least one node");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto& l = links[i];
    std::string path = "links[" + std::to_string(i) + "]";
    if (l.id.empty()) throw ConfigError(path + ".id: empty");
    for (const auto& ep : l.endpoints)
      if (std::find(nodes.begin(), nodes.end(), ep) == nodes.end())
        throw ConfigError(path + ".endpoints: undeclared node '" + ep + "'");
    if (l.endpoints[0] == l.endpoints[1]) throw ConfigError(path + ".endpoints: identical endpoints");
    for (std::size_t j = i + 1; j < links.size(); ++j)
      if (links[j].id == l.id) throw ConfigError(path + ".id: duplicate link id '" + l.id + "'");
    try {
      l.link.validate();
      l.protocol.validate();
      l.source.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path + ": " + e.what());
    }
    if (l.n_z_block == 0) throw ConfigError(path + ".n_z_block: must be > 0");
    if (l.qber_z_intrinsic < 0 || l.qber_z_intrinsic >= 0.5)
      throw ConfigError(path + ".qber_z_intrinsic: outside [0, 0.5)");
  }
}

NetworkConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  NetworkConfig cfg;
  read(j, "$", "nodes", cfg.nodes, true);
  if (!j.contains("links") || !j.at("links").is_array())
    throw ConfigError("$.links: missing or not an array");
  std::size_t i = 0;
  for (const auto& jl : j.at("links")) {
    std::string path = "links[" + std::to_string(i++) + "]";
    LinkConfig l;
    read(jl, path, "id", l.id, true);
    std::vector<std::string> eps;
    read(jl, path, "endpoints", eps, true);
    if (eps.size() != 2) throw ConfigError(path + ".endpoints: need exactly two node ids");
    l.endpoints = {eps[0], eps[1]};
    if (jl.contains("link_params")) read_link_params(jl.at("link_params"), path + ".link_params", l.link);
    if (jl.contains("protocol_params"))
      read_protocol_params(jl.at("protocol_params"), path + ".protocol_params", l.protocol);
    if (jl.contains("source_params"))
      read_source_params(jl.at("source_params"), path + ".source_params", l.source);
    read(jl, path, "n_z_block", l.n_z_block);
    read(jl, path, "qber_z_intrinsic", l.qber_z_intrinsic);
    read(jl, path, "f_ec_estimate", l.f_ec_estimate);
    read(jl, path, "qber_est", l.qber_est);
    read(jl, path, "reference_skr_bps", l.reference_skr_bps);
    read(jl, path, "reference_qber_z", l.reference_qber_z);
    cfg.links.push_back(std::move(l));
  }
  if (j.contains("scenario")) {
    const auto& js = j.at("scenario");
    read(js, "scenario", "seed", cfg.scenario.seed);
    read(js, "scenario", "blocks", cfg.scenario.blocks);
    read(js, "scenario", "desk_n_z", cfg.scenario.desk_n_z);
    if (js.contains("drift")) {
      const auto& jd = js.at("drift");
      read(jd, "scenario.drift", "blocks", cfg.scenario.drift.blocks);
      read(jd, "scenario.drift", "period_blocks", cfg.scenario.drift.period_blocks);
      read(jd, "scenario.drift", "visibility_amplitude", cfg.scenario.drift.visibility_amplitude);
      read(jd, "scenario.drift", "attenuation_amplitude_db", cfg.scenario.drift.attenuation_amplitude_db);
    }
  }
  cfg.validate();
  return cfg;
}

NetworkConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace qkdnet
