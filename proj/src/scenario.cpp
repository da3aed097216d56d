#include "qkdnet/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qkdnet/linkmodel.hpp"

namespace qkdnet {

namespace {

constexpr std::uint64_t kSaltBlockSeed = 0x5c;

BlockRow row_from_session(int block, const SessionResult& s) {
  BlockRow r;
  r.block = block;
  r.n_z = s.n_z;
  r.qber_z = s.qber_z;
  r.qber_x = s.qber_x;
  r.leak_bits = s.leak_bits;
  r.f_ec = s.f_ec;
  r.l_secret = s.l_secret;
  r.block_time_s = s.block_time_s;
  r.skr_bps = s.skr_bps;
  r.status = session_status_name(s.status);
  return r;
}

const LinkConfig& require_link(const NetworkConfig& config, const std::string& link_id) {
  const LinkConfig* l = config.find_link(link_id);
  if (!l) throw ConfigError("unknown link id: " + link_id);
  return *l;
}

}  // namespace

SessionConfig session_config_for(const LinkConfig& link, std::uint64_t n_z_target) {
  SessionConfig s;
  s.link_id = link.id;
  s.link = link.link;
  s.protocol = link.protocol;
  s.source = link.source;
  s.qber_z_intrinsic = link.qber_z_intrinsic;
  s.qber_est = link.qber_est;
  s.n_z_target = n_z_target;
  return s;
}

SimulateReport run_simulate(const NetworkConfig& config, const std::string& link_id, int blocks,
                            std::uint64_t seed, std::uint64_t n_z_override, bool keep_sessions) {
  const LinkConfig& link = require_link(config, link_id);
  std::uint64_t n_z = n_z_override ? n_z_override : config.scenario.desk_n_z;
  SessionConfig base = session_config_for(link, n_z);

  SimulateReport report;
  for (int b = 0; b < blocks; ++b) {
    std::uint64_t block_seed = Rng::stream(seed, kSaltBlockSeed, std::uint64_t(b)).next();
    SessionResult s = run_block_session(base, std::uint64_t(b), block_seed);
    report.all_audits_ok = report.all_audits_ok && s.leak_audit_ok;
    report.all_success = report.all_success && s.status == SessionStatus::success;
    report.rows.push_back(row_from_session(b, s));
    if (keep_sessions) report.sessions.push_back(std::move(s));
  }
  return report;
}

std::vector<KeyrateRow> run_keyrate(const NetworkConfig& config, const std::string& link_filter) {
  std::vector<KeyrateRow> rows;
  for (const auto& l : config.links) {
    if (!link_filter.empty() && l.id != link_filter) continue;
    LinkModel model = LinkModel::build(l.link, l.protocol, l.source, l.qber_z_intrinsic);
    KeyrateRow r;
    r.link_id = l.id;
    r.breakdown = analytic_keyrate(l.link, l.protocol, l.source, l.qber_z_intrinsic, l.f_ec_estimate,
                                   double(l.n_z_block));
    r.qber_z_model = model.qber_z();
    r.qber_x_model = model.qber_x();
    r.reference_skr_bps = l.reference_skr_bps;
    r.vacuous = r.breakdown.l_secret <= 0 && r.breakdown.phi_z_upper >= 0.5;
    rows.push_back(std::move(r));
  }
  if (!link_filter.empty() && rows.empty()) throw ConfigError("unknown link id: " + link_filter);
  return rows;
}

RelayReport run_relay(const NetworkConfig& config, const std::vector<std::string>& path,
                      std::uint64_t size_bits, const std::string& out_dir, std::uint64_t seed) {
  RelayReport report;
  if (path.size() < 2) {
    report.error = "path needs at least two nodes";
    return report;
  }

  KmsNetwork net;
  for (const auto& n : config.nodes) net.add_node(n);
  for (const auto& l : config.links) net.add_link(l.id, l.endpoints[0], l.endpoints[1]);

  // Generate hop material on demand with desk-scale blocks.
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!net.has_node(path[i]) || !net.has_node(path[i + 1])) {
      report.error = "unknown node in path";
      return report;
    }
    std::string link_id = net.link_between(path[i], path[i + 1]);
    if (link_id.empty()) {
      report.error = "no link between " + path[i] + " and " + path[i + 1];
      return report;
    }
    const LinkConfig& link = require_link(config, link_id);
    SessionConfig base = session_config_for(link, config.scenario.desk_n_z);
    std::uint64_t epoch = 0;
    while (net.store().fresh_bits(link_id) < size_bits) {
      std::uint64_t block_seed =
          Rng::stream(seed ^ Rng::mix(std::hash<std::string>{}(link_id)), kSaltBlockSeed, epoch).next();
      SessionResult s = run_block_session(base, epoch, block_seed);
      ++epoch;
      ++report.generated_blocks;
      if (s.status == SessionStatus::success) net.deliver(link_id, s.key_alice);
      if (epoch > 64) {
        report.error = "link " + link_id + " failed to produce key material";
        return report;
      }
    }
  }

  report.relay = net.relay(std::span<const std::string>(path.data(), path.size()), size_bits, 0);
  if (!report.relay.ok) {
    report.error = report.relay.error;
    return report;
  }
  report.no_reuse_ok = net.store().audit_no_reuse();

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    auto write_block = [&](const std::string& node, const KeyMaterial& m) {
      auto bytes = serialize_key_block(m);
      std::string file = out_dir + "/endpoint_" + node + ".qkdk";
      std::ofstream out(file, std::ios::binary);
      out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
      report.exported_files.push_back(file);
    };
    write_block(path.front(), report.relay.initiator_key);
    write_block(path.back(), report.relay.responder_key);
  }
  report.ok = true;
  return report;
}

DriftReport run_drift(const NetworkConfig& config, const std::string& link_id, std::uint64_t seed) {
  const LinkConfig& link = require_link(config, link_id);
  const DriftConfig& drift = config.scenario.drift;

  DriftReport report;
  report.blocks = drift.blocks;
  std::vector<double> skrs;
  for (int b = 0; b < drift.blocks; ++b) {
    double phase = 2.0 * M_PI * double(b) / drift.period_blocks;
    LinkConfig drifted = link;
    drifted.link.visibility_x =
        std::clamp(link.link.visibility_x + drift.visibility_amplitude * std::sin(phase), 0.0, 1.0);
    drifted.link.channel_att_db =
        std::max(0.0, link.link.channel_att_db + drift.attenuation_amplitude_db * std::sin(phase));
    SessionConfig base = session_config_for(drifted, config.scenario.desk_n_z);
    std::uint64_t block_seed = Rng::stream(seed, kSaltBlockSeed, std::uint64_t(b)).next();
    SessionResult s = run_block_session(base, std::uint64_t(b), block_seed);
    if (s.status != SessionStatus::success || !s.leak_audit_ok) ++report.failed;
    skrs.push_back(s.skr_bps);
    report.rows.push_back(row_from_session(b, s));
  }
  if (!skrs.empty()) {
    double mean = std::accumulate(skrs.begin(), skrs.end(), 0.0) / double(skrs.size());
    double var = 0;
    for (double v : skrs) var += (v - mean) * (v - mean);
    var /= double(skrs.size());
    report.skr_mean = mean;
    report.skr_cv = mean > 0 ? std::sqrt(var) / mean : 0.0;
  }
  return report;
}

std::string rows_to_csv(const std::vector<BlockRow>& rows) {
  std::ostringstream out;
  out << "block,n_z,qber_z,qber_x,leak_bits,f_ec,l_secret,block_time_s,skr_bps,status\n";
  out.precision(8);
  for (const auto& r : rows)
    out << r.block << ',' << r.n_z << ',' << r.qber_z << ',' << r.qber_x << ',' << r.leak_bits << ','
        << r.f_ec << ',' << r.l_secret << ',' << r.block_time_s << ',' << r.skr_bps << ',' << r.status
        << '\n';
  return out.str();
}

std::string rows_to_json(const std::vector<BlockRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"block", r.block},
                   {"n_z", r.n_z},
                   {"qber_z", r.qber_z},
                   {"qber_x", r.qber_x},
                   {"leak_bits", r.leak_bits},
                   {"f_ec", std::isnan(r.f_ec) ? nlohmann::json() : nlohmann::json(r.f_ec)},
                   {"l_secret", r.l_secret},
                   {"block_time_s", r.block_time_s},
                   {"skr_bps", r.skr_bps},
                   {"status", r.status}});
  }
  return arr.dump(2);
}

}  // namespace qkdnet
