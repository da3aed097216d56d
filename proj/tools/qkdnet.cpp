#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qkdnet/config.hpp"
#include "qkdnet/kms_rest.hpp"
#include "qkdnet/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

int cmd_drift(const qkdnet::NetworkConfig& config, const std::string& link, std::uint64_t seed,
              const std::string& out) {
  qkdnet::DriftReport report = qkdnet::run_drift(config, link, seed);
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) {
      std::cerr << "error: cannot write " << out << "\n";
      return kExitConfig;
    }
    f << qkdnet::rows_to_csv(report.rows);
  }
  std::printf("drift %s: %d blocks, %d failed, skr mean %.1f bps, cv %.4f\n", link.c_str(),
              report.blocks, report.failed, report.skr_mean, report.skr_cv);
  return report.failed == 0 ? kExitOk : kExitInvariant;
}

int cmd_simulate(const qkdnet::NetworkConfig& config, const std::string& link, int blocks,
                 std::uint64_t seed, const std::string& out, bool full_scale, std::uint64_t n_z) {
  std::uint64_t n_z_target = n_z;
  if (full_scale) {
    const auto* l = config.find_link(link);
    if (!l) {
      std::cerr << "error: unknown link id: " << link << "\n";
      return kExitConfig;
    }
    n_z_target = l->n_z_block;
  }
  qkdnet::SimulateReport report = qkdnet::run_simulate(config, link, blocks, seed, n_z_target);
  std::string csv = qkdnet::rows_to_csv(report.rows);
  if (out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream f(out);
    if (!f) {
      std::cerr << "error: cannot write " << out << "\n";
      return kExitConfig;
    }
    f << csv;
    std::ofstream(out + ".json") << qkdnet::rows_to_json(report.rows);
  }
  for (const auto& r : report.rows)
    std::printf("block %d: n_z=%llu qber_z=%.4f l=%lld skr=%.1f bps [%s]\n", r.block,
                (unsigned long long)r.n_z, r.qber_z, (long long)r.l_secret, r.skr_bps,
                r.status.c_str());
  if (!report.all_audits_ok) {
    std::cerr << "error: leak-ledger audit failed\n";
    return kExitInvariant;
  }
  return kExitOk;
}

int cmd_keyrate(const qkdnet::NetworkConfig& config, const std::string& link) {
  auto rows = qkdnet::run_keyrate(config, link);
  std::printf("%-8s %12s %12s %8s %8s %8s %10s %10s %12s %12s\n", "link", "s_z0", "s_z1", "phi_z",
              "qber_z", "qber_x", "lambda_ec", "time_s", "skr_bps", "published");
  bool any_vacuous = false;
  for (const auto& r : rows) {
    std::printf("%-8s %12.1f %12.1f %8.4f %8.5f %8.5f %10.0f %10.1f %12.1f %12.1f\n",
                r.link_id.c_str(), r.breakdown.s_z0_lower, r.breakdown.s_z1_lower,
                r.breakdown.phi_z_upper, r.qber_z_model, r.qber_x_model, r.breakdown.lambda_ec,
                r.breakdown.block_time_s, r.breakdown.skr_bps, r.reference_skr_bps);
    if (r.vacuous) {
      std::printf("  warning: %s: bounds vacuous, no extractable key\n", r.link_id.c_str());
      any_vacuous = true;
    }
  }
  return any_vacuous ? kExitInvariant : kExitOk;
}

int cmd_relay(const qkdnet::NetworkConfig& config, const std::vector<std::string>& path,
              std::uint64_t bits, const std::string& out_dir, std::uint64_t seed) {
  qkdnet::RelayReport report = qkdnet::run_relay(config, path, bits, out_dir, seed);
  if (!report.ok) {
    std::cerr << "relay failed: " << report.error << "\n";
    return kExitConfig;
  }
  std::printf("relay %s: %llu bits, %llu generated blocks\n",
              report.relay.initiator_key.link_id.c_str(), (unsigned long long)bits,
              (unsigned long long)report.generated_blocks);
  for (const auto& l : report.relay.hop_links) std::printf("  consumed %llu bits on %s\n",
                                                           (unsigned long long)bits, l.c_str());
  for (const auto& f : report.exported_files) std::printf("  wrote %s\n", f.c_str());
  if (!(report.relay.initiator_key.bits == report.relay.responder_key.bits) || !report.no_reuse_ok) {
    std::cerr << "error: relay endpoint/no-reuse audit failed\n";
    return kExitInvariant;
  }
  std::printf("  endpoint keys identical; no-reuse audit passed\n");
  return kExitOk;
}

int cmd_kms_serve(const qkdnet::NetworkConfig& config, const std::string& node, int port,
                  std::uint64_t seed, int prefill_blocks) {
  qkdnet::KmsNetwork net;
  for (const auto& n : config.nodes) net.add_node(n);
  for (const auto& l : config.links) net.add_link(l.id, l.endpoints[0], l.endpoints[1]);
  if (!net.has_node(node)) {
    std::cerr << "error: unknown node id: " << node << "\n";
    return kExitConfig;
  }
  for (const auto& l : config.links) {
    if (l.endpoints[0] != node && l.endpoints[1] != node) continue;
    qkdnet::SimulateReport rep = qkdnet::run_simulate(config, l.id, prefill_blocks, seed, 0, true);
    for (auto& s : rep.sessions)
      if (s.status == qkdnet::SessionStatus::success) net.deliver(l.id, s.key_alice);
    std::printf("link %s: %llu fresh bits\n", l.id.c_str(),
                (unsigned long long)net.store().fresh_bits(l.id));
  }
  qkdnet::KmsRestServer server(net, node);
  std::printf("serving node %s on http://0.0.0.0:%d/api/v1/keys/{peer}\n", node.c_str(), port);
  if (!server.listen("0.0.0.0", port)) {
    std::cerr << "error: cannot bind port " << port << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic QKD link simulator and post-processing stack"};
  app.require_subcommand(1);

  std::string config_path, link, out, node;
  std::vector<std::string> path;
  int blocks = 10, port = 8080, prefill = 2;
  std::uint64_t seed = 1, bits = 2048, n_z = 0;
  bool full_scale = false;

  auto* sim = app.add_subcommand("simulate", "Run per-block Monte Carlo sessions on one link");
  sim->add_option("--config", config_path)->required();
  sim->add_option("--link", link)->required();
  sim->add_option("--blocks", blocks);
  sim->add_option("--seed", seed);
  sim->add_option("--out", out);
  sim->add_option("--n-z", n_z, "Sifted block size override (0 = scenario default)");
  sim->add_flag("--full-scale", full_scale, "Use the link's published block size");
  bool drift = false;
  sim->add_flag("--drift", drift, "Run the long-run drift scenario instead of fixed blocks");

  auto* kr = app.add_subcommand("keyrate", "Analytic per-link key-rate table");
  kr->add_option("--config", config_path)->required();
  kr->add_option("--link", link);

  auto* rel = app.add_subcommand("relay", "Trusted-node key relay along a node path");
  rel->add_option("--config", config_path)->required();
  rel->add_option("--path", path, "Comma-separated node ids")->required()->delimiter(',');
  rel->add_option("--bits", bits);
  rel->add_option("--out", out);
  rel->add_option("--seed", seed);

  auto* serve = app.add_subcommand("kms-serve", "REST key-delivery demo for one node");
  serve->add_option("--config", config_path)->required();
  serve->add_option("--node", node)->required();
  serve->add_option("--port", port)->required();
  serve->add_option("--seed", seed);
  serve->add_option("--prefill-blocks", prefill, "Desk-scale blocks generated per link at startup");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    qkdnet::NetworkConfig config = qkdnet::load_config(config_path);
    if (sim->parsed())
      return drift ? cmd_drift(config, link, seed, out)
                   : cmd_simulate(config, link, blocks, seed, out, full_scale, n_z);
    if (kr->parsed()) return cmd_keyrate(config, link);
    if (rel->parsed()) return cmd_relay(config, path, bits, out, seed);
    if (serve->parsed()) return cmd_kms_serve(config, node, port, seed, prefill);
  } catch (const qkdnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvariant;
  }
  return kExitOk;
}
