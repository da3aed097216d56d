#include "qkdnet/kms_rest.hpp"

#include <httplib.h>

#include <json.hpp>

namespace qkdnet {

namespace {
using nlohmann::json;
}

std::string base64_encode(const std::vector<std::uint8_t>& data) {
  static const char* tbl = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < data.size(); i += 3) {
    std::uint32_t v = std::uint32_t(data[i]) << 16;
    if (i + 1 < data.size()) v |= std::uint32_t(data[i + 1]) << 8;
    if (i + 2 < data.size()) v |= data[i + 2];
    out.push_back(tbl[(v >> 18) & 63]);
    out.push_back(tbl[(v >> 12) & 63]);
    out.push_back(i + 1 < data.size() ? tbl[(v >> 6) & 63] : '=');
    out.push_back(i + 2 < data.size() ? tbl[v & 63] : '=');
  }
  return out;
}

struct KmsRestServer::Impl {
  KmsNetwork& network;
  std::string node;
  httplib::Server server;

  Impl(KmsNetwork& n, std::string node_id) : network(n), node(std::move(node_id)) {
    server.Get(R"(/api/v1/keys/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::string peer = req.matches[1];
      if (network.link_between(node, peer).empty()) {
        res.status = 404;
        res.set_content(json{{"error", "unknown peer"}}.dump(), "application/json");
        return;
      }
      std::uint64_t size = 2048;
      if (req.has_param("size")) size = std::stoull(req.get_param_value("size"));
      RequestResult r = network.request_key(node, peer, size);
      if (!r.available) {
        res.status = 503;
        res.set_content(json{{"error", "KEY_UNAVAILABLE"}}.dump(), "application/json");
        return;
      }
      json body{{"key_id", std::to_string(r.key_id)},
                {"key_b64", base64_encode(r.material.bits.to_bytes_msb_first())}};
      res.set_content(body.dump(), "application/json");
    });
    server.Post(R"(/api/v1/keys/([^/]+)/(\d+)/ack)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  std::string peer = req.matches[1];
                  std::uint64_t key_id = std::stoull(req.matches[2]);
                  if (network.ack(node, peer, key_id)) {
                    res.set_content(json{{"status", "consumed"}}.dump(), "application/json");
                  } else {
                    res.status = 404;
                    res.set_content(json{{"error", "unknown key"}}.dump(), "application/json");
                  }
                });
  }
};

KmsRestServer::KmsRestServer(KmsNetwork& network, std::string node_id)
    : impl_(std::make_unique<Impl>(network, std::move(node_id))) {}

KmsRestServer::~KmsRestServer() { stop(); }

bool KmsRestServer::listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int KmsRestServer::bind_any(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool KmsRestServer::serve_bound() { return impl_->server.listen_after_bind(); }

void KmsRestServer::stop() { impl_->server.stop(); }

}  // namespace qkdnet
