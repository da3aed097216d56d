#pragma once

#include <memory>
#include <string>

#include "qkdnet/kms.hpp"

namespace qkdnet {

/// Demo-grade HTTP key delivery for a single node (no auth, single tenant):
///   GET  /api/v1/keys/{peer}?size=N       -> 200 {"key_id", "key_b64"}
///                                            404 unknown peer, 503 no material
///   POST /api/v1/keys/{peer}/{key_id}/ack -> 200 {"status":"consumed"}
class KmsRestServer {
 public:
  KmsRestServer(KmsNetwork& network, std::string node_id);
  ~KmsRestServer();

  /// Blocks until stop(). Returns false if the port cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it (still call listen_thread()).
  int bind_any(const std::string& host);
  /// Blocks serving a previously bound socket.
  bool serve_bound();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string base64_encode(const std::vector<std::uint8_t>& data);

}  // namespace qkdnet
