#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>

#include "qkdnet/config.hpp"

using namespace qkdnet;

namespace {

std::string minimal_config(const std::string& links_json) {
  return R"({"nodes": ["A", "B", "C"], "links": [)" + links_json + "]}";
}

const char* kLinkAB = R"({"id": "A-B", "endpoints": ["A", "B"]})";

}  // namespace

TEST_CASE("parse: minimal config with defaults") {
  NetworkConfig cfg = parse_config(minimal_config(kLinkAB));
  REQUIRE(cfg.links.size() == 1);
  const LinkConfig& l = cfg.links[0];
  CHECK(l.id == "A-B");
  CHECK(l.endpoints[0] == "A");
  CHECK(l.protocol.mu1 == doctest::Approx(0.24));
  CHECK(l.n_z_block == 100000);
  CHECK(cfg.scenario.blocks == 10);
  CHECK(cfg.find_link("A-B") == &cfg.links[0]);
  CHECK(cfg.find_link("nope") == nullptr);
}

TEST_CASE("parse: malformed JSON is a ConfigError") {
  CHECK_THROWS_AS(parse_config("{nodes: oops"), ConfigError);
  CHECK_THROWS_AS(parse_config(""), ConfigError);
}

TEST_CASE("parse: missing required fields name the JSON path") {
  try {
    parse_config(R"({"links": []})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("nodes") != std::string::npos);
  }
  try {
    parse_config(minimal_config(R"({"endpoints": ["A", "B"]})"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("links[0].id") != std::string::npos);
  }
  try {
    parse_config(minimal_config(R"({"id": "L", "endpoints": ["A", "B"], "link_params": {"visibility_x": "high"}})"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("links[0].link_params.visibility_x") != std::string::npos);
  }
}

TEST_CASE("validate: endpoint and id consistency") {
  // undeclared node
  CHECK_THROWS_AS(parse_config(minimal_config(R"({"id": "L", "endpoints": ["A", "Z"]})")),
                  ConfigError);
  // loop link
  CHECK_THROWS_AS(parse_config(minimal_config(R"({"id": "L", "endpoints": ["A", "A"]})")),
                  ConfigError);
  // duplicate link id
  std::string dup = std::string(kLinkAB) + "," +
                    R"({"id": "A-B", "endpoints": ["B", "C"]})";
  CHECK_THROWS_AS(parse_config(minimal_config(dup)), ConfigError);
  // endpoints must be exactly two
  CHECK_THROWS_AS(parse_config(minimal_config(R"({"id": "L", "endpoints": ["A"]})")),
                  ConfigError);
}

TEST_CASE("validate: physical parameter ranges surface as ConfigError") {
  CHECK_THROWS_AS(
      parse_config(minimal_config(
          R"({"id": "L", "endpoints": ["A", "B"], "link_params": {"visibility_x": 1.5}})")),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config(minimal_config(
          R"({"id": "L", "endpoints": ["A", "B"], "protocol_params": {"mu1": 0.05, "mu2": 0.11}})")),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config(minimal_config(
          R"({"id": "L", "endpoints": ["A", "B"], "qber_z_intrinsic": 0.6})")),
      ConfigError);
  CHECK_THROWS_AS(parse_config(minimal_config(
                      R"({"id": "L", "endpoints": ["A", "B"], "n_z_block": 0})")),
                  ConfigError);
}

TEST_CASE("load: bundled network preset") {
  NetworkConfig cfg = load_config(std::string(QKDNET_SOURCE_DIR) + "/configs/trieste-g20.json");
  CHECK(cfg.nodes.size() == 4);
  REQUIRE(cfg.links.size() == 3);

  const LinkConfig* tp = cfg.find_link("TS-PO");
  REQUIRE(tp != nullptr);
  CHECK(tp->link.channel_att_db == doctest::Approx(14.0));
  CHECK(tp->n_z_block == 1800000);
  CHECK(tp->reference_skr_bps == doctest::Approx(2080.0));
  CHECK(tp->source.qubit_rate_hz == doctest::Approx(595e6));

  const LinkConfig* pl = cfg.find_link("PO-LJ");
  REQUIRE(pl != nullptr);
  CHECK(pl->protocol.mu1 == doctest::Approx(0.15));
  CHECK(pl->protocol.mu2 == doctest::Approx(0.06));

  const LinkConfig* tr = cfg.find_link("TS-RI");
  REQUIRE(tr != nullptr);
  CHECK(tr->link.channel_att_db == doctest::Approx(25.0));
  CHECK(tr->n_z_block == 6000000);

  CHECK(cfg.scenario.drift.blocks == 200);
  CHECK(cfg.scenario.drift.visibility_amplitude == doctest::Approx(0.01));

  // the three links form the expected relay path R-T-P-L
  for (const auto& n : {"TS", "PO", "LJ", "RI"})
    CHECK(std::find(cfg.nodes.begin(), cfg.nodes.end(), n) != cfg.nodes.end());
}

TEST_CASE("load: missing file") {
  CHECK_THROWS_AS(load_config("/nonexistent/path.json"), ConfigError);
}
