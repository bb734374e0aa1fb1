#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <thread>

#include "gamette/http.hpp"

using namespace gamette;
using nlohmann::json;

namespace {

struct Client {
  service::SessionManager manager;

  std::pair<int, json> call(std::string_view method, std::string_view path, std::string_view body = "") {
    const auto r = http::handle_request(manager, method, path, body);
    return {r.status, r.content_type == "application/json" ? json::parse(r.body) : json(r.body)};
  }
};

}  // namespace

TEST_SUITE("http") {
  TEST_CASE("session lifecycle over the router") {
    Client c;
    auto [status, view] = c.call("POST", "/sessions", R"({"condition":"Info"})");
    CHECK(status == 201);
    const std::string id = view["session_id"];
    CHECK(view["awaiting"] == "Order");
    CHECK(view["week"] == 21);
    CHECK(view["condition"] == "Info");
    CHECK(view.contains("manufacturer_inventory"));
    CHECK(view.contains("suggestion"));
    CHECK(view["ledger"].contains("profit"));

    auto [s2, after] = c.call("POST", "/sessions/" + id + "/order", R"({"quantity": 40})");
    CHECK(s2 == 200);
    CHECK(after["week"] == 22);
    CHECK(after["ledger"]["week"] == 21);

    const auto tele = http::handle_request(c.manager, "GET", "/sessions/" + id + "/telemetry", "");
    CHECK(tele.status == 200);
    CHECK(tele.content_type == "text/plain");
    CHECK(tele.headers.at("X-Session-Id") == id);
    CHECK(tele.headers.at("X-Awaiting") == "Order");
    CHECK(tele.headers.at("X-Week") == "22");
    CHECK(tele.body.starts_with("#session player_id=" + id));

    auto [s3, health] = c.call("GET", "/health");
    CHECK(s3 == 200);
    CHECK(health["sessions"] == 1);
  }

  TEST_CASE("NoInfo views carry no manufacturer field") {
    Client c;
    auto [status, view] = c.call("POST", "/sessions", R"({"condition":"NoInfo"})");
    CHECK(status == 201);
    CHECK_FALSE(view.contains("manufacturer_inventory"));
  }

  TEST_CASE("errors map to statuses and keep the session position") {
    Client c;
    const std::string id = c.call("POST", "/sessions").second["session_id"];
    const std::string base = "/sessions/" + id;

    auto [s1, e1] = c.call("POST", base + "/order", R"({"quantity": 1.5})");
    CHECK(s1 == 400);
    CHECK(e1["error"]["kind"] == "validation");
    CHECK(e1["session_id"] == id);
    CHECK(e1["awaiting"] == "Order");
    CHECK(e1["week"] == 21);

    CHECK(c.call("POST", base + "/order", R"({"quantity": -3})").first == 400);
    CHECK(c.call("POST", base + "/order", R"({"quantity": "3"})").first == 400);
    CHECK(c.call("POST", base + "/order", R"({"quantity": 2000000000000})").first == 400);
    CHECK(c.call("POST", base + "/order", R"({"qty": 3})").first == 400);
    CHECK(c.call("POST", base + "/order", "not json").first == 400);
    CHECK(c.call("POST", base + "/order", "[1]").first == 400);
    CHECK(c.call("POST", "/sessions", R"({"condition":"Both"})").first == 400);

    auto [s2, e2] = c.call("POST", base + "/allocation", R"({"policy":"HC1First"})");
    CHECK(s2 == 409);
    CHECK(e2["error"]["kind"] == "state_conflict");
    CHECK(c.call("POST", base + "/allocation", R"({"policy":"Auto"})").first == 400);

    auto [s3, e3] = c.call("GET", "/sessions/s0000000000000000");
    CHECK(s3 == 404);
    CHECK_FALSE(e3.contains("session_id"));
    CHECK(c.call("GET", "/nowhere").first == 404);
    CHECK(c.call("GET", base + "/something").first == 404);
    CHECK(c.call("DELETE", base).first == 405);
    CHECK(c.call("GET", base + "/order").first == 405);
    CHECK(c.call("POST", "/health").first == 405);
  }

  TEST_CASE("real socket round trip") {
    service::SessionManager manager;
    http::Server server(manager);
    const int port = server.bind("127.0.0.1", 0);
    CHECK(port > 0);
    std::jthread loop([&] { server.listen(); });

    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(5);
    httplib::Result created;
    for (int attempt = 0; attempt < 50 && !created; ++attempt) {
      created = client.Post("/sessions", R"({"condition":"NoInfo"})", "application/json");
      if (!created) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    REQUIRE(created);
    CHECK(created->status == 201);
    const std::string id = json::parse(created->body)["session_id"];
    const auto order = client.Post("/sessions/" + id + "/order", R"({"quantity": 10})", "application/json");
    REQUIRE(order);
    CHECK(order->status == 200);
    const auto tele = client.Get("/sessions/" + id + "/telemetry");
    REQUIRE(tele);
    CHECK(tele->get_header_value("X-Week") == "22");
    const auto missing = client.Get("/sessions/zzz");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    server.stop();
  }
}
