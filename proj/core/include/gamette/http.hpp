#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "gamette/service.hpp"

namespace gamette::http {

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

/// JSON encoding of a view; manufacturer_inventory and suggestion are
/// omitted when absent.
std::string view_json(const service::PlayerView& view);

/// Routes one request without any socket. Paths:
///   POST /sessions                      {"condition": "Info"|"NoInfo"} (optional)
///   GET  /sessions/{id}
///   POST /sessions/{id}/allocation      {"policy": "HC1First"|"HC2First"|"Proportional"}
///   POST /sessions/{id}/order           {"quantity": <integer >= 0>}
///   GET  /sessions/{id}/telemetry       text/plain episode file
///   GET  /health
/// Errors come back as {"error": {"kind": ..., "message": ...}} with 400,
/// 404, 405, 409 or 500.
Response handle_request(service::SessionManager& manager, std::string_view method, std::string_view path,
                        std::string_view body);

/// Blocking HTTP front end over handle_request.
class Server {
 public:
  explicit Server(service::SessionManager& manager);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called from another thread.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gamette::http
