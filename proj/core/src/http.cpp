#include "gamette/http.hpp"

#include <httplib.h>

#include <algorithm>
#include <json.hpp>
#include <vector>

#include "gamette/error.hpp"
#include "gamette/textio.hpp"

namespace gamette::http {

using nlohmann::json;

namespace {

json ledger_json(const LedgerEntry& l) {
  return {{"week", l.week},
          {"holding", l.holding_cost},
          {"stockout", l.stockout_cost},
          {"revenue", l.revenue},
          {"profit", l.profit}};
}

Response json_response(int status, const json& j) {
  Response r;
  r.status = status;
  r.body = j.dump();
  return r;
}

int status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return 400;
    case ErrorKind::NotFound: return 404;
    case ErrorKind::StateConflict: return 409;
    default: return 500;
  }
}

std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::NotFound: return "not_found";
    case ErrorKind::StateConflict: return "state_conflict";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Io: return "io";
  }
  return "internal";
}

Response error_response(int status, std::string_view kind, const std::string& message) {
  return json_response(status, {{"error", {{"kind", kind}, {"message", message}}}});
}

json parse_body(std::string_view body) {
  if (body.empty()) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw validation_error("request body must be a JSON object");
  return j;
}

void only_keys(const json& j, std::initializer_list<std::string_view> keys) {
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw validation_error("unknown field '" + k + "'");
  }
}

std::string string_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw validation_error(std::string("missing field '") + key + "'");
  if (!it->is_string()) throw validation_error(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

Response view_response(const service::PlayerView& v, int status = 200) {
  Response r;
  r.status = status;
  r.body = view_json(v);
  return r;
}

}  // namespace

std::string view_json(const service::PlayerView& v) {
  json j = {{"session_id", v.session_id},
            {"awaiting", service::to_string(v.awaiting)},
            {"week", v.week},
            {"condition", to_string(v.condition)},
            {"inv", v.inv},
            {"dem_hc1", v.dem_hc1},
            {"dem_hc2", v.dem_hc2},
            {"blg", v.blg},
            {"arrived_shipment", v.arrived_shipment},
            {"oor", v.oor},
            {"news", v.news},
            {"ledger", ledger_json(v.ledger)},
            {"profit_to_date", v.profit_to_date}};
  if (v.suggestion) j["suggestion"] = *v.suggestion;
  if (v.manufacturer_inventory) j["manufacturer_inventory"] = *v.manufacturer_inventory;
  if (v.news) j["news_id"] = service::kShutdownNews;
  if (v.totals) {
    j["totals"] = {{"profit", v.totals->profit},
                   {"holding", v.totals->holding_cost},
                   {"stockout", v.totals->stockout_cost},
                   {"revenue", v.totals->revenue}};
  }
  return j.dump();
}

namespace {

Response route(service::SessionManager& manager, std::string_view method, std::string_view path,
               std::string_view body, std::string& session) {
  {
    const auto parts = [&] {
      std::vector<std::string> out;
      for (auto& p : split(path, '/')) {
        if (!p.empty()) out.push_back(std::move(p));
      }
      return out;
    }();
    const auto wrong_method = [] { return error_response(405, "method_not_allowed", "method not allowed"); };

    if (parts.size() == 1 && parts[0] == "health") {
      if (method != "GET") return wrong_method();
      return json_response(200, {{"status", "ok"}, {"sessions", manager.size()}});
    }
    if (parts.empty() || parts[0] != "sessions" || parts.size() > 3)
      return error_response(404, "not_found", "no route for " + std::string(path));

    if (parts.size() == 1) {
      if (method != "POST") return wrong_method();
      const json j = parse_body(body);
      only_keys(j, {"condition"});
      std::optional<Condition> condition;
      if (j.contains("condition")) {
        const auto text = string_field(j, "condition");
        condition = parse_condition(text);
        if (!condition) throw validation_error("condition must be Info or NoInfo");
      }
      return view_response(manager.create(condition), 201);
    }

    const std::string id = parts[1];
    session = id;
    if (parts.size() == 2) {
      if (method != "GET") return wrong_method();
      return view_response(manager.view(id));
    }
    const std::string& action = parts[2];
    if (action == "allocation") {
      if (method != "POST") return wrong_method();
      const json j = parse_body(body);
      only_keys(j, {"policy"});
      const auto text = string_field(j, "policy");
      const auto policy = parse_allocation(text);
      if (!policy || *policy == AllocationPolicy::Auto)
        throw validation_error("policy must be HC1First, HC2First or Proportional");
      return view_response(manager.submit_allocation(id, *policy));
    }
    if (action == "order") {
      if (method != "POST") return wrong_method();
      const json j = parse_body(body);
      only_keys(j, {"quantity"});
      const auto it = j.find("quantity");
      if (it == j.end()) throw validation_error("missing field 'quantity'");
      if (!it->is_number_integer()) throw validation_error("quantity must be an integer");
      if (it->is_number_unsigned() ? it->get<std::uint64_t>() > static_cast<std::uint64_t>(1) << 40
                                   : it->get<std::int64_t>() < 0)
        throw validation_error("quantity must be between 0 and 2^40");
      return view_response(manager.submit_order(id, it->get<Units>()));
    }
    if (action == "telemetry") {
      if (method != "GET") return wrong_method();
      const auto t = manager.telemetry(id);
      Response r;
      r.content_type = "text/plain";
      r.body = t.text;
      r.headers = {{"X-Session-Id", id},
                   {"X-Awaiting", std::string(service::to_string(t.awaiting))},
                   {"X-Week", std::to_string(t.week)}};
      return r;
    }
    return error_response(404, "not_found", "no route for " + std::string(path));
  }
}

// Errors about a live session still report where that session stands.
void attach_session(service::SessionManager& manager, const std::string& id, Response& r) {
  if (id.empty()) return;
  try {
    const auto v = manager.view(id);
    json j = json::parse(r.body);
    j["session_id"] = v.session_id;
    j["awaiting"] = service::to_string(v.awaiting);
    j["week"] = v.week;
    r.body = j.dump();
  } catch (const Error&) {
  }
}

}  // namespace

Response handle_request(service::SessionManager& manager, std::string_view method, std::string_view path,
                        std::string_view body) {
  std::string session;
  Response r;
  try {
    return route(manager, method, path, body, session);
  } catch (const Error& e) {
    r = error_response(status_of(e.kind()), kind_name(e.kind()), e.what());
  } catch (const std::exception& e) {
    r = error_response(500, "internal", e.what());
  }
  attach_session(manager, session, r);
  return r;
}

struct Server::Impl {
  explicit Impl(service::SessionManager& m) : manager(m) {}
  service::SessionManager& manager;
  httplib::Server server;
};

Server::Server(service::SessionManager& manager) : impl_(std::make_unique<Impl>(manager)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const Response r = handle_request(impl_->manager, req.method, req.path, req.body);
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(r.body, r.content_type);
  };
  const std::string all = R"(/.*)";
  impl_->server.Get(all, handler);
  impl_->server.Post(all, handler);
  impl_->server.Put(all, handler);
  impl_->server.Delete(all, handler);
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw io_error("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw io_error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void Server::listen() {
  if (!impl_->server.listen_after_bind()) throw io_error("server stopped with an error");
}

void Server::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace gamette::http
