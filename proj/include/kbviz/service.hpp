#pragma once

#include "kbviz/workspace.hpp"

#include <httplib.h>

#include <cstdlib>
#include <memory>
#include <string>

namespace kbviz {

inline constexpr int kDefaultPort = 8080;

/// `KBVIZ_PORT` when set to a valid port, otherwise 8080.
inline int default_port() {
  if (const char* env = std::getenv("KBVIZ_PORT")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 65536) return static_cast<int>(v);
  }
  return kDefaultPort;
}

namespace detail {

/// Sends `body` with an ETag of its SHA-256; honours If-None-Match.
inline void send(const httplib::Request& req, httplib::Response& res, int status, const std::string& body,
                 const char* content_type) {
  std::string digest = sha256_hex(body);
  std::string etag = "\"" + digest + "\"";
  res.set_header("ETag", etag);
  res.set_header("X-Content-SHA256", digest);
  res.set_header("Cache-Control", "no-cache");
  if (status == 200 && req.get_header_value("If-None-Match") == etag) {
    res.status = 304;
    return;
  }
  res.status = status;
  res.set_content(body, content_type);
}

inline void send_json(const httplib::Request& req, httplib::Response& res, const std::string& body) {
  send(req, res, 200, body, "application/json");
}

inline void send_error(const httplib::Request& req, httplib::Response& res, int status, const std::string& message,
                       const std::vector<Diagnostic>& diagnostics = {}) {
  json diags = json::array();
  for (const auto& d : diagnostics) diags.push_back(diagnostic_to_json(d));
  json body{{"schema_version", kSchemaVersion},
            {"error", json{{"status", status}, {"message", message}, {"diagnostics", std::move(diags)}}}};
  send(req, res, status, dump_json(body) + "\n", "application/json");
}

inline std::string param(const httplib::Request& req, const char* key) {
  return req.has_param(key) ? req.get_param_value(key) : std::string();
}

inline ViewParams view_params(const httplib::Request& req) {
  return ViewParams::parse(param(req, "type"), param(req, "features"), param(req, "min_degree"));
}

inline std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

} // namespace detail

/// Registers the read-only API on `server`. The workspace must outlive it.
inline void install_routes(httplib::Server& server, const Workspace& ws) {
  using detail::send_error;
  using detail::send_json;

  server.Get("/api/model", [&ws](const httplib::Request& req, httplib::Response& res) {
    send_json(req, res, ws.model_text());
  });

  server.Get("/api/hypergraph", [&ws](const httplib::Request& req, httplib::Response& res) {
    ViewParams p;
    try {
      p = detail::view_params(req);
    } catch (const std::invalid_argument& e) {
      return send_error(req, res, 400, e.what());
    }
    send_json(req, res, ws.hypergraph_text(p));
  });

  server.Get("/api/layout", [&ws](const httplib::Request& req, httplib::Response& res) {
    ViewParams p;
    try {
      p = detail::view_params(req);
    } catch (const std::invalid_argument& e) {
      return send_error(req, res, 400, e.what());
    }
    std::string format = detail::param(req, "format");
    if (format == "svg") return detail::send(req, res, 200, ws.layout_svg(p), "image/svg+xml");
    if (!format.empty() && format != "json") return send_error(req, res, 400, "format must be 'json' or 'svg'");
    send_json(req, res, ws.layout_text(p));
  });

  server.Get("/api/reports", [&ws](const httplib::Request& req, httplib::Response& res) {
    send_json(req, res, ws.reports_text());
  });

  server.Get("/api/constraints", [&ws](const httplib::Request& req, httplib::Response& res) {
    std::string q = detail::param(req, "q");
    json list = json::array();
    for (const auto& c : ws.set().constraints)
      if (c.id.find(q) != std::string::npos || c.source.find(q) != std::string::npos)
        list.push_back(constraint_to_json(c));
    json body{{"schema_version", kSchemaVersion}, {"query", q}, {"constraints", std::move(list)}};
    send_json(req, res, dump_json(body) + "\n");
  });

  server.Get("/api/constraint", [&ws](const httplib::Request& req, httplib::Response& res) {
    auto ref = parse_constraint_ref(detail::param(req, "ref"));
    if (!ref) return send_error(req, res, 400, "ref must look like 'soft/<id>' or 'hard/<id>'");
    const Constraint* c = ws.set().find(*ref);
    if (!c) return send_error(req, res, 404, "unknown constraint '" + ref->str() + "'");
    json body{{"schema_version", kSchemaVersion}, {"constraint", constraint_to_json(*c)}};
    send_json(req, res, dump_json(body) + "\n");
  });

  server.Get("/api/neighborhood", [&ws](const httplib::Request& req, httplib::Response& res) {
    ViewParams p;
    try {
      p = detail::view_params(req);
    } catch (const std::invalid_argument& e) {
      return send_error(req, res, 400, e.what());
    }
    std::string node = detail::param(req, "node");
    if (node.empty()) return send_error(req, res, 400, "missing 'node' parameter");
    std::vector<std::string> neighbors;
    try {
      neighbors = neighborhood(hypergraph_for(ws.set(), p), node);
    } catch (const UnknownNode& e) {
      return send_error(req, res, 404, e.what());
    }
    json body{{"schema_version", kSchemaVersion}, {"node", node}, {"neighbors", std::move(neighbors)}};
    send_json(req, res, dump_json(body) + "\n");
  });

  server.Get("/api/violations", [&ws](const httplib::Request& req, httplib::Response& res) {
    auto ref = parse_constraint_ref(detail::param(req, "ref"));
    if (!ref) return send_error(req, res, 400, "ref must look like 'soft/<id>' or 'hard/<id>'");
    try {
      json specs = json::array();
      for (const auto& [name, count] : violations_of_constraint(ws.reports(), ws.set(), *ref))
        specs.push_back(json{{"spec", name}, {"count", count}});
      json body{{"schema_version", kSchemaVersion}, {"ref", ref->str()}, {"specs", std::move(specs)}};
      send_json(req, res, dump_json(body) + "\n");
    } catch (const UnknownConstraint& e) {
      send_error(req, res, 404, e.what());
    }
  });

  server.Get("/api/shared", [&ws](const httplib::Request& req, httplib::Response& res) {
    auto names = detail::split_commas(detail::param(req, "specs"));
    try {
      auto shared = shared_violations(ws.reports(), names);
      json common = json::array();
      for (const auto& r : shared.common) common.push_back(r.str());
      json exclusive = json::object();
      for (const auto& [name, refs] : shared.exclusive) {
        json list = json::array();
        for (const auto& r : refs) list.push_back(r.str());
        exclusive[name] = std::move(list);
      }
      json body{{"schema_version", kSchemaVersion}, {"common", std::move(common)}, {"exclusive", std::move(exclusive)}};
      send_json(req, res, dump_json(body) + "\n");
    } catch (const UnknownSpec& e) {
      send_error(req, res, 404, e.what());
    } catch (const std::invalid_argument& e) {
      send_error(req, res, 400, e.what());
    }
  });

  server.Post("/api/eval", [&ws](const httplib::Request& req, httplib::Response& res) {
    std::string name = detail::param(req, "name");
    if (name.empty()) name = "query";
    try {
      FactSet facts = load_fact_set(name, req.body);
      json body{{"schema_version", kSchemaVersion}, {"report", report_to_json(evaluate_spec(ws.set(), facts))}};
      send_json(req, res, dump_json(body) + "\n");
    } catch (const FactSetError& e) {
      send_error(req, res, 400, e.what(), e.diagnostics());
    }
  });

  server.set_exception_handler([](const httplib::Request& req, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    detail::send_error(req, res, 500, message);
  });

  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.body.empty()) detail::send_error(req, res, res.status, res.status == 404 ? "not found" : "request failed");
  });
}

} // namespace kbviz
