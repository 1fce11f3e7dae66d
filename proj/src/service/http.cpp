#include "citykb/service/http.hpp"

#include <charconv>

#include <httplib.h>

#include "citykb/quadstore/nquads.hpp"
#include "citykb/query/bgp.hpp"

namespace citykb::service {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";
constexpr const char* kProblemJson = "application/problem+json";

struct HttpProblem : std::runtime_error {
  HttpProblem(int status, std::string title, const std::string& detail)
      : std::runtime_error(detail), status(status), title(std::move(title)) {}
  int status;
  std::string title;
};

HttpProblem badRequest(const std::string& detail) { return {400, "Bad Request", detail}; }

void sendJson(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void sendProblem(httplib::Response& res, int status, const std::string& title,
                 const std::string& detail) {
  res.status = status;
  json body{{"type", "about:blank"}, {"title", title}, {"status", status}, {"detail", detail}};
  res.set_content(body.dump(), kProblemJson);
}

json parseBody(const httplib::Request& req) {
  if (req.body.empty()) throw badRequest("request body must be a JSON document");
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw badRequest(std::string("malformed JSON: ") + e.what());
  }
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

double doubleParam(const httplib::Request& req, const char* name, std::optional<double> fallback = {}) {
  auto v = param(req, name);
  if (!v) {
    if (fallback) return *fallback;
    throw badRequest(std::string("missing query parameter '") + name + "'");
  }
  try {
    std::size_t used = 0;
    double d = std::stod(*v, &used);
    if (used != v->size() || !std::isfinite(d)) throw std::invalid_argument(*v);
    return d;
  } catch (const std::exception&) {
    throw badRequest(std::string("parameter '") + name + "' must be a number");
  }
}

std::uint64_t unsignedValue(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || text.empty())
    throw badRequest(what + " must be a non-negative integer");
  return v;
}

std::uint64_t unsignedParam(const httplib::Request& req, const char* name,
                            std::optional<std::uint64_t> fallback = {}) {
  auto v = param(req, name);
  if (!v) {
    if (fallback) return *fallback;
    throw badRequest(std::string("missing query parameter '") + name + "'");
  }
  return unsignedValue(*v, std::string("parameter '") + name + "'");
}

query::GeoPoint pointParams(const httplib::Request& req) {
  query::GeoPoint p{doubleParam(req, "lat"), doubleParam(req, "lon")};
  try {
    query::validatePoint(p);
  } catch (const std::exception& e) {
    throw badRequest(e.what());
  }
  return p;
}

json runSummary(const validation::CheckRun& run) {
  std::size_t violations = 0, failing = 0;
  for (const auto& r : run.results) {
    violations += r.violationCount;
    failing += r.violationCount > 0;
  }
  return {{"runId", run.runId},
          {"timestamp", run.timestamp},
          {"checks", run.results.size()},
          {"failingChecks", failing},
          {"violations", violations}};
}

}  // namespace

struct ApiServer::Impl {
  explicit Impl(KnowledgeBase& kb) : kb(kb) { routes(); }

  KnowledgeBase& kb;
  httplib::Server server;

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  // Maps exceptions from the layers below to problem documents.
  static httplib::Server::Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const HttpProblem& p) {
        sendProblem(res, p.status, p.title, p.what());
      } catch (const query::QueryError& e) {
        sendProblem(res, 400, "Invalid Query", e.what());
      } catch (const recon::ReviewError& e) {
        switch (e.code()) {
          case recon::ReviewError::Code::NotFound:
            sendProblem(res, 404, "Not Found", e.what());
            break;
          case recon::ReviewError::Code::Conflict:
            sendProblem(res, 409, "Conflict", e.what());
            break;
          case recon::ReviewError::Code::InvalidChoice:
            sendProblem(res, 422, "Invalid Choice", e.what());
            break;
        }
      } catch (const UnknownDataset& e) {
        sendProblem(res, 404, "Not Found", e.what());
      } catch (const ingest::SourceUnavailable& e) {
        sendProblem(res, 502, "Source Unavailable", e.what());
      } catch (const ingest::DatasetError& e) {
        sendProblem(res, 422, "Unusable Dataset", e.what());
      } catch (const json::exception& e) {
        sendProblem(res, 400, "Bad Request", e.what());
      } catch (const std::exception& e) {
        sendProblem(res, 500, "Internal Server Error", e.what());
      }
    };
  }

  void routes() {
    server.Get("/health", guarded([this](const httplib::Request&, httplib::Response& res) {
      sendJson(res, {{"status", "ok"}, {"quads", kb.snapshot().size()}});
    }));

    server.Post("/query", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto q = query::parseQuery(parseBody(req));
      bool capped = !q.limit;
      if (capped) q.limit = kDefaultRowCap + 1;
      auto table = query::evaluate(q, kb.snapshot());
      bool truncated = capped && table.rows.size() > kDefaultRowCap;
      if (truncated) table.rows.resize(kDefaultRowCap);
      auto body = query::toJson(table);
      body["truncated"] = truncated;
      sendJson(res, body);
    }));

    server.Get("/near", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto center = pointParams(req);
      double radius = doubleParam(req, "radius", 500.0);
      if (radius <= 0 || radius > kMaxNearRadiusMeters)
        throw badRequest("radius must be in (0, " + std::to_string(static_cast<int>(kMaxNearRadiusMeters)) + "] meters");
      auto limit = unsignedParam(req, "limit", 100);
      auto hits = kb.geo()->nearServices(center, radius, param(req, "category"));
      json results = json::array();
      for (std::size_t i = 0; i < hits.size() && i < limit; ++i)
        results.push_back({{"service", hits[i].serviceIri}, {"distance", hits[i].distance}});
      sendJson(res, {{"center", {{"lat", center.lat}, {"lon", center.lon}}},
                     {"radius", radius},
                     {"total", hits.size()},
                     {"results", results}});
    }));

    server.Get("/closest-number", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto p = pointParams(req);
      auto c = kb.geo()->closestStreetNumber(p);
      if (!c) throw HttpProblem(404, "Not Found", "no street-number entries are loaded");
      auto orNull = [](const std::string& s) { return s.empty() ? json(nullptr) : json(s); };
      sendJson(res, {{"entry", c->entryIri},
                     {"streetNumber", orNull(c->streetNumberIri)},
                     {"road", orNull(c->roadIri)},
                     {"distance", c->distance}});
    }));

    server.Get("/reviews", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::optional<recon::ReviewStatus> status = recon::ReviewStatus::Pending;
      if (auto s = param(req, "status")) {
        if (*s == "all") status.reset();
        else if (!(status = recon::parseStatus(*s)))
          throw badRequest("status must be pending, resolved, rejected or all");
      }
      auto offset = unsignedParam(req, "offset", 0);
      auto limit = unsignedParam(req, "limit", 50);
      if (limit > kMaxReviewPage) throw badRequest("limit must not exceed " + std::to_string(kMaxReviewPage));
      auto muni = param(req, "municipality");
      json items = json::array();
      for (const auto& item : kb.reviews().list(status, offset, limit, muni))
        items.push_back(recon::itemToJson(item));
      sendJson(res, {{"total", kb.reviews().count(status, muni)},
                     {"offset", offset},
                     {"limit", limit},
                     {"items", items}});
    }));

    server.Get(R"(/reviews/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto id = unsignedValue(req.matches[1], "review id");
      auto item = kb.reviews().get(id);
      if (!item) throw HttpProblem(404, "Not Found", "no review item " + std::to_string(id));
      sendJson(res, recon::itemToJson(*item));
    }));

    server.Post(R"(/reviews/(\d+)/resolution)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto id = unsignedValue(req.matches[1], "review id");
      auto body = parseBody(req);
      if (!body.is_object() || !body.contains("choice") || !body["choice"].is_string())
        throw badRequest("body must carry a string 'choice': a candidate IRI or \"reject\"");
      std::string key = req.get_header_value("Idempotency-Key");
      if (key.empty()) key = body.value("idempotencyKey", std::string());
      if (key.empty()) throw badRequest("an Idempotency-Key header is required");
      auto reviewer = body.value("reviewer", std::string("anonymous"));
      auto r = kb.resolveReview(id, body["choice"].get<std::string>(), key, reviewer);
      json emitted = json::array();
      if (r.item.decision)
        for (const auto& q : r.item.decision->quads) emitted.push_back(rdf::formatNQuad(q));
      sendJson(res, {{"replayed", r.replayed}, {"emittedQuads", emitted}, {"item", recon::itemToJson(r.item)}},
               r.replayed ? 200 : 201);
    }));

    server.Get("/datasets", guarded([this](const httplib::Request&, httplib::Response& res) {
      json out = json::array();
      for (const auto& d : kb.datasets()) out.push_back(d.toJson());
      sendJson(res, {{"datasets", out}});
    }));

    server.Post(R"(/datasets/([^/]+)/ingest)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
      sendJson(res, kb.ingest(req.matches[1]).toJson());
    }));

    server.Post("/reconciliation/runs", guarded([this](const httplib::Request&, httplib::Response& res) {
      sendJson(res, kb.reconcile().toJson(), 201);
    }));

    server.Post("/validation/runs", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::optional<validation::CheckRun> baseline;
      if (auto b = param(req, "baseline")) {
        baseline = kb.history().get(unsignedValue(*b, "baseline"));
        if (!baseline) throw HttpProblem(404, "Not Found", "no validation run " + *b);
      }
      auto run = kb.runValidation();
      auto body = run.toJson();
      if (baseline) body["diff"] = validation::diffRuns(*baseline, run).toJson();
      sendJson(res, body, 201);
    }));

    server.Get("/validation/runs", guarded([this](const httplib::Request&, httplib::Response& res) {
      json runs = json::array();
      auto all = kb.history().toJson();
      for (const auto& r : all.at("runs"))
        runs.push_back(runSummary(validation::CheckRun::fromJson(r)));
      sendJson(res, {{"runs", runs}});
    }));

    server.Get(R"(/validation/runs/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto id = unsignedValue(req.matches[1], "run id");
      auto run = kb.history().get(id);
      if (!run) throw HttpProblem(404, "Not Found", "no validation run " + std::to_string(id));
      sendJson(res, run->toJson());
    }));

    server.Get("/validation/diff", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto base = unsignedParam(req, "base");
      auto cur = unsignedParam(req, "cur");
      auto b = kb.history().get(base), c = kb.history().get(cur);
      if (!b || !c)
        throw HttpProblem(404, "Not Found", "no validation run " + std::to_string(b ? cur : base));
      sendJson(res, validation::diffRuns(*b, *c).toJson());
    }));

    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      // Handlers set their own bodies; this covers unmatched routes.
      if (!res.body.empty()) return;
      if (res.status == 404) sendProblem(res, 404, "Not Found", "no route for " + req.method + " " + req.path);
      else sendProblem(res, res.status, "Error", "request failed");
    });
  }
};

ApiServer::ApiServer(KnowledgeBase& kb) : impl_(std::make_unique<Impl>(kb)) {}
ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool ApiServer::listen() { return impl_->server.listen_after_bind(); }
void ApiServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}
void ApiServer::waitUntilReady() const { impl_->server.wait_until_ready(); }

}  // namespace citykb::service
