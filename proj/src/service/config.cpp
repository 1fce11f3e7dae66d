#include "citykb/service/config.hpp"

#include <fstream>

namespace citykb::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

char singleChar(const json& j, const char* key, char fallback) {
  if (!j.contains(key)) return fallback;
  auto s = j.at(key).get<std::string>();
  if (s.size() != 1) throw ConfigError(std::string("csv.") + key + " must be one character");
  return s[0];
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

// Sources that look like local paths are resolved; URIs are kept.
std::string resolveSource(const fs::path& base, const std::string& source) {
  if (source.find("://") != std::string::npos) return source;
  return resolve(base, source).string();
}

}  // namespace

const DatasetConfig* ServiceConfig::dataset(const std::string& id) const {
  for (const auto& d : datasets)
    if (d.descriptor.id == id) return &d;
  return nullptr;
}

ingest::DatasetDescriptor descriptorFromJson(const json& j) {
  if (!j.is_object()) throw ConfigError("dataset entry must be an object");
  ingest::DatasetDescriptor d;
  try {
    d.id = j.at("id").get<std::string>();
    d.sourceUri = j.at("source").get<std::string>();
    d.format = ingest::parseFormat(j.value("format", "csv"));
    d.category = ingest::parseCategory(j.value("category", "static"));
    d.periodSeconds = j.value("periodSeconds", std::int64_t{0});
    d.mappingRef = j.at("mapping").get<std::string>();
    if (j.contains("csv")) {
      const auto& c = j.at("csv");
      d.dialect.delimiter = singleChar(c, "delimiter", ',');
      d.dialect.quote = singleChar(c, "quote", '"');
      d.dialect.header = c.value("header", true);
    }
  } catch (const json::exception& e) {
    throw ConfigError("dataset " + j.value("id", std::string("?")) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("dataset " + j.value("id", std::string("?")) + ": " + e.what());
  }
  auto problems = ingest::validateDescriptor(d);
  if (!problems.empty()) throw ConfigError("dataset " + d.id + ": " + problems.front());
  return d;
}

json descriptorToJson(const ingest::DatasetDescriptor& d) {
  return {{"id", d.id},
          {"source", d.sourceUri},
          {"format", ingest::toString(d.format)},
          {"category", ingest::toString(d.category)},
          {"periodSeconds", d.periodSeconds},
          {"mapping", d.mappingRef}};
}

ServiceConfig ServiceConfig::fromJson(const json& j, const fs::path& baseDir) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  ServiceConfig c;
  auto optPath = [&](const char* key) -> std::optional<fs::path> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return resolve(baseDir, j.at(key).get<std::string>());
  };
  try {
    c.recordStore = resolve(baseDir, j.value("recordStore", std::string("var/records")));
    c.stateDir = resolve(baseDir, j.value("stateDir", std::string("var/state")));
    c.istatCodes = optPath("istatCodes");
    c.municipalityAliases = optPath("municipalityAliases");
    c.qualifiers = optPath("qualifiers");
    c.checks = optPath("checks");
    for (const auto& p : j.value("staticGraphs", json::array()))
      c.staticGraphs.push_back(resolve(baseDir, p.get<std::string>()));
    std::set<std::string> ids;
    for (const auto& dj : j.value("datasets", json::array())) {
      DatasetConfig d{descriptorFromJson(dj), {}};
      if (!ids.insert(d.descriptor.id).second)
        throw ConfigError("duplicate dataset id " + d.descriptor.id);
      d.descriptor.sourceUri = resolveSource(baseDir, d.descriptor.sourceUri);
      d.mappingPath = resolve(baseDir, d.descriptor.mappingRef);
      c.datasets.push_back(std::move(d));
    }
    if (j.contains("reconcile")) {
      const auto& r = j.at("reconcile");
      for (const auto& id : r.value("after", json::array())) {
        auto s = id.get<std::string>();
        if (!ids.count(s)) throw ConfigError("reconcile.after names unknown dataset " + s);
        c.reconcileAfter.insert(s);
      }
      c.reconcileThreads = r.value("threads", 0u);
    }
    if (j.contains("server")) {
      const auto& s = j.at("server");
      c.host = s.value("host", c.host);
      c.port = s.value("port", c.port);
      c.schedule = s.value("schedule", false);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  }
  if (c.port < 0 || c.port > 65535) throw ConfigError("server.port out of range");
  return c;
}

ServiceConfig ServiceConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return fromJson(j, fs::absolute(path).parent_path());
}

}  // namespace citykb::service
