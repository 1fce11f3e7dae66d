#include <fstream>
#include <sstream>

#include "citykb/mapping/model.hpp"
#include "citykb/schema/vocab.hpp"
#include "json.hpp"

namespace citykb::mapping {

using nlohmann::json;

TemporalKind parseTemporalKind(std::string_view s) {
  if (s == "parking") return TemporalKind::Parking;
  if (s == "avm") return TemporalKind::Avm;
  if (s == "forecast") return TemporalKind::Forecast;
  if (s == "wreport") return TemporalKind::WReport;
  if (s == "observation") return TemporalKind::Observation;
  throw std::invalid_argument("unknown temporal kind '" + std::string(s) + "'");
}

Transform parseTransform(std::string_view s) {
  if (s.empty() || s == "none") return Transform::None;
  if (s == "trim") return Transform::Trim;
  if (s == "uppercase") return Transform::Uppercase;
  if (s == "parse-decimal") return Transform::ParseDecimal;
  if (s == "istat-lookup") return Transform::IstatLookup;
  throw std::invalid_argument("unknown transform '" + std::string(s) + "'");
}

namespace {

std::string str(const json& obj, const char* key, const std::string& where,
                bool required = true) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw std::invalid_argument(where + "." + key + ": missing");
    return {};
  }
  if (!it->is_string()) throw std::invalid_argument(where + "." + key + ": expected a string");
  return it->get<std::string>();
}

const json& array(const json& doc, const char* key) {
  static const json empty = json::array();
  auto it = doc.find(key);
  if (it == doc.end()) return empty;
  if (!it->is_array()) throw std::invalid_argument(std::string(key) + ": expected an array");
  return *it;
}

template <typename F>
auto wrap(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    if (msg.starts_with(where)) throw;
    throw std::invalid_argument(where + ": " + msg);
  }
}

}  // namespace

MappingModel parseMappingModel(std::string_view jsonText) {
  json doc;
  try {
    doc = json::parse(jsonText.begin(), jsonText.end());
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("mapping model: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("mapping model: expected an object");
  MappingModel m;
  m.datasetId = str(doc, "dataset", "model");
  m.base = str(doc, "base", "model", false);
  if (m.base.empty()) m.base = std::string(vocab::kResourceBase);
  for (const auto& c : array(doc, "columns")) {
    if (!c.is_string()) throw std::invalid_argument("columns: expected strings");
    m.columns.push_back(c.get<std::string>());
  }
  const auto& derived = array(doc, "derivedColumns");
  for (std::size_t i = 0; i < derived.size(); ++i) {
    auto where = "derivedColumns[" + std::to_string(i) + "]";
    m.derived.push_back(wrap(where, [&] {
      return DerivedColumn{str(derived[i], "name", where), str(derived[i], "from", where),
                           parseTransform(str(derived[i], "transform", where))};
    }));
  }
  const auto& entities = array(doc, "entities");
  for (std::size_t i = 0; i < entities.size(); ++i) {
    auto where = "entities[" + std::to_string(i) + "]";
    m.entities.push_back(EntityMap{str(entities[i], "alias", where),
                                   str(entities[i], "class", where),
                                   str(entities[i], "uriTemplate", where)});
  }
  const auto& props = array(doc, "dataProperties");
  for (std::size_t i = 0; i < props.size(); ++i) {
    auto where = "dataProperties[" + std::to_string(i) + "]";
    const auto& p = props[i];
    m.dataProperties.push_back(wrap(where, [&] {
      DataPropertyMap d;
      d.alias = str(p, "alias", where);
      d.column = str(p, "column", where);
      d.propertyIri = str(p, "property", where);
      d.datatype = str(p, "datatype", where, false);
      if (d.datatype.empty()) d.datatype = "xsd:string";
      d.transform = parseTransform(str(p, "transform", where, false));
      d.numberColumn = p.value("numberColumn", false);
      return d;
    }));
  }
  const auto& links = array(doc, "links");
  for (std::size_t i = 0; i < links.size(); ++i) {
    auto where = "links[" + std::to_string(i) + "]";
    m.links.push_back(LinkMap{str(links[i], "subject", where), str(links[i], "property", where),
                              str(links[i], "object", where)});
  }
  const auto& temporal = array(doc, "temporal");
  for (std::size_t i = 0; i < temporal.size(); ++i) {
    auto where = "temporal[" + std::to_string(i) + "]";
    m.temporal.push_back(wrap(where, [&] {
      return TemporalMap{str(temporal[i], "alias", where),
                         parseTemporalKind(str(temporal[i], "kind", where)),
                         str(temporal[i], "column", where)};
    }));
  }
  return m;
}

MappingModel loadMappingModel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read mapping model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parseMappingModel(buf.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace citykb::mapping
