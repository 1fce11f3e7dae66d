#include <algorithm>
#include <set>

#include "citykb/mapping/model.hpp"
#include "citykb/schema/vocab.hpp"

namespace citykb::mapping {

using rdf::GraphId;
using rdf::Quad;
using rdf::Term;

std::string percentEncode(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    }
  }
  return out;
}

namespace {

struct KindInfo {
  std::string_view forward;
  std::string_view inverse;
  std::string_view fragment;
};

KindInfo kindInfo(TemporalKind k) {
  switch (k) {
    case TemporalKind::Parking:
      return {vocab::km4c::observationTime, vocab::km4c::instantParking, "instantParking"};
    case TemporalKind::Avm:
      return {vocab::km4c::hasLastStopTime, vocab::km4c::instantAVM, "instantAVM"};
    case TemporalKind::Forecast:
      return {vocab::km4c::hasExpectedTime, vocab::km4c::instantForecast, "instantForecast"};
    case TemporalKind::WReport:
      return {vocab::km4c::updateTime, vocab::km4c::instantWReport, "instantWReport"};
    case TemporalKind::Observation:
      return {vocab::km4c::measuredTime, vocab::km4c::instantObserv, "instantObserv"};
  }
  return {};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool isDecimal(std::string_view v) {
  std::size_t i = 0;
  if (i < v.size() && (v[i] == '+' || v[i] == '-')) ++i;
  std::size_t digits = 0;
  bool dot = false;
  for (; i < v.size(); ++i) {
    if (std::isdigit(static_cast<unsigned char>(v[i]))) {
      ++digits;
    } else if (v[i] == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digits > 0;
}

// Applies a transform; nullopt with `error` set on failure, nullopt without
// error when the value is legitimately absent.
std::optional<std::string> transform(Transform t, std::string_view raw, const IstatTable* istat,
                                     std::string& error) {
  switch (t) {
    case Transform::None: return std::string(raw);
    case Transform::Trim: return std::string(trim(raw));
    case Transform::Uppercase: return upper(raw);
    case Transform::ParseDecimal: {
      std::string v(trim(raw));
      if (v.empty()) return v;
      std::replace(v.begin(), v.end(), ',', '.');
      if (!isDecimal(v)) {
        error = "not a decimal: '" + std::string(raw) + "'";
        return std::nullopt;
      }
      return v;
    }
    case Transform::IstatLookup: {
      if (trim(raw).empty()) return std::string();
      if (!istat) {
        error = "istat-lookup without an ISTAT table";
        return std::nullopt;
      }
      auto code = istat->lookup(raw);
      if (!code) error = "unknown municipality '" + std::string(raw) + "'";
      return code;
    }
  }
  return std::string(raw);
}

bool absentCell(std::string_view value, bool numberColumn) {
  auto v = trim(value);
  if (v.empty()) return true;
  if (v.size() == 3 && std::toupper(static_cast<unsigned char>(v[0])) == 'S' &&
      std::toupper(static_cast<unsigned char>(v[1])) == 'N' &&
      std::toupper(static_cast<unsigned char>(v[2])) == 'C') {
    return true;
  }
  return numberColumn && v == "0";
}

std::string compactTimestamp(std::int64_t epoch) {
  std::string iso = ingest::formatIsoUtc(epoch);
  std::string out;
  for (char c : iso) {
    if (c != '-' && c != ':') out.push_back(c);
  }
  return out;
}

}  // namespace

std::string instantIri(const std::string& resourceIri, TemporalKind kind, std::int64_t epoch,
                       std::string_view base) {
  if (base.empty()) base = vocab::kResourceBase;
  return std::string(base) + "/Instant/" + percentEncode(resourceIri) + "/" +
         compactTimestamp(epoch) + "#" + std::string(kindInfo(kind).fragment);
}

std::vector<Quad> temporalLink(const std::string& resourceIri, TemporalKind kind,
                               std::string_view timestamp, const GraphId& graph,
                               std::string_view base) {
  auto epoch = ingest::parseIsoUtc(trim(timestamp));
  if (!epoch) {
    throw std::invalid_argument("invalid ISO-8601 timestamp '" + std::string(timestamp) + "'");
  }
  auto info = kindInfo(kind);
  auto instant = Term::iri(instantIri(resourceIri, kind, *epoch, base));
  auto resource = Term::iri(resourceIri);
  return {
      Quad{resource, Term::iri(std::string(info.forward)), instant, graph},
      Quad{instant, Term::iri(std::string(info.inverse)), resource, graph},
      Quad{instant, Term::iri(std::string(vocab::time::inXSDDateTime)),
           Term::literal(ingest::formatIsoUtc(*epoch), std::string(vocab::xsd::dateTime)), graph},
  };
}

std::variant<CompiledMapping, std::vector<CompileError>> compileMapping(
    const MappingModel& model, const schema::SchemaCatalog& catalog) {
  std::vector<CompileError> errors;
  CompiledMapping out;
  out.datasetId_ = model.datasetId;
  out.derived_ = model.derived;
  if (model.datasetId.empty()) errors.push_back({"dataset", "dataset id is empty"});
  if (!rdf::isValidIri(model.base)) errors.push_back({"base", "not an absolute IRI"});
  if (model.columns.empty()) errors.push_back({"columns", "source columns must be declared"});

  std::set<std::string> columns(model.columns.begin(), model.columns.end());
  for (std::size_t i = 0; i < model.derived.size(); ++i) {
    const auto& d = model.derived[i];
    if (!columns.count(d.from)) {
      errors.push_back({"derivedColumns[" + std::to_string(i) + "].from",
                        "unknown column '" + d.from + "'"});
    }
    columns.insert(d.name);
  }

  auto expand = [&](const std::string& name, const std::string& where) -> std::optional<std::string> {
    try {
      return catalog.expand(name);
    } catch (const std::invalid_argument& e) {
      errors.push_back({where, e.what()});
      return std::nullopt;
    }
  };
  auto compatible = [&](const std::string& cls, const std::vector<std::string>& allowed) {
    return std::any_of(allowed.begin(), allowed.end(), [&](const std::string& d) {
      return d == vocab::owl::Thing || catalog.isSubclassOf(cls, d);
    });
  };

  std::map<std::string, std::size_t> aliases;
  for (std::size_t i = 0; i < model.entities.size(); ++i) {
    const auto& e = model.entities[i];
    auto where = "entities[" + std::to_string(i) + "]";
    if (!aliases.emplace(e.alias, i).second) {
      errors.push_back({where + ".alias", "duplicate alias '" + e.alias + "'"});
    }
    CompiledMapping::Entity entity;
    if (auto cls = expand(e.classIri, where + ".class")) {
      if (!catalog.findClass(*cls)) {
        errors.push_back({where + ".class", "unknown class " + e.classIri});
      }
      entity.classIri = *cls;
    }
    // Split the template into literal text and {column} segments.
    std::string rendered;
    std::size_t pos = 0;
    const auto& t = e.uriTemplate;
    bool sawColumn = false;
    while (pos < t.size()) {
      auto open = t.find('{', pos);
      if (open == std::string::npos) {
        entity.segments.push_back({false, t.substr(pos)});
        rendered += t.substr(pos);
        break;
      }
      if (open > pos) {
        entity.segments.push_back({false, t.substr(pos, open - pos)});
        rendered += t.substr(pos, open - pos);
      }
      auto close = t.find('}', open);
      if (close == std::string::npos) {
        errors.push_back({where + ".uriTemplate", "unbalanced '{'"});
        break;
      }
      auto name = t.substr(open + 1, close - open - 1);
      if (name == "base") {
        entity.segments.push_back({false, model.base});
        rendered += model.base;
      } else {
        if (!columns.count(name)) {
          errors.push_back({where + ".uriTemplate", "unknown column '" + name + "'"});
        }
        entity.segments.push_back({true, name});
        rendered += "x";
        sawColumn = true;
      }
      pos = close + 1;
    }
    if (!rdf::isValidIri(rendered)) {
      errors.push_back({where + ".uriTemplate", "does not produce an absolute IRI"});
    }
    if (!sawColumn) {
      errors.push_back({where + ".uriTemplate", "must reference at least one column"});
    }
    out.entities_.push_back(std::move(entity));
  }

  auto entityOf = [&](const std::string& alias, const std::string& where) -> std::optional<std::size_t> {
    auto it = aliases.find(alias);
    if (it == aliases.end()) {
      errors.push_back({where, "undeclared alias '" + alias + "'"});
      return std::nullopt;
    }
    return it->second;
  };

  for (std::size_t i = 0; i < model.dataProperties.size(); ++i) {
    const auto& p = model.dataProperties[i];
    auto where = "dataProperties[" + std::to_string(i) + "]";
    auto entity = entityOf(p.alias, where + ".alias");
    if (!columns.count(p.column)) {
      errors.push_back({where + ".column", "unknown column '" + p.column + "'"});
    }
    auto prop = expand(p.propertyIri, where + ".property");
    auto datatype = expand(p.datatype, where + ".datatype");
    if (!prop || !datatype || !entity) continue;
    const auto* def = catalog.findProperty(*prop);
    if (!def) {
      errors.push_back({where + ".property", "unknown property " + p.propertyIri});
      continue;
    }
    if (def->kind != schema::PropertyKind::Data) {
      errors.push_back({where + ".property", p.propertyIri + " is an object property"});
      continue;
    }
    const auto& cls = out.entities_[*entity].classIri;
    if (!cls.empty() && !compatible(cls, def->domain)) {
      errors.push_back({where + ".property",
                        "domain of " + p.propertyIri + " does not admit " + catalog.compact(cls)});
    }
    out.props_.push_back({*entity, p.column, *prop, *datatype, p.transform, p.numberColumn});
  }

  for (std::size_t i = 0; i < model.links.size(); ++i) {
    const auto& l = model.links[i];
    auto where = "links[" + std::to_string(i) + "]";
    auto s = entityOf(l.subjectAlias, where + ".subject");
    auto o = entityOf(l.objectAlias, where + ".object");
    auto prop = expand(l.propertyIri, where + ".property");
    if (!s || !o || !prop) continue;
    const auto* def = catalog.findProperty(*prop);
    if (!def) {
      errors.push_back({where + ".property", "unknown property " + l.propertyIri});
      continue;
    }
    if (def->kind != schema::PropertyKind::Object) {
      errors.push_back({where + ".property", l.propertyIri + " is a data property"});
      continue;
    }
    const auto& sc = out.entities_[*s].classIri;
    const auto& oc = out.entities_[*o].classIri;
    if (!sc.empty() && !compatible(sc, def->domain)) {
      errors.push_back({where + ".property",
                        "domain of " + l.propertyIri + " does not admit " + catalog.compact(sc)});
    }
    if (!oc.empty() && !compatible(oc, {def->range})) {
      errors.push_back({where + ".property",
                        "range of " + l.propertyIri + " does not admit " + catalog.compact(oc)});
    }
    out.links_.push_back({*s, *prop, *o});
  }

  for (std::size_t i = 0; i < model.temporal.size(); ++i) {
    const auto& t = model.temporal[i];
    auto where = "temporal[" + std::to_string(i) + "]";
    auto entity = entityOf(t.alias, where + ".alias");
    if (!columns.count(t.column)) {
      errors.push_back({where + ".column", "unknown column '" + t.column + "'"});
    }
    if (!entity) continue;
    const auto* def = catalog.findProperty(kindInfo(t.kind).forward);
    const auto& cls = out.entities_[*entity].classIri;
    if (def && !cls.empty() && !compatible(cls, def->domain)) {
      errors.push_back({where + ".kind", "temporal kind does not apply to " + catalog.compact(cls)});
    }
    out.temporal_.push_back({*entity, t.kind, t.column});
  }

  out.base_ = model.base;
  if (!errors.empty()) return errors;
  return out;
}

void CompiledMapping::applyOne(const ingest::RawRecord& record, const GraphId& graph,
                               const IstatTable* istat, std::vector<Quad>& out,
                               std::vector<CellError>& errors) const {
  std::vector<std::pair<std::string, std::string>> extra;
  auto get = [&](const std::string& column) -> std::string_view {
    for (const auto& [k, v] : record.fields) {
      if (k == column) return v;
    }
    for (const auto& [k, v] : extra) {
      if (k == column) return v;
    }
    return {};
  };
  for (const auto& d : derived_) {
    std::string error;
    auto v = transform(d.transform, get(d.from), istat, error);
    if (!error.empty()) errors.push_back({record.rowIndex, d.from, error});
    extra.emplace_back(d.name, v.value_or(""));
  }

  std::vector<std::optional<Term>> subjects(entities_.size());
  const Term type = Term::iri(std::string(vocab::rdf::type));
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    std::string iri;
    bool complete = true;
    for (const auto& seg : entities_[i].segments) {
      if (!seg.column) {
        iri += seg.text;
        continue;
      }
      auto v = trim(get(seg.text));
      if (v.empty()) {
        complete = false;
        break;
      }
      iri += percentEncode(v);
    }
    if (!complete) continue;
    subjects[i] = Term::iri(std::move(iri));
    out.push_back(Quad{*subjects[i], type, Term::iri(entities_[i].classIri), graph});
  }

  for (const auto& p : props_) {
    if (!subjects[p.entity]) continue;
    std::string error;
    auto v = transform(p.transform, get(p.column), istat, error);
    if (!error.empty()) {
      errors.push_back({record.rowIndex, p.column, error});
      continue;
    }
    if (!v || absentCell(*v, p.numberColumn)) continue;
    auto literal = Term::literal(std::move(*v), p.datatype);
    if (auto bad = rdf::validateTerm(literal)) {
      errors.push_back({record.rowIndex, p.column, *bad});
      continue;
    }
    out.push_back(Quad{*subjects[p.entity], Term::iri(p.property), std::move(literal), graph});
  }

  for (const auto& l : links_) {
    if (!subjects[l.subject] || !subjects[l.object]) continue;
    out.push_back(Quad{*subjects[l.subject], Term::iri(l.property), *subjects[l.object], graph});
  }

  for (const auto& t : temporal_) {
    if (!subjects[t.entity]) continue;
    auto v = get(t.column);
    if (trim(v).empty()) continue;
    try {
      auto quads = temporalLink(subjects[t.entity]->value(), t.kind, v, graph, base_);
      out.insert(out.end(), quads.begin(), quads.end());
    } catch (const std::invalid_argument& e) {
      errors.push_back({record.rowIndex, t.column, e.what()});
    }
  }
}

MappingResult CompiledMapping::apply(std::span<const ingest::RawRecord> records,
                                     const std::optional<GraphId>& graph,
                                     const IstatTable* istat) const {
  MappingResult result;
  for (const auto& r : records) {
    GraphId g = graph ? *graph : GraphId{r.datasetId.empty() ? datasetId_ : r.datasetId,
                                         r.version == 0 ? 1 : r.version};
    applyOne(r, g, istat, result.quads, result.errors);
  }
  std::sort(result.quads.begin(), result.quads.end());
  result.quads.erase(std::unique(result.quads.begin(), result.quads.end()), result.quads.end());
  return result;
}

}  // namespace citykb::mapping
