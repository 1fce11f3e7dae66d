#include "citykb/validation/checks.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "citykb/schema/vocab.hpp"

namespace citykb::validation {
namespace {

using query::FilterOp;
using query::GraphPatternQuery;
using query::PatternTerm;
using query::TriplePattern;
using query::Var;
using rdf::Term;

PatternTerm v(const char* name) { return Var{name}; }
PatternTerm c(std::string_view iri) { return Term::iri(std::string(iri)); }

const PatternTerm& typeP() {
  static const PatternTerm t = c(vocab::rdf::type);
  return t;
}

CheckDefinition fixed(std::string_view id, std::string description, std::string subject,
                      std::vector<GraphPatternQuery> queries) {
  CheckDefinition d;
  d.checkId = std::string(id);
  d.description = std::move(description);
  d.subject = std::move(subject);
  d.queries = std::move(queries);
  return d;
}

// Subjects of class `cls` carrying two distinct values of `property`.
GraphPatternQuery twoValues(std::string_view cls, std::string_view property, bool incoming) {
  GraphPatternQuery q;
  q.patterns.push_back({v("s"), typeP(), c(cls)});
  if (incoming) {
    q.patterns.push_back({v("a"), c(property), v("s")});
    q.patterns.push_back({v("b"), c(property), v("s")});
  } else {
    q.patterns.push_back({v("s"), c(property), v("a")});
    q.patterns.push_back({v("s"), c(property), v("b")});
  }
  q.filters.push_back({"a", FilterOp::NotSameTerm, "", v("b")});
  return q;
}

GraphPatternQuery lacking(std::string_view cls, std::string_view property, bool incoming) {
  GraphPatternQuery q;
  q.patterns.push_back({v("s"), typeP(), c(cls)});
  if (incoming) q.notExists.push_back({{v("x"), c(property), v("s")}});
  else q.notExists.push_back({{v("s"), c(property), v("x")}});
  return q;
}

GraphPatternQuery having(std::string_view cls, std::string_view property, bool incoming) {
  GraphPatternQuery q;
  q.patterns.push_back({v("s"), typeP(), c(cls)});
  if (incoming) q.patterns.push_back({v("x"), c(property), v("s")});
  else q.patterns.push_back({v("s"), c(property), v("x")});
  return q;
}

Severity parseSeverity(const std::string& s) {
  if (s == "error") return Severity::Error;
  if (s == "warning") return Severity::Warning;
  throw CheckError("unknown severity '" + s + "'");
}

Expectation parseExpectation(const std::string& s) {
  if (s == "empty-result") return Expectation::EmptyResult;
  if (s == "nonempty-result") return Expectation::NonemptyResult;
  throw CheckError("unknown expectation '" + s + "'");
}

bool bindsVariable(const GraphPatternQuery& q, const std::string& name) {
  for (const auto& p : q.patterns)
    for (const auto* t : {&p.s, &p.p, &p.o})
      if (const auto* var = std::get_if<Var>(t); var && var->name == name) return true;
  return false;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string_view severityName(Severity s) { return s == Severity::Error ? "error" : "warning"; }

std::string_view expectationName(Expectation e) {
  return e == Expectation::EmptyResult ? "empty-result" : "nonempty-result";
}

std::string cardinalityCheckId(const schema::CardinalityRule& rule) {
  const auto& cat = schema::builtinCatalog();
  return "cardinality/" + cat.compact(rule.classIri) + "/" + (rule.incoming ? "^" : "") +
         cat.compact(rule.propertyIri);
}

CheckDefinition cardinalityCheck(const schema::CardinalityRule& rule) {
  if ((rule.min && *rule.min > 1) || (rule.max && *rule.max > 1))
    throw CheckError("cardinality bound above 1 on " + rule.classIri + " " + rule.propertyIri +
                     " cannot be expressed as a pattern check");
  CheckDefinition d;
  d.checkId = cardinalityCheckId(rule);
  d.subject = "s";
  d.rule = rule;
  std::ostringstream text;
  text << "instances of " << schema::builtinCatalog().compact(rule.classIri) << " with ";
  if (rule.min) text << "at least " << *rule.min;
  if (rule.min && rule.max) text << " and ";
  if (rule.max) text << "at most " << *rule.max;
  text << (rule.incoming ? " incoming " : " ") << schema::builtinCatalog().compact(rule.propertyIri)
       << " statements";
  d.description = text.str();
  if (rule.min == 1) d.queries.push_back(lacking(rule.classIri, rule.propertyIri, rule.incoming));
  if (rule.max == 1) d.queries.push_back(twoValues(rule.classIri, rule.propertyIri, rule.incoming));
  if (rule.max == 0) d.queries.push_back(having(rule.classIri, rule.propertyIri, rule.incoming));
  return d;
}

std::vector<CheckDefinition> builtinChecks(const schema::SchemaCatalog& catalog) {
  std::vector<CheckDefinition> out;
  {
    GraphPatternQuery q;
    q.patterns.push_back({v("s"), typeP(), c(vocab::km4c::Service)});
    q.notExists.push_back({{v("s"), c(vocab::km4c::hasAccess), v("e")}});
    q.notExists.push_back({{v("s"), c(vocab::km4c::isIn), v("r")}});
    out.push_back(fixed(kUnreconciledService,
                        "services linked neither to an entry nor to a road", "s", {q}));
  }
  {
    // Class IRIs in type position have no statements of their own.
    GraphPatternQuery q;
    q.patterns.push_back({v("s"), v("p"), v("o")});
    q.filters.push_back({"p", FilterOp::NotSameTerm, "", typeP()});
    q.filters.push_back({"o", FilterOp::IsIri, "", std::nullopt});
    q.notExists.push_back({{v("o"), v("q"), v("z")}});
    out.push_back(fixed(kDanglingLink,
                        "link targets that are neither typed nor described by any statement",
                        "o", {q}));
  }
  {
    GraphPatternQuery q;
    q.patterns.push_back({v("s"), typeP(), c(vocab::km4c::WeatherReport)});
    q.notExists.push_back({{v("s"), c(vocab::km4c::refersTo), v("m")},
                           {v("m"), typeP(), c(vocab::km4c::Municipality)}});
    out.push_back(fixed(kWeatherWithoutMunicipality,
                        "weather reports not joined to a known municipality", "s", {q}));
  }
  out.push_back(fixed(kEntryMultipleCoordinates, "entries with more than one coordinate pair",
                      "s",
                      {twoValues(vocab::km4c::Entry, vocab::geo::lat, false),
                       twoValues(vocab::km4c::Entry, vocab::geo::lon, false)}));
  out.push_back(fixed(kRouteWithoutStart, "routes missing their first section or first stop",
                      "s",
                      {lacking(vocab::km4c::Route, vocab::km4c::hasFirstSection, false),
                       lacking(vocab::km4c::Route, vocab::km4c::hasFirstStop, false)}));
  for (const auto& rule : catalog.cardinalityRules()) out.push_back(cardinalityCheck(rule));
  return out;
}

std::vector<CheckDefinition> parseChecks(const nlohmann::json& suite) {
  if (!suite.is_object() || !suite.contains("checks") || !suite["checks"].is_array())
    throw CheckError("check suite needs a 'checks' array");
  std::vector<CheckDefinition> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < suite["checks"].size(); ++i) {
    const auto& j = suite["checks"][i];
    std::string where = "checks[" + std::to_string(i) + "]";
    try {
      CheckDefinition d;
      d.checkId = j.at("id").get<std::string>();
      where += " (" + d.checkId + ")";
      if (d.checkId.empty() || !ids.insert(d.checkId).second)
        throw CheckError("missing or duplicate id");
      d.description = j.value("description", "");
      d.severity = parseSeverity(j.value("severity", "error"));
      d.expectation = parseExpectation(j.value("expectation", "empty-result"));
      d.subject = j.at("subject").get<std::string>();
      if (!d.subject.empty() && d.subject[0] == '?') d.subject.erase(0, 1);
      const auto& qs = j.at("queries");
      if (!qs.is_array() || qs.empty()) throw CheckError("'queries' must be a non-empty array");
      for (const auto& q : qs) {
        d.queries.push_back(query::parseQuery(q));
        if (!bindsVariable(d.queries.back(), d.subject))
          throw CheckError("query does not bind subject ?" + d.subject);
      }
      out.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw CheckError(where + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw CheckError(where + ": " + e.what());
    }
  }
  return out;
}

namespace {

bool scalarOnly(const nlohmann::json& j) {
  for (const auto& v : j)
    if (v.is_structured()) return false;
  return true;
}

std::vector<std::string> orderedKeys(const nlohmann::json& obj) {
  static const std::vector<std::string> preferred = {
      "checks", "id",       "description", "severity", "expectation", "subject", "queries",
      "patterns", "notExists", "filters",  "select",   "distinct",    "offset",  "limit"};
  std::vector<std::string> keys;
  for (const auto& k : preferred)
    if (obj.contains(k)) keys.push_back(k);
  for (const auto& [k, v] : obj.items())
    if (std::find(preferred.begin(), preferred.end(), k) == preferred.end()) keys.push_back(k);
  return keys;
}

void formatValue(const nlohmann::json& j, int indent, std::string& out) {
  auto pad = [&](int n) { out.append(static_cast<std::size_t>(n) * 2, ' '); };
  if (!j.is_structured()) {
    out += j.dump();
    return;
  }
  bool inline_ = scalarOnly(j) || j.empty();
  const char* open = j.is_array() ? "[" : "{";
  const char* close = j.is_array() ? "]" : "}";
  out += open;
  bool first = true;
  auto item = [&](const std::string* key, const nlohmann::json& v) {
    if (!first) out += inline_ ? ", " : ",";
    first = false;
    if (!inline_) {
      out += "\n";
      pad(indent + 1);
    }
    if (key) out += nlohmann::json(*key).dump() + ": ";
    formatValue(v, indent + 1, out);
  };
  if (j.is_array()) {
    for (const auto& v : j) item(nullptr, v);
  } else {
    for (const auto& k : orderedKeys(j)) item(&k, j.at(k));
  }
  if (!inline_ && !j.empty()) {
    out += "\n";
    pad(indent);
  }
  out += close;
}

}  // namespace

std::string formatSuite(const nlohmann::json& suite) {
  std::string out;
  formatValue(suite, 0, out);
  return out + "\n";
}

std::vector<CheckDefinition> loadChecks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckError("cannot open " + path.string());
  try {
    return parseChecks(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckError(path.string() + ": " + e.what());
  }
}

nlohmann::json checksToJson(const std::vector<CheckDefinition>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& d : checks) {
    nlohmann::json qs = nlohmann::json::array();
    for (const auto& q : d.queries) qs.push_back(query::queryToJson(q));
    arr.push_back({{"id", d.checkId},
                   {"description", d.description},
                   {"severity", severityName(d.severity)},
                   {"expectation", expectationName(d.expectation)},
                   {"subject", "?" + d.subject},
                   {"queries", qs}});
  }
  return {{"checks", arr}};
}

const CheckResult* CheckRun::find(std::string_view checkId) const {
  for (const auto& r : results)
    if (r.checkId == checkId) return &r;
  return nullptr;
}

nlohmann::json CheckRun::toJson() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results)
    arr.push_back({{"checkId", r.checkId},
                   {"severity", severityName(r.severity)},
                   {"violationCount", r.violationCount},
                   {"sample", r.sample}});
  return {{"runId", runId}, {"timestamp", timestamp}, {"results", arr}};
}

CheckRun CheckRun::fromJson(const nlohmann::json& j) {
  CheckRun run;
  run.runId = j.at("runId").get<std::uint64_t>();
  run.timestamp = j.value("timestamp", "");
  for (const auto& r : j.at("results")) {
    CheckResult res;
    res.checkId = r.at("checkId").get<std::string>();
    res.severity = parseSeverity(r.value("severity", "error"));
    res.violationCount = r.at("violationCount").get<std::size_t>();
    res.sample = r.value("sample", std::vector<std::string>{});
    run.results.push_back(std::move(res));
  }
  return run;
}

std::string CheckRun::table() const {
  std::ostringstream out;
  out << "run " << runId << (timestamp.empty() ? "" : " at " + timestamp) << "\n";
  std::size_t width = 5;
  for (const auto& r : results) width = std::max(width, r.checkId.size());
  out << pad("check", width) << "  severity  violations\n";
  for (const auto& r : results)
    out << pad(r.checkId, width) << "  " << pad(std::string(severityName(r.severity)), 8) << "  "
        << r.violationCount << "\n";
  return out.str();
}

nlohmann::json RegressionReport::toJson() const {
  auto changes = [](const std::vector<CountChange>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : v)
      arr.push_back({{"checkId", c.checkId}, {"baseline", c.baseline}, {"current", c.current}});
    return arr;
  };
  return {{"baselineRunId", baselineRunId}, {"currentRunId", currentRunId},
          {"regressions", changes(regressions)}, {"improvements", changes(improvements)},
          {"added", added}, {"removed", removed}};
}

std::string RegressionReport::table() const {
  std::ostringstream out;
  out << "baseline run " << baselineRunId << " -> current run " << currentRunId << "\n";
  if (regressions.empty() && improvements.empty() && added.empty() && removed.empty())
    out << "no changes\n";
  for (const auto& c : regressions)
    out << "REGRESSION  " << c.checkId << ": " << c.baseline << " -> " << c.current << "\n";
  for (const auto& c : improvements)
    out << "IMPROVEMENT " << c.checkId << ": " << c.baseline << " -> " << c.current << "\n";
  for (const auto& id : added) out << "ADDED       " << id << "\n";
  for (const auto& id : removed) out << "REMOVED     " << id << "\n";
  return out.str();
}

CheckRun runChecks(const rdf::StoreView& view, const std::vector<CheckDefinition>& checks,
                   std::uint64_t runId, std::string timestamp) {
  CheckRun run;
  run.runId = runId;
  run.timestamp = std::move(timestamp);
  for (const auto& d : checks) {
    std::set<Term> offenders;
    bool anyRow = false;
    for (auto q : d.queries) {
      q.projection = {d.subject};
      q.distinct = true;
      q.offset = 0;
      q.limit.reset();
      auto table = query::evaluate(q, view);
      anyRow = anyRow || !table.rows.empty();
      for (auto& row : table.rows) offenders.insert(std::move(row[0]));
    }
    CheckResult r;
    r.checkId = d.checkId;
    r.severity = d.severity;
    if (d.expectation == Expectation::EmptyResult) {
      r.violationCount = offenders.size();
      for (const auto& t : offenders) {
        if (r.sample.size() == kSampleLimit) break;
        r.sample.push_back(t.isLiteral() ? t.toString() : t.value());
      }
    } else {
      r.violationCount = anyRow ? 0 : 1;
    }
    run.results.push_back(std::move(r));
  }
  return run;
}

RegressionReport diffRuns(const CheckRun& baseline, const CheckRun& current) {
  RegressionReport rep;
  rep.baselineRunId = baseline.runId;
  rep.currentRunId = current.runId;
  for (const auto& cur : current.results) {
    const auto* base = baseline.find(cur.checkId);
    if (!base) {
      rep.added.push_back(cur.checkId);
      continue;
    }
    if (cur.violationCount > base->violationCount)
      rep.regressions.push_back({cur.checkId, base->violationCount, cur.violationCount});
    else if (cur.violationCount < base->violationCount)
      rep.improvements.push_back({cur.checkId, base->violationCount, cur.violationCount});
  }
  for (const auto& base : baseline.results)
    if (!current.find(base.checkId)) rep.removed.push_back(base.checkId);
  return rep;
}

CheckRun RunHistory::record(CheckRun run) {
  std::lock_guard lock(mutex_);
  run.runId = next_++;
  runs_[run.runId] = run;
  return run;
}

std::optional<CheckRun> RunHistory::get(std::uint64_t id) const {
  std::lock_guard lock(mutex_);
  auto it = runs_.find(id);
  if (it == runs_.end()) return std::nullopt;
  return it->second;
}

std::optional<CheckRun> RunHistory::latest() const {
  std::lock_guard lock(mutex_);
  if (runs_.empty()) return std::nullopt;
  return runs_.rbegin()->second;
}

std::size_t RunHistory::size() const {
  std::lock_guard lock(mutex_);
  return runs_.size();
}

nlohmann::json RunHistory::toJson() const {
  std::lock_guard lock(mutex_);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [id, run] : runs_) arr.push_back(run.toJson());
  return {{"nextRunId", next_}, {"runs", arr}};
}

void RunHistory::loadJson(const nlohmann::json& j) {
  std::map<std::uint64_t, CheckRun> runs;
  for (const auto& r : j.at("runs")) {
    auto run = CheckRun::fromJson(r);
    runs[run.runId] = std::move(run);
  }
  auto next = j.value("nextRunId", runs.empty() ? std::uint64_t{1} : runs.rbegin()->first + 1);
  if (!runs.empty() && next <= runs.rbegin()->first)
    throw CheckError("run history: nextRunId does not exceed the stored run ids");
  std::lock_guard lock(mutex_);
  runs_ = std::move(runs);
  next_ = next;
}

void RunHistory::save(const std::filesystem::path& path) const {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw CheckError("cannot write " + tmp.string());
    out << toJson().dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

void RunHistory::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckError("cannot open " + path.string());
  loadJson(nlohmann::json::parse(in));
}

}  // namespace citykb::validation
