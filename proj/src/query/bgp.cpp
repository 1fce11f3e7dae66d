#include "citykb/query/bgp.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "citykb/quadstore/nquads.hpp"
#include "citykb/schema/catalog.hpp"
#include "citykb/schema/vocab.hpp"

namespace citykb::query {
namespace {

using rdf::IdTriple;
using rdf::TermId;

constexpr TermId kUnbound = std::numeric_limits<TermId>::max();

// A pattern position is either a constant id or a variable slot.
struct Slot {
  bool isVar = false;
  TermId id = 0;
  std::size_t var = 0;
};

struct CompiledPattern {
  Slot s, p, o;
};

struct Compiled {
  std::vector<CompiledPattern> patterns;
  bool satisfiable = true;
};

class VarTable {
 public:
  std::size_t slot(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    names_.push_back(name);
    return index_[name] = names_.size() - 1;
  }
  std::optional<std::size_t> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

Compiled compilePatterns(const std::vector<TriplePattern>& patterns, VarTable& vars,
                         const rdf::StoreView& view) {
  Compiled out;
  auto slotOf = [&](const PatternTerm& t) {
    Slot s;
    if (const auto* v = std::get_if<Var>(&t)) {
      if (v->name.empty()) throw QueryError("empty variable name");
      s.isVar = true;
      s.var = vars.slot(v->name);
      return s;
    }
    auto id = view.lookup(std::get<rdf::Term>(t));
    if (!id) out.satisfiable = false;
    else s.id = *id;
    return s;
  };
  for (const auto& p : patterns) {
    CompiledPattern c;
    c.s = slotOf(p.s);
    c.p = slotOf(p.p);
    c.o = slotOf(p.o);
    out.patterns.push_back(c);
  }
  return out;
}

std::optional<TermId> resolve(const Slot& s, const std::vector<TermId>& binding) {
  if (!s.isVar) return s.id;
  if (binding[s.var] == kUnbound) return std::nullopt;
  return binding[s.var];
}

// Binds the pattern's variables from `t`; false when a repeated variable
// would take two values.
bool bind(const CompiledPattern& p, const IdTriple& t, std::vector<TermId>& binding,
          std::vector<std::size_t>& newlyBound) {
  auto one = [&](const Slot& s, TermId v) {
    if (!s.isVar) return true;
    auto& cur = binding[s.var];
    if (cur == kUnbound) {
      cur = v;
      newlyBound.push_back(s.var);
      return true;
    }
    return cur == v;
  };
  return one(p.s, t.s) && one(p.p, t.p) && one(p.o, t.o);
}

// Greedy order: smallest estimate first, then prefer patterns sharing an
// already bound variable.
std::vector<std::size_t> planOrder(const std::vector<CompiledPattern>& patterns,
                                   const rdf::StoreView& view, std::size_t varCount,
                                   std::vector<bool> bound) {
  bound.resize(varCount, false);
  std::vector<std::size_t> est(patterns.size());
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    auto c = [](const Slot& s) { return s.isVar ? std::nullopt : std::optional<TermId>(s.id); };
    est[i] = view.estimate(c(patterns[i].s), c(patterns[i].p), c(patterns[i].o));
  }
  std::vector<std::size_t> order;
  std::vector<bool> used(patterns.size(), false);
  for (std::size_t step = 0; step < patterns.size(); ++step) {
    std::optional<std::size_t> best;
    bool bestConnected = false;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
      if (used[i]) continue;
      const auto& p = patterns[i];
      bool connected = false;
      for (const Slot* s : {&p.s, &p.p, &p.o}) connected |= s->isVar && bound[s->var];
      bool better = !best || (connected && !bestConnected) ||
                    (connected == bestConnected && est[i] < est[*best]);
      if (better) {
        best = i;
        bestConnected = connected;
      }
    }
    used[*best] = true;
    order.push_back(*best);
    const auto& p = patterns[*best];
    for (const Slot* s : {&p.s, &p.p, &p.o})
      if (s->isVar) bound[s->var] = true;
  }
  return order;
}

struct NotExistsGroup {
  Compiled compiled;
  std::vector<std::size_t> order;
};

class Evaluator {
 public:
  Evaluator(const rdf::StoreView& view, std::vector<TermId>& binding)
      : view_(view), binding_(binding) {}

  // Visits every extension of the current binding through `patterns`,
  // calling visit() at the leaves; stops early when visit() returns false.
  template <typename Visit, typename Check>
  bool run(const std::vector<CompiledPattern>& patterns, const std::vector<std::size_t>& order,
           std::size_t depth, Check&& check, Visit&& visit) {
    if (depth == order.size()) return visit();
    const auto& p = patterns[order[depth]];
    auto matches = view_.matchTriples(resolve(p.s, binding_), resolve(p.p, binding_),
                                      resolve(p.o, binding_));
    std::vector<std::size_t> newly;
    for (const auto& t : matches) {
      newly.clear();
      bool ok = bind(p, t, binding_, newly) && check(depth);
      if (ok && !run(patterns, order, depth + 1, check, visit)) {
        for (auto v : newly) binding_[v] = kUnbound;
        return false;
      }
      for (auto v : newly) binding_[v] = kUnbound;
    }
    return true;
  }

 private:
  const rdf::StoreView& view_;
  std::vector<TermId>& binding_;
};

bool numericFilter(FilterOp op, double lhs, double rhs) {
  switch (op) {
    case FilterOp::Lt: return lhs < rhs;
    case FilterOp::Le: return lhs <= rhs;
    case FilterOp::Eq: return lhs == rhs;
    case FilterOp::Gt: return lhs > rhs;
    case FilterOp::Ge: return lhs >= rhs;
    default: return false;
  }
}

bool applyFilter(const Filter& f, const rdf::Term& t) {
  switch (f.op) {
    case FilterOp::IsIri: return t.isIri();
    case FilterOp::IsLiteral: return t.isLiteral();
    case FilterOp::StrEq: return t.value() == f.operand;
    case FilterOp::Contains: return t.value().find(f.operand) != std::string::npos;
    default: {
      auto lhs = t.isLiteral() ? t.numeric() : std::nullopt;
      if (!lhs) return false;
      char* end = nullptr;
      double rhs = std::strtod(f.operand.c_str(), &end);
      if (f.operand.empty() || *end != '\0') return false;
      return numericFilter(f.op, *lhs, rhs);
    }
  }
}

}  // namespace

ResultTable evaluate(const GraphPatternQuery& query, const rdf::StoreView& view) {
  if (query.patterns.empty()) throw QueryError("query has no triple patterns");
  VarTable vars;
  auto main = compilePatterns(query.patterns, vars, view);
  const std::size_t mainVars = vars.size();

  ResultTable table;
  table.variables = query.projection.empty() ? vars.names() : query.projection;
  std::vector<std::size_t> projected;
  for (const auto& name : table.variables) {
    auto s = vars.find(name);
    if (!s) throw QueryError("projected variable ?" + name + " is not bound by any pattern");
    projected.push_back(*s);
  }
  // Term comparisons against a constant or a second variable.
  struct TermCompare {
    std::optional<std::size_t> rhsSlot;
    std::optional<TermId> rhsId;  // unset with no slot: constant absent from the store
  };
  std::vector<std::size_t> filterSlot;
  std::vector<std::optional<TermCompare>> compare(query.filters.size());
  for (std::size_t i = 0; i < query.filters.size(); ++i) {
    const auto& f = query.filters[i];
    auto s = vars.find(f.var);
    if (!s) throw QueryError("filtered variable ?" + f.var + " is not bound by any pattern");
    if (f.op == FilterOp::SameTerm || f.op == FilterOp::NotSameTerm) {
      if (!f.rhs) throw QueryError("term comparison on ?" + f.var + " needs a right-hand term");
      TermCompare c;
      if (const auto* v = std::get_if<Var>(&*f.rhs)) {
        c.rhsSlot = vars.find(v->name);
        if (!c.rhsSlot || *c.rhsSlot >= mainVars)
          throw QueryError("filtered variable ?" + v->name + " is not bound by any pattern");
      } else {
        c.rhsId = view.lookup(std::get<rdf::Term>(*f.rhs));
      }
      compare[i] = c;
    } else if (f.op != FilterOp::StrEq && f.op != FilterOp::Contains && f.op != FilterOp::IsIri &&
               f.op != FilterOp::IsLiteral) {
      char* end = nullptr;
      std::strtod(f.operand.c_str(), &end);
      if (f.operand.empty() || *end != '\0')
        throw QueryError("numeric filter on ?" + f.var + " needs a numeric operand");
    }
    filterSlot.push_back(*s);
  }

  std::vector<NotExistsGroup> groups;
  for (const auto& g : query.notExists) {
    if (g.empty()) throw QueryError("empty notExists group");
    VarTable local = vars;
    NotExistsGroup ng{compilePatterns(g, local, view), {}};
    // A group with an unknown constant can never match, so it never excludes.
    if (!ng.compiled.satisfiable) continue;
    vars = local;
    groups.push_back(std::move(ng));
  }
  std::vector<bool> mainBound(mainVars, true);
  for (auto& g : groups) g.order = planOrder(g.compiled.patterns, view, vars.size(), mainBound);

  if (!main.satisfiable) return table;
  auto order = planOrder(main.patterns, view, vars.size(), {});

  // Filters run at the first depth where their variable is bound.
  std::vector<std::vector<std::size_t>> filtersAt(order.size());
  {
    std::vector<bool> bound(vars.size(), false);
    std::vector<bool> placed(query.filters.size(), false);
    for (std::size_t d = 0; d < order.size(); ++d) {
      const auto& p = main.patterns[order[d]];
      for (const Slot* s : {&p.s, &p.p, &p.o})
        if (s->isVar) bound[s->var] = true;
      for (std::size_t f = 0; f < filterSlot.size(); ++f) {
        bool ready = bound[filterSlot[f]] && (!compare[f] || !compare[f]->rhsSlot ||
                                              bound[*compare[f]->rhsSlot]);
        if (!placed[f] && ready) {
          filtersAt[d].push_back(f);
          placed[f] = true;
        }
      }
    }
  }

  std::vector<TermId> binding(vars.size(), kUnbound);
  std::vector<std::unordered_map<TermId, bool>> filterCache(query.filters.size());
  auto passes = [&](std::size_t depth) {
    for (auto f : filtersAt[depth]) {
      TermId id = binding[filterSlot[f]];
      if (compare[f]) {
        auto rhs = compare[f]->rhsSlot ? std::optional<TermId>(binding[*compare[f]->rhsSlot])
                                       : compare[f]->rhsId;
        bool same = rhs && *rhs == id;
        if (same != (query.filters[f].op == FilterOp::SameTerm)) return false;
        continue;
      }
      auto [it, inserted] = filterCache[f].try_emplace(id, false);
      if (inserted) it->second = applyFilter(query.filters[f], view.term(id));
      if (!it->second) return false;
    }
    return true;
  };
  auto noCheck = [](std::size_t) { return true; };

  Evaluator ev(view, binding);
  std::vector<std::vector<TermId>> idRows;
  ev.run(main.patterns, order, 0, passes, [&] {
    for (const auto& g : groups) {
      bool found = false;
      ev.run(g.compiled.patterns, g.order, 0, noCheck, [&] {
        found = true;
        return false;
      });
      if (found) return true;
    }
    std::vector<TermId> row;
    row.reserve(projected.size());
    for (auto s : projected) row.push_back(binding[s]);
    idRows.push_back(std::move(row));
    return true;
  });

  if (query.distinct) {
    std::sort(idRows.begin(), idRows.end());
    idRows.erase(std::unique(idRows.begin(), idRows.end()), idRows.end());
  }
  std::unordered_map<TermId, rdf::Term> terms;
  table.rows.reserve(idRows.size());
  for (const auto& r : idRows) {
    std::vector<rdf::Term> row;
    row.reserve(r.size());
    for (auto id : r) {
      auto it = terms.find(id);
      if (it == terms.end()) it = terms.emplace(id, view.term(id)).first;
      row.push_back(it->second);
    }
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end());
  auto first = std::min(query.offset, table.rows.size());
  table.rows.erase(table.rows.begin(), table.rows.begin() + static_cast<std::ptrdiff_t>(first));
  if (query.limit && table.rows.size() > *query.limit) table.rows.resize(*query.limit);
  return table;
}

FilterOp parseFilterOp(std::string_view op) {
  if (op == "lt" || op == "<") return FilterOp::Lt;
  if (op == "le" || op == "<=") return FilterOp::Le;
  if (op == "eq" || op == "=") return FilterOp::Eq;
  if (op == "gt" || op == ">") return FilterOp::Gt;
  if (op == "ge" || op == ">=") return FilterOp::Ge;
  if (op == "str_eq") return FilterOp::StrEq;
  if (op == "contains") return FilterOp::Contains;
  if (op == "same_term") return FilterOp::SameTerm;
  if (op == "not_same_term") return FilterOp::NotSameTerm;
  if (op == "is_iri") return FilterOp::IsIri;
  if (op == "is_literal") return FilterOp::IsLiteral;
  throw QueryError("unknown filter op '" + std::string(op) + "'");
}

std::string_view filterOpName(FilterOp op) {
  switch (op) {
    case FilterOp::Lt: return "lt";
    case FilterOp::Le: return "le";
    case FilterOp::Eq: return "eq";
    case FilterOp::Gt: return "gt";
    case FilterOp::Ge: return "ge";
    case FilterOp::StrEq: return "str_eq";
    case FilterOp::Contains: return "contains";
    case FilterOp::SameTerm: return "same_term";
    case FilterOp::NotSameTerm: return "not_same_term";
    case FilterOp::IsIri: return "is_iri";
    case FilterOp::IsLiteral: return "is_literal";
  }
  return "eq";
}

PatternTerm parsePatternTerm(const nlohmann::json& value) {
  if (value.is_number_integer())
    return rdf::Term::literal(value.dump(), std::string(vocab::xsd::integer));
  if (value.is_number()) return rdf::Term::literal(value.dump(), std::string(vocab::xsd::decimal));
  if (!value.is_string()) throw QueryError("pattern term must be a string or number");
  auto s = value.get<std::string>();
  if (s.empty()) throw QueryError("empty pattern term");
  if (s[0] == '?') return Var{s.substr(1)};
  if (s[0] == '<' && s.back() == '>') return rdf::Term::iri(s.substr(1, s.size() - 2));
  if (s[0] == '"' || s.rfind("_:", 0) == 0) {
    try {
      auto q = rdf::parseNQuadsLine("<http://q.invalid/s> <http://q.invalid/p> " + s + " .");
      return q->object;
    } catch (const rdf::NQuadsError& e) {
      throw QueryError("bad term " + s + ": " + e.what());
    }
  }
  try {
    auto iri = schema::builtinCatalog().expand(s);
    if (!rdf::isValidIri(iri)) throw QueryError("bad IRI " + s);
    return rdf::Term::iri(iri);
  } catch (const std::invalid_argument& e) {
    throw QueryError("bad term " + s + ": " + e.what());
  }
}

namespace {

std::vector<TriplePattern> parsePatterns(const nlohmann::json& arr, const std::string& where) {
  if (!arr.is_array()) throw QueryError(where + " must be an array");
  std::vector<TriplePattern> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& t = arr[i];
    if (!t.is_array() || t.size() != 3)
      throw QueryError(where + "[" + std::to_string(i) + "] must be [s, p, o]");
    out.push_back({parsePatternTerm(t[0]), parsePatternTerm(t[1]), parsePatternTerm(t[2])});
  }
  return out;
}

std::string varName(const nlohmann::json& v) {
  if (!v.is_string()) throw QueryError("variable name must be a string");
  auto s = v.get<std::string>();
  if (!s.empty() && s[0] == '?') s.erase(0, 1);
  return s;
}

}  // namespace

GraphPatternQuery parseQuery(const nlohmann::json& body) {
  if (!body.is_object()) throw QueryError("query must be a JSON object");
  GraphPatternQuery q;
  if (!body.contains("patterns")) throw QueryError("query needs 'patterns'");
  q.patterns = parsePatterns(body["patterns"], "patterns");
  if (body.contains("notExists")) {
    const auto& groups = body["notExists"];
    if (!groups.is_array()) throw QueryError("notExists must be an array");
    for (std::size_t i = 0; i < groups.size(); ++i)
      q.notExists.push_back(parsePatterns(groups[i], "notExists[" + std::to_string(i) + "]"));
  }
  if (body.contains("filters")) {
    for (const auto& f : body["filters"]) {
      if (!f.is_object() || !f.contains("var") || !f.contains("op"))
        throw QueryError("filter needs var and op");
      Filter flt;
      flt.var = varName(f["var"]);
      if (!f["op"].is_string()) throw QueryError("filter op must be a string");
      flt.op = parseFilterOp(f["op"].get<std::string>());
      bool unary = flt.op == FilterOp::IsIri || flt.op == FilterOp::IsLiteral;
      if (!unary && !f.contains("value")) throw QueryError("filter on ?" + flt.var + " needs a value");
      if (flt.op == FilterOp::SameTerm || flt.op == FilterOp::NotSameTerm)
        flt.rhs = parsePatternTerm(f["value"]);
      else if (!unary)
        flt.operand = f["value"].is_string() ? f["value"].get<std::string>() : f["value"].dump();
      q.filters.push_back(std::move(flt));
    }
  }
  if (body.contains("select"))
    for (const auto& v : body["select"]) q.projection.push_back(varName(v));
  q.distinct = body.value("distinct", false);
  auto count = [&](const char* key) -> std::optional<std::size_t> {
    if (!body.contains(key)) return std::nullopt;
    const auto& v = body[key];
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw QueryError(std::string(key) + " must be a non-negative integer");
    return v.get<std::size_t>();
  };
  q.limit = count("limit");
  q.offset = count("offset").value_or(0);
  return q;
}

nlohmann::json toJson(const ResultTable& table) {
  nlohmann::json bindings = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json b = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto& t = row[i];
      nlohmann::json cell{{"value", t.value()}};
      if (t.isIri()) cell["type"] = "uri";
      else if (t.isBlank()) cell["type"] = "bnode";
      else {
        cell["type"] = "literal";
        if (!t.lang().empty()) cell["xml:lang"] = t.lang();
        else cell["datatype"] = t.datatype();
      }
      b[table.variables[i]] = std::move(cell);
    }
    bindings.push_back(std::move(b));
  }
  return {{"head", {{"vars", table.variables}}}, {"results", {{"bindings", bindings}}}};
}

namespace {

nlohmann::json termToWire(const PatternTerm& t) {
  if (const auto* v = std::get_if<Var>(&t)) return "?" + v->name;
  const auto& term = std::get<rdf::Term>(t);
  if (term.isIri()) {
    auto c = schema::builtinCatalog().compact(term.value());
    if (c != term.value()) return c;
  }
  return term.toString();
}

nlohmann::json patternsToWire(const std::vector<TriplePattern>& ps) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : ps) out.push_back({termToWire(p.s), termToWire(p.p), termToWire(p.o)});
  return out;
}

}  // namespace

nlohmann::json queryToJson(const GraphPatternQuery& query) {
  nlohmann::json j{{"patterns", patternsToWire(query.patterns)}};
  if (!query.notExists.empty()) {
    j["notExists"] = nlohmann::json::array();
    for (const auto& g : query.notExists) j["notExists"].push_back(patternsToWire(g));
  }
  if (!query.filters.empty()) {
    j["filters"] = nlohmann::json::array();
    for (const auto& f : query.filters) {
      nlohmann::json jf{{"var", "?" + f.var}, {"op", filterOpName(f.op)}};
      if (f.rhs) jf["value"] = termToWire(*f.rhs);
      else if (f.op != FilterOp::IsIri && f.op != FilterOp::IsLiteral) jf["value"] = f.operand;
      j["filters"].push_back(std::move(jf));
    }
  }
  if (!query.projection.empty()) {
    j["select"] = nlohmann::json::array();
    for (const auto& v : query.projection) j["select"].push_back("?" + v);
  }
  if (query.distinct) j["distinct"] = true;
  if (query.offset) j["offset"] = query.offset;
  if (query.limit) j["limit"] = *query.limit;
  return j;
}

}  // namespace citykb::query
