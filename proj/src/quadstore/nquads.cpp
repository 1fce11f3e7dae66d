#include "citykb/quadstore/nquads.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace citykb::rdf {

namespace {

class LineParser {
 public:
  explicit LineParser(std::string_view line) : s_(line) {}

  void skipSpace() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\r')) {
      ++i_;
    }
  }

  bool atEnd() {
    skipSpace();
    return i_ >= s_.size() || s_[i_] == '#';
  }

  char peek() {
    skipSpace();
    if (i_ >= s_.size()) fail("unexpected end of line");
    return s_[i_];
  }

  Term term() {
    char c = peek();
    if (c == '<') return Term::iri(iriRef());
    if (c == '_') return blank();
    if (c == '"') return literal();
    fail(std::string("unexpected character '") + c + "'");
  }

  void expectDot() {
    if (peek() != '.') fail("expected '.'");
    ++i_;
    if (!atEnd()) fail("trailing content after '.'");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw NQuadsError(msg + " at column " + std::to_string(i_ + 1));
  }

 private:
  std::string iriRef() {
    ++i_;  // '<'
    std::string out;
    while (i_ < s_.size() && s_[i_] != '>') {
      if (s_[i_] == '\\') {
        out += unicodeEscape();
      } else {
        out += s_[i_++];
      }
    }
    if (i_ >= s_.size()) fail("unterminated IRI");
    ++i_;
    return out;
  }

  Term blank() {
    if (s_.substr(i_, 2) != "_:") fail("malformed blank node");
    i_ += 2;
    auto start = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) ||
                              s_[i_] == '_' || s_[i_] == '-' || s_[i_] == '.')) {
      ++i_;
    }
    // A trailing '.' terminates the statement rather than the label.
    while (i_ > start && s_[i_ - 1] == '.') --i_;
    if (i_ == start) fail("empty blank node label");
    return Term::blank(std::string(s_.substr(start, i_ - start)));
  }

  Term literal() {
    ++i_;  // opening quote
    std::string lex;
    while (true) {
      if (i_ >= s_.size()) fail("unterminated literal");
      char c = s_[i_];
      if (c == '"') break;
      if (c == '\\') {
        if (i_ + 1 >= s_.size()) fail("dangling escape");
        char e = s_[i_ + 1];
        switch (e) {
          case 't': lex += '\t'; i_ += 2; break;
          case 'b': lex += '\b'; i_ += 2; break;
          case 'n': lex += '\n'; i_ += 2; break;
          case 'r': lex += '\r'; i_ += 2; break;
          case 'f': lex += '\f'; i_ += 2; break;
          case '"': lex += '"'; i_ += 2; break;
          case '\'': lex += '\''; i_ += 2; break;
          case '\\': lex += '\\'; i_ += 2; break;
          case 'u':
          case 'U': lex += unicodeEscape(); break;
          default: fail(std::string("unknown escape \\") + e);
        }
        continue;
      }
      lex += c;
      ++i_;
    }
    ++i_;  // closing quote
    if (i_ < s_.size() && s_[i_] == '@') {
      auto start = ++i_;
      while (i_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '-')) {
        ++i_;
      }
      return Term::literal(std::move(lex), std::string(kXsdString),
                           std::string(s_.substr(start, i_ - start)));
    }
    if (s_.substr(i_, 2) == "^^") {
      i_ += 2;
      if (i_ >= s_.size() || s_[i_] != '<') fail("expected datatype IRI");
      return Term::literal(std::move(lex), iriRef());
    }
    return Term::literal(std::move(lex));
  }

  std::string unicodeEscape() {
    if (i_ + 1 >= s_.size()) fail("dangling escape");
    char kind = s_[i_ + 1];
    std::size_t digits = kind == 'u' ? 4 : kind == 'U' ? 8 : 0;
    if (digits == 0 || i_ + 2 + digits > s_.size()) fail("bad unicode escape");
    unsigned long cp = std::stoul(std::string(s_.substr(i_ + 2, digits)), nullptr, 16);
    i_ += 2 + digits;
    std::string out;
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

}  // namespace

std::optional<Quad> parseNQuadsLine(std::string_view line) {
  LineParser p(line);
  if (p.atEnd()) return std::nullopt;
  Quad q;
  q.subject = p.term();
  q.predicate = p.term();
  q.object = p.term();
  if (p.peek() == '<') {
    Term g = p.term();
    q.graph = GraphId::fromIri(g.value());
  } else {
    q.graph = GraphId{std::string(kDefaultDataset), 1};
  }
  p.expectDot();
  if (auto err = validateQuad(q)) throw NQuadsError(*err);
  return q;
}

std::string formatNQuad(const Quad& quad) {
  std::string out = quad.subject.toString();
  out += ' ';
  out += quad.predicate.toString();
  out += ' ';
  out += quad.object.toString();
  out += " <";
  out += quad.graph.toIri();
  out += "> .";
  return out;
}

void writeNQuads(std::ostream& out, std::span<const Quad> quads) {
  for (const auto& q : quads) out << formatNQuad(q) << '\n';
}

ReadResult readNQuads(std::istream& in) {
  ReadResult result;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    try {
      if (auto q = parseNQuadsLine(line)) result.quads.push_back(std::move(*q));
    } catch (const NQuadsError& e) {
      result.issues.push_back({lineNo, e.what()});
    }
  }
  return result;
}

void exportQuads(const StoreView& view, const std::filesystem::path& path,
                 const std::optional<std::string>& dataset) {
  std::vector<std::string> lines;
  for (const auto& part : view.partitions()) {
    if (dataset && part->graph().dataset != *dataset) continue;
    for (const auto& t : part->triples()) {
      lines.push_back(formatNQuad(
          Quad{view.term(t.s), view.term(t.p), view.term(t.o), part->graph()}));
    }
  }
  std::sort(lines.begin(), lines.end());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  for (const auto& l : lines) out << l << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<ParseIssue> importQuads(QuadStore& store,
                                    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  auto read = readNQuads(in);
  std::map<std::string, std::map<std::uint64_t, std::vector<Quad>>> grouped;
  for (auto& q : read.quads) {
    grouped[q.graph.dataset][q.graph.version].push_back(std::move(q));
  }
  for (auto& [dataset, versions] : grouped) {
    auto newest = versions.rbegin();
    for (auto it = std::next(newest); it != versions.rend(); ++it) {
      read.issues.push_back({0, "dropped " + std::to_string(it->second.size()) +
                                    " quads of superseded version " +
                                    std::to_string(it->first) + " of '" +
                                    dataset + "'"});
    }
    if (auto active = store.activeVersion(dataset);
        active && *active != newest->first) {
      store.replaceGraph(dataset, std::max(*active + 1, newest->first),
                         newest->second);
    } else {
      auto res = store.insert(newest->second);
      for (auto& e : res.errors) read.issues.push_back({0, e.message});
    }
  }
  return read.issues;
}

}  // namespace citykb::rdf
