#include "citykb/reconciliation/address.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <stdexcept>

#include "citykb/mapping/names.hpp"

namespace citykb::recon {
namespace {

std::string replaceAll(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
    s.replace(pos, from.size(), to);
  return s;
}

std::vector<std::string> splitWords(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> tokenizeStreet(std::string_view street, const StrangeChars& chars) {
  std::string s = upperAscii(street);
  for (const auto& c : chars.chars) s = replaceAll(s, c, " ");
  return splitWords(s);
}

// Canonical form of a leading qualifier token.
std::optional<std::string> qualifierOf(const std::vector<std::string>& tokens,
                                       const QualifierTable& q) {
  if (tokens.empty() || !q.known(tokens[0])) return std::nullopt;
  if (q.entries().count(tokens[0])) return tokens[0];
  return q.alternatives(tokens[0])[1];
}

std::vector<std::string> splitRange(std::string_view number) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : number) {
    if (c == '-') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(trim(cur));
  parts.erase(std::remove(parts.begin(), parts.end(), std::string()), parts.end());
  return parts;
}

}  // namespace

std::string upperAscii(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string normalizeStreet(std::string_view s) {
  std::string out;
  for (const auto& w : splitWords(upperAscii(s))) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

std::string NormalizedAddress::street() const {
  std::string out;
  for (const auto& t : streetTokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

bool NormalizedAddress::hasUsableNumber() const {
  return std::any_of(numberTokens.begin(), numberTokens.end(),
                     [](const StreetNumberToken& t) { return t.usable(); });
}

StrangeChars StrangeChars::base() { return {{"-", "/", "\xC2\xB0", "?", ",", "(", ")"}}; }

StrangeChars StrangeChars::aggressive() {
  auto s = base();
  s.chars.push_back(".");
  return s;
}

void QualifierTable::add(const std::string& canonical, const std::string& variant) {
  auto c = upperAscii(canonical), v = upperAscii(variant);
  if (c.empty() || v.empty() || c == v) throw std::invalid_argument("bad qualifier pair " + c + "," + v);
  if (auto it = canonicalOf_.find(v); it != canonicalOf_.end() && it->second != c)
    throw std::invalid_argument("variant " + v + " already belongs to " + it->second);
  if (variants_.count(v)) throw std::invalid_argument("variant " + v + " is itself a canonical form");
  if (canonicalOf_.count(c)) throw std::invalid_argument("canonical " + c + " is already a variant");
  variants_[c].insert(v);
  canonicalOf_[v] = c;
}

QualifierTable QualifierTable::defaults() {
  QualifierTable t;
  for (auto v : {"P.ZZA", "PZA", "PZZA", "P.ZA"}) t.add("PIAZZA", v);
  for (auto v : {"S.", "S", "S.TA"}) t.add("SANTA", v);
  t.add("VIALE", "V.LE");
  t.add("CORSO", "C.SO");
  t.add("LARGO", "L.GO");
  t.add("VIA", "V.");
  return t;
}

QualifierTable QualifierTable::load(const std::filesystem::path& path) {
  QualifierTable t;
  for (const auto& [c, v] : mapping::readPairs(path)) t.add(trim(c), trim(v));
  return t;
}

std::vector<std::string> QualifierTable::alternatives(const std::string& token) const {
  std::vector<std::string> out{token};
  if (auto it = canonicalOf_.find(token); it != canonicalOf_.end()) out.push_back(it->second);
  if (auto it = variants_.find(token); it != variants_.end())
    out.insert(out.end(), it->second.begin(), it->second.end());
  return out;
}

bool QualifierTable::known(const std::string& token) const {
  return variants_.count(token) || canonicalOf_.count(token);
}

StreetNumberToken parseNumberToken(std::string_view text) {
  static const std::regex strict(R"(^(\d+)(?:/([A-Z]+))?(?:/(R))?$)");
  StreetNumberToken t;
  t.raw = std::string(text);
  std::string s = upperAscii(trim(text));
  std::smatch m;
  if (s == "SNC") {
    t.anomaly = Anomaly::Snc;
  } else if (!s.empty() && s.find_first_not_of('0') == std::string::npos) {
    t.anomaly = Anomaly::Zero;
  } else if (std::regex_match(s, m, strict) && m[1].length() <= 6) {
    t.number = std::stoi(m[1]);
    std::string x = m[2], r = m[3];
    if (!r.empty()) {
      t.red = true;
      t.exponent = x;
    } else if (x == "R") {
      t.red = true;
    } else {
      t.exponent = x;
    }
  } else {
    t.anomaly = Anomaly::Unparsed;
  }
  return t;
}

NormalizedAddress parseAddress(std::string_view street, std::string_view number,
                               std::string_view municipality, const QualifierTable& qualifiers) {
  NormalizedAddress a;
  a.rawStreet = std::string(street);
  a.streetTokens = tokenizeStreet(street, StrangeChars::base());
  a.qualifier = qualifierOf(a.streetTokens, qualifiers);
  for (const auto& part : splitRange(upperAscii(number))) a.numberTokens.push_back(parseNumberToken(part));
  a.municipalityRaw = std::string(municipality);
  return a;
}

NormalizedAddress aggressiveClean(const NormalizedAddress& addr, const QualifierTable& qualifiers) {
  static const std::regex lenient(R"(^(\d{1,6})([A-Z]*)$)");
  NormalizedAddress a = addr;
  std::string s = upperAscii(addr.rawStreet);
  // Everything from a corner marker on names the crossing street.
  for (auto marker : {" ANG.", " ANG "}) {
    auto cut = s.find(marker);
    if (cut != std::string::npos && cut > 0) s.erase(cut);
  }
  s = replaceAll(s, ".", "");
  a.streetTokens = tokenizeStreet(s, StrangeChars::base());
  a.qualifier = qualifierOf(a.streetTokens, qualifiers);
  for (auto& t : a.numberTokens) {
    if (t.anomaly != Anomaly::Unparsed) continue;
    std::string cleaned = upperAscii(t.raw);
    for (const auto& c : StrangeChars::aggressive().chars) cleaned = replaceAll(cleaned, c, "");
    cleaned.erase(std::remove_if(cleaned.begin(), cleaned.end(),
                                 [](unsigned char c) { return std::isspace(c); }),
                  cleaned.end());
    std::smatch m;
    if (std::regex_match(cleaned, m, lenient) && std::stoi(m[1]) > 0) {
      std::string raw = t.raw;
      t = StreetNumberToken{};
      t.raw = raw;
      t.number = std::stoi(m[1]);
      t.exponent = m[2];
    }
  }
  return a;
}

}  // namespace citykb::recon
