#include "citykb/mapping/names.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

namespace citykb::mapping {

std::string normalizeName(std::string_view name) {
  std::string out;
  bool space = false;
  for (unsigned char c : name) {
    if (std::isalnum(c) || c >= 0x80) {
      if (space && !out.empty()) out.push_back(' ');
      space = false;
      out.push_back(static_cast<char>(std::toupper(c)));
    } else {
      space = true;
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> readPairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    out.emplace_back(line.substr(0, comma), line.substr(comma + 1));
  }
  return out;
}

void IstatTable::add(std::string_view name, std::string code) {
  codes_[normalizeName(name)] = {std::string(name), std::move(code)};
}

void IstatTable::addAlias(std::string_view alias, std::string_view canonical) {
  aliases_[normalizeName(alias)] = normalizeName(canonical);
}

std::optional<std::string> IstatTable::lookup(std::string_view name) const {
  auto key = normalizeName(name);
  if (auto a = aliases_.find(key); a != aliases_.end()) key = a->second;
  auto it = codes_.find(key);
  if (it == codes_.end()) return std::nullopt;
  return it->second.second;
}

std::optional<std::string> IstatTable::canonical(std::string_view name) const {
  auto key = normalizeName(name);
  if (auto a = aliases_.find(key); a != aliases_.end()) key = a->second;
  auto it = codes_.find(key);
  if (it == codes_.end()) return std::nullopt;
  return it->second.first;
}

IstatTable IstatTable::load(const std::filesystem::path& codes,
                            const std::optional<std::filesystem::path>& aliases) {
  IstatTable t;
  for (auto& [name, code] : readPairs(codes)) t.add(name, code);
  if (aliases) {
    for (auto& [canonical, alias] : readPairs(*aliases)) t.addAlias(alias, canonical);
  }
  return t;
}

}  // namespace citykb::mapping
