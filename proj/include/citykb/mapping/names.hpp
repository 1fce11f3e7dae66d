#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace citykb::mapping {

// Uppercase, punctuation folded to spaces, whitespace collapsed. Used for
// case- and punctuation-insensitive municipality lookups.
std::string normalizeName(std::string_view name);

// Reads "a,b" pairs from a text file; '#' starts a comment line.
std::vector<std::pair<std::string, std::string>> readPairs(const std::filesystem::path& path);

// Municipality name -> ISTAT code, with optional non-official aliases.
class IstatTable {
 public:
  void add(std::string_view name, std::string code);
  void addAlias(std::string_view alias, std::string_view canonical);

  std::optional<std::string> lookup(std::string_view name) const;
  // Canonical spelling of a known name or alias.
  std::optional<std::string> canonical(std::string_view name) const;

  // `codes`: name,code lines. `aliases`: canonical,alias lines.
  static IstatTable load(const std::filesystem::path& codes,
                         const std::optional<std::filesystem::path>& aliases = {});

  std::size_t size() const { return codes_.size(); }

 private:
  std::map<std::string, std::pair<std::string, std::string>> codes_;  // norm -> (name, code)
  std::map<std::string, std::string> aliases_;                        // norm alias -> norm name
};

}  // namespace citykb::mapping
