#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace citykb::recon {

enum class Anomaly { None, Zero, Snc, Unparsed };

// Exactly one of `number` and a non-None `anomaly` is set.
struct StreetNumberToken {
  std::optional<int> number;
  std::string exponent;   // letter suffix, uppercase; empty when absent
  bool red = false;       // "/R" colour code; black otherwise
  Anomaly anomaly = Anomaly::None;
  std::string raw;

  bool usable() const { return number.has_value(); }
  bool operator==(const StreetNumberToken& o) const {
    return number == o.number && exponent == o.exponent && red == o.red && anomaly == o.anomaly;
  }
};

struct NormalizedAddress {
  std::string rawStreet;
  std::vector<std::string> streetTokens;
  std::optional<std::string> qualifier;
  std::vector<StreetNumberToken> numberTokens;
  std::string municipalityRaw;

  std::string street() const;
  bool hasUsableNumber() const;
};

// Characters removed from address fields. The aggressive set additionally
// drops '.' and cuts the street at an "ANG." (corner) marker.
struct StrangeChars {
  std::vector<std::string> chars;
  static StrangeChars base();
  static StrangeChars aggressive();
};

// Canonical toponym qualifier -> abbreviated variants.
// Invariants: variant sets are pairwise disjoint and no variant is another
// entry's canonical form.
class QualifierTable {
 public:
  // Throws std::invalid_argument when the pair would break an invariant.
  void add(const std::string& canonical, const std::string& variant);
  static QualifierTable defaults();
  // "canonical,variant" lines.
  static QualifierTable load(const std::filesystem::path& path);

  // The token itself first, then its canonical form or its variants.
  std::vector<std::string> alternatives(const std::string& token) const;
  bool known(const std::string& token) const;
  const std::map<std::string, std::set<std::string>>& entries() const { return variants_; }

 private:
  std::map<std::string, std::set<std::string>> variants_;
  std::map<std::string, std::string> canonicalOf_;
};

// Uppercases, splits on whitespace and strange characters. Number ranges
// such as "40/R-42/R" yield one token per end. Never throws.
NormalizedAddress parseAddress(std::string_view street, std::string_view number,
                               std::string_view municipality,
                               const QualifierTable& qualifiers = QualifierTable::defaults());

// Strict grammar: N, N/R, N/X, N/X/R; "0" and "SNC" are flagged anomalies.
StreetNumberToken parseNumberToken(std::string_view text);

// The address after aggressive cleaning: street truncated at "ANG.", dots
// removed, and number tokens the strict grammar rejected re-read with the
// lenient form digits+letters.
NormalizedAddress aggressiveClean(const NormalizedAddress& addr,
                                  const QualifierTable& qualifiers = QualifierTable::defaults());

// Uppercase with whitespace collapsed; applied to gazetteer names and to
// reconstructed street strings alike.
std::string normalizeStreet(std::string_view s);
std::string upperAscii(std::string_view s);

}  // namespace citykb::recon
