#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "citykb/ingestion/record.hpp"
#include "citykb/mapping/model.hpp"
#include "citykb/mapping/names.hpp"
#include "citykb/quadstore/store.hpp"
#include "citykb/quadstore/quad.hpp"
#include "citykb/reconciliation/pipeline.hpp"

namespace citykb::testkit {

enum class Corruption {
  Clean,
  QualifierVariant,
  WordSwap,
  StrangeChars,
  MunicipalityAlias,
  Typo,
  MissingNumber,
  Snc,
  RedNumber,
  RomanNumeral,
  // Not part of the mix: planted separately.
  Ambiguous,
  Orphan,
};

std::string_view corruptionName(Corruption c);
std::optional<Corruption> parseCorruption(std::string_view name);
// The ten mixable classes, in declaration order.
const std::vector<Corruption>& mixableClasses();

// Mix used when a spec names none. Roughly 44% of services are expected at
// number level and 71% at street level or better; the rest carry typos.
const std::map<Corruption, double>& defaultCorruptionMix();

struct CorpusSpec {
  std::uint32_t seed = 1;
  std::size_t municipalities = 5;
  std::size_t roadsPerMunicipality = 30;
  std::size_t entriesMin = 4;
  std::size_t entriesMax = 8;
  std::size_t services = 1000;
  // Fractions summing to 1 over mixable classes.
  std::map<Corruption, double> corruptionMix = defaultCorruptionMix();
  std::size_t ambiguousServices = 0;
  std::size_t orphanServices = 0;

  // Throws std::invalid_argument when fractions do not sum to 1 (1e-9) or a
  // count is out of range.
  void validate() const;
  static CorpusSpec uniform(std::uint32_t seed, std::size_t perClass);
  static CorpusSpec fromJson(const nlohmann::json& j);
  nlohmann::json toJson() const;
};

struct TruthEntry {
  recon::Level expectedLevel = recon::Level::StreetNumber;
  std::string roadIri;
  std::string entryIri;  // empty below street-number level
  Corruption corruption = Corruption::Clean;
};

using GroundTruth = std::map<std::string, TruthEntry>;  // service IRI -> truth

struct Corpus {
  std::vector<rdf::Quad> streetGuide;        // dataset "streetguide"
  std::vector<ingest::RawRecord> services;   // columns of the services mapping
  GroundTruth truth;
  std::vector<std::pair<std::string, std::string>> municipalityCodes;    // name, ISTAT code
  std::vector<std::pair<std::string, std::string>> municipalityAliases;  // canonical, alias
  mapping::IstatTable istatTable() const;
};

inline constexpr std::string_view kStreetGuideDataset = "streetguide";
inline constexpr std::string_view kServicesDataset = "services";

// Deterministic under spec.seed.
Corpus generateCorpus(const CorpusSpec& spec);

// Loads the street guide and the services mapped through `services` into
// one graph each. Returns the mapping's cell errors.
std::vector<mapping::CellError> loadCorpus(const Corpus& corpus,
                                           const mapping::CompiledMapping& services,
                                           rdf::QuadStore& store);

// Writes streetguide.nq, services.csv, truth.json, municipalities.csv and
// aliases.csv into `dir`.
// Writes streetguide.nq, services.csv, truth.json, municipalities.csv and
// aliases.csv into `dir`.
void writeCorpus(const Corpus& corpus, const std::filesystem::path& dir);
// Reads the truth.json written by writeCorpus.
GroundTruth readTruth(const std::filesystem::path& path);

struct ClassScore {
  std::size_t attempted = 0;
  std::size_t reconciledAtNumber = 0;
  std::size_t reconciledAtStreet = 0;
  std::size_t pendingReview = 0;
  std::size_t unresolved = 0;
  std::size_t wrongLink = 0;
  std::map<std::string, std::size_t> byStep;  // "<level>/<step>"
};

struct ScoreReport {
  std::map<Corruption, ClassScore> perClass;
  std::map<std::string, std::size_t> perStep;
  std::size_t wrongLink = 0;
  std::size_t missingOutcomes = 0;

  // Fraction of the class's services settled at `level` by `step`.
  double recall(Corruption c, recon::Level level, int step) const;
  nlohmann::json toJson() const;
  std::string table() const;
};

ScoreReport scorePipeline(const std::vector<recon::ReconciliationOutcome>& outcomes,
                          const GroundTruth& truth);

}  // namespace citykb::testkit
