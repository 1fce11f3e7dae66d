#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "citykb/mapping/names.hpp"
#include "citykb/quadstore/store.hpp"
#include "citykb/reconciliation/address.hpp"
#include "citykb/reconciliation/gazetteer.hpp"
#include "citykb/reconciliation/geocoder.hpp"

namespace citykb::recon {

inline constexpr std::string_view kReconciliationDataset = "reconciliation";

enum class Level { StreetNumber, Street, PendingReview, Unresolved };

std::string_view levelName(Level level);

struct ServiceAddress {
  std::string serviceIri;
  std::string street;
  std::string number;
  std::string municipality;
};

struct StepTrace {
  int step = 0;
  bool numberLevel = true;
  std::size_t candidates = 0;
  std::string note;
};

// StreetNumber: one candidate with an entry, hasAccess and isIn emitted.
// Street: one candidate, isIn emitted. PendingReview: the candidates of the
// first ambiguous step, nothing emitted.
struct ReconciliationOutcome {
  std::string serviceIri;
  Level level = Level::Unresolved;
  int step = 0;  // winning (or first ambiguous) step, 0 when none
  std::vector<CandidateMatch> candidates;
  std::vector<rdf::Quad> emittedQuads;
  std::vector<StepTrace> trace;
  std::optional<GeocodeResult> geocoded;
};

struct ReconcileConfig {
  QualifierTable qualifiers = QualifierTable::defaults();
  // Alias resolution for the municipality step; skipped when null.
  const mapping::IstatTable* municipalities = nullptr;
  Geocoder* geocoder = nullptr;
  // Steps after this one are disabled.
  int lastStep = 6;
};

// Steps operate on one municipality IRI; `useNumbers` selects the
// street-number level.
std::vector<CandidateMatch> step1ExactMatch(const NormalizedAddress& addr, const std::string& muni,
                                            const Gazetteer& gaz, bool useNumbers);
std::vector<CandidateMatch> step2QualifierMatch(const NormalizedAddress& addr,
                                                const std::string& muni,
                                                const QualifierTable& table, const Gazetteer& gaz,
                                                bool useNumbers);
std::vector<CandidateMatch> step3LastWordMatch(const NormalizedAddress& addr,
                                               const std::string& muni, const Gazetteer& gaz,
                                               bool useNumbers);

ReconciliationOutcome runPipeline(const ServiceAddress& service, const Gazetteer& gaz,
                                  const ReconcileConfig& config);

// Services (instances of Service or a subclass, or carrying a category) with
// their address fields; sorted by IRI.
std::vector<ServiceAddress> collectServices(const rdf::StoreView& view);

struct ReconcileRun {
  std::vector<ReconciliationOutcome> outcomes;  // sorted by service IRI
  std::vector<rdf::Quad> quads;                 // automatic links, sorted
  // "<level>/step<k>" -> count
  std::map<std::string, std::size_t> summary() const;
};

ReconcileRun reconcileAll(const rdf::StoreView& view, const ReconcileConfig& config,
                          unsigned threads = 0);

// Replaces the reconciliation graph with the run's links; returns the new
// version.
std::uint64_t publishLinks(rdf::QuadStore& store, const ReconcileRun& run);

}  // namespace citykb::recon
