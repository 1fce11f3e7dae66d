#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "citykb/quadstore/quad.hpp"
#include "citykb/quadstore/rwlock.hpp"
#include "citykb/quadstore/term.hpp"

namespace citykb::rdf {

using TermId = std::uint32_t;

struct IdTriple {
  TermId s = 0;
  TermId p = 0;
  TermId o = 0;

  auto operator<=>(const IdTriple&) const = default;
  bool operator==(const IdTriple&) const = default;
};

// Append-only term dictionary shared by all graphs of a store. Blank nodes
// are interned per dataset so equal labels in different graphs stay distinct.
class Dictionary {
 public:
  TermId intern(const Term& term, std::string_view scope);
  std::optional<TermId> find(const Term& term, std::string_view scope) const;
  Term term(TermId id) const;
  TermKind kind(TermId id) const;
  std::size_t size() const;

 private:
  static std::string keyOf(const Term& term, std::string_view scope);
  static Term decode(std::string_view key);

  mutable WriterPreferringMutex mu_;
  std::deque<std::string> keys_;
  std::unordered_map<std::string_view, TermId> ids_;
};

// Immutable set of triples belonging to one graph, held in three sorted
// permutations (SPO, POS, OSP).
class GraphPartition {
 public:
  GraphPartition(GraphId graph, std::vector<IdTriple> triples);
  // Builds base ∪ added without re-sorting base.
  GraphPartition(const GraphPartition& base, std::vector<IdTriple> added);

  const GraphId& graph() const { return graph_; }
  std::size_t size() const { return spo_.size(); }
  // Triples in SPO order.
  const std::vector<IdTriple>& triples() const { return spo_; }
  bool contains(const IdTriple& t) const;

  // Appends every triple matching the bound positions to `out`.
  void match(std::optional<TermId> s, std::optional<TermId> p,
             std::optional<TermId> o, std::vector<IdTriple>& out) const;
  std::size_t count(std::optional<TermId> s, std::optional<TermId> p,
                    std::optional<TermId> o) const;

 private:
  GraphId graph_;
  std::vector<IdTriple> spo_;
  std::vector<IdTriple> pos_;  // stored permuted as (p, o, s)
  std::vector<IdTriple> osp_;  // stored permuted as (o, s, p)
};

using TermPattern = std::optional<Term>;

// Consistent read-only snapshot of a store. Cheap to copy.
class StoreView {
 public:
  StoreView() = default;
  StoreView(std::shared_ptr<const Dictionary> dict,
            std::vector<std::shared_ptr<const GraphPartition>> parts,
            std::uint64_t generation);

  std::size_t size() const;
  std::vector<GraphId> graphs() const;
  std::uint64_t generation() const { return generation_; }

  std::vector<Quad> match(const TermPattern& s, const TermPattern& p,
                          const TermPattern& o,
                          const std::optional<GraphId>& g = {}) const;

  // Union-of-graphs triple matching at the id level, duplicates removed.
  std::vector<IdTriple> matchTriples(std::optional<TermId> s,
                                     std::optional<TermId> p,
                                     std::optional<TermId> o) const;
  // Upper bound on matchTriples(...).size(), computed from index ranges.
  std::size_t estimate(std::optional<TermId> s, std::optional<TermId> p,
                       std::optional<TermId> o) const;
  bool containsTriple(const IdTriple& t) const;

  // Id of an IRI or literal term. Blank nodes are graph-scoped and have no
  // store-wide id.
  std::optional<TermId> lookup(const Term& term) const;
  Term term(TermId id) const { return dict_->term(id); }
  TermKind kind(TermId id) const { return dict_->kind(id); }

  // View without the graphs of the given datasets.
  StoreView without(std::span<const std::string> datasets) const;

  const std::vector<std::shared_ptr<const GraphPartition>>& partitions()
      const {
    return parts_;
  }

  // Every quad, in graph then SPO order.
  std::vector<Quad> allQuads() const;

 private:
  std::shared_ptr<const Dictionary> dict_;
  std::vector<std::shared_ptr<const GraphPartition>> parts_;
  std::uint64_t generation_ = 0;
};

class StaleVersionError : public std::runtime_error {
 public:
  StaleVersionError(const std::string& dataset, std::uint64_t requested,
                    std::uint64_t active);
  std::uint64_t activeVersion() const { return active_; }

 private:
  std::uint64_t active_;
};

struct InsertError {
  std::size_t position = 0;
  std::string message;
};

struct InsertResult {
  std::size_t added = 0;
  std::vector<InsertError> errors;
};

// In-memory quad store. Readers take snapshots; writers to distinct datasets
// proceed in parallel, writers to one dataset are serialized.
class QuadStore {
 public:
  QuadStore();

  // Inserts into the quads' graphs. A graph is created when its dataset has
  // no active version; quads addressed to a non-active version of an existing
  // dataset are rejected.
  InsertResult insert(std::span<const Quad> quads);

  // Atomically swaps the dataset's active graph for a new version holding
  // exactly `quads` (their graph field is ignored). Throws StaleVersionError
  // when `version` is not newer than the active one and std::invalid_argument
  // on a malformed quad.
  GraphId replaceGraph(const std::string& dataset, std::uint64_t version,
                       std::span<const Quad> quads);

  bool dropGraph(const std::string& dataset);
  std::optional<std::uint64_t> activeVersion(const std::string& dataset) const;

  StoreView snapshot() const;
  std::size_t size() const { return snapshot().size(); }

 private:
  std::mutex& writerLock(const std::string& dataset);
  std::shared_ptr<const GraphPartition> current(
      const std::string& dataset) const;
  void publish(const std::string& dataset,
               std::shared_ptr<const GraphPartition> part);
  std::vector<IdTriple> internAll(std::span<const Quad> quads,
                                  const std::string& scope);

  std::shared_ptr<Dictionary> dict_;
  mutable WriterPreferringMutex mu_;
  std::map<std::string, std::shared_ptr<const GraphPartition>> graphs_;
  std::mutex lockTableMu_;
  std::map<std::string, std::unique_ptr<std::mutex>> writerLocks_;
  std::atomic<std::uint64_t> generation_{0};
};

}  // namespace citykb::rdf
