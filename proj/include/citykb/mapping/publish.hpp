#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "citykb/ingestion/ingest.hpp"
#include "citykb/mapping/model.hpp"
#include "citykb/quadstore/store.hpp"

namespace citykb::mapping {

// Graph that receives a dataset version. Realtime feeds keep every fetch as
// its own snapshot graph "<id>/<version>" (always version 1) so history
// accumulates; other datasets replace "<id>" in place.
rdf::GraphId publicationGraph(const ingest::DatasetDescriptor& d, std::uint64_t version);

struct PublishReport {
  rdf::GraphId graph;
  std::size_t recordCount = 0;
  std::size_t quadCount = 0;
  std::vector<CellError> errors;
};

// Maps `records` and swaps them in atomically. Throws StaleVersionError when
// a newer version of a replaced dataset is already active.
PublishReport publishVersion(rdf::QuadStore& store, const ingest::DatasetDescriptor& d,
                             std::uint64_t version, std::span<const ingest::RawRecord> records,
                             const CompiledMapping& mapping, const IstatTable* istat = nullptr);

}  // namespace citykb::mapping
