#include "citykb/mapping/publish.hpp"

namespace citykb::mapping {

rdf::GraphId publicationGraph(const ingest::DatasetDescriptor& d, std::uint64_t version) {
  if (d.category == ingest::DatasetCategory::Realtime)
    return {d.id + "/" + std::to_string(version), 1};
  return {d.id, version};
}

PublishReport publishVersion(rdf::QuadStore& store, const ingest::DatasetDescriptor& d,
                             std::uint64_t version, std::span<const ingest::RawRecord> records,
                             const CompiledMapping& mapping, const IstatTable* istat) {
  PublishReport rep;
  rep.graph = publicationGraph(d, version);
  rep.recordCount = records.size();
  auto mapped = mapping.apply(records, rep.graph, istat);
  rep.quadCount = mapped.quads.size();
  rep.errors = std::move(mapped.errors);
  store.replaceGraph(rep.graph.dataset, rep.graph.version, mapped.quads);
  return rep;
}

}  // namespace citykb::mapping
