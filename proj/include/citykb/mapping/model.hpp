#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "citykb/ingestion/record.hpp"
#include "citykb/mapping/names.hpp"
#include "citykb/quadstore/quad.hpp"
#include "citykb/schema/catalog.hpp"

namespace citykb::mapping {

enum class Transform { None, Trim, Uppercase, ParseDecimal, IstatLookup };
enum class TemporalKind { Parking, Avm, Forecast, WReport, Observation };

struct EntityMap {
  std::string alias;
  std::string classIri;     // prefixed or absolute
  std::string uriTemplate;  // "{base}/Road/{road_id}"
};

struct DataPropertyMap {
  std::string alias;
  std::string column;
  std::string propertyIri;
  std::string datatype;
  Transform transform = Transform::None;
  // "0" means "no number" in this column.
  bool numberColumn = false;
};

struct LinkMap {
  std::string subjectAlias;
  std::string propertyIri;
  std::string objectAlias;
};

struct TemporalMap {
  std::string alias;
  TemporalKind kind = TemporalKind::Observation;
  std::string column;
};

// Column computed from another before the maps run.
struct DerivedColumn {
  std::string name;
  std::string from;
  Transform transform = Transform::None;
};

struct MappingModel {
  std::string datasetId;
  std::string base;
  std::vector<std::string> columns;
  std::vector<DerivedColumn> derived;
  std::vector<EntityMap> entities;
  std::vector<DataPropertyMap> dataProperties;
  std::vector<LinkMap> links;
  std::vector<TemporalMap> temporal;
};

// Throws std::invalid_argument with the offending location on malformed
// JSON structure. Semantic checks happen in compileMapping.
MappingModel parseMappingModel(std::string_view jsonText);
MappingModel loadMappingModel(const std::filesystem::path& path);

struct CompileError {
  std::string location;  // e.g. "links[2].property"
  std::string message;
};

class CompiledMapping;

// Resolves names against the catalog and the model's columns.
std::variant<CompiledMapping, std::vector<CompileError>> compileMapping(
    const MappingModel& model, const schema::SchemaCatalog& catalog);

struct CellError {
  std::size_t rowIndex = 0;
  std::string column;
  std::string message;
};

struct MappingResult {
  std::vector<rdf::Quad> quads;  // sorted, duplicates removed
  std::vector<CellError> errors;
};

class CompiledMapping {
 public:
  const std::string& datasetId() const { return datasetId_; }

  // Maps every record into `graph` (default: the records' dataset/version).
  MappingResult apply(std::span<const ingest::RawRecord> records,
                      const std::optional<rdf::GraphId>& graph = {},
                      const IstatTable* istat = nullptr) const;

  // Appends this record's quads (unsorted, may repeat) to `out`.
  void applyOne(const ingest::RawRecord& record, const rdf::GraphId& graph,
                const IstatTable* istat, std::vector<rdf::Quad>& out,
                std::vector<CellError>& errors) const;

 private:
  friend std::variant<CompiledMapping, std::vector<CompileError>> compileMapping(
      const MappingModel&, const schema::SchemaCatalog&);

  struct Segment {
    bool column;
    std::string text;  // literal text or column name
  };
  struct Entity {
    std::string classIri;
    std::vector<Segment> segments;
  };
  struct DataProp {
    std::size_t entity;
    std::string column;
    std::string property;
    std::string datatype;
    Transform transform;
    bool numberColumn;
  };
  struct Link {
    std::size_t subject;
    std::string property;
    std::size_t object;
  };
  struct Temporal {
    std::size_t entity;
    TemporalKind kind;
    std::string column;
  };

  std::string datasetId_;
  std::string base_;
  std::vector<DerivedColumn> derived_;
  std::vector<Entity> entities_;
  std::vector<DataProp> props_;
  std::vector<Link> links_;
  std::vector<Temporal> temporal_;
};

// The three statements tying a resource to a minted time instant:
// resource -kindProperty-> instant, instant -inverse-> resource, and the
// instant's xsd:dateTime. Throws std::invalid_argument on a bad timestamp.
std::vector<rdf::Quad> temporalLink(const std::string& resourceIri, TemporalKind kind,
                                    std::string_view timestamp, const rdf::GraphId& graph,
                                    std::string_view base = {});

std::string instantIri(const std::string& resourceIri, TemporalKind kind, std::int64_t epoch,
                       std::string_view base = {});

TemporalKind parseTemporalKind(std::string_view s);
Transform parseTransform(std::string_view s);

// Percent-encodes everything but RFC 3986 unreserved characters.
std::string percentEncode(std::string_view s);

}  // namespace citykb::mapping
