#include "json.hpp"

#include "citykb/ingestion/parsers.hpp"

namespace citykb::ingest {

using ordered_json = nlohmann::ordered_json;

ParsedRecords parseJsonRecords(std::string_view bytes) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(bytes.begin(), bytes.end());
  } catch (const ordered_json::parse_error& e) {
    throw DatasetError(std::string("json: ") + e.what());
  }
  const ordered_json* rows = &doc;
  if (doc.is_object()) {
    auto it = doc.find("records");
    if (it == doc.end() || !it->is_array()) {
      throw DatasetError("json: expected an array or an object with a 'records' array");
    }
    rows = &*it;
  }
  if (!rows->is_array()) throw DatasetError("json: expected an array of records");
  ParsedRecords out;
  std::size_t index = 0;
  for (std::size_t i = 0; i < rows->size(); ++i) {
    const auto& row = (*rows)[i];
    if (!row.is_object()) {
      out.errors.push_back({i, "record is not an object"});
      continue;
    }
    RawRecord rec;
    rec.rowIndex = index++;
    for (const auto& [key, value] : row.items()) {
      std::string text;
      if (value.is_string()) {
        text = value.get<std::string>();
      } else if (!value.is_null()) {
        text = value.dump();
      }
      rec.fields.emplace_back(key, std::move(text));
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace citykb::ingest
