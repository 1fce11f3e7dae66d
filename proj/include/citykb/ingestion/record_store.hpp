#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "citykb/ingestion/record.hpp"

namespace citykb::ingest {

struct VersionInfo {
  std::uint64_t version = 0;
  std::string sourceHash;
  std::string retrievedAt;
  std::size_t recordCount = 0;
};

// Versioned raw-record log: one immutable file per (dataset, version) at
// <root>/<dataset>/v<version>.jsonl. Versions start at 1 and have no gaps.
class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path root);

  // Writes `records` as the next version of the dataset and returns it.
  // Record dataset/version/hash/retrievedAt fields are overwritten.
  std::uint64_t append(const std::string& dataset, std::vector<RawRecord> records,
                       const std::string& sourceHash, const std::string& retrievedAt);

  std::optional<VersionInfo> latest(const std::string& dataset) const;
  std::vector<VersionInfo> versions(const std::string& dataset) const;
  std::vector<RawRecord> read(const std::string& dataset, std::uint64_t version) const;
  std::vector<std::string> datasets() const;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path datasetDir(const std::string& dataset) const;
  std::mutex& lockFor(const std::string& dataset);

  std::filesystem::path root_;
  std::mutex tableMu_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

}  // namespace citykb::ingest
