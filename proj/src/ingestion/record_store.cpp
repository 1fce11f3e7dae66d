#include "citykb/ingestion/record_store.hpp"

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <regex>

#include "json.hpp"

namespace citykb::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string encodeName(const std::string& dataset) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : dataset) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    }
  }
  return out;
}

std::string decodeName(const std::string& name) {
  std::string out;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (name[i] == '%' && i + 2 < name.size()) {
      out.push_back(static_cast<char>(std::stoi(name.substr(i + 1, 2), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(name[i]);
    }
  }
  return out;
}

std::vector<std::uint64_t> listVersions(const fs::path& dir) {
  std::vector<std::uint64_t> out;
  if (!fs::is_directory(dir)) return out;
  static const std::regex re(R"(v(\d+)\.jsonl)");
  for (const auto& e : fs::directory_iterator(dir)) {
    std::smatch m;
    auto name = e.path().filename().string();
    if (std::regex_match(name, m, re)) out.push_back(std::stoull(m[1]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

fs::path versionFile(const fs::path& dir, std::uint64_t v) {
  return dir / ("v" + std::to_string(v) + ".jsonl");
}

VersionInfo readHeader(const fs::path& file) {
  std::ifstream in(file);
  std::string line;
  if (!in || !std::getline(in, line)) {
    throw std::runtime_error("record store: cannot read " + file.string());
  }
  auto h = json::parse(line);
  return VersionInfo{h.at("version").get<std::uint64_t>(), h.at("hash").get<std::string>(),
                     h.at("retrievedAt").get<std::string>(), h.at("count").get<std::size_t>()};
}

}  // namespace

RecordStore::RecordStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
}

fs::path RecordStore::datasetDir(const std::string& dataset) const {
  return root_ / encodeName(dataset);
}

std::mutex& RecordStore::lockFor(const std::string& dataset) {
  std::lock_guard lock(tableMu_);
  auto& slot = locks_[dataset];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::uint64_t RecordStore::append(const std::string& dataset, std::vector<RawRecord> records,
                                  const std::string& sourceHash,
                                  const std::string& retrievedAt) {
  std::lock_guard guard(lockFor(dataset));
  auto dir = datasetDir(dataset);
  fs::create_directories(dir);
  auto existing = listVersions(dir);
  std::uint64_t version = existing.empty() ? 1 : existing.back() + 1;
  auto target = versionFile(dir, version);
  auto tmp = dir / (".v" + std::to_string(version) + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("record store: cannot write " + tmp.string());
    json header{{"dataset", dataset},         {"version", version},
                {"hash", sourceHash},         {"retrievedAt", retrievedAt},
                {"count", records.size()}};
    out << header.dump() << '\n';
    for (std::size_t i = 0; i < records.size(); ++i) {
      json fields = json::array();
      for (const auto& [k, v] : records[i].fields) fields.push_back(json::array({k, v}));
      json row{{"row", records[i].rowIndex}, {"fields", std::move(fields)}};
      out << row.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
    out.flush();
    if (!out) throw std::runtime_error("record store: write failed for " + tmp.string());
  }
  // link() refuses to overwrite, so an existing version is never replaced.
  if (::link(tmp.c_str(), target.c_str()) != 0) {
    fs::remove(tmp);
    throw std::runtime_error("record store: version file already exists: " + target.string());
  }
  fs::remove(tmp);
  return version;
}

std::optional<VersionInfo> RecordStore::latest(const std::string& dataset) const {
  auto dir = datasetDir(dataset);
  auto versions = listVersions(dir);
  if (versions.empty()) return std::nullopt;
  return readHeader(versionFile(dir, versions.back()));
}

std::vector<VersionInfo> RecordStore::versions(const std::string& dataset) const {
  std::vector<VersionInfo> out;
  auto dir = datasetDir(dataset);
  for (auto v : listVersions(dir)) out.push_back(readHeader(versionFile(dir, v)));
  return out;
}

std::vector<RawRecord> RecordStore::read(const std::string& dataset,
                                         std::uint64_t version) const {
  auto file = versionFile(datasetDir(dataset), version);
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("record store: no version " + std::to_string(version) +
                             " of dataset '" + dataset + "'");
  }
  std::string line;
  std::getline(in, line);
  auto header = json::parse(line);
  std::vector<RawRecord> out;
  out.reserve(header.at("count").get<std::size_t>());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = json::parse(line);
    RawRecord rec;
    rec.datasetId = dataset;
    rec.version = version;
    rec.rowIndex = row.at("row").get<std::size_t>();
    rec.retrievedAt = header.at("retrievedAt").get<std::string>();
    rec.sourceHash = header.at("hash").get<std::string>();
    for (const auto& f : row.at("fields")) {
      rec.fields.emplace_back(f.at(0).get<std::string>(), f.at(1).get<std::string>());
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<std::string> RecordStore::datasets() const {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(root_)) {
    if (e.is_directory()) out.push_back(decodeName(e.path().filename().string()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace citykb::ingest
