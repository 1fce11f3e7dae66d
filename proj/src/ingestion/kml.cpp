#include <zlib.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <charconv>
#include <cstring>
#include <sstream>

#include "citykb/ingestion/parsers.hpp"

namespace citykb::ingest {

namespace pt = boost::property_tree;

namespace {

std::string_view localName(std::string_view tag) {
  auto colon = tag.find(':');
  return colon == std::string_view::npos ? tag : tag.substr(colon + 1);
}

bool parseDouble(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Parses "lon,lat[,alt] lon,lat ..." into (lat, lon) points.
std::optional<std::string> parseCoordinates(std::string_view text,
                                            std::vector<GeoPointDeg>& points) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view tuple = text.substr(i, j - i);
    i = j;
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
      auto comma = tuple.find(',', start);
      parts.push_back(tuple.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    double lon = 0;
    double lat = 0;
    double alt = 0;
    if (parts.size() < 2 || parts.size() > 3 || !parseDouble(parts[0], lon) ||
        !parseDouble(parts[1], lat) || (parts.size() == 3 && !parseDouble(parts[2], alt))) {
      return "malformed coordinate tuple '" + std::string(tuple) + "'";
    }
    if (lat < -90 || lat > 90 || lon < -180 || lon > 180) {
      return "coordinate out of range '" + std::string(tuple) + "'";
    }
    points.push_back({lat, lon});
  }
  return std::nullopt;
}

void collectLineStrings(const pt::ptree& node, std::vector<const pt::ptree*>& out) {
  for (const auto& [tag, child] : node) {
    if (localName(tag) == "LineString") {
      out.push_back(&child);
    } else if (tag != "<xmlattr>") {
      collectLineStrings(child, out);
    }
  }
}

void visit(const pt::ptree& node, std::size_t& placemarkIndex, ParsedGeometries& out) {
  for (const auto& [tag, child] : node) {
    if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
    if (localName(tag) != "Placemark") {
      visit(child, placemarkIndex, out);
      continue;
    }
    std::size_t index = placemarkIndex++;
    std::string id = child.get<std::string>("<xmlattr>.id", "");
    if (id.empty()) {
      for (const auto& [t, c] : child) {
        if (localName(t) == "name") id = c.get_value<std::string>();
      }
    }
    if (id.empty()) id = "placemark-" + std::to_string(index);
    std::vector<const pt::ptree*> lines;
    collectLineStrings(child, lines);
    for (std::size_t k = 0; k < lines.size(); ++k) {
      std::string text;
      for (const auto& [t, c] : *lines[k]) {
        if (localName(t) == "coordinates") text = c.get_value<std::string>();
      }
      GeometryRecord g;
      g.featureId = lines.size() == 1 ? id : id + "#" + std::to_string(k + 1);
      if (auto err = parseCoordinates(text, g.points)) {
        out.errors.push_back({index, g.featureId + ": " + *err});
        continue;
      }
      if (g.points.size() < 2) {
        out.errors.push_back({index, g.featureId + ": LineString needs at least 2 points"});
        continue;
      }
      out.geometries.push_back(std::move(g));
    }
  }
}

std::uint32_t le32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::string inflateRaw(std::string_view data, std::size_t expected) {
  std::string out(expected, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw DatasetError("kmz: inflate init failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != expected) {
    throw DatasetError("kmz: corrupt deflate stream");
  }
  return out;
}

}  // namespace

ParsedGeometries parseKmlLineStrings(std::string_view bytes) {
  pt::ptree tree;
  std::istringstream in{std::string(bytes)};
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw DatasetError(std::string("kml: ") + e.what());
  }
  ParsedGeometries out;
  std::size_t index = 0;
  visit(tree, index, out);
  return out;
}

std::string extractKmz(std::string_view bytes) {
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  if (n < 22) throw DatasetError("kmz: archive too small");
  std::size_t eocd = std::string_view::npos;
  for (std::size_t i = n - 22 + 1; i-- > 0 && n - i <= 22 + 65535;) {
    if (le32(data + i) == 0x06054b50) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string_view::npos) throw DatasetError("kmz: no end of central directory");
  std::size_t entries = le16(data + eocd + 10);
  std::size_t cd = le32(data + eocd + 16);
  struct Entry {
    std::string name;
    std::uint16_t method;
    std::size_t compressed;
    std::size_t size;
    std::size_t localOffset;
  };
  std::vector<Entry> list;
  std::size_t p = cd;
  for (std::size_t e = 0; e < entries; ++e) {
    if (p + 46 > n || le32(data + p) != 0x02014b50) throw DatasetError("kmz: bad central directory");
    Entry entry;
    entry.method = le16(data + p + 10);
    entry.compressed = le32(data + p + 20);
    entry.size = le32(data + p + 24);
    std::size_t nameLen = le16(data + p + 28);
    std::size_t extraLen = le16(data + p + 30);
    std::size_t commentLen = le16(data + p + 32);
    entry.localOffset = le32(data + p + 42);
    if (p + 46 + nameLen > n) throw DatasetError("kmz: bad central directory");
    entry.name.assign(bytes.substr(p + 46, nameLen));
    list.push_back(std::move(entry));
    p += 46 + nameLen + extraLen + commentLen;
  }
  const Entry* chosen = nullptr;
  for (const auto& e : list) {
    bool kml = e.name.size() > 4 && e.name.compare(e.name.size() - 4, 4, ".kml") == 0;
    if (e.name == "doc.kml") {
      chosen = &e;
      break;
    }
    if (kml && !chosen) chosen = &e;
  }
  if (!chosen) throw DatasetError("kmz: archive holds no .kml entry");
  std::size_t lh = chosen->localOffset;
  if (lh + 30 > n || le32(data + lh) != 0x04034b50) throw DatasetError("kmz: bad local header");
  std::size_t start = lh + 30 + le16(data + lh + 26) + le16(data + lh + 28);
  if (start + chosen->compressed > n) throw DatasetError("kmz: truncated entry");
  auto payload = bytes.substr(start, chosen->compressed);
  if (chosen->method == 0) return std::string(payload);
  if (chosen->method == 8) return inflateRaw(payload, chosen->size);
  throw DatasetError("kmz: unsupported compression method " + std::to_string(chosen->method));
}

RawRecord geometryToRecord(const GeometryRecord& g) {
  RawRecord r;
  r.datasetId = g.datasetId;
  r.version = g.version;
  std::ostringstream pts;
  pts.precision(10);
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    if (i) pts << ';';
    pts << g.points[i].lat << ' ' << g.points[i].lon;
  }
  r.fields = {{"featureId", g.featureId}, {"points", pts.str()}};
  return r;
}

std::vector<GeoPointDeg> parsePointList(std::string_view text) {
  std::vector<GeoPointDeg> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find(';', start);
    auto item = text.substr(start, end == std::string_view::npos ? end : end - start);
    auto space = item.find(' ');
    GeoPointDeg p;
    if (space != std::string_view::npos && parseDouble(item.substr(0, space), p.lat) &&
        parseDouble(item.substr(space + 1), p.lon)) {
      out.push_back(p);
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace citykb::ingest
