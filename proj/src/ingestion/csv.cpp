#include <string>

#include "citykb/ingestion/parsers.hpp"

namespace citykb::ingest {

bool isValidUtf8(std::string_view bytes) {
  std::size_t i = 0;
  while (i < bytes.size()) {
    auto c = static_cast<unsigned char>(bytes[i]);
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    for (std::size_t k = 1; k <= extra; ++k) {
      if (i + k >= bytes.size()) return false;
      auto cc = static_cast<unsigned char>(bytes[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

namespace {

struct Row {
  std::vector<std::string> cells;
  std::size_t line = 0;
  bool unterminated = false;
};

class CsvReader {
 public:
  CsvReader(std::string_view text, const CsvDialect& d) : text_(text), d_(d) {}

  bool next(Row& row) {
    row.cells.clear();
    row.unterminated = false;
    // Skip blank lines between records.
    while (pos_ < text_.size() && (text_[pos_] == '\n' || text_[pos_] == '\r')) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= text_.size()) return false;
    row.line = line_;
    std::string cell;
    bool quoted = false;
    bool wasQuoted = false;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (quoted) {
        if (c == d_.quote) {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == d_.quote) {
            cell.push_back(c);
            pos_ += 2;
            continue;
          }
          quoted = false;
          ++pos_;
          continue;
        }
        if (c == '\n') ++line_;
        cell.push_back(c);
        ++pos_;
        continue;
      }
      if (c == d_.quote && cell.empty() && !wasQuoted) {
        quoted = true;
        wasQuoted = true;
        ++pos_;
        continue;
      }
      if (c == d_.delimiter) {
        row.cells.push_back(std::move(cell));
        cell.clear();
        wasQuoted = false;
        ++pos_;
        continue;
      }
      if (c == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') {
        ++pos_;
        continue;
      }
      if (c == '\n') {
        ++line_;
        ++pos_;
        break;
      }
      cell.push_back(c);
      ++pos_;
    }
    row.unterminated = quoted;
    row.cells.push_back(std::move(cell));
    return true;
  }

 private:
  std::string_view text_;
  CsvDialect d_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace

ParsedRecords parseCsv(std::string_view bytes, const CsvDialect& dialect) {
  if (bytes.starts_with("\xEF\xBB\xBF")) bytes.remove_prefix(3);
  if (!isValidUtf8(bytes)) throw DatasetError("input is not valid UTF-8");
  ParsedRecords out;
  CsvReader reader(bytes, dialect);
  Row row;
  std::vector<std::string> names;
  if (dialect.header) {
    if (!reader.next(row)) return out;
    names = row.cells;
  }
  std::size_t index = 0;
  while (reader.next(row)) {
    if (row.unterminated) {
      out.errors.push_back({row.line, "unterminated quoted field"});
      continue;
    }
    if (names.empty()) {
      for (std::size_t i = 0; i < row.cells.size(); ++i) {
        names.push_back("column" + std::to_string(i + 1));
      }
    }
    if (row.cells.size() != names.size()) {
      out.errors.push_back({row.line, "expected " + std::to_string(names.size()) +
                                          " fields, found " + std::to_string(row.cells.size())});
      continue;
    }
    RawRecord rec;
    rec.rowIndex = index++;
    rec.fields.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
      rec.fields.emplace_back(names[i], std::move(row.cells[i]));
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace citykb::ingest
