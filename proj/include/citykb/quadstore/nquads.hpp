#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "citykb/quadstore/quad.hpp"
#include "citykb/quadstore/store.hpp"

namespace citykb::rdf {

// Dataset assigned to statements read without a graph term.
inline constexpr std::string_view kDefaultDataset = "default";

class NQuadsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

// Parses one statement line. Returns nullopt for blank and comment lines.
// Throws NQuadsError on malformed input.
std::optional<Quad> parseNQuadsLine(std::string_view line);

std::string formatNQuad(const Quad& quad);

void writeNQuads(std::ostream& out, std::span<const Quad> quads);

struct ReadResult {
  std::vector<Quad> quads;
  std::vector<ParseIssue> issues;
};

ReadResult readNQuads(std::istream& in);

// Writes the given view (or one dataset of it) to `path`. Output is sorted so
// that equal stores produce identical files.
void exportQuads(const StoreView& view, const std::filesystem::path& path,
                 const std::optional<std::string>& dataset = {});

// Loads a statements file into `store`, creating one graph per dataset.
// When a file carries several versions of a dataset only the newest is kept
// and the others are reported as issues.
std::vector<ParseIssue> importQuads(QuadStore& store,
                                    const std::filesystem::path& path);

}  // namespace citykb::rdf
