#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "citykb/quadstore/store.hpp"
#include "citykb/reconciliation/pipeline.hpp"

namespace citykb::recon {

inline constexpr std::string_view kReviewDataset = "review";

enum class ReviewStatus { Pending, Resolved, Rejected };
std::string_view statusName(ReviewStatus s);
std::optional<ReviewStatus> parseStatus(std::string_view s);

struct ReviewCandidate {
  CandidateMatch match;
  std::string roadName;
  std::optional<query::GeoPoint> point;
};

struct ReviewDecision {
  std::string choice;  // candidate IRI or "reject"
  std::string idempotencyKey;
  std::string reviewer;
  std::string decidedAt;
  std::vector<rdf::Quad> quads;
};

struct ReviewItem {
  std::uint64_t id = 0;
  ServiceAddress address;
  int step = 0;
  std::vector<ReviewCandidate> candidates;
  std::string discoveredAt;
  ReviewStatus status = ReviewStatus::Pending;
  std::optional<ReviewDecision> decision;
};

class ReviewError : public std::runtime_error {
 public:
  enum class Code { NotFound, Conflict, InvalidChoice };
  ReviewError(Code code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct ResolveResult {
  ReviewItem item;
  bool replayed = false;  // same idempotency key seen before; nothing written
};

// FIFO queue of ambiguous outcomes. Decisions are final: a second decision
// with the same idempotency key replays the first, any other key conflicts.
class ReviewQueue {
 public:
  explicit ReviewQueue(std::string base = {});

  // Queues a pending-review outcome; a service already pending keeps its
  // item. Returns the item id.
  std::uint64_t enqueue(const ReconciliationOutcome& outcome, const ServiceAddress& address,
                        const Gazetteer& gaz, const std::string& discoveredAt);

  // Items in id order, optionally filtered by status and municipality.
  std::vector<ReviewItem> list(std::optional<ReviewStatus> status, std::size_t offset,
                               std::size_t limit,
                               const std::optional<std::string>& municipality = {}) const;
  std::size_t count(std::optional<ReviewStatus> status,
                    const std::optional<std::string>& municipality = {}) const;
  std::optional<ReviewItem> get(std::uint64_t id) const;

  // Writes hasAccess/isIn plus owl:sameAs from the raw toponym to the chosen
  // road into the review dataset of `store`.
  ResolveResult resolve(std::uint64_t id, const std::string& choice,
                        const std::string& idempotencyKey, const std::string& reviewer,
                        const std::string& decidedAt, rdf::QuadStore& store);

  std::string rawToponymIri(const ServiceAddress& address) const;

  nlohmann::json toJson() const;
  void loadJson(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

 private:
  std::string base_;
  mutable std::mutex mu_;
  std::map<std::uint64_t, ReviewItem> items_;
  std::map<std::string, std::uint64_t> pendingByService_;
  std::uint64_t nextId_ = 1;
};

nlohmann::json itemToJson(const ReviewItem& item);

}  // namespace citykb::recon
