#pragma once

#include <memory>
#include <string>

#include "citykb/service/knowledge_base.hpp"

namespace citykb::service {

// Rows returned by POST /query when the query sets no limit.
inline constexpr std::size_t kDefaultRowCap = 10'000;
inline constexpr double kMaxNearRadiusMeters = 50'000;
inline constexpr std::size_t kMaxReviewPage = 500;

// JSON HTTP API over a KnowledgeBase. Errors are problem-detail documents
// (application/problem+json) with type, title, status and detail.
class ApiServer {
 public:
  explicit ApiServer(KnowledgeBase& kb);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Port 0 binds any free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();
  // Blocks until listen() is accepting connections.
  void waitUntilReady() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace citykb::service
