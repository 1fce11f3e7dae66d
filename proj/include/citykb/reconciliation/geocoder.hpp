#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "citykb/query/geo.hpp"

namespace citykb::recon {

struct GeocodeResult {
  std::string street;  // canonical street name
  query::GeoPoint point;
};

// Timeouts, quota exhaustion and transport failures.
class GeocoderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Geocoder {
 public:
  virtual ~Geocoder() = default;
  // nullopt when the service knows no such address.
  virtual std::optional<GeocodeResult> geocode(const std::string& street,
                                               const std::string& number,
                                               const std::string& municipality) = 0;
};

// Replays canned answers keyed by (street, municipality); thread-safe.
class ScriptedGeocoder : public Geocoder {
 public:
  void answer(const std::string& street, const std::string& municipality, GeocodeResult r);
  void fail(const std::string& street, const std::string& municipality, std::string message);
  std::optional<GeocodeResult> geocode(const std::string& street, const std::string& number,
                                       const std::string& municipality) override;
  std::size_t calls() const;

 private:
  static std::string key(const std::string& street, const std::string& municipality);
  mutable std::mutex mu_;
  std::map<std::string, GeocodeResult> answers_;
  std::map<std::string, std::string> failures_;
  std::size_t calls_ = 0;
};

// GET <path>?street=..&number=..&municipality=.. on a JSON endpoint answering
// {"street": .., "lat": .., "lon": ..}; 404 means no result.
class HttpGeocoder : public Geocoder {
 public:
  HttpGeocoder(std::string baseUrl, std::string path = "/geocode",
               std::chrono::seconds timeout = std::chrono::seconds(5));
  std::optional<GeocodeResult> geocode(const std::string& street, const std::string& number,
                                       const std::string& municipality) override;

 private:
  std::string baseUrl_;
  std::string path_;
  std::chrono::seconds timeout_;
};

}  // namespace citykb::recon
