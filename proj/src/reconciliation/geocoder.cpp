#include "citykb/reconciliation/geocoder.hpp"

#include <httplib.h>

#include <json.hpp>

#include "citykb/mapping/names.hpp"
#include "citykb/reconciliation/address.hpp"

namespace citykb::recon {

std::string ScriptedGeocoder::key(const std::string& street, const std::string& municipality) {
  return normalizeStreet(street) + "|" + mapping::normalizeName(municipality);
}

void ScriptedGeocoder::answer(const std::string& street, const std::string& municipality,
                              GeocodeResult r) {
  std::lock_guard lock(mu_);
  answers_[key(street, municipality)] = std::move(r);
}

void ScriptedGeocoder::fail(const std::string& street, const std::string& municipality,
                            std::string message) {
  std::lock_guard lock(mu_);
  failures_[key(street, municipality)] = std::move(message);
}

std::optional<GeocodeResult> ScriptedGeocoder::geocode(const std::string& street,
                                                       const std::string&,
                                                       const std::string& municipality) {
  std::lock_guard lock(mu_);
  ++calls_;
  auto k = key(street, municipality);
  if (auto f = failures_.find(k); f != failures_.end()) throw GeocoderError(f->second);
  if (auto a = answers_.find(k); a != answers_.end()) return a->second;
  return std::nullopt;
}

std::size_t ScriptedGeocoder::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

HttpGeocoder::HttpGeocoder(std::string baseUrl, std::string path, std::chrono::seconds timeout)
    : baseUrl_(std::move(baseUrl)), path_(std::move(path)), timeout_(timeout) {}

std::optional<GeocodeResult> HttpGeocoder::geocode(const std::string& street,
                                                   const std::string& number,
                                                   const std::string& municipality) {
  httplib::Client client(baseUrl_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  httplib::Params params{{"street", street}, {"number", number}, {"municipality", municipality}};
  auto res = client.Get(path_, params, httplib::Headers{});
  if (!res) throw GeocoderError("geocoder unreachable: " + httplib::to_string(res.error()));
  if (res->status == 404) return std::nullopt;
  if (res->status == 429) throw GeocoderError("geocoder quota exhausted");
  if (res->status != 200) throw GeocoderError("geocoder status " + std::to_string(res->status));
  try {
    auto j = nlohmann::json::parse(res->body);
    GeocodeResult r;
    r.street = j.at("street").get<std::string>();
    r.point = {j.at("lat").get<double>(), j.at("lon").get<double>()};
    query::validatePoint(r.point);
    return r;
  } catch (const std::exception& e) {
    throw GeocoderError(std::string("malformed geocoder answer: ") + e.what());
  }
}

}  // namespace citykb::recon
