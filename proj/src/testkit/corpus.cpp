#include "citykb/testkit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "citykb/quadstore/nquads.hpp"
#include "citykb/reconciliation/address.hpp"
#include "citykb/schema/catalog.hpp"
#include "citykb/schema/vocab.hpp"

namespace citykb::testkit {
namespace {

using rdf::Quad;
using rdf::Term;

const std::vector<std::string> kMunicipalities = {
    "FIRENZE", "PRATO", "PISTOIA", "EMPOLI", "SCANDICCI", "SESTO FIORENTINO", "FIESOLE",
    "BAGNO A RIPOLI", "IMPRUNETA", "LASTRA A SIGNA", "SIGNA", "CAMPI BISENZIO", "CALENZANO",
    "VICCHIO", "DICOMANO", "BORGO SAN LORENZO", "SCARPERIA", "BARBERINO", "REGGELLO",
    "PONTASSIEVE", "RUFINA", "FIGLINE", "INCISA", "GREVE", "CERTALDO", "GAMBASSI",
    "MONTAIONE", "CASTELFIORENTINO", "FUCECCHIO", "VINCI", "CERRETO GUIDI", "MONTELUPO",
    "CAPRAIA", "SAN CASCIANO", "TAVARNELLE", "MARRADI", "PALAZZUOLO", "FIRENZUOLA", "LONDA",
    "SAN GODENZO"};
const std::vector<std::string> kAliasSuffixes = {"DEL MUGELLO", "IN CHIANTI", "VAL D ARNO",
                                                 "VAL DI PESA", "IN VALDELSA"};
const std::vector<std::string> kFirstNames = {
    "FRANCESCO", "GIUSEPPE", "LUIGI", "CARLO", "ALESSANDRO", "PIETRO", "GIACOMO", "UGO",
    "NICCOLO", "LORENZO", "COSIMO", "FILIPPO", "GALILEO", "LEONARDO", "SANDRO", "ANTONIO",
    "BENEDETTO", "CESARE", "DOMENICO", "ENRICO", "FEDERICO", "GABRIELE", "MARIO", "PAOLO",
    "RAFFAELLO", "SILVIO", "TOMMASO", "VASCO", "ALDO", "BRUNO", "DINO", "ELIO", "GINO",
    "IACOPO", "MATTEO", "OTTAVIO", "RENATO", "SERGIO", "TITO", "VITO"};
const std::vector<std::string> kSurnames = {
    "PETRARCA", "ALIGHIERI", "BOCCACCIO", "MACHIAVELLI", "GUICCIARDINI", "BRUNELLESCHI",
    "GHIBERTI", "DONATELLO", "VERROCCHIO", "BOTTICELLI", "CIMABUE", "GIOTTO", "MASACCIO",
    "VASARI", "CELLINI", "FOSCOLO", "CARDUCCI", "PASCOLI", "MANZONI", "LEOPARDI", "MAZZINI",
    "GARIBALDI", "CAVOUR", "VERDI", "PUCCINI", "ROSSINI", "BELLINI", "DONIZETTI", "MEUCCI",
    "FERMI", "VOLTA", "GALVANI", "MARCONI", "COLLODI", "PALAZZESCHI", "PRATOLINI", "BILENCHI",
    "LUZI", "CAMPANA", "TOZZI", "PAPINI", "SOFFICI", "FATTORI", "LEGA", "SIGNORINI", "ROSAI",
    "MICHELUCCI", "NERVI", "MAGLIABECHI", "RICASOLI"};
const std::vector<std::string> kPlaces = {
    "PIAZZA SANTA CROCE",  "VIA SANTA REPARATA", "PIAZZA SANTA TRINITA",
    "VIA SANTA MONACA",    "VIA DELLA VIGNA NUOVA", "VIA DEI SERVI",
    "VIA DELLE BELLE DONNE", "VIA DEL PROCONSOLO", "VIA DEI CALZAIUOLI",
    "VIA DEL PARIONE",     "VIA DELLA SCALA",   "VIA DEI BARDI"};
const std::vector<std::string> kRoman = {"VIA PAPA GIOVANNI XXIII", "CORSO VITTORIO EMANUELE II",
                                         "VIA PIO IX"};
const std::string kAmbiguousName = "VIA DEL PONTE";
const std::vector<std::string> kPersonQualifiers = {"VIA", "VIA", "VIA", "VIALE",
                                                    "CORSO", "LARGO", "PIAZZA"};

enum class RoadKind { Person, Place, Roman, Duplicate };

struct GenNumber {
  int n = 0;
  std::string exponent;
  bool red = false;
  std::string entry;

  std::string field() const {
    std::string s = std::to_string(n);
    if (!exponent.empty()) s += "/" + exponent;
    if (red) s += "/R";
    return s;
  }
};

struct GenRoad {
  std::string iri;
  std::string official;
  std::string alternative;
  RoadKind kind = RoadKind::Place;
  std::string first, last;  // person roads
  std::vector<GenNumber> numbers;
};

struct GenMuni {
  std::string name, code, alias, iri;
  std::vector<GenRoad> roads;
  std::set<std::string> vocabulary;  // every word of every road name
};

std::string pad(std::size_t v, int width) {
  std::ostringstream os;
  os << std::setw(width) << std::setfill('0') << v;
  return os.str();
}

std::string decimal(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

std::vector<std::string> splitWords(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string join(const std::vector<std::string>& w) {
  std::string out;
  for (const auto& x : w) out += (out.empty() ? "" : " ") + x;
  return out;
}

std::string titleCase(const std::string& s) {
  std::string out = s;
  bool start = true;
  for (auto& c : out) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      if (!start) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      start = false;
    } else {
      start = true;
    }
  }
  return out;
}

template <typename T>
const T& pick(std::mt19937& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

class Builder {
 public:
  explicit Builder(std::string base) : base_(std::move(base)) {}

  Term res(const std::string& path) const { return Term::iri(base_ + "/" + path); }
  void add(const Term& s, std::string_view p, Term o) {
    quads.push_back(Quad{s, Term::iri(std::string(p)), std::move(o),
                         rdf::GraphId{std::string(kStreetGuideDataset), 1}});
  }
  void type(const Term& s, std::string_view cls) { add(s, vocab::rdf::type, Term::iri(std::string(cls))); }
  void lit(const Term& s, std::string_view p, std::string v) { add(s, p, Term::literal(std::move(v))); }
  void point(const Term& s, double lat, double lon) {
    add(s, vocab::geo::lat, Term::literal(decimal(lat), std::string(vocab::xsd::decimal)));
    add(s, vocab::geo::lon, Term::literal(decimal(lon), std::string(vocab::xsd::decimal)));
  }

  std::vector<Quad> quads;

 private:
  std::string base_;
};

std::vector<std::size_t> apportion(const CorpusSpec& spec) {
  const auto& classes = mixableClasses();
  std::vector<std::size_t> counts(classes.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    auto it = spec.corruptionMix.find(classes[i]);
    double share = it == spec.corruptionMix.end() ? 0.0 : it->second * spec.services;
    counts[i] = static_cast<std::size_t>(std::floor(share + 1e-9));
    assigned += counts[i];
    remainders.emplace_back(-(share - counts[i]), i);
  }
  std::sort(remainders.begin(), remainders.end());
  for (std::size_t k = 0; assigned < spec.services; ++k, ++assigned) ++counts[remainders[k].second];
  return counts;
}

std::string typoOf(std::mt19937& rng, const std::string& word, const std::set<std::string>& avoid) {
  static const std::string letters = "ABCDEFGHILMNOPRSTUVZ";
  std::uniform_int_distribution<int> kind(0, 3);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::string w = word;
    std::size_t pos = std::uniform_int_distribution<std::size_t>(0, w.size() - 1)(rng);
    char c = pick(rng, std::vector<char>(letters.begin(), letters.end()));
    switch (kind(rng)) {
      case 0: w[pos] = c; break;
      case 1: if (w.size() > 3) w.erase(pos, 1); break;
      case 2: w.insert(pos, 1, c); break;
      case 3: if (pos + 1 < w.size()) std::swap(w[pos], w[pos + 1]); break;
    }
    if (w != word && !avoid.count(w)) return w;
  }
  return word + "X";
}

}  // namespace

std::string_view corruptionName(Corruption c) {
  switch (c) {
    case Corruption::Clean: return "clean";
    case Corruption::QualifierVariant: return "qualifier-variant";
    case Corruption::WordSwap: return "word-swap";
    case Corruption::StrangeChars: return "strange-chars";
    case Corruption::MunicipalityAlias: return "municipality-alias";
    case Corruption::Typo: return "typo";
    case Corruption::MissingNumber: return "missing-number";
    case Corruption::Snc: return "snc";
    case Corruption::RedNumber: return "red-number";
    case Corruption::RomanNumeral: return "roman-numeral";
    case Corruption::Ambiguous: return "ambiguous";
    case Corruption::Orphan: return "orphan";
  }
  return "clean";
}

std::optional<Corruption> parseCorruption(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(Corruption::Orphan); ++i)
    if (corruptionName(static_cast<Corruption>(i)) == name) return static_cast<Corruption>(i);
  return std::nullopt;
}

const std::vector<Corruption>& mixableClasses() {
  static const std::vector<Corruption> v = {
      Corruption::Clean,        Corruption::QualifierVariant, Corruption::WordSwap,
      Corruption::StrangeChars, Corruption::MunicipalityAlias, Corruption::Typo,
      Corruption::MissingNumber, Corruption::Snc,             Corruption::RedNumber,
      Corruption::RomanNumeral};
  return v;
}

void CorpusSpec::validate() const {
  double sum = 0;
  for (const auto& [c, f] : corruptionMix) {
    if (c == Corruption::Ambiguous || c == Corruption::Orphan)
      throw std::invalid_argument("corruptionMix: " + std::string(corruptionName(c)) +
                                  " is planted by count, not by fraction");
    if (f < 0) throw std::invalid_argument("corruptionMix: negative fraction");
    sum += f;
  }
  if (services > 0 && std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("corruptionMix fractions sum to " + std::to_string(sum));
  if (municipalities == 0) throw std::invalid_argument("municipalities must be positive");
  if (roadsPerMunicipality < 8 || roadsPerMunicipality > 55)
    throw std::invalid_argument("roadsPerMunicipality must be within 8..55");
  if (entriesMin < 2 || entriesMax < entriesMin || entriesMax > 500)
    throw std::invalid_argument("entries range must satisfy 2 <= min <= max <= 500");
}

const std::map<Corruption, double>& defaultCorruptionMix() {
  static const std::map<Corruption, double> mix = {
      {Corruption::Clean, 0.28},         {Corruption::QualifierVariant, 0.05},
      {Corruption::WordSwap, 0.03},      {Corruption::StrangeChars, 0.03},
      {Corruption::MunicipalityAlias, 0.02}, {Corruption::RedNumber, 0.02},
      {Corruption::RomanNumeral, 0.01},  {Corruption::MissingNumber, 0.15},
      {Corruption::Snc, 0.12},           {Corruption::Typo, 0.29}};
  return mix;
}

CorpusSpec CorpusSpec::uniform(std::uint32_t seed, std::size_t perClass) {
  CorpusSpec s;
  s.seed = seed;
  s.services = perClass * mixableClasses().size();
  for (auto c : mixableClasses()) s.corruptionMix[c] = 1.0 / mixableClasses().size();
  return s;
}

CorpusSpec CorpusSpec::fromJson(const nlohmann::json& j) {
  CorpusSpec s;
  s.seed = j.value("seed", s.seed);
  s.municipalities = j.value("municipalities", s.municipalities);
  s.roadsPerMunicipality = j.value("roadsPerMunicipality", s.roadsPerMunicipality);
  if (j.contains("entriesPerRoad")) {
    s.entriesMin = j["entriesPerRoad"].at(0).get<std::size_t>();
    s.entriesMax = j["entriesPerRoad"].at(1).get<std::size_t>();
  }
  s.services = j.value("services", s.services);
  if (j.contains("corruptionMix")) {
    s.corruptionMix.clear();
    for (const auto& [k, v] : j["corruptionMix"].items()) {
      auto c = parseCorruption(k);
      if (!c) throw std::invalid_argument("unknown corruption class '" + k + "'");
      s.corruptionMix[*c] = v.get<double>();
    }
  }
  s.ambiguousServices = j.value("ambiguousServices", s.ambiguousServices);
  s.orphanServices = j.value("orphanServices", s.orphanServices);
  s.validate();
  return s;
}

nlohmann::json CorpusSpec::toJson() const {
  nlohmann::json mix = nlohmann::json::object();
  for (const auto& [c, f] : corruptionMix) mix[std::string(corruptionName(c))] = f;
  return {{"seed", seed},
          {"municipalities", municipalities},
          {"roadsPerMunicipality", roadsPerMunicipality},
          {"entriesPerRoad", {entriesMin, entriesMax}},
          {"services", services},
          {"corruptionMix", mix},
          {"ambiguousServices", ambiguousServices},
          {"orphanServices", orphanServices}};
}

mapping::IstatTable Corpus::istatTable() const {
  mapping::IstatTable t;
  for (const auto& [name, code] : municipalityCodes) t.add(name, code);
  for (const auto& [canonical, alias] : municipalityAliases) t.addAlias(alias, canonical);
  return t;
}

Corpus generateCorpus(const CorpusSpec& spec) {
  spec.validate();
  std::mt19937 rng(spec.seed);
  const std::string base(vocab::kResourceBase);
  Builder b(base);
  Corpus corpus;
  const auto qualifiers = recon::QualifierTable::defaults();

  auto region = b.res("PA/Regione");
  b.type(region, vocab::km4c::PA);
  b.lit(region, vocab::foaf::name, "REGIONE");

  std::vector<GenMuni> munis;
  for (std::size_t i = 0; i < spec.municipalities; ++i) {
    GenMuni m;
    m.name = i < kMunicipalities.size() ? kMunicipalities[i]
                                        : "COMUNE " + std::to_string(i + 1);
    m.code = "048" + pad(i + 1, 3);
    m.alias = m.name + " " + kAliasSuffixes[i % kAliasSuffixes.size()];
    m.iri = base + "/Municipality/" + m.code;
    corpus.municipalityCodes.emplace_back(m.name, m.code);
    corpus.municipalityAliases.emplace_back(m.name, m.alias);
    auto mt = Term::iri(m.iri);
    b.type(mt, vocab::km4c::Municipality);
    b.lit(mt, vocab::foaf::name, m.name);
    auto province = b.res("Province/P" + pad(i / 10, 2));
    if (i % 10 == 0) {
      b.type(province, vocab::km4c::Province);
      b.add(region, vocab::km4c::hasProvince, province);
    }

    // Road names: roman numerals, a duplicated pair, places, then persons.
    std::vector<GenRoad> roads;
    for (const auto& n : kRoman) roads.push_back({"", n, "", RoadKind::Roman, "", "", {}});
    roads.push_back({"", kAmbiguousName, "", RoadKind::Duplicate, "", "", {}});
    roads.push_back({"", kAmbiguousName, "", RoadKind::Duplicate, "", "", {}});
    auto places = kPlaces;
    std::shuffle(places.begin(), places.end(), rng);
    std::size_t placeCount = std::min<std::size_t>(places.size(), (spec.roadsPerMunicipality - 5) / 3);
    for (std::size_t k = 0; k < placeCount; ++k)
      roads.push_back({"", places[k], "", RoadKind::Place, "", "", {}});
    auto firsts = kFirstNames, lasts = kSurnames;
    std::shuffle(firsts.begin(), firsts.end(), rng);
    std::shuffle(lasts.begin(), lasts.end(), rng);
    for (std::size_t k = 0; roads.size() < spec.roadsPerMunicipality; ++k) {
      GenRoad r{"", "", "", RoadKind::Person, firsts[k], lasts[k], {}};
      r.official = pick(rng, kPersonQualifiers) + " " + r.first + " " + r.last;
      if (std::bernoulli_distribution(0.3)(rng)) r.alternative = "VIA " + r.last;
      roads.push_back(std::move(r));
    }

    double lat0 = 43.5 + static_cast<double>(i % 10) * 0.05;
    double lon0 = 11.0 + static_cast<double>(i / 10) * 0.05;
    for (std::size_t k = 0; k < roads.size(); ++k) {
      auto& r = roads[k];
      std::string id = m.code + "_" + pad(k, 3);
      r.iri = base + "/Road/" + id;
      auto rt = Term::iri(r.iri);
      b.type(rt, vocab::km4c::Road);
      b.lit(rt, vocab::km4c::extendName, r.official);
      if (!r.alternative.empty()) b.lit(rt, vocab::km4c::alternativeName, r.alternative);
      b.add(rt, vocab::km4c::inMunicipalityOf, mt);
      for (const auto& w : splitWords(r.official)) m.vocabulary.insert(w);
      for (const auto& w : splitWords(r.alternative)) m.vocabulary.insert(w);

      double rlat = lat0 + static_cast<double>(k) * 0.0011;
      double rlon = lon0 + static_cast<double>(k % 7) * 0.0013;
      auto element = b.res("RoadElement/" + id);
      auto na = b.res("Node/" + id + "_a"), nb = b.res("Node/" + id + "_b");
      b.type(element, vocab::km4c::RoadElement);
      b.add(rt, vocab::km4c::contains, element);
      b.add(element, vocab::km4c::starts, na);
      b.add(element, vocab::km4c::ends, nb);
      b.type(na, vocab::km4c::Node);
      b.type(nb, vocab::km4c::Node);
      b.point(na, rlat, rlon);
      b.point(nb, rlat + 0.0009, rlon);

      std::size_t n = std::uniform_int_distribution<std::size_t>(spec.entriesMin, spec.entriesMax)(rng);
      for (std::size_t v = 1; v <= n; ++v) r.numbers.push_back({static_cast<int>(v), "", false, ""});
      for (std::size_t v = 1; v <= std::max<std::size_t>(1, n / 2); ++v)
        r.numbers.push_back({static_cast<int>(v), "", true, ""});
      r.numbers.push_back({static_cast<int>(n + 1), "B", false, ""});
      for (std::size_t x = 0; x < r.numbers.size(); ++x) {
        auto& num = r.numbers[x];
        std::string nid = id + "_" + std::to_string(num.n) + num.exponent + (num.red ? "R" : "");
        auto sn = b.res("StreetNumber/" + nid);
        auto entry = b.res("Entry/" + nid);
        num.entry = entry.value();
        b.type(sn, vocab::km4c::StreetNumber);
        b.lit(sn, vocab::km4c::number, std::to_string(num.n));
        if (!num.exponent.empty()) b.lit(sn, vocab::km4c::exponent, num.exponent);
        b.lit(sn, vocab::km4c::classCode, num.red ? "Red" : "Black");
        b.add(sn, vocab::km4c::belongsTo, rt);
        b.add(sn, vocab::km4c::hasExternalAccess, entry);
        b.type(entry, vocab::km4c::Entry);
        b.point(entry, rlat + 0.00005 * static_cast<double>(x + 1), rlon + 0.00003 * (num.red ? 1 : -1));
      }
    }
    for (const auto& [canonical, variants] : qualifiers.entries()) {
      m.vocabulary.insert(canonical);
      m.vocabulary.insert(variants.begin(), variants.end());
    }
    m.roads = std::move(roads);
    munis.push_back(std::move(m));
  }
  corpus.streetGuide = std::move(b.quads);

  // Service classes in a seeded order.
  std::vector<Corruption> plan;
  auto counts = apportion(spec);
  for (std::size_t i = 0; i < counts.size(); ++i)
    plan.insert(plan.end(), counts[i], mixableClasses()[i]);
  std::shuffle(plan.begin(), plan.end(), rng);
  plan.insert(plan.end(), spec.ambiguousServices, Corruption::Ambiguous);
  plan.insert(plan.end(), spec.orphanServices, Corruption::Orphan);

  std::vector<std::string> categories;
  for (const auto& [cls, values] : schema::serviceCategoryValues())
    categories.insert(categories.end(), values.begin(), values.end());

  auto roadsOfKind = [](const GenMuni& m, std::initializer_list<RoadKind> kinds) {
    std::vector<const GenRoad*> out;
    for (const auto& r : m.roads)
      if (std::find(kinds.begin(), kinds.end(), r.kind) != kinds.end()) out.push_back(&r);
    return out;
  };
  auto numbersWhere = [](const GenRoad& r, auto pred) {
    std::vector<const GenNumber*> out;
    for (const auto& n : r.numbers)
      if (pred(n)) out.push_back(&n);
    return out;
  };

  std::set<std::string> usedOrphanWords;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    Corruption c = plan[i];
    const auto& m = munis[std::uniform_int_distribution<std::size_t>(0, munis.size() - 1)(rng)];
    std::string id = "S" + pad(i + 1, 6);
    std::string street, number, municipality = m.name, lat, lon;
    TruthEntry t;
    t.corruption = c;

    const GenRoad* road = nullptr;
    switch (c) {
      case Corruption::WordSwap: road = pick(rng, roadsOfKind(m, {RoadKind::Person})); break;
      case Corruption::RomanNumeral: road = pick(rng, roadsOfKind(m, {RoadKind::Roman})); break;
      case Corruption::Ambiguous:
      case Corruption::Orphan:
        road = roadsOfKind(m, {RoadKind::Duplicate}).front();
        break;
      default:
        road = pick(rng, roadsOfKind(m, {RoadKind::Person, RoadKind::Place, RoadKind::Roman}));
    }
    auto black = numbersWhere(*road, [](const GenNumber& n) { return !n.red && n.exponent.empty(); });
    const GenNumber* num = pick(rng, black);
    street = road->official;
    t.roadIri = road->iri;

    switch (c) {
      case Corruption::Clean:
        num = pick(rng, numbersWhere(*road, [](const GenNumber&) { return true; }));
        break;
      case Corruption::QualifierVariant: {
        auto words = splitWords(street);
        for (auto& w : words) {
          auto alts = qualifiers.alternatives(w);
          if (alts.size() > 1 && qualifiers.entries().count(w))
            w = pick(rng, std::vector<std::string>(alts.begin() + 1, alts.end()));
        }
        street = join(words);
        break;
      }
      case Corruption::WordSwap:
        street = splitWords(street).front() + " " + road->last + " " + road->first;
        break;
      case Corruption::StrangeChars: {
        auto withExp = numbersWhere(*road, [](const GenNumber& n) { return !n.exponent.empty(); });
        int style = std::uniform_int_distribution<int>(0, 4)(rng);
        if (style == 0) {
          num = withExp.front();
          number = std::to_string(num->n) + num->exponent;
        } else {
          static const char* const kWrap[][2] = {{"", "\xC2\xB0"}, {"(", ")"}, {"", "?"}, {"", ","}};
          number = std::string(kWrap[style - 1][0]) + std::to_string(num->n) + kWrap[style - 1][1];
          if (style == 2) {
            const GenRoad* other = pick(rng, roadsOfKind(m, {RoadKind::Person}));
            if (other->iri != road->iri) street += " ANG. " + other->official;
          }
        }
        break;
      }
      case Corruption::MunicipalityAlias:
        municipality = std::bernoulli_distribution(0.5)(rng) ? m.alias : titleCase(m.alias);
        break;
      case Corruption::Typo: {
        auto words = splitWords(street);
        words.back() = typoOf(rng, words.back(), m.vocabulary);
        street = join(words);
        break;
      }
      case Corruption::MissingNumber:
        num = nullptr;
        number = "";
        break;
      case Corruption::Snc:
        num = nullptr;
        number = std::bernoulli_distribution(0.5)(rng) ? "SNC" : "0";
        break;
      case Corruption::RedNumber:
        num = pick(rng, numbersWhere(*road, [](const GenNumber& n) { return n.red; }));
        break;
      case Corruption::RomanNumeral:
        street = titleCase(street);
        break;
      case Corruption::Ambiguous:
        // Both duplicates carry number 1.
        num = numbersWhere(*road, [](const GenNumber& n) { return n.n == 1 && !n.red; }).front();
        break;
      case Corruption::Orphan: {
        std::string word;
        do {
          word.clear();
          for (int k = 0; k < 9; ++k) word.push_back(static_cast<char>('A' + rng() % 26));
        } while (m.vocabulary.count(word) || !usedOrphanWords.insert(word).second);
        street = "STRADA " + word;
        number = "1";
        num = nullptr;
        t.roadIri.clear();
        lat = decimal(43.5 + std::uniform_real_distribution<double>(0, 0.5)(rng));
        lon = decimal(11.0 + std::uniform_real_distribution<double>(0, 0.5)(rng));
        break;
      }
    }
    if (num && number.empty()) number = num->field();
    switch (c) {
      case Corruption::MissingNumber:
      case Corruption::Snc: t.expectedLevel = recon::Level::Street; break;
      case Corruption::Ambiguous: t.expectedLevel = recon::Level::PendingReview; break;
      case Corruption::Orphan: t.expectedLevel = recon::Level::Unresolved; break;
      default: t.expectedLevel = recon::Level::StreetNumber;
    }
    if (num && t.expectedLevel == recon::Level::StreetNumber) t.entryIri = num->entry;

    ingest::RawRecord rec;
    rec.datasetId = std::string(kServicesDataset);
    rec.version = 1;
    rec.rowIndex = i;
    rec.fields = {{"id", id},           {"name", "Service " + id},
                  {"category", pick(rng, categories)}, {"street", street},
                  {"number", number},   {"municipality", municipality},
                  {"lat", lat},         {"lon", lon}};
    corpus.services.push_back(std::move(rec));
    corpus.truth[base + "/Service/" + id] = t;
  }
  return corpus;
}

void writeCorpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "streetguide.nq");
    rdf::writeNQuads(out, corpus.streetGuide);
  }
  {
    std::ofstream out(dir / "services.csv");
    auto cell = [](const std::string& v) {
      if (v.find_first_of(",\"\n") == std::string::npos) return v;
      std::string q = "\"";
      for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      return q + "\"";
    };
    bool header = true;
    for (const auto& r : corpus.services) {
      if (header) {
        for (std::size_t k = 0; k < r.fields.size(); ++k) out << (k ? "," : "") << r.fields[k].first;
        out << "\n";
        header = false;
      }
      for (std::size_t k = 0; k < r.fields.size(); ++k) out << (k ? "," : "") << cell(r.fields[k].second);
      out << "\n";
    }
  }
  {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [svc, t] : corpus.truth)
      j[svc] = {{"expectedLevel", recon::levelName(t.expectedLevel)},
                {"road", t.roadIri},
                {"entry", t.entryIri},
                {"corruption", corruptionName(t.corruption)}};
    std::ofstream(dir / "truth.json") << j.dump(1) << "\n";
  }
  {
    std::ofstream out(dir / "municipalities.csv");
    for (const auto& [n, c] : corpus.municipalityCodes) out << n << "," << c << "\n";
  }
  {
    std::ofstream out(dir / "aliases.csv");
    for (const auto& [c, a] : corpus.municipalityAliases) out << c << "," << a << "\n";
  }
}

GroundTruth readTruth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  auto j = nlohmann::json::parse(in);
  GroundTruth truth;
  for (const auto& [svc, t] : j.items()) {
    TruthEntry e;
    auto level = t.at("expectedLevel").get<std::string>();
    bool known = false;
    for (auto l : {recon::Level::StreetNumber, recon::Level::Street, recon::Level::PendingReview,
                   recon::Level::Unresolved})
      if (recon::levelName(l) == level) e.expectedLevel = l, known = true;
    auto c = parseCorruption(t.at("corruption").get<std::string>());
    if (!known || !c) throw std::runtime_error(path.string() + ": bad truth entry for " + svc);
    e.corruption = *c;
    e.roadIri = t.value("road", "");
    e.entryIri = t.value("entry", "");
    truth.emplace(svc, std::move(e));
  }
  return truth;
}

std::vector<mapping::CellError> loadCorpus(const Corpus& corpus,
                                           const mapping::CompiledMapping& services,
                                           rdf::QuadStore& store) {
  std::string guide(kStreetGuideDataset), svc(kServicesDataset);
  store.replaceGraph(guide, store.activeVersion(guide).value_or(0) + 1, corpus.streetGuide);
  auto mapped = services.apply(corpus.services);
  store.replaceGraph(svc, store.activeVersion(svc).value_or(0) + 1, mapped.quads);
  return mapped.errors;
}

double ScoreReport::recall(Corruption c, recon::Level level, int step) const {
  auto it = perClass.find(c);
  if (it == perClass.end() || it->second.attempted == 0) return 0;
  auto key = std::string(recon::levelName(level)) + "/" + std::to_string(step);
  auto s = it->second.byStep.find(key);
  std::size_t hits = s == it->second.byStep.end() ? 0 : s->second;
  return static_cast<double>(hits) / static_cast<double>(it->second.attempted);
}

ScoreReport scorePipeline(const std::vector<recon::ReconciliationOutcome>& outcomes,
                          const GroundTruth& truth) {
  ScoreReport r;
  std::set<std::string> seen;
  for (const auto& o : outcomes) {
    auto t = truth.find(o.serviceIri);
    if (t == truth.end()) continue;
    seen.insert(o.serviceIri);
    auto& cs = r.perClass[t->second.corruption];
    ++cs.attempted;
    auto key = std::string(recon::levelName(o.level)) + "/" + std::to_string(o.step);
    ++cs.byStep[key];
    ++r.perStep[key];
    bool wrong = false;
    switch (o.level) {
      case recon::Level::StreetNumber:
        ++cs.reconciledAtNumber;
        wrong = o.candidates.front().roadIri != t->second.roadIri ||
                o.candidates.front().entryIri.value_or("") != t->second.entryIri;
        break;
      case recon::Level::Street:
        ++cs.reconciledAtStreet;
        wrong = o.candidates.front().roadIri != t->second.roadIri;
        break;
      case recon::Level::PendingReview: ++cs.pendingReview; break;
      case recon::Level::Unresolved: ++cs.unresolved; break;
    }
    if (wrong) {
      ++cs.wrongLink;
      ++r.wrongLink;
    }
  }
  r.missingOutcomes = truth.size() - seen.size();
  return r;
}

nlohmann::json ScoreReport::toJson() const {
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [c, s] : perClass)
    classes[std::string(corruptionName(c))] = {{"attempted", s.attempted},
                                               {"reconciledAtNumber", s.reconciledAtNumber},
                                               {"reconciledAtStreet", s.reconciledAtStreet},
                                               {"pendingReview", s.pendingReview},
                                               {"unresolved", s.unresolved},
                                               {"wrongLink", s.wrongLink},
                                               {"byStep", s.byStep}};
  return {{"perClass", classes},
          {"perStep", perStep},
          {"wrongLink", wrongLink},
          {"missingOutcomes", missingOutcomes}};
}

std::string ScoreReport::table() const {
  std::ostringstream os;
  os << std::left << std::setw(20) << "class" << std::right << std::setw(10) << "attempted"
     << std::setw(9) << "number" << std::setw(9) << "street" << std::setw(9) << "pending"
     << std::setw(12) << "unresolved" << std::setw(7) << "wrong" << "\n";
  for (const auto& [c, s] : perClass)
    os << std::left << std::setw(20) << corruptionName(c) << std::right << std::setw(10)
       << s.attempted << std::setw(9) << s.reconciledAtNumber << std::setw(9)
       << s.reconciledAtStreet << std::setw(9) << s.pendingReview << std::setw(12)
       << s.unresolved << std::setw(7) << s.wrongLink << "\n";
  return os.str();
}

}  // namespace citykb::testkit
