#pragma once

// Experiment records and the deterministic report format. Wall-clock data is
// kept out of the report and written to a separate timing file.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "acbench/entropy.hpp"
#include "json.hpp"

namespace acbench {

enum class Provenance { kExact, kExhaustive, kMonteCarlo };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::kExact: return "exact";
    case Provenance::kExhaustive: return "exhaustive";
    case Provenance::kMonteCarlo: return "monte-carlo";
  }
  return "?";
}

// JSON has no infinities; they are written as strings.
inline nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_value(v);
}

struct ReportRecord {
  std::string id;
  std::string metric;
  double lo = 0.0, hi = 0.0;
  double bound = 0.0;
  std::string relation = "<=";  // value relation bound
  bool pass = false;
  Provenance provenance = Provenance::kExact;
  std::uint64_t trials = 0;
  double width = 0.0;
  std::vector<std::uint64_t> seeds;
  nlohmann::json detail = nlohmann::json::object();
  double runtime_s = 0.0;  // not part of the report

  nlohmann::json to_json() const {
    nlohmann::json prov{{"kind", to_string(provenance)}};
    if (provenance == Provenance::kMonteCarlo) {
      prov["trials"] = trials;
      prov["width"] = width;
      prov["confidence"] = 0.99;
    }
    return {{"id", id},
            {"metric", metric},
            {"value", {{"lo", json_number(lo)}, {"hi", json_number(hi)}}},
            {"bound", json_number(bound)},
            {"relation", relation},
            {"pass", pass},
            {"provenance", prov},
            {"seeds", seeds},
            {"detail", detail}};
  }
};

// lo/hi against a bound: "<=" uses hi (the conservative side), ">=" uses lo,
// "==" needs both within tol.
inline ReportRecord make_record(std::string id, std::string metric, double lo, double hi, std::string relation,
                                double bound, double tol, Provenance prov) {
  ReportRecord r;
  r.id = std::move(id);
  r.metric = std::move(metric);
  r.lo = lo;
  r.hi = hi;
  r.relation = std::move(relation);
  r.bound = bound;
  r.provenance = prov;
  if (r.relation == "<=") r.pass = hi <= bound + tol;
  else if (r.relation == ">=") r.pass = lo >= bound - tol;
  else if (r.relation == "==") r.pass = std::abs(lo - bound) <= tol && std::abs(hi - bound) <= tol;
  else throw RejectedInput("unknown relation " + r.relation);
  return r;
}

inline ReportRecord make_record(std::string id, std::string metric, double value, std::string relation, double bound,
                                double tol, Provenance prov) {
  return make_record(std::move(id), std::move(metric), value, value, std::move(relation), bound, tol, prov);
}

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + '"';
}

struct Report {
  std::vector<std::string> suites;
  nlohmann::json config = nlohmann::json::object();
  std::vector<ReportRecord> records;

  void sort() {
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  }
  bool pass() const {
    return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.pass; });
  }
  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.pass; }));
  }

  nlohmann::json records_json() const {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : records) a.push_back(r.to_json());
    return a;
  }

  // Hash of the canonical record array together with the config.
  std::string determinism_hash() const {
    return hex64(fnv1a64(nlohmann::json{{"config", config}, {"records", records_json()}}.dump()));
  }

  nlohmann::json to_json() const {
    return {{"suites", suites},
            {"config", config},
            {"pass", pass()},
            {"failures", failures()},
            {"determinism_hash", determinism_hash()},
            {"records", records_json()}};
  }

  nlohmann::json timing_json() const {
    nlohmann::json t = nlohmann::json::object();
    for (const auto& r : records) t[r.id] = r.runtime_s;
    return t;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "id,metric,lo,hi,relation,bound,pass,provenance,trials,width,seeds\n";
    for (const auto& r : records) {
      std::string seeds;
      for (std::size_t i = 0; i < r.seeds.size(); ++i) seeds += (i ? ";" : "") + std::to_string(r.seeds[i]);
      os << csv_field(r.id) << ',' << csv_field(r.metric) << ',' << format_value(r.lo) << ',' << format_value(r.hi) << ','
         << r.relation << ',' << format_value(r.bound) << ',' << (r.pass ? "pass" : "fail") << ','
         << to_string(r.provenance) << ',' << r.trials << ',' << format_value(r.width) << ',' << seeds << '\n';
    }
    return os.str();
  }
};

}  // namespace acbench
