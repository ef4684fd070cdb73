#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "conehull/certify.hpp"
#include "conehull/orthant.hpp"
#include "conehull/poly.hpp"
#include "conehull/relax.hpp"

namespace conehull {

using Json = nlohmann::ordered_json;

struct ProblemOptions {
  int order = 2;
  double tol_eq = 1e-8;
  double tol_psd = 1e-7;
  std::uint64_t seed = 0;
  std::size_t max_y = 5000;
  std::vector<std::array<double, 2>> box;  // sampling window, empty means unset
};

struct ProblemFile {
  SemialgebraicSet set;
  ProblemOptions options;
  std::string comment;
};

// Problem files are JSON objects with polynomial values as strings in the
// parse grammar. The schema is strict: an unrecognized key anywhere is a
// ParseError, so typos never silently change a run.
ProblemFile parse_problem(const std::string& text);
ProblemFile load_problem(const std::string& path);

Json problem_json(const ProblemFile& p);
void save_problem(const ProblemFile& p, const std::string& path);

// FNV-1a over the canonical serialization; reports echo it so results can be
// matched to the exact input they were computed from.
std::uint64_t problem_hash(const ProblemFile& p);
std::string hash_hex(std::uint64_t h);

SolverSettings settings_from(const ProblemOptions& o);

// Report fragments. Key order is fixed by construction and doubles print in
// shortest round-trip form, so equal inputs give byte-equal documents.
Json verdict_json(const MembershipVerdict& v, bool include_witness = true);
Json support_json(const SupportResult& r);
Json certificate_json(const QModuleCertificate& c);
Json pointedness_json(const PointednessCertificate& c);
Json closedness_json(const ClosednessReport& r);
Json union_verdict_json(const UnionHullVerdict& v);

}  // namespace conehull
