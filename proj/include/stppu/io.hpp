#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "stppu/oracle.hpp"
#include "stppu/stppu_control.hpp"

namespace stppu {

struct ParseError {
  int line = 0;  // 1-based; 0 for document-level errors
  std::string reason;
};

using ParseProblemResult = std::variant<STPPU, ParseError>;
using ParseNatureResult = std::variant<Situation, ParseError>;

// Line-oriented format, `#` comments:
//   stppu-v1
//   granularity <denom>
//   timepoint <name> executable|contingent
//   constraint req|ctg <from> <to> [<lo>,<hi>] pref <x1>:<k1> <x2>:<k2> ...
// The first declared time-point is the origin and must be executable.
ParseProblemResult parse_problem(const std::string& text);

std::string serialize_problem(const STPPU& p);

// Lines `observe <contingent-name> <duration>`; the situation must be
// total and within the link bounds.
ParseNatureResult parse_nature(const std::string& text, const STPPU& problem);

std::string serialize_nature(const Situation& s, const STPPU& problem);

struct GenSpec {
  int n = 4;
  int contingent_count = 1;
  int density_percent = 40;  // chance of an extra cross constraint
  TimeUnit span = 5;
  int denom = 10;
  std::uint64_t seed = 0;
};

// Deterministic given the spec; preference functions are built around a
// peak with non-increasing steps outward, so they are semi-convex by
// construction, and every point is anchored to the origin.
STPPU gen_random(const GenSpec& spec);

// Fixed-key-order JSON document for a controllability report.
std::string report_to_json(const ControllabilityReport& rep,
                           const STPPU& problem, bool with_timings = false,
                           double total_ms = 0.0);

std::string oracle_verdict_to_json(const OracleVerdict& v,
                                   const PreferenceGrid& grid,
                                   const std::string& property);

}  // namespace stppu
