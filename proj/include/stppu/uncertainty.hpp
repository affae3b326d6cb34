#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stppu/temporal_core.hpp"

namespace stppu {

// Contingent link: Nature picks (point - activation) inside bounds.
struct ContingentLink {
  int activation = 0;  // executable time-point
  int point = 0;       // contingent time-point, unique per link
  Interval bounds;
};

// Simple Temporal Problem with Uncertainty.
struct STPU {
  int n = 0;
  std::vector<std::string> names;
  std::vector<bool> contingent;  // per time-point
  std::map<std::pair<int, int>, Interval> requirements;  // from < to
  std::vector<ContingentLink> links;  // sorted by contingent point

  bool is_contingent(int i) const { return contingent[size_t(i)]; }
  const ContingentLink* link_for(int point) const;
  std::vector<int> executables() const;
  std::vector<int> contingents() const;
  void add_requirement(int from, int to, Interval iv);
  std::optional<Interval> requirement(int from, int to) const;
  // The STPU viewed as a plain STP (links become requirement intervals).
  STP as_stp() const;
  // Structural checks: origin executable, one link per contingent point,
  // link activations executable. Throws std::invalid_argument.
  void validate() const;

  std::string name_of(int i) const {
    return i < int(names.size()) && !names[size_t(i)].empty()
               ? names[size_t(i)]
               : "X" + std::to_string(i);
  }
};

struct Situation {
  std::map<int, TimeUnit> durations;  // contingent point -> duration

  TimeUnit at(int point) const { return durations.at(point); }
};

// Replaces each contingent link with the singleton of its duration in
// omega. Throws std::invalid_argument on missing or out-of-bounds
// durations.
STP project(const STPU& u, const Situation& omega);

// Strong controllability: rewrite onto the executables and minimize.
struct MinimalExecutableSTP {
  STP stp;                        // dense over the executables
  std::vector<int> point_of;      // dense index -> original point
  std::map<int, int> index_of;    // original point -> dense index
};

struct NotSC {
  std::string reason;
};

using StrongResult = std::variant<MinimalExecutableSTP, NotSC>;

StrongResult check_strong(const STPU& u);

enum class PseudoResult { controllable, squeezed, inconsistent };

// Minimal-network form of the STPU viewed as an STP: requirement edges
// become the closure intervals, links keep their (possibly squeezed)
// minimal intervals. Nullopt when inconsistent.
std::optional<STPU> path_consistent(const STPU& u);

// Pseudo-controllability: the minimal network leaves every contingent
// link interval unchanged.
PseudoResult check_pseudo(const STPU& u);

// Weak controllability, decided on the corner situations: every cycle
// weight is linear in the durations, so a negative cycle over the
// duration box is witnessed at one of its vertices.
bool check_weak(const STPU& u);

// Waits, keyed (anchor, target) -> contingent point -> wait value.
// target is executable in the final annotation; anchor is the
// activation point of the contingent link the wait refers to.
using WaitMap = std::map<std::pair<int, int>, std::map<int, TimeUnit>>;

struct AnnotatedSTPU {
  STPU network;  // requirements hold the complete minimal intervals
  WaitMap waits;

  TimeUnit effective_wait(int anchor, int target) const;
};

struct NotDC {
  std::string reason;
};

using DynamicResult = std::variant<AnnotatedSTPU, NotDC>;

// Constraint-graph fixpoint: precede tightenings, unordered waits, wait
// regression across requirement and contingent edges, unconditional
// wait-to-lower-bound conversion and the general unordered reduction,
// iterated with reclosure until nothing tightens. Fails when a
// requirement interval empties or a contingent link is squeezed.
DynamicResult check_dynamic(const STPU& u);

enum class NatureMode { scripted, random, adversarial };

struct NatureModel {
  NatureMode mode = NatureMode::scripted;
  Situation scripted;
  std::uint64_t seed = 0;
  TimeUnit horizon = 1 << 20;
};

struct ExecutionResult {
  Schedule schedule;
  Situation situation;
  std::vector<std::string> trace;
};

struct ExecutionFailure {
  std::string reason;
  std::vector<std::string> trace;
};

using ExecuteResult = std::variant<ExecutionResult, ExecutionFailure>;

// Dispatches a DC-approved network against Nature on an integer clock.
// A point executes as soon as it is live, enabled and all its waits are
// satisfied; ties break in ascending point order. Fails only when
// nature steps outside its link bounds (or the input was not DC).
ExecuteResult dc_execute(const AnnotatedSTPU& a, const NatureModel& nature);

// Resolves a NatureModel to concrete situations for simulation.
Situation draw_situation(const STPU& u, std::uint64_t seed);

}  // namespace stppu
