#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stppu/preference.hpp"
#include "stppu/temporal_core.hpp"
#include "stppu/uncertainty.hpp"

namespace stppu {

struct SoftLink {
  int activation = 0;
  int point = 0;
  SemiConvexFn pref;

  const Interval& interval() const { return pref.domain; }
};

// Simple Temporal Problem with Preferences and Uncertainty.
struct STPPU {
  int n = 0;
  std::vector<std::string> names;
  std::vector<bool> contingent;
  PreferenceGrid grid;
  std::vector<SoftConstraint> constraints;  // requirement kind
  std::vector<SoftLink> links;

  bool is_contingent(int i) const { return contingent[size_t(i)]; }
  std::string name_of(int i) const {
    return i < int(names.size()) && !names[size_t(i)].empty()
               ? names[size_t(i)]
               : "X" + std::to_string(i);
  }
  // Uncertainty ignored: every constraint, links included, becomes a
  // soft requirement constraint.
  STPP as_stpp() const;
  // Preferences ignored: the underlying hard STPU.
  STPU hard_view() const;
  void validate() const;
};

Level alpha_min(const STPPU& p);

// STPU keeping only offsets of preference >= alpha on every constraint;
// nullopt when some cut vanishes.
std::optional<STPU> cut_problem(const STPPU& p, Level alpha);

// min over all constraints and links of the local preference.
PreferenceResult schedule_preference(const Schedule& s, const STPPU& p);

enum class ControlProperty { sc, dc, wc };
enum class VerdictKind { optimal, at_level, none };

// Loop exit events of the level-scanning checkers.
enum class StopEvent {
  none,
  e1_uncontrollable_at_alpha_min,
  e2_cut_inconsistent,
  e3_level_uncontrollable,
  e4_combine_failed,  // intersection (SC) or merge (DC) failure
};

// Per-level dynamic results of Best-DC: T^alpha and the cumulative
// merged networks P^alpha, for alpha_min <= alpha <= top.
struct MergedFamily {
  Level alpha_min = 0;
  Level top = 0;
  std::vector<AnnotatedSTPU> per_level;
  std::vector<AnnotatedSTPU> merged;

  const AnnotatedSTPU& merged_at(Level a) const;
  const AnnotatedSTPU& level_at(Level a) const;
};

struct ResultingSTPPU {
  STPPU restricted;   // merged intervals, original preferences restored
  STPPU original;
  MergedFamily family;
  Level guaranteed = 0;
  bool optimal = false;
};

struct ScWitness {
  MinimalExecutableSTP network;
  Schedule earliest;
  Schedule latest;
};

struct ControllabilityReport {
  ControlProperty property = ControlProperty::sc;
  VerdictKind verdict = VerdictKind::none;
  Level level = -1;  // certified level; the opt level when optimal
  PreferenceGrid grid;
  StopEvent stop = StopEvent::none;
  std::optional<ScWitness> sc_witness;
  std::shared_ptr<ResultingSTPPU> dc_witness;
  bool wc = false;
};

// Highest alpha with a strongly controllable alpha-cut whose executable
// networks intersect across all lower levels.
ControllabilityReport best_sc(const STPPU& p);

// Preference functions stripped, then plain weak controllability.
bool owc_check(const STPPU& p);

struct MergeFailed {
  int from = 0, to = 0;
};

using MergeResult = std::variant<AnnotatedSTPU, MergeFailed>;

// Per-edge combination of the cumulative network with the next level's
// dynamic result. Edges that must follow a contingent point keep the
// lower network's version (or the higher one's when keep_higher_on_follow
// is set); precede edges intersect; edges with a live wait take the
// minimum upper bound and the maximum wait.
MergeResult merge(const AnnotatedSTPU& lower, const AnnotatedSTPU& higher,
                  bool keep_higher_on_follow = false);

// Highest alpha whose cuts are all dynamically controllable and whose
// per-level results merge.
ControllabilityReport best_dc(const STPPU& p);

ResultingSTPPU resulting_stppu(const STPPU& p, const MergedFamily& family,
                               bool optimal);

struct OdcOutcome {
  Schedule schedule;
  Situation situation;
  Level achieved = 0;
  std::vector<std::string> trace;
};

using OdcResult = std::variant<OdcOutcome, ExecutionFailure>;

// Dispatches against Nature while tracking the guaranteed level: each
// observation or execution projects constraints, the guaranteed level is
// the minimum projected preference, and dispatch follows the merged
// network at that level with offsets below it pruned once a neighbour is
// fixed.
OdcResult odc_execute(const ResultingSTPPU& r, const NatureModel& nature);

}  // namespace stppu
