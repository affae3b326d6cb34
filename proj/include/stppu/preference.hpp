#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "stppu/temporal_core.hpp"

namespace stppu {

// Preference level k on a grid with denominator `denom`, read as k/denom.
// Level comparisons are plain integer comparisons.
using Level = int;

struct PreferenceGrid {
  int denom = 10;

  Level top() const { return denom; }
  bool valid(Level k) const { return 0 <= k && k <= denom; }
};

// Integer step function over a bounded interval: the value at x is the
// level of the greatest step at or below x. The first step sits at
// domain.lo. Semi-convexity (every upper level set contiguous) is a
// separate validation, not enforced by the representation.
struct SemiConvexFn {
  Interval domain;
  std::vector<std::pair<TimeUnit, Level>> steps;  // sorted by offset

  static SemiConvexFn constant(Interval dom, Level level) {
    SemiConvexFn f;
    f.domain = dom;
    f.steps = {{dom.lo, level}};
    return f;
  }

  bool well_formed() const;
  Level eval(TimeUnit x) const;  // throws std::out_of_range outside domain
  Level min_level() const;
  Level max_level() const;
  // Restriction to a subinterval of the domain (pointwise equal there).
  SemiConvexFn restrict(Interval sub) const;

  bool operator==(const SemiConvexFn& o) const {
    return domain == o.domain && steps == o.steps;
  }
};

struct SemiConvexViolation {
  Level level = 0;     // first level whose upper level set splits
  TimeUnit gap = 0;    // an offset inside the gap
};

// ok (nullopt) iff every upper level set is a contiguous integer range.
std::optional<SemiConvexViolation> validate_semiconvex(const SemiConvexFn& f);

// {x in domain : f(x) >= alpha}, contiguous for validated functions.
// nullopt when the set is empty.
std::optional<Interval> alpha_cut(const SemiConvexFn& f, Level alpha);

enum class ConstraintKind { requirement, contingent };

struct SoftConstraint {
  int from = 0;
  int to = 0;
  SemiConvexFn pref;
  ConstraintKind kind = ConstraintKind::requirement;

  const Interval& interval() const { return pref.domain; }
};

// Simple Temporal Problem with Preferences (requirement constraints only).
struct STPP {
  int n = 0;
  std::vector<std::string> names;
  PreferenceGrid grid;
  std::vector<SoftConstraint> constraints;
};

// Lowest on-grid preference value used by any constraint; grid top for a
// problem with no constraints.
Level alpha_min(const STPP& p);

// Hard STP keeping only offsets with preference >= alpha on every
// constraint; nullopt when some cut vanishes.
std::optional<STP> cut_problem(const STPP& p, Level alpha);

struct ConstraintViolation {
  int constraint_index = 0;
};

using PreferenceResult = std::variant<Level, ConstraintViolation>;

// min over all constraints of the local preference; Violation when some
// projection falls outside its interval.
PreferenceResult schedule_preference(const Schedule& s, const STPP& p);

struct StppSolution {
  Level opt = 0;
  STP minimal_at_opt;
};

struct Inconsistent {};

using StppResult = std::variant<StppSolution, Inconsistent>;

// Highest level whose cut is consistent, found by binary search (cut
// consistency is monotone in the level), plus the minimal network of the
// cut at that level.
StppResult solve_stpp(const STPP& p);

}  // namespace stppu
