#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "stppu/stppu_control.hpp"

namespace stppu {

struct SearchBounds {
  TimeUnit horizon = 12;
  std::uint64_t max_states = 1000000;
};

struct Inconclusive {};

using SituationsResult = std::variant<std::vector<Situation>, Inconclusive>;

// Full integer grid product over the contingent links.
SituationsResult enumerate_situations(const STPU& u, const SearchBounds& b);
SituationsResult enumerate_situations(const STPPU& p, const SearchBounds& b);

using ProjectionOpt = std::variant<Level, Inconsistent>;

// Optimal preference of the projection`s STPP: requirement constraints
// unchanged, contingent links pinned to their duration at the duration's
// own preference.
ProjectionOpt projection_opt(const STPPU& p, const Situation& omega);

enum class OracleKind { optimal, at_level, none, inconclusive };

struct OracleVerdict {
  OracleKind kind = OracleKind::none;
  Level level = -1;

  bool operator==(const OracleVerdict& o) const {
    return kind == o.kind && level == o.level;
  }
};

// Exhaustive search over fixed control sequences: a sequence certifies
// level a iff in every situation it yields a solution that is optimal
// when the projection's optimum is <= a and of preference >= a
// otherwise. Returns the best certified level.
OracleVerdict oracle_sc_level(const STPPU& p, const SearchBounds& b);

// AND-OR search over execution timelines: nature branches over the
// occurrences still possible at each instant, the executor over which
// pending executables to fire, with occurrences at an instant visible to
// the decisions at that instant. Memoized on (clock, assignments).
OracleVerdict oracle_dc_level(const STPPU& p, const SearchBounds& b);

// Every enumerated situation's projection is consistent.
std::variant<bool, Inconclusive> oracle_wc(const STPPU& p,
                                           const SearchBounds& b);

}  // namespace stppu
