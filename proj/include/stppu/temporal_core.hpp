#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace stppu {

using TimeUnit = std::int64_t;

// Sentinel for absent bounds. Kept well below the int64 limit so that
// saturating sums of a few sentinels cannot wrap.
inline constexpr TimeUnit kInf = INT64_C(1) << 40;

// Addition that saturates at +/- kInf.
TimeUnit sat_add(TimeUnit a, TimeUnit b);

struct TimePointId {
  int index = 0;
  std::string name;
};

// Closed integer interval [lo, hi]. An absent bound is +/- kInf.
// lo > hi encodes the empty interval; most constructors in this library
// produce non-empty intervals, but emptiness can arise from intersection
// and is surfaced by the consumers (shortest paths, cuts, merge).
struct Interval {
  TimeUnit lo = -kInf;
  TimeUnit hi = kInf;

  Interval() = default;
  Interval(TimeUnit lo_, TimeUnit hi_) : lo(lo_), hi(hi_) {}

  static Interval unbounded() { return Interval(); }

  bool empty() const { return lo > hi; }
  bool contains(TimeUnit x) const { return lo <= x && x <= hi; }
  bool bounded() const { return lo > -kInf && hi < kInf; }

  Interval intersect(const Interval& o) const {
    return Interval(lo > o.lo ? lo : o.lo, hi < o.hi ? hi : o.hi);
  }
  // Interval of -x for x in this.
  Interval negate() const { return Interval(-hi, -lo); }

  bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
  bool operator!=(const Interval& o) const { return !(*this == o); }
};

std::string to_string(const Interval& iv);

// Simple Temporal Problem: difference constraints X_j - X_i in [lo, hi].
// One interval per unordered pair, stored with from < to; adding a
// constraint on an existing pair intersects with it.
struct STP {
  int n = 0;
  std::map<std::pair<int, int>, Interval> constraints;

  STP() = default;
  explicit STP(int n_) : n(n_) {}

  // Constraint "to - from in iv". Throws std::invalid_argument on
  // self-loops or out-of-range indices.
  void add(int from, int to, Interval iv);
  // Oriented view of the constraint on (from, to), if any.
  std::optional<Interval> get(int from, int to) const;

  bool operator==(const STP& o) const {
    return n == o.n && constraints == o.constraints;
  }
};

struct DistanceMatrix {
  int n = 0;
  std::vector<TimeUnit> d;  // row-major, d[i*n+j] = shortest path i -> j

  explicit DistanceMatrix(int n_ = 0) : n(n_), d(size_t(n_) * n_, kInf) {}
  TimeUnit& at(int i, int j) { return d[size_t(i) * n + j]; }
  TimeUnit at(int i, int j) const { return d[size_t(i) * n + j]; }
  // Minimal interval for X_j - X_i implied by the closure.
  Interval interval(int i, int j) const {
    return Interval(-at(j, i), at(i, j));
  }
};

struct NegativeCycle {
  std::vector<int> cycle;  // point indices; cycle.front() == cycle.back()
};

struct Schedule {
  std::map<int, TimeUnit> values;

  TimeUnit at(int i) const { return values.at(i); }
  bool assigned(int i) const { return values.count(i) != 0; }
};

using CloseResult = std::variant<DistanceMatrix, NegativeCycle>;
using MinimalResult = std::variant<STP, NegativeCycle>;

// All-pairs shortest paths over the distance graph (Floyd-Warshall).
// Consistency is equivalent to the absence of a negative cycle; on
// failure the witness cycle is returned.
CloseResult close_distances(const STP& stp);

// The minimal network: every pair constrained by [-d_ji, d_ij].
// Idempotent and solution-preserving.
MinimalResult minimal_network(const STP& stp);

bool is_minimal(const STP& stp);

// Earliest/latest solutions of a consistent minimal network. Throw
// std::invalid_argument if the input is not minimal.
Schedule earliest_solution(const STP& minimal);
Schedule latest_solution(const STP& minimal);

struct EmptyIntersection {
  int from = 0, to = 0;  // first pair whose intersection vanished
};

using IntersectResult = std::variant<STP, EmptyIntersection>;

// Pairwise interval intersection of two STPs over the same variables.
// Throws std::invalid_argument if the variable counts differ.
IntersectResult intersect(const STP& p1, const STP& p2);

// True iff every constraint interval contains the induced difference.
// The schedule must assign every variable of the problem.
bool satisfies(const Schedule& s, const STP& stp);

}  // namespace stppu
