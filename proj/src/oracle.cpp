#include "stppu/oracle.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace stppu {

namespace {

struct CapExceeded {};

std::uint64_t situation_count(const STPU& u) {
  std::uint64_t count = 1;
  for (const auto& l : u.links) {
    std::uint64_t width = std::uint64_t(l.bounds.hi - l.bounds.lo + 1);
    if (count > (std::uint64_t(1) << 60) / std::max<std::uint64_t>(width, 1))
      return std::uint64_t(1) << 60;
    count *= width;
  }
  return count;
}

}  // namespace

SituationsResult enumerate_situations(const STPU& u, const SearchBounds& b) {
  if (situation_count(u) > b.max_states) return Inconclusive{};
  std::vector<Situation> all{Situation{}};
  for (const auto& l : u.links) {
    std::vector<Situation> next;
    next.reserve(all.size() * size_t(l.bounds.hi - l.bounds.lo + 1));
    for (const auto& s : all)
      for (TimeUnit v = l.bounds.lo; v <= l.bounds.hi; ++v) {
        Situation s2 = s;
        s2.durations[l.point] = v;
        next.push_back(std::move(s2));
      }
    all = std::move(next);
  }
  return all;
}

SituationsResult enumerate_situations(const STPPU& p, const SearchBounds& b) {
  return enumerate_situations(p.hard_view(), b);
}

ProjectionOpt projection_opt(const STPPU& p, const Situation& omega) {
  STPP proj;
  proj.n = p.n;
  proj.names = p.names;
  proj.grid = p.grid;
  proj.constraints = p.constraints;
  for (const auto& l : p.links) {
    TimeUnit d = omega.at(l.point);
    if (!l.interval().contains(d))
      throw std::invalid_argument("duration outside contingent interval");
    Interval single(d, d);
    proj.constraints.push_back(
        SoftConstraint{l.activation, l.point,
                       SemiConvexFn::constant(single, l.pref.eval(d)),
                       ConstraintKind::contingent});
  }
  auto r = solve_stpp(proj);
  if (std::holds_alternative<Inconsistent>(r)) return Inconsistent{};
  return std::get<StppSolution>(r).opt;
}

namespace {

// Certified level of one schedule in one situation: -1 when it is not a
// solution, the grid top when it attains the projection optimum, its own
// preference otherwise.
Level leaf_value(const STPPU& p, const STPU& hard, const Schedule& s,
                 const Situation& omega, Level opt) {
  if (!satisfies(s, project(hard, omega))) return -1;
  auto pref = schedule_preference(s, p);
  if (std::holds_alternative<ConstraintViolation>(pref)) return -1;
  Level v = std::get<Level>(pref);
  return v == opt ? p.grid.top() : v;
}

OracleVerdict classify(const STPPU& p, Level best) {
  if (best < 0) return OracleVerdict{OracleKind::none, -1};
  auto stpp = solve_stpp(p.as_stpp());
  if (std::holds_alternative<Inconsistent>(stpp))
    return OracleVerdict{OracleKind::none, -1};
  Level opt = std::get<StppSolution>(stpp).opt;
  if (best >= opt) return OracleVerdict{OracleKind::optimal, opt};
  return OracleVerdict{OracleKind::at_level, best};
}

}  // namespace

OracleVerdict oracle_sc_level(const STPPU& p, const SearchBounds& b) {
  p.validate();
  STPU hard = p.hard_view();
  auto closed = close_distances(hard.as_stp());
  if (std::holds_alternative<NegativeCycle>(closed))
    return OracleVerdict{OracleKind::none, -1};
  const auto& d = std::get<DistanceMatrix>(closed);

  auto sits = enumerate_situations(hard, b);
  if (std::holds_alternative<Inconclusive>(sits))
    return OracleVerdict{OracleKind::inconclusive, -1};
  const auto& situations = std::get<std::vector<Situation>>(sits);
  std::vector<Level> opts;
  for (const auto& omega : situations) {
    auto o = projection_opt(p, omega);
    if (std::holds_alternative<Inconsistent>(o))
      return OracleVerdict{OracleKind::none, -1};
    opts.push_back(std::get<Level>(o));
  }

  std::vector<int> execs = hard.executables();
  std::vector<Interval> range;
  for (int e : execs) {
    Interval iv = d.interval(0, e);
    iv = iv.intersect(Interval(-b.horizon, b.horizon));
    if (e == 0) iv = Interval(0, 0);
    if (iv.empty()) return OracleVerdict{OracleKind::none, -1};
    range.push_back(iv);
  }

  std::uint64_t sequences = 1;
  for (const auto& iv : range) {
    sequences *= std::uint64_t(iv.hi - iv.lo + 1);
    if (sequences > b.max_states)
      return OracleVerdict{OracleKind::inconclusive, -1};
  }

  Level best = -1;
  std::vector<TimeUnit> delta(execs.size());
  auto eval_delta = [&]() {
    Level cert = p.grid.top();
    for (size_t k = 0; k < situations.size() && cert >= 0; ++k) {
      Schedule s;
      for (size_t i = 0; i < execs.size(); ++i) s.values[execs[i]] = delta[i];
      for (const auto& l : hard.links)
        s.values[l.point] = s.values[l.activation] +
                            situations[k].durations.at(l.point);
      cert = std::min(cert, leaf_value(p, hard, s, situations[k], opts[k]));
    }
    best = std::max(best, cert);
  };
  // Odometer over the per-executable ranges.
  std::vector<TimeUnit> cur;
  for (const auto& iv : range) cur.push_back(iv.lo);
  while (true) {
    delta = cur;
    eval_delta();
    size_t i = 0;
    for (; i < cur.size(); ++i) {
      if (cur[i] < range[i].hi) {
        ++cur[i];
        break;
      }
      cur[i] = range[i].lo;
    }
    if (i == cur.size()) break;
  }
  return classify(p, best);
}

namespace {

constexpr TimeUnit kUnassigned = kInf + 7;

struct DcGame {
  const STPPU& p;
  STPU hard;
  SearchBounds bounds;
  TimeUnit horizon;
  std::vector<int> links_of_point;  // contingent point -> link index
  std::map<std::vector<TimeUnit>, Level> opt_memo;
  std::map<std::pair<TimeUnit, std::vector<TimeUnit>>, Level> nature_memo;
  std::map<std::pair<TimeUnit, std::vector<TimeUnit>>, Level> exec_memo;
  std::uint64_t states = 0;

  explicit DcGame(const STPPU& p_, const SearchBounds& b)
      : p(p_), hard(p_.hard_view()), bounds(b) {
    auto closed = close_distances(hard.as_stp());
    horizon = bounds.horizon;
    if (std::holds_alternative<DistanceMatrix>(closed)) {
      const auto& d = std::get<DistanceMatrix>(closed);
      TimeUnit h = 0;
      bool bounded = true;
      for (int i = 1; i < hard.n; ++i) {
        if (d.at(0, i) >= kInf)
          bounded = false;
        else
          h = std::max(h, d.at(0, i));
      }
      if (bounded) horizon = std::min(horizon, h);
    }
  }

  void count_state() {
    if (++states > bounds.max_states) throw CapExceeded{};
  }

  bool all_assigned(const std::vector<TimeUnit>& v) const {
    return std::none_of(v.begin(), v.end(),
                        [](TimeUnit x) { return x == kUnassigned; });
  }

  Level opt_of(const std::vector<TimeUnit>& v) {
    std::vector<TimeUnit> key;
    Situation omega;
    for (const auto& l : hard.links) {
      TimeUnit dur = v[size_t(l.point)] - v[size_t(l.activation)];
      key.push_back(dur);
      omega.durations[l.point] = dur;
    }
    auto it = opt_memo.find(key);
    if (it != opt_memo.end()) return it->second;
    auto o = projection_opt(p, omega);
    Level lv = std::holds_alternative<Inconsistent>(o) ? -1 : std::get<Level>(o);
    opt_memo.emplace(key, lv);
    return lv;
  }

  Level leaf(const std::vector<TimeUnit>& v) {
    Schedule s;
    for (int i = 0; i < p.n; ++i) s.values[i] = v[size_t(i)];
    Situation omega;
    for (const auto& l : hard.links)
      omega.durations[l.point] = v[size_t(l.point)] - v[size_t(l.activation)];
    Level opt = opt_of(v);
    if (opt < 0) return -1;
    return leaf_value(p, hard, s, omega, opt);
  }

  // No completion satisfies the hard constraints: pending executables may
  // only take values >= t, pending observed-later contingents values > t.
  bool infeasible(TimeUnit t, const std::vector<TimeUnit>& v) const {
    STP stp = hard.as_stp();
    // Fresh anchor constraints relative to the origin.
    for (int i = 0; i < p.n; ++i) {
      if (v[size_t(i)] != kUnassigned) {
        if (i != 0) stp.add(0, i, Interval(v[size_t(i)], v[size_t(i)]));
      } else if (!hard.is_contingent(i)) {
        stp.add(0, i, Interval(t, kInf));
      } else {
        const auto* l = hard.link_for(i);
        if (v[size_t(l->activation)] != kUnassigned)
          stp.add(0, i, Interval(t + 1, kInf));
      }
    }
    return std::holds_alternative<NegativeCycle>(close_distances(stp));
  }

  Level nature_value(TimeUnit t, std::vector<TimeUnit> v) {
    if (all_assigned(v)) return leaf(v);
    if (t > horizon) return -1;
    auto key = std::make_pair(t, v);
    auto it = nature_memo.find(key);
    if (it != nature_memo.end()) return it->second;
    count_state();

    std::vector<int> forced, optional;
    for (const auto& l : hard.links) {
      if (v[size_t(l.point)] != kUnassigned) continue;
      if (v[size_t(l.activation)] == kUnassigned) continue;
      TimeUnit start = v[size_t(l.activation)] + l.bounds.lo;
      TimeUnit end = v[size_t(l.activation)] + l.bounds.hi;
      if (t < start || t > end) continue;
      (t == end ? forced : optional).push_back(l.point);
    }
    Level value = p.grid.top() + 1;
    const size_t m = optional.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << m); ++mask) {
      std::vector<TimeUnit> v2 = v;
      for (int c : forced) v2[size_t(c)] = t;
      for (size_t i = 0; i < m; ++i)
        if ((mask >> i) & 1) v2[size_t(optional[i])] = t;
      value = std::min(value, exec_value(t, std::move(v2)));
      if (value < 0) break;
    }
    nature_memo.emplace(std::move(key), value);
    return value;
  }

  Level exec_value(TimeUnit t, std::vector<TimeUnit> v) {
    if (all_assigned(v)) return leaf(v);
    auto key = std::make_pair(t, v);
    auto it = exec_memo.find(key);
    if (it != exec_memo.end()) return it->second;
    count_state();

    Level value = -1;
    if (!infeasible(t, v)) {
      value = nature_value(t + 1, v);
      for (int e = 0; e < p.n; ++e) {
        if (hard.is_contingent(e) || v[size_t(e)] != kUnassigned) continue;
        std::vector<TimeUnit> v2 = v;
        v2[size_t(e)] = t;
        value = std::max(value, exec_value(t, std::move(v2)));
        if (value >= p.grid.top()) break;
      }
    }
    exec_memo.emplace(std::move(key), value);
    return value;
  }
};

}  // namespace

OracleVerdict oracle_dc_level(const STPPU& p, const SearchBounds& b) {
  p.validate();
  DcGame game(p, b);
  std::vector<TimeUnit> root(size_t(p.n), kUnassigned);
  root[0] = 0;
  try {
    Level best = game.nature_value(0, std::move(root));
    return classify(p, best);
  } catch (const CapExceeded&) {
    return OracleVerdict{OracleKind::inconclusive, -1};
  }
}

std::variant<bool, Inconclusive> oracle_wc(const STPPU& p,
                                           const SearchBounds& b) {
  p.validate();
  STPU hard = p.hard_view();
  auto sits = enumerate_situations(hard, b);
  if (std::holds_alternative<Inconclusive>(sits)) return Inconclusive{};
  for (const auto& omega : std::get<std::vector<Situation>>(sits))
    if (std::holds_alternative<NegativeCycle>(
            close_distances(project(hard, omega))))
      return false;
  return true;
}

}  // namespace stppu
