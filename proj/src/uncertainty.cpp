#include "stppu/uncertainty.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

namespace stppu {

const ContingentLink* STPU::link_for(int point) const {
  for (const auto& l : links)
    if (l.point == point) return &l;
  return nullptr;
}

std::vector<int> STPU::executables() const {
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (!contingent[size_t(i)]) out.push_back(i);
  return out;
}

std::vector<int> STPU::contingents() const {
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (contingent[size_t(i)]) out.push_back(i);
  return out;
}

void STPU::add_requirement(int from, int to, Interval iv) {
  if (from == to) throw std::invalid_argument("self-loop constraint");
  if (from > to) {
    std::swap(from, to);
    iv = iv.negate();
  }
  auto key = std::make_pair(from, to);
  auto it = requirements.find(key);
  if (it == requirements.end())
    requirements.emplace(key, iv);
  else
    it->second = it->second.intersect(iv);
}

std::optional<Interval> STPU::requirement(int from, int to) const {
  bool flipped = from > to;
  if (flipped) std::swap(from, to);
  auto it = requirements.find(std::make_pair(from, to));
  if (it == requirements.end()) return std::nullopt;
  return flipped ? it->second.negate() : it->second;
}

STP STPU::as_stp() const {
  STP out(n);
  for (const auto& [pair, iv] : requirements)
    out.add(pair.first, pair.second, iv);
  for (const auto& l : links) out.add(l.activation, l.point, l.bounds);
  return out;
}

void STPU::validate() const {
  if (n <= 0) throw std::invalid_argument("empty problem");
  if (int(contingent.size()) != n)
    throw std::invalid_argument("kind vector size mismatch");
  if (contingent[0]) throw std::invalid_argument("origin must be executable");
  std::vector<int> link_count(size_t(n), 0);
  for (const auto& l : links) {
    if (l.point < 0 || l.point >= n || l.activation < 0 || l.activation >= n)
      throw std::invalid_argument("link index out of range");
    if (!contingent[size_t(l.point)])
      throw std::invalid_argument("link into executable point");
    if (contingent[size_t(l.activation)])
      throw std::invalid_argument("link activation must be executable");
    if (l.bounds.empty()) throw std::invalid_argument("empty link interval");
    ++link_count[size_t(l.point)];
  }
  for (int i = 0; i < n; ++i) {
    int expect = contingent[size_t(i)] ? 1 : 0;
    if (link_count[size_t(i)] != expect)
      throw std::invalid_argument("each contingent point needs one link");
  }
}

STP project(const STPU& u, const Situation& omega) {
  STP out(u.n);
  for (const auto& [pair, iv] : u.requirements)
    out.add(pair.first, pair.second, iv);
  for (const auto& l : u.links) {
    auto it = omega.durations.find(l.point);
    if (it == omega.durations.end())
      throw std::invalid_argument("situation misses a contingent duration");
    if (!l.bounds.contains(it->second))
      throw std::invalid_argument("duration outside contingent interval");
    out.add(l.activation, l.point, Interval(it->second, it->second));
  }
  return out;
}

StrongResult check_strong(const STPU& u) {
  u.validate();
  MinimalExecutableSTP result;
  result.point_of = u.executables();
  for (size_t k = 0; k < result.point_of.size(); ++k)
    result.index_of[result.point_of[k]] = int(k);
  STP stp(int(result.point_of.size()));

  for (const auto& [pair, iv] : u.requirements) {
    int a = pair.first, b = pair.second;
    bool ca = u.is_contingent(a), cb = u.is_contingent(b);
    if (!ca && !cb) {
      stp.add(result.index_of[a], result.index_of[b], iv);
      continue;
    }
    if (ca && cb) {
      // Requirement between two contingent points: rewrite onto the
      // two activation points, robust over both duration boxes.
      const auto* l1 = u.link_for(a);
      const auto* l2 = u.link_for(b);
      Interval r(sat_add(iv.lo, sat_add(-l2->bounds.lo, l1->bounds.hi)),
                 sat_add(iv.hi, sat_add(-l2->bounds.hi, l1->bounds.lo)));
      if (l1->activation == l2->activation) {
        if (!r.contains(0))
          return NotSC{"requirement between co-activated contingents"};
        continue;
      }
      if (r.empty())
        return NotSC{"empty rewrite on " + u.name_of(a) + "->" + u.name_of(b)};
      stp.add(result.index_of[l1->activation], result.index_of[l2->activation],
              r);
      continue;
    }
    // Exactly one contingent endpoint; orient the constraint toward it.
    int from = a, to = b;
    Interval oriented = iv;
    if (ca) {
      std::swap(from, to);
      oriented = oriented.negate();
    }
    const auto* link = u.link_for(to);
    Interval r(sat_add(oriented.lo, -link->bounds.lo),
               sat_add(oriented.hi, -link->bounds.hi));
    if (link->activation == from) {
      if (!r.contains(0))
        return NotSC{"requirement tighter than its own link"};
      continue;
    }
    if (r.empty())
      return NotSC{"empty rewrite on " + u.name_of(from) + "->" +
                   u.name_of(to)};
    // r bounds (activation - from).
    stp.add(result.index_of[from], result.index_of[link->activation], r);
  }

  auto minimal = minimal_network(stp);
  if (std::holds_alternative<NegativeCycle>(minimal))
    return NotSC{"rewritten executable network inconsistent"};
  result.stp = std::get<STP>(minimal);
  return result;
}

std::optional<STPU> path_consistent(const STPU& u) {
  auto m = minimal_network(u.as_stp());
  if (std::holds_alternative<NegativeCycle>(m)) return std::nullopt;
  const auto& stp = std::get<STP>(m);
  STPU out;
  out.n = u.n;
  out.names = u.names;
  out.contingent = u.contingent;
  for (const auto& l : u.links) {
    Interval iv = stp.get(l.activation, l.point).value_or(l.bounds);
    out.links.push_back(ContingentLink{l.activation, l.point, iv});
  }
  for (const auto& [pair, iv] : stp.constraints) {
    bool is_link = false;
    for (const auto& l : u.links) {
      int a = std::min(l.activation, l.point);
      int b = std::max(l.activation, l.point);
      if (a == pair.first && b == pair.second) is_link = true;
    }
    if (!is_link) out.add_requirement(pair.first, pair.second, iv);
  }
  return out;
}

PseudoResult check_pseudo(const STPU& u) {
  u.validate();
  auto minimal = minimal_network(u.as_stp());
  if (std::holds_alternative<NegativeCycle>(minimal))
    return PseudoResult::inconsistent;
  const auto& m = std::get<STP>(minimal);
  for (const auto& l : u.links)
    if (m.get(l.activation, l.point).value_or(Interval::unbounded()) !=
        l.bounds)
      return PseudoResult::squeezed;
  return PseudoResult::controllable;
}

bool check_weak(const STPU& u) {
  u.validate();
  const size_t g = u.links.size();
  for (std::uint64_t mask = 0;; ++mask) {
    Situation omega;
    for (size_t i = 0; i < g; ++i)
      omega.durations[u.links[i].point] =
          (mask >> i) & 1 ? u.links[i].bounds.hi : u.links[i].bounds.lo;
    if (std::holds_alternative<NegativeCycle>(
            close_distances(project(u, omega))))
      return false;
    if (g == 0 || mask + 1 == (std::uint64_t(1) << g)) break;
  }
  return true;
}

TimeUnit AnnotatedSTPU::effective_wait(int anchor, int target) const {
  auto it = waits.find(std::make_pair(anchor, target));
  if (it == waits.end()) return -kInf;
  TimeUnit t = -kInf;
  for (const auto& [c, w] : it->second) t = std::max(t, w);
  return t;
}

namespace {

struct Weights {
  int n;
  std::vector<TimeUnit> w;  // w[i*n+j] = upper bound of X_j - X_i

  explicit Weights(int n_) : n(n_), w(size_t(n_) * n_, kInf) {
    for (int i = 0; i < n; ++i) at(i, i) = 0;
  }
  TimeUnit& at(int i, int j) { return w[size_t(i) * n + j]; }
  TimeUnit at(int i, int j) const { return w[size_t(i) * n + j]; }

  // Tightens upper(X_j - X_i); reports whether something changed.
  bool tighten(int i, int j, TimeUnit ub) {
    if (ub < at(i, j)) {
      at(i, j) = ub;
      return true;
    }
    return false;
  }

  STP to_stp() const {
    STP out(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Interval iv(-at(j, i), at(i, j));
        if (iv.lo <= -kInf && iv.hi >= kInf) continue;
        out.add(i, j, iv);
      }
    return out;
  }
};

}  // namespace

DynamicResult check_dynamic(const STPU& u) {
  u.validate();
  Weights w(u.n);
  for (const auto& [pair, iv] : u.requirements) {
    w.tighten(pair.first, pair.second, iv.hi);
    w.tighten(pair.second, pair.first, -iv.lo);
  }
  for (const auto& l : u.links) {
    w.tighten(l.activation, l.point, l.bounds.hi);
    w.tighten(l.point, l.activation, -l.bounds.lo);
  }

  WaitMap waits;
  TimeUnit span_total = 1;
  for (const auto& [pair, iv] : u.requirements)
    if (iv.bounded()) span_total += iv.hi - iv.lo + 1;
  for (const auto& l : u.links) span_total += l.bounds.hi - l.bounds.lo + 1;
  const long cap = long(u.n) * u.n * span_total + 16;

  // Stores a wait <c, t> on edge (anchor, target), folding the
  // unconditional part into the lower bound. Waits that cannot bind
  // (t at or below the link's lower bound) stay unannotated unless they
  // come from a strict unordered triangle; merge classification keys on
  // those annotations.
  auto put_wait = [&](int anchor, int target, int c, TimeUnit t,
                      bool annotate_always) -> bool {
    const auto* link = u.link_for(c);
    t = std::min(t, link->bounds.hi);
    bool changed = w.tighten(target, anchor, -std::min(t, link->bounds.lo));
    if (annotate_always || t > link->bounds.lo) {
      auto& m = waits[{anchor, target}];
      auto it = m.find(c);
      if (it == m.end()) {
        m.emplace(c, t);
        changed = true;
      } else if (t > it->second) {
        it->second = t;
        changed = true;
      }
    }
    return changed;
  };

  for (long iter = 0;; ++iter) {
    if (iter > cap)
      throw std::runtime_error("dynamic controllability fixpoint cap hit");
    STP view = w.to_stp();
    auto closed = close_distances(view);
    if (std::holds_alternative<NegativeCycle>(closed))
      return NotDC{"network inconsistent"};
    const auto& d = std::get<DistanceMatrix>(closed);
    for (const auto& l : u.links)
      if (d.interval(l.activation, l.point) != l.bounds)
        return NotDC{"contingent link " + u.name_of(l.activation) + "->" +
                     u.name_of(l.point) + " squeezed"};

    bool changed = false;
    // Triangle reductions per contingent link and executable point.
    for (const auto& l : u.links) {
      const TimeUnit x = l.bounds.lo, y = l.bounds.hi;
      for (int b = 0; b < u.n; ++b) {
        if (b == l.activation || b == l.point) continue;
        TimeUnit v_bc = d.at(b, l.point);        // upper of C - B
        TimeUnit u_bc = -d.at(l.point, b);       // lower of C - B
        if (v_bc < 0) continue;                  // follow case
        if (u_bc > 0) {                          // precede case
          // Strictly before the contingent point, so the choice must be
          // blind-robust over the whole duration range. With u == 0 the
          // point may instead fire together with the observation, which
          // the wait machinery below covers.
          TimeUnit lo2 = sat_add(y, -v_bc);
          TimeUnit hi2 = sat_add(x, -u_bc);
          if (std::max(lo2, -d.at(b, l.activation)) >
              std::min(hi2, d.at(l.activation, b)))
            return NotDC{"requirement " + u.name_of(l.activation) + "->" +
                         u.name_of(b) + " emptied"};
          changed |= w.tighten(l.activation, b, hi2);
          changed |= w.tighten(b, l.activation, -lo2);
        } else {                                 // unordered case
          TimeUnit t = sat_add(y, -v_bc);
          if (t <= -kInf) continue;
          changed |= put_wait(l.activation, b, l.point, t, u_bc < 0);
        }
      }
    }
    // Wait regressions over a snapshot of the current annotations. A
    // wait regressed back onto its own anchor leaves no room to wait, so
    // it bounds the contingent point instead; the squeeze check then
    // rejects networks that rely on Nature's cooperation.
    WaitMap snapshot = waits;
    for (const auto& [edge, by_c] : snapshot) {
      auto [anchor, target] = edge;
      for (const auto& [c, t] : by_c) {
        TimeUnit edge_ub = d.at(anchor, target);
        if (edge_ub < kInf && t > edge_ub)
          changed |= w.tighten(anchor, c, edge_ub);
        for (int p = 0; p < u.n; ++p) {
          if (p == anchor || p == target || p == c) continue;
          TimeUnit ub = d.at(p, target);  // upper of target - p
          if (ub >= kInf) continue;
          changed |= put_wait(anchor, p, c, sat_add(t, -ub), false);
        }
        if (t >= 0 && u.is_contingent(target) && target != c) {
          const auto* tl = u.link_for(target);
          if (tl->activation == anchor) {
            if (t > tl->bounds.lo)
              changed |= w.tighten(anchor, c, tl->bounds.lo);
          } else if (tl->activation != c) {
            changed |= put_wait(anchor, tl->activation, c,
                                sat_add(t, -tl->bounds.lo), false);
          }
        }
      }
    }
    if (!changed) break;
  }

  AnnotatedSTPU out;
  out.network.n = u.n;
  out.network.names = u.names;
  out.network.contingent = u.contingent;
  out.network.links = u.links;
  STP final_view = w.to_stp();
  auto closed = close_distances(final_view);
  const auto& d = std::get<DistanceMatrix>(closed);
  for (int i = 0; i < u.n; ++i)
    for (int j = i + 1; j < u.n; ++j) {
      bool is_link = false;
      for (const auto& l : u.links) {
        int a = std::min(l.activation, l.point);
        int b = std::max(l.activation, l.point);
        if (a == i && b == j) is_link = true;
      }
      if (is_link) continue;
      Interval iv = d.interval(i, j);
      if (iv.lo <= -kInf && iv.hi >= kInf) continue;
      out.network.add_requirement(i, j, iv);
    }
  for (const auto& [edge, by_c] : waits) {
    auto [anchor, target] = edge;
    if (u.is_contingent(target)) continue;
    TimeUnit floor = -d.at(target, anchor);  // lower bound of the edge
    for (const auto& [c, t] : by_c)
      if (t >= floor) out.waits[edge][c] = t;
  }
  return out;
}

Situation draw_situation(const STPU& u, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Situation s;
  for (const auto& l : u.links) {
    TimeUnit width = l.bounds.hi - l.bounds.lo + 1;
    s.durations[l.point] = l.bounds.lo + TimeUnit(rng() % std::uint64_t(width));
  }
  return s;
}

namespace {

std::string fmt_event(TimeUnit t, const std::string& what) {
  std::ostringstream os;
  os << "t=" << t << ' ' << what;
  return os.str();
}

}  // namespace

ExecuteResult dc_execute(const AnnotatedSTPU& a, const NatureModel& nature) {
  const STPU& u = a.network;
  u.validate();
  Situation omega;
  switch (nature.mode) {
    case NatureMode::scripted:
      omega = nature.scripted;
      break;
    case NatureMode::random:
      omega = draw_situation(u, nature.seed);
      break;
    case NatureMode::adversarial:
      // The hard dispatcher has no preference to attack; the all-latest
      // corner exercises every wait expiry.
      for (const auto& l : u.links) omega.durations[l.point] = l.bounds.hi;
      break;
  }
  std::vector<std::string> trace;
  for (const auto& l : u.links) {
    auto it = omega.durations.find(l.point);
    if (it == omega.durations.end() || !l.bounds.contains(it->second))
      return ExecutionFailure{"nature violated contingent bounds", trace};
  }

  Weights w(u.n);
  for (const auto& [pair, iv] : u.requirements) {
    w.tighten(pair.first, pair.second, iv.hi);
    w.tighten(pair.second, pair.first, -iv.lo);
  }
  for (const auto& l : u.links) {
    w.tighten(l.activation, l.point, l.bounds.hi);
    w.tighten(l.point, l.activation, -l.bounds.lo);
  }

  Schedule sched;
  std::vector<bool> done(size_t(u.n), false);
  auto assign = [&](int p, TimeUnit t) -> bool {
    w.tighten(0, p, t);
    w.tighten(p, 0, -t);
    sched.values[p] = t;
    done[size_t(p)] = true;
    return !std::holds_alternative<NegativeCycle>(close_distances(w.to_stp()));
  };

  if (!assign(0, 0)) return ExecutionFailure{"origin propagation failed", trace};
  trace.push_back(fmt_event(0, "exec " + u.name_of(0)));

  auto closed_matrix = [&]() {
    return std::get<DistanceMatrix>(close_distances(w.to_stp()));
  };

  TimeUnit horizon = 0;
  {
    DistanceMatrix d0 = closed_matrix();
    for (int i = 1; i < u.n; ++i)
      if (d0.at(0, i) < kInf) horizon = std::max(horizon, d0.at(0, i));
    horizon = std::min(horizon + 1, nature.horizon);
  }

  for (TimeUnit t = 0; t <= horizon; ++t) {
    // Nature first: occurrences at t are visible to every decision at t.
    for (const auto& l : u.links) {
      if (done[size_t(l.point)] || !done[size_t(l.activation)]) continue;
      TimeUnit occ = sched.at(l.activation) + omega.at(l.point);
      if (occ == t) {
        if (!assign(l.point, t))
          return ExecutionFailure{"observation propagation failed", trace};
        trace.push_back(fmt_event(t, "observe " + u.name_of(l.point)));
      }
    }
    for (const auto& [edge, by_c] : a.waits) {
      auto [anchor, target] = edge;
      if (done[size_t(target)] || !done[size_t(anchor)]) continue;
      for (const auto& [c, wt] : by_c)
        if (!done[size_t(c)] && sched.at(anchor) + wt == t)
          trace.push_back(fmt_event(t, "wait-expired " + u.name_of(c) + " on " +
                                           u.name_of(anchor) + "->" +
                                           u.name_of(target)));
    }

    bool fired = true;
    while (fired) {
      fired = false;
      DistanceMatrix d = closed_matrix();
      for (int b = 0; b < u.n; ++b) {
        if (done[size_t(b)] || u.is_contingent(b)) continue;
        TimeUnit lb = -d.at(b, 0), ub = d.at(0, b);
        if (t < lb || t > ub) continue;
        bool blocked = false;
        for (int y = 0; y < u.n && !blocked; ++y) {
          if (y == b || done[size_t(y)]) continue;
          TimeUnit upper_y_minus_b = d.at(b, y);
          if (upper_y_minus_b < 0) blocked = true;
          if (upper_y_minus_b == 0 && u.is_contingent(y)) blocked = true;
        }
        if (blocked) continue;
        bool waits_ok = true;
        for (const auto& [edge, by_c] : a.waits) {
          auto [anchor, target] = edge;
          if (target != b) continue;
          for (const auto& [c, wt] : by_c) {
            if (done[size_t(c)]) continue;
            if (!done[size_t(anchor)] || t < sched.at(anchor) + wt)
              waits_ok = false;
          }
        }
        if (!waits_ok) continue;
        if (!assign(b, t))
          return ExecutionFailure{"execution propagation failed on " +
                                      u.name_of(b),
                                  trace};
        trace.push_back(fmt_event(t, "exec " + u.name_of(b)));
        fired = true;
        break;  // reclose before considering further points
      }
    }

    // A point at its upper bound with unsatisfied waits cannot be saved.
    DistanceMatrix d = closed_matrix();
    for (int b = 0; b < u.n; ++b)
      if (!done[size_t(b)] && !u.is_contingent(b) && d.at(0, b) <= t)
        return ExecutionFailure{"forced point " + u.name_of(b) +
                                    " could not execute",
                                trace};

    bool all = true;
    for (int i = 0; i < u.n; ++i) all = all && done[size_t(i)];
    if (all) break;
  }

  for (int i = 0; i < u.n; ++i)
    if (!done[size_t(i)])
      return ExecutionFailure{"horizon exhausted before completion", trace};
  if (!satisfies(sched, project(u, omega)))
    return ExecutionFailure{"dispatch violated a constraint", trace};
  return ExecutionResult{sched, omega, trace};
}

}  // namespace stppu
