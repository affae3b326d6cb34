#include "stppu/stppu_control.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>
#include <stdexcept>

namespace stppu {

STPP STPPU::as_stpp() const {
  STPP out;
  out.n = n;
  out.names = names;
  out.grid = grid;
  out.constraints = constraints;
  for (const auto& l : links)
    out.constraints.push_back(
        SoftConstraint{l.activation, l.point, l.pref, ConstraintKind::contingent});
  return out;
}

STPU STPPU::hard_view() const {
  STPU out;
  out.n = n;
  out.names = names;
  out.contingent = contingent;
  for (const auto& c : constraints)
    out.add_requirement(c.from, c.to, c.interval());
  for (const auto& l : links)
    out.links.push_back(ContingentLink{l.activation, l.point, l.interval()});
  return out;
}

void STPPU::validate() const {
  hard_view().validate();
  for (const auto& c : constraints) {
    if (!c.pref.well_formed())
      throw std::invalid_argument("malformed preference on " + name_of(c.from) +
                                  "->" + name_of(c.to));
    if (validate_semiconvex(c.pref))
      throw std::invalid_argument("preference not semi-convex on " +
                                  name_of(c.from) + "->" + name_of(c.to));
    if (c.pref.max_level() > grid.top())
      throw std::invalid_argument("preference level above grid top");
  }
  for (const auto& l : links) {
    if (!l.pref.well_formed() || validate_semiconvex(l.pref))
      throw std::invalid_argument("bad link preference " +
                                  name_of(l.activation) + "->" +
                                  name_of(l.point));
    if (l.pref.max_level() > grid.top())
      throw std::invalid_argument("preference level above grid top");
  }
}

Level alpha_min(const STPPU& p) {
  Level m = p.grid.top();
  for (const auto& c : p.constraints) m = std::min(m, c.pref.min_level());
  for (const auto& l : p.links) m = std::min(m, l.pref.min_level());
  return m;
}

std::optional<STPU> cut_problem(const STPPU& p, Level alpha) {
  STPU out;
  out.n = p.n;
  out.names = p.names;
  out.contingent = p.contingent;
  for (const auto& c : p.constraints) {
    auto iv = alpha_cut(c.pref, alpha);
    if (!iv) return std::nullopt;
    out.add_requirement(c.from, c.to, *iv);
  }
  for (const auto& l : p.links) {
    auto iv = alpha_cut(l.pref, alpha);
    if (!iv) return std::nullopt;
    out.links.push_back(ContingentLink{l.activation, l.point, *iv});
  }
  return out;
}

PreferenceResult schedule_preference(const Schedule& s, const STPPU& p) {
  return schedule_preference(s, p.as_stpp());
}

const AnnotatedSTPU& MergedFamily::merged_at(Level a) const {
  Level clamped = std::min(std::max(a, alpha_min), top);
  return merged[size_t(clamped - alpha_min)];
}

const AnnotatedSTPU& MergedFamily::level_at(Level a) const {
  Level clamped = std::min(std::max(a, alpha_min), top);
  return per_level[size_t(clamped - alpha_min)];
}

ControllabilityReport best_sc(const STPPU& p) {
  p.validate();
  ControllabilityReport rep;
  rep.property = ControlProperty::sc;
  rep.grid = p.grid;
  const Level amin = alpha_min(p);

  auto q0 = cut_problem(p, amin);
  auto sc0 = check_strong(*q0);
  if (std::holds_alternative<NotSC>(sc0)) {
    rep.verdict = VerdictKind::none;
    rep.stop = StopEvent::e1_uncontrollable_at_alpha_min;
    return rep;
  }
  MinimalExecutableSTP acc = std::get<MinimalExecutableSTP>(sc0);

  Level beta = amin + 1;
  for (;; ++beta) {
    if (beta > p.grid.top()) {
      rep.verdict = VerdictKind::optimal;
      rep.stop = StopEvent::e2_cut_inconsistent;
      break;
    }
    auto cut = cut_problem(p, beta);
    std::optional<STPU> pc = cut ? path_consistent(*cut) : std::nullopt;
    if (!pc) {
      rep.verdict = VerdictKind::optimal;
      rep.stop = StopEvent::e2_cut_inconsistent;
      break;
    }
    auto scb = check_strong(*pc);
    if (std::holds_alternative<NotSC>(scb)) {
      rep.verdict = VerdictKind::at_level;
      rep.stop = StopEvent::e3_level_uncontrollable;
      break;
    }
    auto inter = intersect(acc.stp, std::get<MinimalExecutableSTP>(scb).stp);
    if (std::holds_alternative<EmptyIntersection>(inter)) {
      rep.verdict = VerdictKind::at_level;
      rep.stop = StopEvent::e4_combine_failed;
      break;
    }
    auto remin = minimal_network(std::get<STP>(inter));
    if (std::holds_alternative<NegativeCycle>(remin)) {
      rep.verdict = VerdictKind::at_level;
      rep.stop = StopEvent::e4_combine_failed;
      break;
    }
    acc.stp = std::get<STP>(remin);
  }
  rep.level = beta - 1;
  rep.sc_witness =
      ScWitness{acc, earliest_solution(acc.stp), latest_solution(acc.stp)};
  return rep;
}

bool owc_check(const STPPU& p) {
  p.validate();
  return check_weak(p.hard_view());
}

namespace {

void set_requirement(STPU& u, int i, int j, Interval iv) {
  if (i > j) {
    std::swap(i, j);
    iv = iv.negate();
  }
  u.requirements[std::make_pair(i, j)] = iv;
}

Interval stored_interval(const STPU& u, int i, int j) {
  return u.requirement(i, j).value_or(Interval::unbounded());
}

// b must strictly follow some contingent point anchored at a, or carries
// a wait past its own upper bound.
bool is_follow(const AnnotatedSTPU& t, int a, int b) {
  for (const auto& l : t.network.links) {
    if (l.activation != a) continue;
    Interval bc = stored_interval(t.network, b, l.point);
    if (bc.hi < 0) return true;
  }
  TimeUnit w = t.effective_wait(a, b);
  return w > stored_interval(t.network, a, b).hi;
}

void copy_pair_waits(AnnotatedSTPU& dst, const AnnotatedSTPU& src, int i,
                     int j) {
  for (auto [a, b] : {std::make_pair(i, j), std::make_pair(j, i)}) {
    dst.waits.erase({a, b});
    auto it = src.waits.find({a, b});
    if (it != src.waits.end()) dst.waits[{a, b}] = it->second;
  }
}

void union_pair_waits(AnnotatedSTPU& dst, const AnnotatedSTPU& extra, int i,
                      int j) {
  for (auto [a, b] : {std::make_pair(i, j), std::make_pair(j, i)}) {
    auto it = extra.waits.find({a, b});
    if (it == extra.waits.end()) continue;
    auto& slot = dst.waits[{a, b}];
    for (const auto& [c, t] : it->second) {
      auto jt = slot.find(c);
      if (jt == slot.end())
        slot.emplace(c, t);
      else
        jt->second = std::max(jt->second, t);
    }
  }
}

}  // namespace

MergeResult merge(const AnnotatedSTPU& lower, const AnnotatedSTPU& higher,
                  bool keep_higher_on_follow) {
  if (lower.network.n != higher.network.n)
    throw std::invalid_argument("merge: variable sets differ");
  AnnotatedSTPU out = lower;
  const int n = lower.network.n;
  for (int i = 0; i < n; ++i) {
    if (lower.network.is_contingent(i)) continue;
    for (int j = i + 1; j < n; ++j) {
      if (lower.network.is_contingent(j)) continue;
      Interval iv_low = stored_interval(lower.network, i, j);
      Interval iv_high = stored_interval(higher.network, i, j);
      // The follow case is keyed on the next level up: there the point
      // fires only after the contingent is observed, and the dispatcher
      // adapts by propagation, so the accumulated edge stays.
      if (is_follow(higher, i, j) || is_follow(higher, j, i)) {
        const AnnotatedSTPU& src = keep_higher_on_follow ? higher : lower;
        set_requirement(out.network, i, j,
                        stored_interval(src.network, i, j));
        copy_pair_waits(out, src, i, j);
        continue;
      }
      struct Oriented {
        TimeUnit p_low, q_low, p_high, q_high, w_low, w_high;
      };
      auto orient = [&](int a, int b) {
        Interval l = a < b ? iv_low : iv_low.negate();
        Interval h = a < b ? iv_high : iv_high.negate();
        return Oriented{l.lo, l.hi, h.lo, h.hi, lower.effective_wait(a, b),
                        higher.effective_wait(a, b)};
      };
      Oriented fwd = orient(i, j), bwd = orient(j, i);
      auto genuine = [](const Oriented& o) {
        return o.w_low > o.p_low || o.w_high > o.p_high;
      };
      if (!genuine(fwd) && !genuine(bwd)) {
        Interval meet = iv_low.intersect(iv_high);
        if (meet.empty()) return MergeFailed{i, j};
        set_requirement(out.network, i, j, meet);
        union_pair_waits(out, higher, i, j);
        continue;
      }
      Interval result = iv_low;
      auto apply = [&](const Oriented& o, bool forward) -> bool {
        if (!genuine(o)) return true;
        TimeUnit q = std::min(o.q_low, o.q_high);
        TimeUnit t = std::max({o.w_low, o.w_high, o.p_high});
        if (q < t) return false;
        if (forward)
          result.hi = std::min(result.hi, q);
        else
          result.lo = std::max(result.lo, -q);
        return true;
      };
      if (!apply(fwd, true) || !apply(bwd, false)) return MergeFailed{i, j};
      if (result.empty()) return MergeFailed{i, j};
      set_requirement(out.network, i, j, result);
      union_pair_waits(out, higher, i, j);
    }
  }
  return out;
}

ControllabilityReport best_dc(const STPPU& p) {
  p.validate();
  ControllabilityReport rep;
  rep.property = ControlProperty::dc;
  rep.grid = p.grid;
  const Level amin = alpha_min(p);

  auto q0 = cut_problem(p, amin);
  auto dc0 = check_dynamic(*q0);
  if (std::holds_alternative<NotDC>(dc0)) {
    rep.verdict = VerdictKind::none;
    rep.stop = StopEvent::e1_uncontrollable_at_alpha_min;
    return rep;
  }

  MergedFamily family;
  family.alpha_min = amin;
  family.per_level.push_back(std::get<AnnotatedSTPU>(dc0));
  family.merged.push_back(family.per_level.back());

  Level beta = amin + 1;
  for (;; ++beta) {
    if (beta > p.grid.top()) {
      rep.verdict = VerdictKind::optimal;
      rep.stop = StopEvent::e2_cut_inconsistent;
      break;
    }
    auto cut = cut_problem(p, beta);
    std::optional<STPU> pc = cut ? path_consistent(*cut) : std::nullopt;
    if (!pc) {
      rep.verdict = VerdictKind::optimal;
      rep.stop = StopEvent::e2_cut_inconsistent;
      break;
    }
    auto dcb = check_dynamic(*pc);
    if (std::holds_alternative<NotDC>(dcb)) {
      rep.verdict = VerdictKind::at_level;
      rep.stop = StopEvent::e3_level_uncontrollable;
      break;
    }
    auto merged = merge(family.merged.back(), std::get<AnnotatedSTPU>(dcb));
    if (std::holds_alternative<MergeFailed>(merged)) {
      rep.verdict = VerdictKind::at_level;
      rep.stop = StopEvent::e4_combine_failed;
      break;
    }
    family.per_level.push_back(std::get<AnnotatedSTPU>(dcb));
    family.merged.push_back(std::get<AnnotatedSTPU>(merged));
  }
  rep.level = beta - 1;
  family.top = beta - 1;
  rep.dc_witness = std::make_shared<ResultingSTPPU>(
      resulting_stppu(p, family, rep.verdict == VerdictKind::optimal));
  return rep;
}

ResultingSTPPU resulting_stppu(const STPPU& p, const MergedFamily& family,
                               bool optimal) {
  ResultingSTPPU out;
  out.original = p;
  out.family = family;
  out.guaranteed = family.top;
  out.optimal = optimal;

  STPPU res;
  res.n = p.n;
  res.names = p.names;
  res.contingent = p.contingent;
  res.grid = p.grid;
  res.links = p.links;
  const STPU& fin = family.merged.back().network;
  for (const auto& [pair, iv] : fin.requirements) {
    auto [i, j] = pair;
    const SoftConstraint* orig = nullptr;
    for (const auto& c : p.constraints)
      if ((c.from == i && c.to == j) || (c.from == j && c.to == i)) orig = &c;
    if (orig == nullptr) {
      res.constraints.push_back(SoftConstraint{
          i, j, SemiConvexFn::constant(iv, p.grid.top()),
          ConstraintKind::requirement});
      continue;
    }
    Interval oriented = orig->from == i ? iv : iv.negate();
    Interval sub = oriented.intersect(orig->interval());
    res.constraints.push_back(SoftConstraint{
        orig->from, orig->to, orig->pref.restrict(sub),
        ConstraintKind::requirement});
  }
  out.restricted = res;
  return out;
}

namespace {

std::string fmt_event(TimeUnit t, const std::string& what) {
  std::ostringstream os;
  os << "t=" << t << ' ' << what;
  return os.str();
}

struct OdcEngine {
  const ResultingSTPPU& r;
  const STPPU& p;  // original problem
  Situation omega;
  std::vector<std::string> trace;
  Schedule sched;
  std::vector<bool> done;
  Level gamma_det;  // minimum preference over determined projections

  explicit OdcEngine(const ResultingSTPPU& r_, Situation omega_)
      : r(r_), p(r_.original), omega(std::move(omega_)),
        done(size_t(r_.original.n), false), gamma_det(r_.guaranteed) {}

  const SoftLink* link_of(int point) const {
    for (const auto& l : p.links)
      if (l.point == point) return &l;
    return nullptr;
  }

  // Dispatch network at level g: the merged network plus singleton
  // assignments plus, per original constraint, the strongest bound the
  // executor may still be held to. Constraints among executables take
  // the level-g preference cut. A constraint toward an unobserved
  // contingent point takes the level network's interval instead: it
  // holds the pending side for the observation (or for the executor's
  // own choice of the activation) without ever cutting Nature's range,
  // and the per-instant level backoff discharges it when an instant
  // cannot honour it.
  std::optional<DistanceMatrix> build(Level g) const {
    const STPU& base = r.family.merged_at(g).network;
    const STPU& level = r.family.level_at(g).network;
    STP stp = base.as_stp();
    for (int i = 0; i < p.n; ++i)
      if (done[size_t(i)]) {
        if (i == 0) continue;
        stp.add(0, i, Interval(sched.at(i), sched.at(i)));
      }
    for (const auto& c : p.constraints) {
      bool fa = done[size_t(c.from)], fb = done[size_t(c.to)];
      if (fa && fb) continue;
      bool contingent_pending =
          (!fa && p.is_contingent(c.from)) || (!fb && p.is_contingent(c.to));
      if (contingent_pending) {
        if (auto iv = level.requirement(c.from, c.to))
          stp.add(c.from, c.to, *iv);
        continue;
      }
      auto cut = alpha_cut(c.pref, g);
      if (!cut) return std::nullopt;
      stp.add(c.from, c.to, *cut);
    }
    auto closed = close_distances(stp);
    if (std::holds_alternative<NegativeCycle>(closed)) return std::nullopt;
    return std::get<DistanceMatrix>(closed);
  }

  bool waits_ok(const AnnotatedSTPU& net, int b, TimeUnit t) const {
    for (const auto& [edge, by_c] : net.waits) {
      auto [anchor, target] = edge;
      if (target != b) continue;
      for (const auto& [c, wt] : by_c) {
        if (done[size_t(c)]) continue;
        if (!done[size_t(anchor)] || t < sched.at(anchor) + wt) return false;
      }
    }
    return true;
  }

  bool blocked(const DistanceMatrix& d, int b) const {
    for (int y = 0; y < p.n; ++y) {
      if (y == b || done[size_t(y)]) continue;
      TimeUnit up = d.at(b, y);  // upper of y - b
      if (up < 0) return true;
      if (up == 0 && p.is_contingent(y)) return true;
    }
    return false;
  }

  bool eligible(const DistanceMatrix& d, Level g, int b, TimeUnit t) const {
    return t >= -d.at(b, 0) && t <= d.at(0, b) && !blocked(d, b) &&
           waits_ok(r.family.merged_at(g), b, t);
  }

  // True when some pending executable can no longer meet the level-g
  // dispatch network.
  bool stuck(Level g, TimeUnit t) const {
    auto d = build(g);
    if (!d) return true;
    for (int b = 0; b < p.n; ++b) {
      if (done[size_t(b)] || p.is_contingent(b)) continue;
      TimeUnit ub = d->at(0, b);
      if (ub < t) return true;
      if (ub == t &&
          !(t >= -d->at(b, 0) && !blocked(*d, b) &&
            waits_ok(r.family.merged_at(g), b, t)))
        return true;
    }
    return false;
  }

  void fold_projections(int point) {
    for (const auto& c : p.constraints) {
      if (c.from != point && c.to != point) continue;
      int other = c.from == point ? c.to : c.from;
      if (!done[size_t(other)]) continue;
      TimeUnit off = sched.at(c.to) - sched.at(c.from);
      if (c.interval().contains(off))
        gamma_det = std::min(gamma_det, c.pref.eval(off));
    }
    for (const auto& l : p.links) {
      if (l.point != point && l.activation != point) continue;
      int other = l.point == point ? l.activation : l.point;
      if (!done[size_t(other)]) continue;
      TimeUnit off = sched.at(l.point) - sched.at(l.activation);
      if (l.interval().contains(off))
        gamma_det = std::min(gamma_det, l.pref.eval(off));
    }
  }

  void assign(int point, TimeUnit v) {
    sched.values[point] = v;
    done[size_t(point)] = true;
    fold_projections(point);
  }

  OdcResult run(TimeUnit horizon_cap) {
    assign(0, 0);
    trace.push_back(fmt_event(0, "exec " + p.name_of(0)));

    TimeUnit horizon = 0;
    {
      auto d = build(r.family.alpha_min);
      if (!d) return ExecutionFailure{"initial network infeasible", trace};
      for (int i = 1; i < p.n; ++i)
        if (d->at(0, i) < kInf) horizon = std::max(horizon, d->at(0, i));
      horizon = std::min(horizon + 1, horizon_cap);
    }

    for (TimeUnit t = 0; t <= horizon; ++t) {
      for (const auto& l : p.links) {
        if (done[size_t(l.point)] || !done[size_t(l.activation)]) continue;
        TimeUnit occ = sched.at(l.activation) + omega.at(l.point);
        if (occ <= t) {
          assign(l.point, occ);
          trace.push_back(fmt_event(t, "observe " + p.name_of(l.point)));
        }
      }
      {
        const auto& net = r.family.merged_at(gamma_det);
        for (const auto& [edge, by_c] : net.waits) {
          auto [anchor, target] = edge;
          if (done[size_t(target)] || !done[size_t(anchor)]) continue;
          for (const auto& [c, wt] : by_c)
            if (!done[size_t(c)] && sched.at(anchor) + wt == t)
              trace.push_back(fmt_event(
                  t, "wait-expired " + p.name_of(c) + " on " +
                         p.name_of(anchor) + "->" + p.name_of(target)));
        }
      }

      while (true) {
        // The dispatch level starts from the determined level each round
        // and backs off only as far as this instant requires.
        Level g = gamma_det;
        while (g > r.family.alpha_min && stuck(g, t)) --g;
        if (stuck(g, t))
          return ExecutionFailure{"dispatch stuck at the lowest level", trace};
        auto d = build(g);
        int fired = -1;
        for (int b = 0; b < p.n && fired < 0; ++b)
          if (!done[size_t(b)] && !p.is_contingent(b) && eligible(*d, g, b, t))
            fired = b;
        if (fired < 0) break;
        assign(fired, t);
        trace.push_back(fmt_event(t, "exec " + p.name_of(fired)));
      }

      bool all = true;
      for (int i = 0; i < p.n; ++i) all = all && done[size_t(i)];
      if (all) {
        auto pref = schedule_preference(sched, p);
        if (std::holds_alternative<ConstraintViolation>(pref))
          return ExecutionFailure{"dispatch violated a constraint", trace};
        return OdcOutcome{sched, omega, std::get<Level>(pref), trace};
      }
    }
    return ExecutionFailure{"horizon exhausted before completion", trace};
  }
};

}  // namespace

OdcResult odc_execute(const ResultingSTPPU& r, const NatureModel& nature) {
  const STPPU& p = r.original;
  STPU hard = p.hard_view();

  auto run_scripted = [&](const Situation& omega) -> OdcResult {
    for (const auto& l : hard.links) {
      auto it = omega.durations.find(l.point);
      if (it == omega.durations.end() || !l.bounds.contains(it->second))
        return ExecutionFailure{"nature violated contingent bounds", {}};
    }
    OdcEngine engine(r, omega);
    return engine.run(nature.horizon);
  };

  switch (nature.mode) {
    case NatureMode::scripted:
      return run_scripted(nature.scripted);
    case NatureMode::random:
      return run_scripted(draw_situation(hard, nature.seed));
    case NatureMode::adversarial: {
      // Exhaustive worst case at desk scale; seeded sampling otherwise.
      std::uint64_t count = 1;
      for (const auto& l : hard.links) {
        count *= std::uint64_t(l.bounds.hi - l.bounds.lo + 1);
        if (count > 50000) break;
      }
      if (count > 50000) return run_scripted(draw_situation(hard, nature.seed));
      std::vector<Situation> all{Situation{}};
      for (const auto& l : hard.links) {
        std::vector<Situation> next;
        for (const auto& s : all)
          for (TimeUnit v = l.bounds.lo; v <= l.bounds.hi; ++v) {
            Situation s2 = s;
            s2.durations[l.point] = v;
            next.push_back(std::move(s2));
          }
        all = std::move(next);
      }
      std::optional<OdcResult> worst;
      Level worst_level = 0;
      for (const auto& s : all) {
        OdcResult res = run_scripted(s);
        if (std::holds_alternative<ExecutionFailure>(res)) return res;
        Level a = std::get<OdcOutcome>(res).achieved;
        if (!worst || a < worst_level) {
          worst = res;
          worst_level = a;
        }
      }
      if (!worst) return ExecutionFailure{"no situations to execute", {}};
      return *worst;
    }
  }
  return ExecutionFailure{"unknown nature mode", {}};
}

}  // namespace stppu
