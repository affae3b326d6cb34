#include "stppu/preference.hpp"

#include <algorithm>
#include <stdexcept>

namespace stppu {

bool SemiConvexFn::well_formed() const {
  if (domain.empty() || !domain.bounded()) return false;
  if (steps.empty() || steps.front().first != domain.lo) return false;
  for (size_t i = 0; i < steps.size(); ++i) {
    if (!domain.contains(steps[i].first)) return false;
    if (i > 0 && steps[i - 1].first >= steps[i].first) return false;
    if (steps[i].second < 0) return false;
  }
  return true;
}

Level SemiConvexFn::eval(TimeUnit x) const {
  if (!domain.contains(x))
    throw std::out_of_range("preference offset outside constraint interval");
  Level v = steps.front().second;
  for (const auto& [off, lvl] : steps) {
    if (off > x) break;
    v = lvl;
  }
  return v;
}

Level SemiConvexFn::min_level() const {
  Level m = steps.front().second;
  for (const auto& s : steps) m = std::min(m, s.second);
  return m;
}

Level SemiConvexFn::max_level() const {
  Level m = steps.front().second;
  for (const auto& s : steps) m = std::max(m, s.second);
  return m;
}

SemiConvexFn SemiConvexFn::restrict(Interval sub) const {
  SemiConvexFn out;
  out.domain = sub;
  out.steps.emplace_back(sub.lo, eval(sub.lo));
  for (const auto& [off, lvl] : steps)
    if (off > sub.lo && off <= sub.hi) out.steps.emplace_back(off, lvl);
  return out;
}

std::optional<SemiConvexViolation> validate_semiconvex(const SemiConvexFn& f) {
  if (!f.well_formed())
    throw std::invalid_argument("malformed step function");
  // Distinct values, checked lowest first so the first splitting level wins.
  std::vector<Level> levels;
  for (const auto& s : f.steps) levels.push_back(s.second);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  for (Level a : levels) {
    // Scan the step sequence for value >= a, value < a, value >= a.
    bool seen_in = false;
    TimeUnit gap_at = 0;
    bool in_gap = false;
    for (const auto& [off, lvl] : f.steps) {
      if (lvl >= a) {
        if (in_gap) return SemiConvexViolation{a, gap_at};
        seen_in = true;
      } else if (seen_in && !in_gap) {
        in_gap = true;
        gap_at = off;
      }
    }
  }
  return std::nullopt;
}

std::optional<Interval> alpha_cut(const SemiConvexFn& f, Level alpha) {
  TimeUnit lo = 0, hi = 0;
  bool found = false;
  for (size_t i = 0; i < f.steps.size(); ++i) {
    if (f.steps[i].second < alpha) continue;
    TimeUnit seg_lo = f.steps[i].first;
    TimeUnit seg_hi =
        i + 1 < f.steps.size() ? f.steps[i + 1].first - 1 : f.domain.hi;
    if (!found) {
      lo = seg_lo;
      found = true;
    }
    hi = seg_hi;
  }
  if (!found) return std::nullopt;
  return Interval(lo, hi);
}

Level alpha_min(const STPP& p) {
  Level m = p.grid.top();
  for (const auto& c : p.constraints) m = std::min(m, c.pref.min_level());
  return m;
}

std::optional<STP> cut_problem(const STPP& p, Level alpha) {
  STP out(p.n);
  for (const auto& c : p.constraints) {
    auto iv = alpha_cut(c.pref, alpha);
    if (!iv) return std::nullopt;
    out.add(c.from, c.to, *iv);
  }
  return out;
}

PreferenceResult schedule_preference(const Schedule& s, const STPP& p) {
  Level best = p.grid.top();
  for (size_t i = 0; i < p.constraints.size(); ++i) {
    const auto& c = p.constraints[i];
    TimeUnit off = s.at(c.to) - s.at(c.from);
    if (!c.interval().contains(off)) return ConstraintViolation{int(i)};
    best = std::min(best, c.pref.eval(off));
  }
  return best;
}

StppResult solve_stpp(const STPP& p) {
  Level lo = alpha_min(p);
  auto consistent_at = [&](Level a) {
    auto cut = cut_problem(p, a);
    if (!cut) return false;
    return std::holds_alternative<DistanceMatrix>(close_distances(*cut));
  };
  if (!consistent_at(lo)) return Inconsistent{};
  Level hi = p.grid.top();
  while (lo < hi) {  // invariant: consistent at lo
    Level mid = lo + (hi - lo + 1) / 2;
    if (consistent_at(mid))
      lo = mid;
    else
      hi = mid - 1;
  }
  auto cut = cut_problem(p, lo);
  auto minimal = minimal_network(*cut);
  return StppSolution{lo, std::get<STP>(minimal)};
}

}  // namespace stppu
