#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "stppu/preference.hpp"
#include "stppu/stppu_control.hpp"

#include "helpers.hpp"

using namespace stppu;

namespace {

const SoftConstraint& constraint_between(const STPPU& p, const std::string& a,
                                         const std::string& b) {
  for (const auto& c : p.constraints)
    if (p.name_of(c.from) == a && p.name_of(c.to) == b) return c;
  REQUIRE(false);
  return p.constraints.front();
}

const SoftLink& link_of(const STPPU& p, const std::string& point) {
  for (const auto& l : p.links)
    if (p.name_of(l.point) == point) return l;
  REQUIRE(false);
  return p.links.front();
}

SemiConvexFn make_fn(Interval dom,
                     std::vector<std::pair<TimeUnit, Level>> steps) {
  SemiConvexFn f;
  f.domain = dom;
  f.steps = std::move(steps);
  return f;
}

}  // namespace

TEST_CASE("step evaluation on the satellite fixture") {
  auto eos = testutil::load_fixture("eos.stppu");
  CHECK(link_of(eos, "EC").pref.eval(5) == 8);
  CHECK(constraint_between(eos, "SC", "SA").pref.eval(2) == 10);
  auto flat = SemiConvexFn::constant(Interval(-3, 3), 10);
  CHECK(flat.eval(0) == 10);
  CHECK(flat.eval(-3) == 10);
  CHECK_THROWS_AS((void)flat.eval(4), std::out_of_range);
}

TEST_CASE("semi-convexity validation") {
  auto eos = testutil::load_fixture("eos.stppu");
  CHECK(!validate_semiconvex(constraint_between(eos, "SA", "EC").pref));

  auto bimodal = make_fn(Interval(0, 2), {{0, 10}, {1, 5}, {2, 10}});
  auto bad = validate_semiconvex(bimodal);
  REQUIRE(bad.has_value());
  CHECK(bad->level == 10);

  auto ramp = make_fn(Interval(0, 4), {{0, 2}, {1, 4}, {2, 6}, {3, 8}, {4, 10}});
  CHECK(!validate_semiconvex(ramp));
}

TEST_CASE("alpha cuts reproduce the fixture's per-level intervals") {
  auto eos = testutil::load_fixture("eos.stppu");
  CHECK(alpha_cut(link_of(eos, "EC").pref, 7) == Interval(1, 6));
  CHECK(alpha_cut(constraint_between(eos, "SA", "EC").pref, 10) ==
        Interval(-2, -1));
  CHECK(alpha_cut(constraint_between(eos, "SC", "SA").pref, 0) ==
        Interval(1, 5));
  CHECK(!alpha_cut(make_fn(Interval(0, 1), {{0, 3}}), 4).has_value());
}

TEST_CASE("cutting the whole satellite problem per level") {
  auto eos = testutil::load_fixture("eos_triangle.stppu");
  auto q9 = cut_problem(eos, 9);
  REQUIRE(q9.has_value());
  CHECK(q9->links[0].bounds == Interval(1, 4));
  CHECK(q9->requirement(0, 1) == Interval(1, 5));   // SC -> SA
  CHECK(q9->requirement(1, 2) == Interval(-3, 0));  // SA -> EC

  auto q10 = cut_problem(eos, 10);
  REQUIRE(q10.has_value());
  CHECK(q10->links[0].bounds == Interval(1, 2));
  CHECK(q10->requirement(0, 1) == Interval(1, 3));
  CHECK(q10->requirement(1, 2) == Interval(-2, -1));

  auto qmin = cut_problem(eos, alpha_min(eos));
  REQUIRE(qmin.has_value());
  CHECK(qmin->links[0].bounds == Interval(1, 8));
  CHECK(qmin->requirement(0, 1) == Interval(1, 5));
  CHECK(qmin->requirement(1, 2) == Interval(-6, 4));
}

TEST_CASE("schedule preference is the minimum local preference") {
  auto eos = testutil::load_fixture("eos.stppu");
  Schedule s;  // SC=0, SA=2, EA=7, EC=5
  s.values = {{0, 0}, {1, 2}, {2, 7}, {3, 5}};
  CHECK(std::get<Level>(schedule_preference(s, eos)) == 6);

  Schedule s2;  // SC=0, SA=4, EA=9, EC=5
  s2.values = {{0, 0}, {1, 4}, {2, 9}, {3, 5}};
  CHECK(std::get<Level>(schedule_preference(s2, eos)) == 8);

  STPP flat;
  flat.n = 2;
  flat.grid.denom = 10;
  flat.constraints.push_back(SoftConstraint{
      0, 1, SemiConvexFn::constant(Interval(0, 9), 10),
      ConstraintKind::requirement});
  Schedule s3;
  s3.values = {{0, 0}, {1, 4}};
  CHECK(std::get<Level>(schedule_preference(s3, flat)) == 10);
  Schedule s4;
  s4.values = {{0, 0}, {1, 12}};
  CHECK(std::holds_alternative<ConstraintViolation>(
      schedule_preference(s4, flat)));
}

TEST_CASE("chop solving on the fixtures") {
  auto fail5 = testutil::load_fixture("fail5.stppu");
  auto r = solve_stpp(fail5.as_stpp());
  REQUIRE(std::holds_alternative<StppSolution>(r));
  CHECK(std::get<StppSolution>(r).opt == 10);

  auto eos = testutil::load_fixture("eos_triangle.stppu");
  auto r2 = solve_stpp(eos.as_stpp());
  REQUIRE(std::holds_alternative<StppSolution>(r2));
  CHECK(std::get<StppSolution>(r2).opt == 10);
}

TEST_CASE("chop level is capped by a constructed bottleneck") {
  // Two constraints whose top-preference zones cannot meet: offsets near 0
  // are preferred on one edge, offsets near 6 on the chain closing it.
  STPP p;
  p.n = 3;
  p.grid.denom = 10;
  p.constraints.push_back(SoftConstraint{
      0, 1, make_fn(Interval(0, 6), {{0, 10}, {1, 3}}),
      ConstraintKind::requirement});
  p.constraints.push_back(SoftConstraint{
      1, 2, make_fn(Interval(0, 6), {{0, 10}, {1, 3}}),
      ConstraintKind::requirement});
  p.constraints.push_back(SoftConstraint{
      0, 2, make_fn(Interval(2, 6), {{2, 3}, {6, 10}}),
      ConstraintKind::requirement});
  auto r = solve_stpp(p);
  REQUIRE(std::holds_alternative<StppSolution>(r));
  CHECK(std::get<StppSolution>(r).opt == 3);
}

TEST_CASE("cuts are nested") {
  std::mt19937_64 rng(29);
  auto draw = [&](TimeUnit lo, TimeUnit hi) {
    return lo + TimeUnit(rng() % std::uint64_t(hi - lo + 1));
  };
  for (int round = 0; round < 1000; ++round) {
    TimeUnit lo = draw(-5, 5);
    Interval dom(lo, lo + draw(0, 8));
    SemiConvexFn f;
    f.domain = dom;
    TimeUnit peak = draw(dom.lo, dom.hi);
    Level v = 10;
    std::vector<Level> lv(size_t(dom.hi - dom.lo + 1), 0);
    lv[size_t(peak - dom.lo)] = 10;
    for (TimeUnit x = peak - 1; x >= dom.lo; --x)
      lv[size_t(x - dom.lo)] = v = std::max(0, v - int(draw(0, 3)));
    v = 10;
    for (TimeUnit x = peak + 1; x <= dom.hi; ++x)
      lv[size_t(x - dom.lo)] = v = std::max(0, v - int(draw(0, 3)));
    for (TimeUnit x = dom.lo; x <= dom.hi; ++x)
      if (x == dom.lo || lv[size_t(x - dom.lo)] != lv[size_t(x - dom.lo - 1)])
        f.steps.emplace_back(x, lv[size_t(x - dom.lo)]);
    REQUIRE(!validate_semiconvex(f));
    for (Level a = 0; a < 10; ++a) {
      auto wide = alpha_cut(f, a);
      auto tight = alpha_cut(f, a + 1);
      if (!tight) continue;
      REQUIRE(wide.has_value());
      CHECK(wide->lo <= tight->lo);
      CHECK(tight->hi <= wide->hi);
    }
  }
}

TEST_CASE("preference of a schedule matches cut membership") {
  auto eos = testutil::load_fixture("eos_triangle.stppu");
  auto stpp = eos.as_stpp();
  for (TimeUnit sa = 1; sa <= 5; ++sa)
    for (TimeUnit ec = 1; ec <= 8; ++ec) {
      Schedule s;
      s.values = {{0, 0}, {1, sa}, {2, ec}};
      auto pref = schedule_preference(s, stpp);
      for (Level a = 0; a <= 10; ++a) {
        auto cut = cut_problem(stpp, a);
        bool in_cut = cut.has_value() && satisfies(s, *cut);
        bool high_enough = std::holds_alternative<Level>(pref) &&
                           std::get<Level>(pref) >= a;
        CHECK(in_cut == high_enough);
      }
    }
}

TEST_CASE("chop optimum equals brute force over schedules") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 30; ++round) {
    GenSpec spec;
    spec.n = 4;
    spec.contingent_count = 0;
    spec.span = 4;
    spec.denom = 6;
    spec.seed = 1000 + std::uint64_t(round);
    STPPU p = gen_random(spec);
    STPP stpp = p.as_stpp();
    auto r = solve_stpp(stpp);

    // Any satisfying schedule lies within the minimal network of the
    // problem viewed as a hard STP, so those ranges bound the search.
    auto closed = close_distances(p.hard_view().as_stp());
    Level best = -1;
    if (std::holds_alternative<DistanceMatrix>(closed)) {
      const auto& dm = std::get<DistanceMatrix>(closed);
      std::vector<Interval> range;
      for (int i = 0; i < p.n; ++i)
        range.push_back(i == 0 ? Interval(0, 0) : dm.interval(0, i));
      std::vector<TimeUnit> v;
      for (const auto& iv : range) v.push_back(iv.lo);
      while (true) {
        Schedule s;
        for (int i = 0; i < p.n; ++i) s.values[i] = v[size_t(i)];
        auto pref = schedule_preference(s, stpp);
        if (std::holds_alternative<Level>(pref))
          best = std::max(best, std::get<Level>(pref));
        size_t i = 1;
        for (; i < v.size(); ++i) {
          if (v[i] < range[i].hi) {
            ++v[i];
            break;
          }
          v[i] = range[i].lo;
        }
        if (i == v.size()) break;
      }
    }
    if (best < 0) {
      CHECK(std::holds_alternative<Inconsistent>(r));
    } else {
      REQUIRE(std::holds_alternative<StppSolution>(r));
      CHECK(std::get<StppSolution>(r).opt == best);
    }
  }
}

TEST_CASE("optimal solutions extend the minimal network backtrack-free") {
  auto eos = testutil::load_fixture("eos_triangle.stppu");
  auto r = solve_stpp(eos.as_stpp());
  REQUIRE(std::holds_alternative<StppSolution>(r));
  const auto& sol = std::get<StppSolution>(r);
  auto sols = testutil::enumerate_solutions(sol.minimal_at_opt, -6, 12);
  CHECK(!sols.empty());
  for (const auto& s : sols)
    CHECK(std::get<Level>(schedule_preference(s, eos.as_stpp())) == sol.opt);
}
