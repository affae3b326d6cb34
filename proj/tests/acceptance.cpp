// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances and time budget in code.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "stppu/io.hpp"
#include "stppu/oracle.hpp"

using namespace stppu;

namespace {

int failures = 0;
std::vector<std::string> notes;

void note(const std::string& s) { notes.push_back(s); }

double run_criterion(int number, const std::string& label,
                     const std::function<bool()>& body, double budget_s) {
  notes.clear();
  auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  try {
    ok = body();
  } catch (const std::exception& e) {
    note(std::string("exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();
  bool in_budget = secs <= budget_s;
  if (!ok || !in_budget) ++failures;
  std::printf("%s criterion %d: %s (%.2fs, budget %.0fs)\n",
              ok && in_budget ? "PASS" : "FAIL", number, label.c_str(), secs,
              budget_s);
  if (!ok || !in_budget)
    for (const auto& n : notes) std::printf("       %s\n", n.c_str());
  return secs;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

STPPU load(const std::string& name) {
  auto parsed =
      parse_problem(read_file(std::string(STPPU_FIXTURE_DIR) + "/" + name));
  return std::get<STPPU>(parsed);
}

bool expect(bool cond, const std::string& msg) {
  if (!cond) note(msg);
  return cond;
}

std::string iv_str(const std::optional<Interval>& iv) {
  return iv ? to_string(*iv) : "(none)";
}

// ---------------------------------------------------------------- 1
bool criterion_eos_tables() {
  STPPU eos = load("eos_triangle.stppu");
  struct Row {
    Level level;
    Interval ec, sa, sa_ec;          // cut
    Interval pc_ec, pc_sa, pc_sa_ec; // after path consistency
    Interval strong;                 // executable network, SC -> SA
  };
  const Row rows[] = {
      {5, {1, 8}, {1, 5}, {-6, 4}, {1, 8}, {1, 5}, {-4, 4}, {4, 5}},
      {6, {1, 7}, {1, 5}, {-6, 4}, {1, 7}, {1, 5}, {-4, 4}, {3, 5}},
      {7, {1, 6}, {1, 5}, {-5, 2}, {1, 6}, {1, 5}, {-4, 2}, {4, 5}},
      {8, {1, 5}, {1, 5}, {-4, 1}, {1, 5}, {1, 5}, {-4, 1}, {4, 5}},
      {9, {1, 4}, {1, 5}, {-3, 0}, {1, 4}, {1, 5}, {-3, 0}, {4, 4}},
      {10, {1, 2}, {1, 3}, {-2, -1}, {1, 2}, {2, 3}, {-2, -1}, {3, 3}},
  };
  bool ok = true;
  for (const auto& row : rows) {
    auto cut = cut_problem(eos, row.level);
    if (!expect(cut.has_value(), "cut vanished")) return false;
    ok &= expect(cut->links[0].bounds == row.ec &&
                     cut->requirement(0, 1) == row.sa &&
                     cut->requirement(1, 2) == row.sa_ec,
                 "cut mismatch at level " + std::to_string(row.level));
    auto pc = path_consistent(*cut);
    if (!expect(pc.has_value(), "cut inconsistent")) return false;
    ok &= expect(pc->links[0].bounds == row.pc_ec &&
                     pc->requirement(0, 1) == row.pc_sa &&
                     pc->requirement(1, 2) == row.pc_sa_ec,
                 "minimal network mismatch at level " +
                     std::to_string(row.level));
    auto strong = check_strong(*pc);
    if (!expect(std::holds_alternative<MinimalExecutableSTP>(strong),
                "strong rewrite failed at level " + std::to_string(row.level)))
      return false;
    const auto& m = std::get<MinimalExecutableSTP>(strong);
    auto edge = m.stp.get(m.index_of.at(0), m.index_of.at(1));
    ok &= expect(edge == row.strong,
                 "executable network mismatch at level " +
                     std::to_string(row.level) + ": got " + iv_str(edge));
  }
  return ok;
}

// ---------------------------------------------------------------- 2
bool criterion_best_sc_eos() {
  auto rep = best_sc(load("eos.stppu"));
  bool ok = expect(rep.verdict == VerdictKind::at_level && rep.level == 9,
                   "expected the 9/10 level");
  ok &= expect(rep.stop == StopEvent::e4_combine_failed, "expected stop E4");
  if (rep.sc_witness) {
    const auto& w = rep.sc_witness->network;
    auto edge = w.stp.get(w.index_of.at(0), w.index_of.at(1));
    ok &= expect(edge == Interval(4, 4),
                 "expected witness [4,4], got " + iv_str(edge));
  } else {
    ok = expect(false, "missing witness");
  }
  return ok;
}

// ---------------------------------------------------------------- 3
bool criterion_fail5_dynamic() {
  STPPU fail5 = load("fail5.stppu");
  struct Row {
    Level level;
    Interval ab;
    TimeUnit wait;  // -1 none
  };
  const Row rows[] = {
      {10, {3, 3}, -1}, {9, {3, 4}, 3}, {8, {3, 5}, 3},
      {7, {3, 6}, 3},   {6, {3, 7}, 3}, {5, {3, 7}, 4},
  };
  bool ok = true;
  for (const auto& row : rows) {
    auto cut = cut_problem(fail5, row.level);
    auto pc = path_consistent(*cut);
    auto dc = check_dynamic(*pc);
    if (!expect(std::holds_alternative<AnnotatedSTPU>(dc),
                "level " + std::to_string(row.level) + " not DC"))
      return false;
    const auto& a = std::get<AnnotatedSTPU>(dc);
    ok &= expect(a.network.requirement(0, 1) == row.ab,
                 "interval mismatch at level " + std::to_string(row.level) +
                     ": got " + iv_str(a.network.requirement(0, 1)));
    TimeUnit w = a.effective_wait(0, 1);
    ok &= expect(row.wait < 0 ? w == -kInf : w == row.wait,
                 "wait mismatch at level " + std::to_string(row.level));
  }
  auto rep = best_dc(fail5);
  ok &= expect(rep.verdict == VerdictKind::at_level && rep.level == 9,
               "expected 9/10-DC, not ODC");
  auto oracle = oracle_dc_level(fail5, SearchBounds{18, 4000000});
  ok &= expect(oracle.kind == OracleKind::at_level && oracle.level == 9,
               "oracle disagrees on the 9/10 level");
  return ok;
}

// ---------------------------------------------------------------- 4
bool criterion_owc() {
  bool ok = expect(owc_check(load("eos.stppu")), "satellite should be OWC");
  ok &= expect(owc_check(load("fail5.stppu")), "maneuver should be OWC");
  ok &= expect(!owc_check(load("not_wc.stppu")),
               "coincidence fixture should not be OWC");
  return ok;
}

STPPU lattice_instance(std::uint64_t seed) {
  GenSpec spec;
  spec.n = 3 + int(seed % 3);  // 3..5
  spec.contingent_count = 1 + int(seed % 2);
  spec.span = 3 + TimeUnit(seed % 2);  // interval widths stay within 8
  spec.denom = 3 + int(seed % 3);      // 3..5
  spec.density_percent = 50;
  spec.seed = 777000 + seed;
  return gen_random(spec);
}

// Fresh per-level predicates, used to check that reported levels are
// exactly the downward-closed frontier.
bool sc_holds_at(const STPPU& p, Level a) {
  Level amin = alpha_min(p);
  auto q0 = cut_problem(p, amin);
  auto first = check_strong(*q0);
  if (!std::holds_alternative<MinimalExecutableSTP>(first)) return false;
  STP acc = std::get<MinimalExecutableSTP>(first).stp;
  for (Level b = amin + 1; b <= std::min(a, p.grid.top()); ++b) {
    auto cut = cut_problem(p, b);
    auto pc = cut ? path_consistent(*cut) : std::nullopt;
    if (!pc) return true;  // no schedules at this level or above
    auto strong = check_strong(*pc);
    if (!std::holds_alternative<MinimalExecutableSTP>(strong)) return false;
    auto met = intersect(acc, std::get<MinimalExecutableSTP>(strong).stp);
    if (std::holds_alternative<EmptyIntersection>(met)) return false;
    auto remin = minimal_network(std::get<STP>(met));
    if (std::holds_alternative<NegativeCycle>(remin)) return false;
    acc = std::get<STP>(remin);
  }
  return true;
}

bool dc_holds_at(const STPPU& p, Level a) {
  Level amin = alpha_min(p);
  auto q0 = cut_problem(p, amin);
  auto first = check_dynamic(*q0);
  if (!std::holds_alternative<AnnotatedSTPU>(first)) return false;
  AnnotatedSTPU acc = std::get<AnnotatedSTPU>(first);
  for (Level b = amin + 1; b <= std::min(a, p.grid.top()); ++b) {
    auto cut = cut_problem(p, b);
    auto pc = cut ? path_consistent(*cut) : std::nullopt;
    if (!pc) return true;
    auto dc = check_dynamic(*pc);
    if (!std::holds_alternative<AnnotatedSTPU>(dc)) return false;
    auto merged = merge(acc, std::get<AnnotatedSTPU>(dc));
    if (std::holds_alternative<MergeFailed>(merged)) return false;
    acc = std::get<AnnotatedSTPU>(merged);
  }
  return true;
}

// ---------------------------------------------------------------- 5
bool criterion_lattice() {
  int violations = 0;
  int nontrivial = 0, controllable = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    STPPU p = lattice_instance(seed);
    auto sc = best_sc(p);
    auto dc = best_dc(p);
    int sc_rank = sc.verdict == VerdictKind::none ? -1 : sc.level;
    int dc_rank = dc.verdict == VerdictKind::none ? -1 : dc.level;
    if (!p.links.empty()) ++nontrivial;
    if (dc_rank >= 0) ++controllable;
    if (sc_rank > dc_rank) {
      ++violations;
      note("sc above dc on seed " + std::to_string(seed));
    }
    if (dc_rank >= 0 && !owc_check(p)) {
      ++violations;
      note("dc level without owc on seed " + std::to_string(seed));
    }
    // A verdict is downward closed; above the reported level the per-level
    // machinery keeps succeeding only in the optimal case, where levels
    // above the optimum collapse into it.
    for (Level a = alpha_min(p); a <= p.grid.top(); ++a) {
      bool sc_expect = sc_rank >= 0 &&
                       (a <= sc_rank || sc.verdict == VerdictKind::optimal);
      bool dc_expect = dc_rank >= 0 &&
                       (a <= dc_rank || dc.verdict == VerdictKind::optimal);
      if (sc_holds_at(p, a) != sc_expect) {
        ++violations;
        note("sc frontier mismatch on seed " + std::to_string(seed) +
             " level " + std::to_string(a));
      }
      if (dc_holds_at(p, a) != dc_expect) {
        ++violations;
        note("dc frontier mismatch on seed " + std::to_string(seed) +
             " level " + std::to_string(a));
      }
    }
  }
  std::printf("       %d instances with uncertainty, %d with a dc level\n",
              nontrivial, controllable);
  return expect(violations == 0,
                std::to_string(violations) + " lattice violations");
}

// Latest completion time of the preference-free problem; the oracle
// horizon must cover it for the enumeration to be exhaustive.
TimeUnit makespan(const STPPU& p) {
  auto closed = close_distances(p.hard_view().as_stp());
  if (std::holds_alternative<NegativeCycle>(closed)) return 0;
  const auto& d = std::get<DistanceMatrix>(closed);
  TimeUnit h = 0;
  for (int i = 1; i < p.n; ++i) {
    if (d.at(0, i) >= kInf) return kInf;
    h = std::max(h, d.at(0, i));
  }
  return h;
}

STPPU suite_instance(GenSpec spec, TimeUnit horizon) {
  for (;; spec.seed += 100000) {
    STPPU p = gen_random(spec);
    if (makespan(p) <= horizon) return p;
  }
}

STPPU sc_suite_instance(std::uint64_t seed) {
  GenSpec spec;
  spec.n = 3 + int(seed % 3);  // 3..5
  spec.contingent_count = 1 + int(seed % 2);
  spec.span = 2 + TimeUnit(seed % 2);
  spec.denom = 3 + int(seed % 4);  // 3..6
  spec.density_percent = 50;
  spec.seed = 555000 + seed;
  return suite_instance(spec, 12);
}

STPPU dc_suite_instance(std::uint64_t seed) {
  GenSpec spec;
  spec.n = 3 + int(seed % 2);  // 3..4
  spec.contingent_count = 1 + int(seed % 2);
  spec.span = 2 + TimeUnit(seed % 2);
  spec.denom = 3 + int(seed % 3);  // 3..5
  spec.density_percent = 50;
  spec.seed = 666000 + seed;
  return suite_instance(spec, 10);
}

// ---------------------------------------------------------------- 6
bool criterion_oracle_equivalence() {
  int disagreements = 0;
  int optimal_count = 0, level_count = 0, none_count = 0;
  auto tally = [&](const ControllabilityReport& rep) {
    switch (rep.verdict) {
      case VerdictKind::optimal:
        ++optimal_count;
        break;
      case VerdictKind::at_level:
        ++level_count;
        break;
      case VerdictKind::none:
        ++none_count;
        break;
    }
  };
  auto check_pair = [&](const char* what, std::uint64_t seed,
                        const ControllabilityReport& rep,
                        const OracleVerdict& oracle) {
    tally(rep);
    if (oracle.kind == OracleKind::inconclusive) {
      ++disagreements;
      note(std::string(what) + " oracle inconclusive on seed " +
           std::to_string(seed));
      return;
    }
    bool same = false;
    switch (rep.verdict) {
      case VerdictKind::optimal:
        same = oracle.kind == OracleKind::optimal;
        break;
      case VerdictKind::at_level:
        same = oracle.kind == OracleKind::at_level && oracle.level == rep.level;
        break;
      case VerdictKind::none:
        same = oracle.kind == OracleKind::none;
        break;
    }
    if (!same) {
      ++disagreements;
      note(std::string(what) + " disagreement on seed " +
           std::to_string(seed));
    }
  };
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    STPPU p = sc_suite_instance(seed);
    check_pair("sc", seed, best_sc(p), oracle_sc_level(p, {12, 4000000}));
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    STPPU p = dc_suite_instance(seed);
    check_pair("dc", seed, best_dc(p), oracle_dc_level(p, {10, 4000000}));
  }
  std::printf("       verdict mix: %d optimal, %d at-level, %d none\n",
              optimal_count, level_count, none_count);
  return expect(disagreements == 0,
                std::to_string(disagreements) + " oracle disagreements");
}

// ---------------------------------------------------------------- 7
bool criterion_execution_guarantee() {
  int failures_here = 0;
  int driven = 0, runs = 0;
  auto drive = [&](const STPPU& p, std::uint64_t seed) {
    auto rep = best_dc(p);
    if (rep.verdict == VerdictKind::none) return;
    ++driven;
    auto sits = enumerate_situations(p, SearchBounds{12, 100000});
    if (std::holds_alternative<Inconclusive>(sits)) return;
    for (const auto& omega : std::get<std::vector<Situation>>(sits)) {
      NatureModel nature;
      nature.mode = NatureMode::scripted;
      nature.scripted = omega;
      ++runs;
      auto run = odc_execute(*rep.dc_witness, nature);
      if (!std::holds_alternative<OdcOutcome>(run)) {
        ++failures_here;
        note("execution failed on seed " + std::to_string(seed) + ": " +
             std::get<ExecutionFailure>(run).reason);
        return;
      }
      Level achieved = std::get<OdcOutcome>(run).achieved;
      Level opt = std::get<Level>(projection_opt(p, omega));
      bool good = rep.verdict == VerdictKind::optimal
                      ? achieved == opt
                      : (opt <= rep.level ? achieved == opt
                                          : achieved >= rep.level);
      if (!good) {
        ++failures_here;
        note("guarantee miss on seed " + std::to_string(seed) + ": achieved " +
             std::to_string(achieved) + ", opt " + std::to_string(opt) +
             ", level " + std::to_string(rep.level));
        return;
      }
    }
    // Hard dispatch on the preference-free network.
    auto hard = check_dynamic(p.hard_view());
    if (!std::holds_alternative<AnnotatedSTPU>(hard)) return;
    for (const auto& omega : std::get<std::vector<Situation>>(sits)) {
      NatureModel nature;
      nature.mode = NatureMode::scripted;
      nature.scripted = omega;
      auto run = dc_execute(std::get<AnnotatedSTPU>(hard), nature);
      if (!std::holds_alternative<ExecutionResult>(run)) {
        ++failures_here;
        note("hard dispatch failed on seed " + std::to_string(seed));
        return;
      }
    }
  };
  for (std::uint64_t seed = 0; seed < 100; ++seed) drive(sc_suite_instance(seed), seed);
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    drive(dc_suite_instance(seed), 100000 + seed);
  std::printf("       %d instances driven, %d dispatches\n", driven, runs);
  return expect(failures_here == 0,
                std::to_string(failures_here) + " execution failures");
}

// ---------------------------------------------------------------- 8
bool criterion_stp_core() {
  std::mt19937_64 rng(2024);
  auto draw = [&](TimeUnit lo, TimeUnit hi) {
    return lo + TimeUnit(rng() % std::uint64_t(hi - lo + 1));
  };
  int violations = 0;
  for (int round = 0; round < 500; ++round) {
    STP stp(4);
    for (int i = 1; i < 4; ++i) {
      TimeUnit lo = draw(0, 3);
      stp.add(int(draw(0, i - 1)), i, Interval(lo, lo + draw(0, 3)));
    }
    if (draw(0, 1)) {
      TimeUnit lo = draw(-3, 3);
      if (!stp.get(1, 3)) stp.add(1, 3, Interval(lo, lo + draw(0, 3)));
    }
    bool consistent =
        std::holds_alternative<DistanceMatrix>(close_distances(stp));
    bool any = false;
    std::vector<TimeUnit> v(4, 0);
    while (true) {
      Schedule s;
      for (int i = 0; i < 4; ++i) s.values[i] = v[size_t(i)];
      if (satisfies(s, stp)) {
        any = true;
        break;
      }
      int i = 1;
      for (; i < 4; ++i) {
        if (v[size_t(i)] < 10) {
          ++v[size_t(i)];
          break;
        }
        v[size_t(i)] = 0;
      }
      if (i == 4) break;
    }
    if (consistent != any) ++violations;
    if (!consistent) continue;
    auto m = std::get<STP>(minimal_network(stp));
    if (!(std::get<STP>(minimal_network(m)) == m)) ++violations;
    if (!satisfies(earliest_solution(m), m)) ++violations;
    if (!satisfies(latest_solution(m), m)) ++violations;
  }
  return expect(violations == 0,
                std::to_string(violations) + " core violations");
}

// ---------------------------------------------------------------- 9
bool criterion_scaling() {
  // Same instance at doubled granularity: identical breakpoints, levels
  // scaled by two, so only the number of scanned levels changes. The
  // instance stays strongly controllable at every level, which keeps the
  // level loop running from bottom to top.
  auto build = [&](int denom_scale) {
    const int denom = 12 * denom_scale;
    STPPU p;
    p.n = 6;
    p.contingent = {false, false, false, false, false, true};
    p.grid.denom = denom;
    for (int i = 0; i < 6; ++i) p.names.push_back("T" + std::to_string(i));
    auto ramp = [&](Interval dom) {
      // One grid level (of the base granularity) lost per unit offset.
      SemiConvexFn f;
      f.domain = dom;
      for (TimeUnit x = dom.lo; x <= dom.hi; ++x)
        f.steps.emplace_back(x, denom - int(x - dom.lo) * denom_scale);
      return f;
    };
    p.links.push_back(SoftLink{0, 5, ramp(Interval(1, 9))});
    for (int i = 1; i <= 4; ++i)
      p.constraints.push_back(SoftConstraint{
          0, i, SemiConvexFn::constant(Interval(0, 20), denom),
          ConstraintKind::requirement});
    p.constraints.push_back(SoftConstraint{
        1, 5, SemiConvexFn::constant(Interval(-20, 20), denom),
        ConstraintKind::requirement});
    p.validate();
    return p;
  };
  STPPU base = build(1);
  STPPU doubled = build(2);
  {
    auto rep = best_sc(base);
    if (!expect(rep.verdict == VerdictKind::optimal,
                "scaling instance must scan every level"))
      return false;
  }
  auto time_runs = [&](const STPPU& p) {
    for (int warm = 0; warm < 50; ++warm) (void)best_sc(p);
    std::vector<double> samples;
    for (int run = 0; run < 5; ++run) {
      auto t0 = std::chrono::steady_clock::now();
      for (int k = 0; k < 400; ++k) (void)best_sc(p);
      samples.push_back(std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count());
    }
    std::sort(samples.begin(), samples.end());
    return samples[2];
  };
  double t1 = time_runs(base);
  double t2 = time_runs(doubled);
  double ratio = t2 / t1;
  note("median base " + std::to_string(t1) + "s, doubled " +
       std::to_string(t2) + "s, ratio " + std::to_string(ratio));
  bool ok = ratio <= 2.5;
  if (!ok)
    return expect(false, "ratio " + std::to_string(ratio) + " above 2.5");
  std::printf("       denom scaling ratio %.2f\n", ratio);
  return true;
}

}  // namespace

int main() {
  run_criterion(1, "satellite per-level tables reproduced exactly",
                criterion_eos_tables, 1.0);
  run_criterion(2, "satellite strong verdict 9/10 with witness [4,4]",
                criterion_best_sc_eos, 1.0);
  run_criterion(3, "maneuver per-level dynamic table and 9/10 verdict",
                criterion_fail5_dynamic, 5.0);
  run_criterion(4, "weak controllability verdicts", criterion_owc, 5.0);
  run_criterion(5, "controllability lattice on 200 random instances",
                criterion_lattice, 60.0);
  run_criterion(6, "oracle equivalence on 150 random instances",
                criterion_oracle_equivalence, 600.0);
  run_criterion(7, "execution guarantees across all situations",
                criterion_execution_guarantee, 600.0);
  run_criterion(8, "core network properties on 500 instances",
                criterion_stp_core, 30.0);
  run_criterion(9, "granularity doubling stays within factor 2.5",
                criterion_scaling, 120.0);
  if (failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criteria failed\n", failures);
  return 1;
}
