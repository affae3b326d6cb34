#include "stppu/io.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace stppu {

namespace {

std::vector<std::string> tokens_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool parse_int(const std::string& s, TimeUnit& out) {
  if (s.empty()) return false;
  size_t used = 0;
  try {
    out = std::stoll(s, &used);
  } catch (...) {
    return false;
  }
  return used == s.size();
}

// "[lo,hi]"
bool parse_interval(const std::string& s, Interval& out) {
  if (s.size() < 5 || s.front() != '[' || s.back() != ']') return false;
  auto comma = s.find(',');
  if (comma == std::string::npos) return false;
  TimeUnit lo, hi;
  if (!parse_int(s.substr(1, comma - 1), lo)) return false;
  if (!parse_int(s.substr(comma + 1, s.size() - comma - 2), hi)) return false;
  out = Interval(lo, hi);
  return lo <= hi;
}

}  // namespace

ParseProblemResult parse_problem(const std::string& text) {
  STPPU p;
  std::map<std::string, int> index_of;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  bool header_seen = false;
  std::set<std::pair<int, int>> used_pairs;

  while (std::getline(is, raw)) {
    ++lineno;
    auto toks = tokens_of(strip_comment(raw));
    if (toks.empty()) continue;
    if (!header_seen) {
      if (toks.size() != 1 || toks[0] != "stppu-v1")
        return ParseError{lineno, "expected header 'stppu-v1'"};
      header_seen = true;
      continue;
    }
    if (toks[0] == "granularity") {
      TimeUnit d;
      if (toks.size() != 2 || !parse_int(toks[1], d) || d < 1)
        return ParseError{lineno, "granularity needs a positive integer"};
      if (!p.constraints.empty() || !p.links.empty())
        return ParseError{lineno, "granularity must precede constraints"};
      p.grid.denom = int(d);
      continue;
    }
    if (toks[0] == "timepoint") {
      if (toks.size() != 3 ||
          (toks[2] != "executable" && toks[2] != "contingent"))
        return ParseError{lineno,
                          "expected: timepoint <name> executable|contingent"};
      if (index_of.count(toks[1]))
        return ParseError{lineno, "duplicate time-point '" + toks[1] + "'"};
      if (p.n == 0 && toks[2] != "executable")
        return ParseError{lineno, "the first time-point must be executable"};
      index_of[toks[1]] = p.n;
      p.names.push_back(toks[1]);
      p.contingent.push_back(toks[2] == "contingent");
      ++p.n;
      continue;
    }
    if (toks[0] == "constraint") {
      if (toks.size() < 7 || (toks[1] != "req" && toks[1] != "ctg") ||
          toks[5] != "pref")
        return ParseError{
            lineno,
            "expected: constraint req|ctg <from> <to> [lo,hi] pref x:k ..."};
      auto from_it = index_of.find(toks[2]);
      auto to_it = index_of.find(toks[3]);
      if (from_it == index_of.end() || to_it == index_of.end())
        return ParseError{lineno, "unknown time-point in constraint"};
      Interval iv;
      if (!parse_interval(toks[4], iv))
        return ParseError{lineno, "bad interval '" + toks[4] + "'"};
      SemiConvexFn fn;
      fn.domain = iv;
      for (size_t i = 6; i < toks.size(); ++i) {
        auto colon = toks[i].find(':');
        TimeUnit off, lvl;
        if (colon == std::string::npos ||
            !parse_int(toks[i].substr(0, colon), off) ||
            !parse_int(toks[i].substr(colon + 1), lvl))
          return ParseError{lineno, "bad preference step '" + toks[i] + "'"};
        if (lvl < 0 || lvl > p.grid.denom)
          return ParseError{lineno, "preference level outside grid"};
        fn.steps.emplace_back(off, Level(lvl));
      }
      if (!fn.well_formed())
        return ParseError{
            lineno,
            "preference steps must be increasing and start at the lower bound"};
      if (auto bad = validate_semiconvex(fn))
        return ParseError{lineno, "constraint " + toks[2] + "->" + toks[3] +
                                      ": preference not semi-convex (level " +
                                      std::to_string(bad->level) + "/" +
                                      std::to_string(p.grid.denom) +
                                      " splits)"};
      int from = from_it->second, to = to_it->second;
      if (from == to) return ParseError{lineno, "self-loop constraint"};
      auto key = std::minmax(from, to);
      if (used_pairs.count({key.first, key.second}))
        return ParseError{lineno, "duplicate constraint on " + toks[2] + "," +
                                      toks[3]};
      used_pairs.insert({key.first, key.second});
      if (toks[1] == "ctg") {
        if (p.contingent[size_t(from)] || !p.contingent[size_t(to)])
          return ParseError{
              lineno, "contingent link must run executable -> contingent"};
        for (const auto& l : p.links)
          if (l.point == to)
            return ParseError{lineno, "two contingent links end at '" +
                                          toks[3] + "'"};
        p.links.push_back(SoftLink{from, to, fn});
      } else {
        p.constraints.push_back(
            SoftConstraint{from, to, fn, ConstraintKind::requirement});
      }
      continue;
    }
    return ParseError{lineno, "unknown directive '" + toks[0] + "'"};
  }
  if (!header_seen) return ParseError{0, "empty document"};
  if (p.n == 0) return ParseError{0, "no time-points declared"};
  for (int i = 0; i < p.n; ++i)
    if (p.contingent[size_t(i)]) {
      bool linked = false;
      for (const auto& l : p.links) linked = linked || l.point == i;
      if (!linked)
        return ParseError{0, "contingent point '" + p.names[size_t(i)] +
                                 "' has no link"};
    }
  try {
    p.validate();
  } catch (const std::exception& e) {
    return ParseError{0, e.what()};
  }
  return p;
}

namespace {

std::string fn_to_string(const SemiConvexFn& fn) {
  std::ostringstream os;
  os << '[' << fn.domain.lo << ',' << fn.domain.hi << "] pref";
  for (const auto& [off, lvl] : fn.steps) os << ' ' << off << ':' << lvl;
  return os.str();
}

}  // namespace

std::string serialize_problem(const STPPU& p) {
  std::ostringstream os;
  os << "stppu-v1\n";
  os << "granularity " << p.grid.denom << "\n";
  for (int i = 0; i < p.n; ++i)
    os << "timepoint " << p.name_of(i) << ' '
       << (p.is_contingent(i) ? "contingent" : "executable") << "\n";
  for (const auto& l : p.links)
    os << "constraint ctg " << p.name_of(l.activation) << ' '
       << p.name_of(l.point) << ' ' << fn_to_string(l.pref) << "\n";
  for (const auto& c : p.constraints)
    os << "constraint req " << p.name_of(c.from) << ' ' << p.name_of(c.to)
       << ' ' << fn_to_string(c.pref) << "\n";
  return os.str();
}

ParseNatureResult parse_nature(const std::string& text, const STPPU& problem) {
  Situation s;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    auto toks = tokens_of(strip_comment(raw));
    if (toks.empty()) continue;
    if (toks[0] != "observe" || toks.size() != 3)
      return ParseError{lineno, "expected: observe <contingent> <duration>"};
    int point = -1;
    for (int i = 0; i < problem.n; ++i)
      if (problem.name_of(i) == toks[1]) point = i;
    if (point < 0 || !problem.is_contingent(point))
      return ParseError{lineno, "'" + toks[1] + "' is not a contingent point"};
    TimeUnit d;
    if (!parse_int(toks[2], d))
      return ParseError{lineno, "bad duration '" + toks[2] + "'"};
    const SoftLink* link = nullptr;
    for (const auto& l : problem.links)
      if (l.point == point) link = &l;
    if (!link->interval().contains(d))
      return ParseError{lineno, "duration " + std::to_string(d) +
                                    " outside contingent interval " +
                                    to_string(link->interval())};
    if (s.durations.count(point))
      return ParseError{lineno, "duplicate observation for '" + toks[1] + "'"};
    s.durations[point] = d;
  }
  for (const auto& l : problem.links)
    if (!s.durations.count(l.point))
      return ParseError{0, "incomplete situation: missing '" +
                               problem.name_of(l.point) + "'"};
  return s;
}

std::string serialize_nature(const Situation& s, const STPPU& problem) {
  std::ostringstream os;
  for (const auto& [point, d] : s.durations)
    os << "observe " << problem.name_of(point) << ' ' << d << "\n";
  return os.str();
}

namespace {

// Platform-independent bounded draw.
TimeUnit draw(std::mt19937_64& rng, TimeUnit lo, TimeUnit hi) {
  return lo + TimeUnit(rng() % std::uint64_t(hi - lo + 1));
}

SemiConvexFn gen_pref(std::mt19937_64& rng, Interval dom, int denom) {
  // Peak plateau at the grid top, non-increasing steps outward.
  TimeUnit peak = draw(rng, dom.lo, dom.hi);
  std::vector<Level> level(size_t(dom.hi - dom.lo + 1), 0);
  level[size_t(peak - dom.lo)] = denom;
  Level v = denom;
  for (TimeUnit x = peak - 1; x >= dom.lo; --x) {
    v = std::max(0L, long(v) - long(draw(rng, 0, 2)));
    level[size_t(x - dom.lo)] = v;
  }
  v = denom;
  for (TimeUnit x = peak + 1; x <= dom.hi; ++x) {
    v = std::max(0L, long(v) - long(draw(rng, 0, 2)));
    level[size_t(x - dom.lo)] = v;
  }
  SemiConvexFn fn;
  fn.domain = dom;
  for (TimeUnit x = dom.lo; x <= dom.hi; ++x)
    if (x == dom.lo || level[size_t(x - dom.lo)] != level[size_t(x - dom.lo - 1)])
      fn.steps.emplace_back(x, level[size_t(x - dom.lo)]);
  return fn;
}

}  // namespace

STPPU gen_random(const GenSpec& spec) {
  if (spec.n < 1 || spec.contingent_count >= spec.n || spec.denom < 1 ||
      spec.span < 1)
    throw std::invalid_argument("infeasible generator spec");
  std::mt19937_64 rng(spec.seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
  STPPU p;
  p.n = spec.n;
  p.grid.denom = spec.denom;
  for (int i = 0; i < spec.n; ++i) p.names.push_back("T" + std::to_string(i));
  p.contingent.assign(size_t(spec.n), false);
  // Contingent points drawn from the tail so an executable always precedes.
  std::vector<int> shuffled;
  for (int i = 1; i < spec.n; ++i) shuffled.push_back(i);
  for (size_t i = shuffled.size(); i > 1; --i)
    std::swap(shuffled[i - 1], shuffled[size_t(draw(rng, 0, TimeUnit(i) - 1))]);
  for (int k = 0; k < spec.contingent_count; ++k)
    p.contingent[size_t(shuffled[size_t(k)])] = true;

  auto pick_exec_below = [&](int i) {
    std::vector<int> cands;
    for (int j = 0; j < i; ++j)
      if (!p.contingent[size_t(j)]) cands.push_back(j);
    return cands[size_t(draw(rng, 0, TimeUnit(cands.size()) - 1))];
  };

  std::set<std::pair<int, int>> used;
  for (int i = 1; i < spec.n; ++i) {
    if (p.contingent[size_t(i)]) {
      int act = pick_exec_below(i);
      TimeUnit lo = draw(rng, 1, spec.span);
      TimeUnit hi = std::min(lo + draw(rng, 0, spec.span - 1), spec.span + 1);
      p.links.push_back(
          SoftLink{act, i, gen_pref(rng, Interval(lo, hi), spec.denom)});
      used.insert(std::minmax(act, i));
    } else {
      // Executable anchor windows are wider than link windows so the
      // dispatcher has room to adapt.
      int anchor = pick_exec_below(i);
      TimeUnit lo = draw(rng, 0, spec.span);
      TimeUnit hi = lo + spec.span + draw(rng, 0, spec.span);
      p.constraints.push_back(SoftConstraint{
          anchor, i, gen_pref(rng, Interval(lo, hi), spec.denom),
          ConstraintKind::requirement});
      used.insert(std::minmax(anchor, i));
    }
  }
  // Extra cross constraints. A requirement edge directly coupling two
  // contingent points is never generated: the per-level machinery only
  // tightens duration boxes, and such couplings make the set of
  // high-optimum situations non-rectangular, where the level scan is a
  // lower bound rather than exact.
  for (int i = 0; i < spec.n; ++i)
    for (int j = i + 1; j < spec.n; ++j) {
      if (used.count({i, j})) continue;
      if (p.contingent[size_t(i)] && p.contingent[size_t(j)]) continue;
      if (draw(rng, 0, 99) >= spec.density_percent) continue;
      TimeUnit lo = draw(rng, -spec.span, spec.span);
      TimeUnit hi = lo + draw(rng, 0, spec.span);
      p.constraints.push_back(SoftConstraint{
          i, j, gen_pref(rng, Interval(lo, hi), spec.denom),
          ConstraintKind::requirement});
      used.insert({i, j});
    }
  p.validate();
  return p;
}

namespace {

using ordered_json = nlohmann::ordered_json;

const char* verdict_name(VerdictKind v) {
  switch (v) {
    case VerdictKind::optimal:
      return "optimal";
    case VerdictKind::at_level:
      return "at_level";
    case VerdictKind::none:
      return "none";
  }
  return "none";
}

const char* stop_name(StopEvent e) {
  switch (e) {
    case StopEvent::none:
      return "";
    case StopEvent::e1_uncontrollable_at_alpha_min:
      return "E1";
    case StopEvent::e2_cut_inconsistent:
      return "E2";
    case StopEvent::e3_level_uncontrollable:
      return "E3";
    case StopEvent::e4_combine_failed:
      return "E4";
  }
  return "";
}

ordered_json constraints_json(const STPU& net, const STPPU& problem) {
  ordered_json arr = ordered_json::array();
  for (const auto& [pair, iv] : net.requirements) {
    ordered_json c;
    c["from"] = problem.name_of(pair.first);
    c["to"] = problem.name_of(pair.second);
    c["lo"] = iv.lo;
    c["hi"] = iv.hi;
    arr.push_back(c);
  }
  return arr;
}

ordered_json waits_json(const WaitMap& waits, const STPPU& problem) {
  ordered_json arr = ordered_json::array();
  for (const auto& [edge, by_c] : waits)
    for (const auto& [c, t] : by_c) {
      ordered_json w;
      w["from"] = problem.name_of(edge.first);
      w["to"] = problem.name_of(edge.second);
      w["contingent"] = problem.name_of(c);
      w["t"] = t;
      arr.push_back(w);
    }
  return arr;
}

}  // namespace

std::string report_to_json(const ControllabilityReport& rep,
                           const STPPU& problem, bool with_timings,
                           double total_ms) {
  ordered_json j;
  switch (rep.property) {
    case ControlProperty::sc:
      j["property"] = "osc";
      break;
    case ControlProperty::dc:
      j["property"] = "odc";
      break;
    case ControlProperty::wc:
      j["property"] = "owc";
      break;
  }
  if (rep.property == ControlProperty::wc)
    j["verdict"] = rep.wc ? "true" : "false";
  else
    j["verdict"] = verdict_name(rep.verdict);
  j["level_num"] = rep.property == ControlProperty::wc ? -1 : rep.level;
  j["level_denom"] = rep.grid.denom;
  j["stop_event"] = stop_name(rep.stop);
  ordered_json witness;
  if (rep.sc_witness) {
    ordered_json cs = ordered_json::array();
    const auto& w = *rep.sc_witness;
    for (const auto& [pair, iv] : w.network.stp.constraints) {
      ordered_json c;
      c["from"] = problem.name_of(w.network.point_of[size_t(pair.first)]);
      c["to"] = problem.name_of(w.network.point_of[size_t(pair.second)]);
      c["lo"] = iv.lo;
      c["hi"] = iv.hi;
      cs.push_back(c);
    }
    witness["constraints"] = cs;
    witness["waits"] = ordered_json::array();
    ordered_json earliest, latest;
    for (const auto& [i, v] : w.earliest.values)
      earliest[problem.name_of(w.network.point_of[size_t(i)])] = v;
    for (const auto& [i, v] : w.latest.values)
      latest[problem.name_of(w.network.point_of[size_t(i)])] = v;
    witness["earliest"] = earliest;
    witness["latest"] = latest;
  } else if (rep.dc_witness) {
    const auto& fin = rep.dc_witness->family.merged.back();
    witness["constraints"] = constraints_json(fin.network, problem);
    witness["waits"] = waits_json(fin.waits, problem);
  } else {
    witness["constraints"] = ordered_json::array();
    witness["waits"] = ordered_json::array();
  }
  j["witness"] = witness;
  if (with_timings)
    j["timings"] = ordered_json{{"total_ms", total_ms}};
  else
    j["timings"] = nullptr;
  return j.dump(2) + "\n";
}

std::string oracle_verdict_to_json(const OracleVerdict& v,
                                   const PreferenceGrid& grid,
                                   const std::string& property) {
  ordered_json j;
  j["property"] = property;
  switch (v.kind) {
    case OracleKind::optimal:
      j["verdict"] = "optimal";
      break;
    case OracleKind::at_level:
      j["verdict"] = "at_level";
      break;
    case OracleKind::none:
      j["verdict"] = "none";
      break;
    case OracleKind::inconclusive:
      j["verdict"] = "inconclusive";
      break;
  }
  j["level_num"] = v.level;
  j["level_denom"] = grid.denom;
  return j.dump(2) + "\n";
}

}  // namespace stppu
