#include "stppu/temporal_core.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace stppu {

TimeUnit sat_add(TimeUnit a, TimeUnit b) {
  if (a >= kInf || b >= kInf) return kInf;
  if (a <= -kInf || b <= -kInf) return -kInf;
  TimeUnit s = a + b;
  if (s > kInf) return kInf;
  if (s < -kInf) return -kInf;
  return s;
}

std::string to_string(const Interval& iv) {
  std::ostringstream os;
  os << '[';
  if (iv.lo <= -kInf)
    os << "-inf";
  else
    os << iv.lo;
  os << ',';
  if (iv.hi >= kInf)
    os << "inf";
  else
    os << iv.hi;
  os << ']';
  return os.str();
}

void STP::add(int from, int to, Interval iv) {
  if (from == to) throw std::invalid_argument("self-loop constraint");
  if (from < 0 || to < 0 || from >= n || to >= n)
    throw std::invalid_argument("time-point index out of range");
  if (from > to) {
    std::swap(from, to);
    iv = iv.negate();
  }
  auto key = std::make_pair(from, to);
  auto it = constraints.find(key);
  if (it == constraints.end())
    constraints.emplace(key, iv);
  else
    it->second = it->second.intersect(iv);
}

std::optional<Interval> STP::get(int from, int to) const {
  bool flipped = from > to;
  if (flipped) std::swap(from, to);
  auto it = constraints.find(std::make_pair(from, to));
  if (it == constraints.end()) return std::nullopt;
  return flipped ? it->second.negate() : it->second;
}

CloseResult close_distances(const STP& stp) {
  const int n = stp.n;
  DistanceMatrix m(n);
  std::vector<int> nxt(size_t(n) * n, -1);  // next hop on the i -> j path
  for (int i = 0; i < n; ++i) m.at(i, i) = 0;
  for (const auto& [pair, iv] : stp.constraints) {
    auto [i, j] = pair;
    // X_j - X_i <= hi and X_i - X_j <= -lo.
    if (iv.hi < m.at(i, j)) {
      m.at(i, j) = iv.hi;
      nxt[size_t(i) * n + j] = j;
    }
    if (-iv.lo < m.at(j, i)) {
      m.at(j, i) = -iv.lo;
      nxt[size_t(j) * n + i] = i;
    }
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (m.at(i, k) >= kInf) continue;
      for (int j = 0; j < n; ++j) {
        TimeUnit via = sat_add(m.at(i, k), m.at(k, j));
        if (via < m.at(i, j)) {
          m.at(i, j) = via;
          nxt[size_t(i) * n + j] = nxt[size_t(i) * n + k];
        }
      }
    }
  for (int i = 0; i < n; ++i)
    if (m.at(i, i) < 0) {
      // Walk the successor pointers; within n+1 hops a node repeats and
      // the enclosed loop is the witness.
      std::vector<int> walk{i};
      std::vector<int> seen_at(size_t(n), -1);
      seen_at[size_t(i)] = 0;
      int cur = i;
      while (true) {
        int step = nxt[size_t(cur) * n + i];  // next hop on cur -> i
        if (step < 0) break;
        if (seen_at[size_t(step)] >= 0) {
          NegativeCycle nc;
          nc.cycle.assign(walk.begin() + seen_at[size_t(step)], walk.end());
          nc.cycle.push_back(step);
          return nc;
        }
        seen_at[size_t(step)] = int(walk.size());
        walk.push_back(step);
        cur = step;
      }
      return NegativeCycle{{i, i}};
    }
  return m;
}

MinimalResult minimal_network(const STP& stp) {
  auto closed = close_distances(stp);
  if (auto* nc = std::get_if<NegativeCycle>(&closed)) return *nc;
  const auto& m = std::get<DistanceMatrix>(closed);
  STP out(stp.n);
  for (int i = 0; i < stp.n; ++i)
    for (int j = i + 1; j < stp.n; ++j) {
      Interval iv = m.interval(i, j);
      if (iv.lo <= -kInf && iv.hi >= kInf) continue;
      out.add(i, j, iv);
    }
  return out;
}

bool is_minimal(const STP& stp) {
  auto r = minimal_network(stp);
  auto* q = std::get_if<STP>(&r);
  return q != nullptr && *q == stp;
}

namespace {

Schedule boundary_solution(const STP& minimal, bool latest) {
  if (!is_minimal(minimal))
    throw std::invalid_argument("input network is not minimal");
  Schedule s;
  s.values[0] = 0;
  for (int i = 1; i < minimal.n; ++i) {
    auto iv = minimal.get(0, i);
    Interval b = iv ? *iv : Interval::unbounded();
    TimeUnit v = latest ? b.hi : b.lo;
    if (v >= kInf || v <= -kInf)
      throw std::invalid_argument("unbounded variable has no boundary value");
    s.values[i] = v;
  }
  return s;
}

}  // namespace

Schedule earliest_solution(const STP& minimal) {
  return boundary_solution(minimal, false);
}

Schedule latest_solution(const STP& minimal) {
  return boundary_solution(minimal, true);
}

IntersectResult intersect(const STP& p1, const STP& p2) {
  if (p1.n != p2.n)
    throw std::invalid_argument("intersect: variable sets differ");
  STP out(p1.n);
  out.constraints = p1.constraints;
  for (const auto& [pair, iv] : p2.constraints) {
    auto it = out.constraints.find(pair);
    if (it == out.constraints.end())
      out.constraints.emplace(pair, iv);
    else
      it->second = it->second.intersect(iv);
  }
  for (const auto& [pair, iv] : out.constraints)
    if (iv.empty()) return EmptyIntersection{pair.first, pair.second};
  return out;
}

bool satisfies(const Schedule& s, const STP& stp) {
  for (int i = 0; i < stp.n; ++i)
    if (!s.assigned(i)) throw std::invalid_argument("schedule is not total");
  for (const auto& [pair, iv] : stp.constraints)
    if (!iv.contains(s.at(pair.second) - s.at(pair.first))) return false;
  return true;
}

}  // namespace stppu
