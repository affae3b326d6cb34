#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stppu/io.hpp"

namespace testutil {

inline std::string fixture_path(const std::string& name) {
  return std::string(STPPU_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline stppu::STPPU load_fixture(const std::string& name) {
  auto parsed = stppu::parse_problem(read_file(fixture_path(name)));
  if (auto* err = std::get_if<stppu::ParseError>(&parsed)) {
    FAIL("parse error in ", name, " line ", err->line, ": ", err->reason);
  }
  return std::get<stppu::STPPU>(parsed);
}

// Random STP over n points, bounded spans, every point anchored to the
// origin so exhaustive searches stay within [0, n*span].
inline stppu::STP random_stp(std::mt19937_64& rng, int n, stppu::TimeUnit span,
                             int extra_percent = 50) {
  auto draw = [&](stppu::TimeUnit lo, stppu::TimeUnit hi) {
    return lo + stppu::TimeUnit(rng() % std::uint64_t(hi - lo + 1));
  };
  stppu::STP stp(n);
  for (int i = 1; i < n; ++i) {
    stppu::TimeUnit lo = draw(0, span);
    stp.add(draw(0, i - 1) % i, i, stppu::Interval(lo, lo + draw(0, span)));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (draw(0, 99) >= extra_percent) continue;
      stppu::TimeUnit lo = draw(-span, span);
      if (!stp.get(i, j)) stp.add(i, j, stppu::Interval(lo, lo + draw(0, span)));
    }
  return stp;
}

// All total schedules with values in [lo, hi] that satisfy the STP.
inline std::vector<stppu::Schedule> enumerate_solutions(const stppu::STP& stp,
                                                        stppu::TimeUnit lo,
                                                        stppu::TimeUnit hi) {
  std::vector<stppu::Schedule> out;
  std::vector<stppu::TimeUnit> v(size_t(stp.n), lo);
  v[0] = 0;  // origin pinned
  while (true) {
    stppu::Schedule s;
    for (int i = 0; i < stp.n; ++i) s.values[i] = v[size_t(i)];
    if (stppu::satisfies(s, stp)) out.push_back(s);
    int i = 1;
    for (; i < stp.n; ++i) {
      if (v[size_t(i)] < hi) {
        ++v[size_t(i)];
        break;
      }
      v[size_t(i)] = lo;
    }
    if (i == stp.n) break;
  }
  return out;
}

}  // namespace testutil
