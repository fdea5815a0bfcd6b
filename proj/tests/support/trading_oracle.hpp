#pragma once

// Brute-force reference for trading::perfect_foresight on short paths.

#include "probcast/common.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <vector>

namespace probcast::oracle {

// Day action sets by start charge: from 1, at most one sell and one buy;
// from 2, one or two sells and at most one buy; from 0 the mirror image.
inline bool allowed_counts(int start, int sells, int buys) {
  if (start == 1) return sells <= 1 && buys <= 1;
  if (start == 2) return sells >= 1 && sells <= 2 && buys <= 1;
  return buys >= 1 && buys <= 2 && sells <= 1;
}

// best[start][end] over every trade set on distinct hours, executed in hour order.
inline std::array<std::array<double, 3>, 3> day_table(const Vector& p, double xi) {
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  std::array<std::array<double, 3>, 3> best;
  for (auto& row : best) row.fill(ninf);
  const int n = static_cast<int>(p.size());
  // side per hour: 0 idle, 1 sell, 2 buy; at most three active hours
  std::vector<int> side(static_cast<std::size_t>(n), 0);
  auto score = [&](int start) {
    int c = start, sells = 0, buys = 0;
    double cash = 0.0;
    for (int h = 0; h < n; ++h) {
      if (side[h] == 1) {
        if (--c < 0) return;
        ++sells;
        cash += xi * p(h);
      } else if (side[h] == 2) {
        if (++c > 2) return;
        ++buys;
        cash -= p(h) / xi;
      }
    }
    if (!allowed_counts(start, sells, buys)) return;
    best[start][c] = std::max(best[start][c], cash);
  };
  auto all_starts = [&] {
    for (int s = 0; s < 3; ++s) score(s);
  };
  all_starts();
  for (int a = 0; a < n; ++a) {
    for (int sa = 1; sa <= 2; ++sa) {
      side[a] = sa;
      all_starts();
      for (int b = a + 1; b < n; ++b) {
        for (int sb = 1; sb <= 2; ++sb) {
          side[b] = sb;
          all_starts();
          for (int c = b + 1; c < n; ++c) {
            for (int sc = 1; sc <= 2; ++sc) {
              side[c] = sc;
              all_starts();
            }
            side[c] = 0;
          }
        }
        side[b] = 0;
      }
    }
    side[a] = 0;
  }
  return best;
}

// Every charge chain across the days that starts and ends at `initial`.
inline double exhaustive_foresight(const Matrix& prices, double xi, int initial = 1) {
  std::vector<std::array<std::array<double, 3>, 3>> tables;
  for (Eigen::Index d = 0; d < prices.rows(); ++d) tables.push_back(day_table(prices.row(d).transpose(), xi));
  double best = -std::numeric_limits<double>::infinity();
  auto walk = [&](auto&& self, std::size_t d, int charge, double cash) -> void {
    if (d == tables.size()) {
      if (charge == initial) best = std::max(best, cash);
      return;
    }
    for (int e = 0; e < 3; ++e) {
      const double v = tables[d][charge][e];
      if (v > -std::numeric_limits<double>::infinity()) self(self, d + 1, e, cash + v);
    }
  };
  walk(walk, 0, initial, 0.0);
  return best;
}

}  // namespace probcast::oracle
