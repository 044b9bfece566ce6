#include <algorithm>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "kbqa/eval.hpp"

namespace kbqa {
namespace {

using Point = std::vector<std::size_t>;

TuneConfig config_of(const TuneSpace& space, const Point& p) {
  TuneConfig c;
  for (std::size_t d = 0; d < space.size(); ++d) c[space[d].name] = space[d].values[p[d]];
  return c;
}

}  // namespace

TuneResult basin_hop_tune(const TuneSpace& space, const TuneObjective& objective,
                          std::size_t budget, std::uint64_t seed) {
  if (space.empty()) throw std::invalid_argument("tune space has no dimensions");
  std::size_t total = 1;
  for (const auto& dim : space) {
    if (dim.values.empty()) throw std::invalid_argument("tune dimension '" + dim.name + "' is empty");
    total = total > std::numeric_limits<std::size_t>::max() / dim.values.size()
                ? std::numeric_limits<std::size_t>::max()
                : total * dim.values.size();
  }

  Point current(space.size());
  for (std::size_t d = 0; d < space.size(); ++d) current[d] = (space[d].values.size() - 1) / 2;

  TuneResult result;
  result.best = config_of(space, current);
  std::map<Point, double> seen;
  Point best_point;

  auto evaluate = [&](const Point& p) -> std::optional<double> {
    if (auto it = seen.find(p); it != seen.end()) return it->second;
    if (seen.size() >= budget) return std::nullopt;
    const auto config = config_of(space, p);
    const double score = objective(config);
    seen.emplace(p, score);
    result.trace.push_back({config, score});
    if (!result.best_score || score > *result.best_score) {
      result.best_score = score;
      result.best = config;
    }
    return score;
  };

  std::mt19937_64 rng(derive_seed(seed, "tune"));
  auto score = evaluate(current);
  while (score) {
    // steepest ascent over single-dimension neighbours
    while (true) {
      std::optional<Point> next;
      double next_score = *score;
      for (std::size_t d = 0; d < space.size(); ++d) {
        for (int step : {-1, 1}) {
          if ((step < 0 && current[d] == 0) ||
              (step > 0 && current[d] + 1 == space[d].values.size()))
            continue;
          Point p = current;
          p[d] = step < 0 ? p[d] - 1 : p[d] + 1;
          const auto s = evaluate(p);
          if (s && *s > next_score) {
            next_score = *s;
            next = p;
          }
        }
      }
      if (!next) break;
      current = *next;
      score = next_score;
    }
    if (seen.size() >= budget || seen.size() >= total) break;

    // hop to a random unvisited point
    Point hop(space.size());
    bool found = false;
    for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
      for (std::size_t d = 0; d < space.size(); ++d)
        hop[d] = std::uniform_int_distribution<std::size_t>(0, space[d].values.size() - 1)(rng);
      found = !seen.count(hop);
    }
    if (!found) {
      // dense coverage: walk the grid from a random offset
      std::vector<Point> open;
      Point p(space.size(), 0);
      while (true) {
        if (!seen.count(p)) open.push_back(p);
        std::size_t d = 0;
        while (d < space.size() && ++p[d] == space[d].values.size()) p[d++] = 0;
        if (d == space.size()) break;
      }
      hop = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
    }
    current = hop;
    score = evaluate(current);
  }
  return result;
}

}  // namespace kbqa
