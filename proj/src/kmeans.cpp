#include "vsc/kmeans.hpp"

#include <algorithm>
#include <limits>

#include "vsc/error.hpp"
#include "vsc/rng.hpp"

namespace vsc {

double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double within_cluster_ss(const std::vector<Point>& points, const std::vector<Point>& centroids,
                         const std::vector<int>& assignments) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += squared_distance(points[i], centroids[static_cast<std::size_t>(assignments[i])]);
  }
  return total;
}

namespace {

std::vector<Point> kmeanspp_init(const std::vector<Point>& points, int k, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<Point> centroids;
  std::vector<bool> chosen(n, false);
  std::size_t first = static_cast<std::size_t>(rng.below(n));
  centroids.push_back(points[first]);
  chosen[first] = true;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centroids[0]);

  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && acc > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {  // rounding left target beyond the last positive weight
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Every point coincides with a centroid; take the first unused one.
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    chosen[pick] = true;
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
    }
  }
  return centroids;
}

std::vector<int> assign(const std::vector<Point>& points, const std::vector<Point>& centroids) {
  std::vector<int> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = squared_distance(points[i], centroids[c]);
      if (d < best) {
        best = d;
        best_c = static_cast<int>(c);
      }
    }
    out[i] = best_c;
  }
  return out;
}

KMeansResult lloyd(const std::vector<Point>& points, std::vector<Point> centroids,
                   int max_iterations) {
  const std::size_t k = centroids.size();
  const std::size_t dim = points[0].size();
  KMeansResult r;
  r.centroids = std::move(centroids);
  std::vector<int> previous;
  for (int it = 0; it < max_iterations; ++it) {
    r.assignments = assign(points, r.centroids);
    r.inertia = within_cluster_ss(points, r.centroids, r.assignments);
    r.inertia_history.push_back(r.inertia);
    r.iterations = it + 1;
    if (r.assignments == previous) break;

    std::vector<Point> sums(k, Point(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = static_cast<std::size_t>(r.assignments[i]);
      ++counts[c];
      for (std::size_t d = 0; d < dim; ++d) sums[c][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) r.centroids[c][d] = sums[c][d] / double(counts[c]);
    }
    previous = r.assignments;
  }
  return r;
}

}  // namespace

KMeansResult kmeans(const std::vector<Point>& points, int k, std::uint64_t seed,
                    int max_iterations, int restarts) {
  if (k < 1) throw Error(ErrorKind::kConfig, "k must be at least 1");
  if (static_cast<std::size_t>(k) > points.size()) {
    throw Error(ErrorKind::kConfig, "k = " + std::to_string(k) + " exceeds the " +
                                        std::to_string(points.size()) + " points");
  }
  const std::size_t dim = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dim) throw Error(ErrorKind::kConfig, "points differ in dimension");
  }

  Rng rng(seed);
  KMeansResult best;
  for (int run = 0; run < std::max(1, restarts); ++run) {
    KMeansResult r = lloyd(points, kmeanspp_init(points, k, rng), max_iterations);
    if (run == 0 || r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

}  // namespace vsc
