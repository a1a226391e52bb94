#pragma once

#include <cstdint>
#include <vector>

namespace vsc {

using Point = std::vector<double>;

struct KMeansResult {
  std::vector<Point> centroids;
  std::vector<int> assignments;
  double inertia = 0.0;
  /// Within-cluster sum of squares after each assignment step.
  std::vector<double> inertia_history;
  int iterations = 0;
};

inline constexpr int kKMeansMaxIterations = 300;
inline constexpr int kKMeansRestarts = 10;

/// Lloyd's algorithm on squared Euclidean distance with seeded k-means++
/// initialization. Stops when assignments repeat or after max_iterations.
/// Assignment ties go to the lowest centroid index; an empty cluster keeps its
/// previous centroid. Runs `restarts` initializations drawn from one seeded
/// stream and keeps the lowest inertia (earliest on ties).
KMeansResult kmeans(const std::vector<Point>& points, int k, std::uint64_t seed,
                    int max_iterations = kKMeansMaxIterations, int restarts = kKMeansRestarts);

double squared_distance(const Point& a, const Point& b);
double within_cluster_ss(const std::vector<Point>& points, const std::vector<Point>& centroids,
                         const std::vector<int>& assignments);

}  // namespace vsc
