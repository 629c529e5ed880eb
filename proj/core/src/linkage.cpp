#include <cmath>
#include <limits>

#include "stylesplit/optimizer.hpp"

namespace stylesplit {

std::vector<std::vector<double>> mutual_information(const std::vector<Partition>& population) {
  if (population.empty()) return {};
  const std::size_t n = population.front().size();
  const double count = static_cast<double>(population.size());
  std::vector<std::vector<double>> mi(n, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      double joint[2][2] = {{0, 0}, {0, 0}};
      for (const auto& p : population) joint[p[a]][p[b]] += 1.0;
      double value = 0.0;
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
          const double pxy = joint[x][y] / count;
          if (pxy <= 0.0) continue;
          const double px = (joint[x][0] + joint[x][1]) / count;
          const double py = (joint[0][y] + joint[1][y]) / count;
          value += pxy * std::log(pxy / (px * py));
        }
      mi[a][b] = mi[b][a] = value;
    }
  return mi;
}

// UPGMA on similarity: repeatedly merge the pair of clusters with the highest
// average pairwise MI; ties go to the lowest cluster indices.
LinkageModel LinkageModel::learn(const std::vector<Partition>& population) {
  LinkageModel model;
  if (population.empty()) return model;
  const std::size_t n = population.front().size();
  const auto mi = mutual_information(population);

  std::vector<std::vector<int>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({static_cast<int>(i)});
  model.subsets = clusters;

  std::vector<std::vector<double>> sim = mi;
  std::vector<bool> alive(n, true);
  for (std::size_t merges = 1; merges < n; ++merges) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      if (!alive[a]) continue;
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        if (!alive[b]) continue;
        if (sim[a][b] > best) {
          best = sim[a][b];
          ba = a;
          bb = b;
        }
      }
    }
    std::vector<int> merged = clusters[ba];
    merged.insert(merged.end(), clusters[bb].begin(), clusters[bb].end());
    alive[ba] = alive[bb] = false;

    const std::size_t id = clusters.size();
    clusters.push_back(merged);
    alive.push_back(true);
    for (auto& row : sim) row.push_back(0.0);
    sim.emplace_back(clusters.size(), 0.0);
    const double wa = static_cast<double>(clusters[ba].size());
    const double wb = static_cast<double>(clusters[bb].size());
    for (std::size_t c = 0; c < id; ++c) {
      if (!alive[c]) continue;
      const double s = (wa * sim[ba][c] + wb * sim[bb][c]) / (wa + wb);
      sim[id][c] = sim[c][id] = s;
    }
    if (merged.size() < n) model.subsets.push_back(std::move(merged));
  }
  return model;
}

}  // namespace stylesplit
