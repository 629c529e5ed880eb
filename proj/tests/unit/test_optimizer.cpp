#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "stylesplit/optimizer.hpp"
#include "test_support.hpp"

using namespace stylesplit;

namespace {

/// Every canonical partition of length n with both subgroups nonempty.
std::vector<Partition> enumerate(std::size_t n) {
  std::vector<Partition> out;
  for (std::uint64_t m = 1; m < (std::uint64_t{1} << (n - 1)); ++m) {
    std::vector<std::uint8_t> bits(n, 0);
    for (std::size_t i = 1; i < n; ++i) bits[i] = (m >> (i - 1)) & 1;
    out.emplace_back(bits);
  }
  return out;
}

/// Style-like landscape: distance to a hidden split plus a deterministic
/// per-partition perturbation, so plateaus are broken the same way every run.
PartitionObjective hidden_split(const Partition& target, std::uint64_t salt) {
  return [target, salt](const Partition& p) {
    const auto d = static_cast<double>(std::min(p.hamming(target), p.size() - p.hamming(target)));
    std::uint64_t h = salt;
    for (auto b : p.bits()) h = h * 1099511628211ULL ^ b;
    EvaluationRecord r;
    r.partition = p;
    r.value = d + 0.25 * static_cast<double>(h % 1000) / 1000.0;
    return r;
  };
}

double brute_min(std::size_t n, const PartitionObjective& f) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : enumerate(n)) best = std::min(best, f(p).value);
  return best;
}

}  // namespace

TEST_CASE("hamming knn surrogate") {
  HammingKnnSurrogate s(2);
  CHECK_THROWS(s.predict(Partition::from_string("0011")));
  s.add(Partition::from_string("0011"), 4.0);
  s.add(Partition::from_string("0001"), 1.0);
  s.add(Partition::from_string("0111"), 10.0);
  CHECK(s.predict(Partition::from_string("0011")) == 4.0);
  // Complement of a stored point is the same split.
  CHECK(s.predict(Partition::from_string("1100")) == 4.0);
  // 0010 is at distance 2 from 0001 and 1 from 0011, 2 from 0111: k=2 takes
  // 0011 (w=1) and the earlier of the distance-2 points.
  const double v = s.predict(Partition::from_string("0010"));
  CHECK(v == doctest::Approx((4.0 * 1.0 + 1.0 * 0.5) / 1.5));
}

TEST_CASE("linkage tree covers all positions") {
  Rng rng(3);
  std::vector<Partition> pop;
  std::bernoulli_distribution coin(0.5);
  for (int k = 0; k < 32; ++k) {
    std::vector<std::uint8_t> bits(9);
    for (auto& b : bits) b = coin(rng);
    bits[4] = bits[3];  // perfectly linked pair
    pop.emplace_back(bits);
  }
  const auto mi = mutual_information(pop);
  CHECK(mi[3][4] > mi[3][5]);
  CHECK(mi[2][6] == mi[6][2]);

  const auto fos = LinkageModel::learn(pop).subsets;
  CHECK(fos.size() == 2 * 9 - 2);
  for (int i = 0; i < 9; ++i) CHECK(fos[i] == std::vector<int>{i});
  for (const auto& s : fos) CHECK(s.size() < 9);
  // Every merged node is the union of two earlier disjoint nodes.
  for (std::size_t k = 9; k < fos.size(); ++k) {
    bool found = false;
    for (std::size_t a = 0; a < k && !found; ++a)
      for (std::size_t b = a + 1; b < k && !found; ++b) {
        std::vector<int> u = fos[a];
        u.insert(u.end(), fos[b].begin(), fos[b].end());
        std::sort(u.begin(), u.end());
        std::vector<int> want = fos[k];
        std::sort(want.begin(), want.end());
        found = u == want && fos[a].size() + fos[b].size() == fos[k].size();
      }
    CHECK(found);
  }
  // The linked pair merges first.
  auto first = fos[9];
  std::sort(first.begin(), first.end());
  CHECK(first == std::vector<int>{3, 4});
}

TEST_CASE("ga config validation and json") {
  GAConfig c;
  CHECK_NOTHROW(c.validate());
  GAConfig bad = c;
  bad.warmup_evaluations = 300;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.population_size = 7;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.population_size = 2;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.guided_moves = 5;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);

  c.surrogate.enabled = false;
  c.seed = 99;
  const auto back = GAConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(GAConfig::from_json(nlohmann::json::object()).to_json() == GAConfig{}.to_json());
}

TEST_CASE("four positions: result equals the brute-force minimum") {
  const auto target = Partition::from_string("0011");
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto f = hidden_split(target, seed);
    GAConfig cfg;
    cfg.seed = seed;
    const auto r = optimize_partition(4, f, cfg);
    CHECK(testing::within_budget(r, cfg));
    CHECK(r.true_evaluations == 7);
    CHECK(r.best_value == brute_min(4, f));
  }
}

TEST_CASE("twelve positions: global minimum in at least 95% of 20 runs") {
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    std::vector<std::uint8_t> bits(12);
    std::bernoulli_distribution coin(0.5);
    for (auto& b : bits) b = coin(rng);
    bits[0] = 0;
    bits[5] = 1;
    const auto f = hidden_split(Partition(bits), seed);
    GAConfig cfg;
    cfg.seed = seed;
    const auto r = optimize_partition(12, f, cfg);
    CHECK(testing::within_budget(r, cfg));
    if (r.best_value == brute_min(12, f)) ++hits;
  }
  MESSAGE("global minimum in " << hits << "/20 runs");
  CHECK(hits >= 19);
}

TEST_CASE("search contract: budget, log, determinism") {
  const auto target = Partition::from_string("0110100111010010");
  for (bool surrogate : {true, false}) {
    for (int budget : {1, 37, 250}) {
      GAConfig cfg;
      cfg.surrogate.enabled = surrogate;
      cfg.max_true_evaluations = budget;
      cfg.warmup_evaluations = std::min(budget, 200);
      cfg.seed = 4;
      const auto f = hidden_split(target, 4);
      const auto a = optimize_partition(16, f, cfg);
      const auto b = optimize_partition(16, f, cfg);
      CHECK(testing::within_budget(a, cfg));
      CHECK(a.true_evaluations <= budget);

      std::set<Partition> seen;
      bool best_logged = false;
      for (const auto& rec : a.log) {
        CHECK(rec.partition.is_canonical());
        CHECK(rec.partition.both_nonempty());
        CHECK(seen.insert(rec.partition).second);
        if (rec.partition == a.best && rec.value == a.best_value) best_logged = true;
      }
      CHECK(best_logged);
      for (const auto& rec : a.log) CHECK(a.best_value <= rec.value);

      REQUIRE(a.log.size() == b.log.size());
      for (std::size_t i = 0; i < a.log.size(); ++i) CHECK(a.log[i].partition == b.log[i].partition);
      CHECK(a.best == b.best);
      CHECK(a.stop_reason == b.stop_reason);
      CHECK_FALSE(a.stop_reason.empty());
    }
  }
}

TEST_CASE("ties keep the earliest evaluated solution") {
  GAConfig cfg;
  cfg.max_true_evaluations = 30;
  cfg.warmup_evaluations = 30;
  const auto flat = [](const Partition& p) {
    EvaluationRecord r;
    r.partition = p;
    r.value = 1.0;
    return r;
  };
  const auto r = optimize_partition(10, flat, cfg);
  CHECK(r.best == r.log.front().partition);
}

TEST_CASE("optimizer rejects degenerate inputs") {
  const auto f = hidden_split(Partition::from_string("01"), 1);
  CHECK_THROWS_AS(optimize_partition(1, f, GAConfig{}), InvalidArgument);
  GAConfig bad;
  bad.max_true_evaluations = 10;
  CHECK_THROWS_AS(optimize_partition(6, f, bad), InvalidArgument);
}

TEST_CASE("exhaustive cohort: GA matches brute-force G") {
  PhantomConfig ph = testing::small_phantom();
  ph.slices_per_scan = 4;
  auto prep = testing::prepare({{StyleOperation::kErosion, 10, 4}, {StyleOperation::kDilation, 10, 4}}, 6, ph);
  std::vector<const Scan*> four{prep->scans[0], prep->scans[1], prep->scans[10], prep->scans[11]};
  PartitionEvaluator ev(four, *prep->learner, compute_baseline(four, *prep->learner));
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : enumerate(4)) best = std::min(best, ev.proxy_g(p).value);
  GAConfig cfg;
  const auto r = optimize_partition(ev, cfg);
  CHECK(testing::within_budget(r, cfg));
  CHECK(r.best_value == best);
  CHECK(r.true_evaluations == 7);
}
