#include "stylesplit/optimizer.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "stylesplit/parallel.hpp"

namespace stylesplit {

void HammingKnnSurrogate::add(const Partition& p, double value) {
  points_.push_back(p);
  values_.push_back(value);
}

double HammingKnnSurrogate::predict(const Partition& p) const {
  if (points_.empty()) throw InvalidArgument("surrogate has no training points");
  std::vector<std::pair<std::size_t, std::size_t>> dist;  // (distance, index)
  dist.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto raw = points_[i].hamming(p);
    const auto d = std::min(raw, p.size() - raw);
    if (d == 0) return values_[i];
    dist.emplace_back(d, i);
  }
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, k_)), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double w = 1.0 / static_cast<double>(dist[j].first);
    num += w * values_[dist[j].second];
    den += w;
  }
  return num / den;
}

void GAConfig::validate() const {
  if (population_size < 4 || population_size % 2 != 0)
    throw InvalidArgument("population size must be even and at least 4");
  if (max_true_evaluations <= 0) throw InvalidArgument("evaluation budget must be positive");
  if (warmup_evaluations < 1 || warmup_evaluations > max_true_evaluations)
    throw InvalidArgument("warm-up must be between 1 and the evaluation budget");
  if (surrogate.k < 1) throw InvalidArgument("surrogate k must be positive");
  if (stall_generations < 1 || batch_size < 1) throw InvalidArgument("stall and batch sizes must be positive");
  if (guided_moves < 0 || guided_moves > batch_size)
    throw InvalidArgument("guided moves must be between 0 and the batch size");
}

nlohmann::json GAConfig::to_json() const {
  return {{"population_size", population_size},
          {"max_true_evaluations", max_true_evaluations},
          {"warmup_evaluations", warmup_evaluations},
          {"surrogate", surrogate.enabled ? nlohmann::json{{"kind", "hamming-knn"}, {"k", surrogate.k}}
                                          : nlohmann::json{{"kind", "off"}}},
          {"seed", seed},
          {"stall_generations", stall_generations},
          {"batch_size", batch_size},
          {"guided_moves", guided_moves}};
}

GAConfig GAConfig::from_json(const nlohmann::json& j) { return from_json(j, GAConfig{}); }

GAConfig GAConfig::from_json(const nlohmann::json& j, GAConfig d) {
  d.population_size = j.value("population_size", d.population_size);
  d.max_true_evaluations = j.value("max_true_evaluations", d.max_true_evaluations);
  d.warmup_evaluations = j.value("warmup_evaluations", d.warmup_evaluations);
  d.seed = j.value("seed", d.seed);
  d.stall_generations = j.value("stall_generations", d.stall_generations);
  d.batch_size = j.value("batch_size", d.batch_size);
  d.guided_moves = j.value("guided_moves", d.guided_moves);
  if (j.contains("surrogate")) {
    const auto& s = j.at("surrogate");
    const auto kind = s.value("kind", std::string("hamming-knn"));
    if (kind != "off" && kind != "hamming-knn") throw InvalidArgument("unknown surrogate kind '" + kind + "'");
    d.surrogate.enabled = kind != "off";
    d.surrogate.k = s.value("k", d.surrogate.k);
  }
  d.validate();
  return d;
}

namespace {

struct Member {
  Partition partition;
  double value;
};

struct Candidate {
  Partition partition;
  double predicted;
  int parent;  // population slot, or -1 for a local move around the best
};

class Search {
 public:
  Search(std::size_t n, const PartitionObjective& objective, const GAConfig& cfg)
      : n_(n), objective_(objective), cfg_(cfg), rng_(cfg.seed), surrogate_(cfg.surrogate.k) {
    const std::size_t free_bits = n - 1;
    space_ = free_bits >= 62 ? std::numeric_limits<std::uint64_t>::max() : (std::uint64_t{1} << free_bits) - 1;
  }

  OptimizationResult run() {
    warm_up();
    init_population();
    double best = best_value();
    int stall = 0;
    while (true) {
      if (budget_left() <= 0) {
        result_.stop_reason = "budget";
        break;
      }
      if (result_.log.size() >= space_) {
        result_.stop_reason = "exhausted";
        break;
      }
      if (neighbourhood_exhausted()) {
        result_.stop_reason = "local-optimum";
        break;
      }
      ++result_.generations;
      const auto linkage = LinkageModel::learn(population_partitions());
      const bool progressed = cfg_.surrogate.enabled ? screened_generation(linkage) : plain_generation(linkage);
      if (!progressed) {
        result_.stop_reason = "converged";
        break;
      }
      const double now = best_value();
      if (now < best) {
        best = now;
        stall = 0;
      } else if (++stall >= cfg_.stall_generations) {
        result_.stop_reason = "stall";
        break;
      }
    }
    const auto& rec = result_.log[best_index()];
    result_.best = rec.partition;
    result_.best_value = rec.value;
    return std::move(result_);
  }

 private:
  int budget_left() const { return cfg_.max_true_evaluations - result_.true_evaluations; }

  const EvaluationRecord* known(const Partition& p) const {
    auto it = index_.find(p);
    return it == index_.end() ? nullptr : &result_.log[it->second];
  }

  // Truly evaluates new canonical partitions in submission order.
  std::vector<std::size_t> evaluate(const std::vector<Partition>& raw) {
    std::vector<Partition> batch;
    std::set<Partition> seen;
    for (const auto& r : raw) {
      auto p = r.canonical();
      if (!p.both_nonempty() || known(p) || !seen.insert(p).second) continue;
      if (static_cast<int>(batch.size()) >= budget_left()) break;
      batch.push_back(std::move(p));
    }
    std::vector<EvaluationRecord> records(batch.size());
    parallel_for(batch.size(), [&](std::size_t i) {
      records[i] = objective_(batch[i]);
      records[i].partition = batch[i];
    });
    std::vector<std::size_t> out;
    for (auto& rec : records) {
      out.push_back(result_.log.size());
      index_.emplace(rec.partition, result_.log.size());
      surrogate_.add(rec.partition, rec.value);
      result_.log.push_back(std::move(rec));
      ++result_.true_evaluations;
    }
    return out;
  }

  Partition random_canonical() {
    std::vector<std::uint8_t> bits(n_, 0);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 1; i < n_; ++i) bits[i] = coin(rng_);
    return Partition(std::move(bits));
  }

  void warm_up() {
    const auto target = static_cast<std::uint64_t>(cfg_.warmup_evaluations) < space_
                            ? static_cast<std::uint64_t>(cfg_.warmup_evaluations)
                            : space_;
    std::vector<Partition> batch;
    if (space_ <= 4 * target) {
      for (std::uint64_t v = 1; v <= space_; ++v) {
        std::vector<std::uint8_t> bits(n_, 0);
        for (std::size_t i = 1; i < n_; ++i) bits[i] = (v >> (i - 1)) & 1;
        batch.emplace_back(std::move(bits));
      }
      std::shuffle(batch.begin(), batch.end(), rng_);
      batch.resize(target);
    } else {
      std::set<Partition> seen;
      while (batch.size() < target) {
        auto p = random_canonical();
        if (p.both_nonempty() && seen.insert(p).second) batch.push_back(std::move(p));
      }
    }
    evaluate(batch);
  }

  void init_population() {
    std::vector<std::size_t> order(result_.log.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return result_.log[a].value < result_.log[b].value; });
    const auto size = std::min<std::size_t>(static_cast<std::size_t>(cfg_.population_size), order.size());
    for (std::size_t i = 0; i < size; ++i)
      population_.push_back({result_.log[order[i]].partition, result_.log[order[i]].value});
  }

  std::vector<Partition> population_partitions() const {
    std::vector<Partition> out;
    for (const auto& m : population_) out.push_back(m.partition);
    return out;
  }

  // Earliest evaluation wins ties.
  std::size_t best_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < result_.log.size(); ++i)
      if (result_.log[i].value < result_.log[best].value) best = i;
    return best;
  }
  double best_value() const { return result_.log[best_index()].value; }

  bool neighbourhood_exhausted() const {
    const auto& best = result_.log[best_index()];
    for (std::size_t i = 0; i < n_; ++i) {
      const auto nb = best.partition.flipped(i).canonical();
      if (!nb.both_nonempty()) continue;
      const auto* rec = known(nb);
      if (!rec || rec->value < best.value) return false;
    }
    return true;
  }

  Partition mix(const Partition& target, const Partition& donor, const std::vector<int>& subset) const {
    auto bits = target.bits();
    for (int i : subset) bits[static_cast<std::size_t>(i)] = donor.bits()[static_cast<std::size_t>(i)];
    return Partition(std::move(bits)).canonical();
  }

  std::vector<std::size_t> shuffled(std::size_t count) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng_);
    return order;
  }

  std::size_t random_donor(std::size_t self) {
    std::uniform_int_distribution<std::size_t> pick(0, population_.size() - 2);
    const auto d = pick(rng_);
    return d >= self ? d + 1 : d;
  }

  // Gene-pool optimal mixing screened by the surrogate; only the most
  // promising unseen offspring are truly evaluated.
  bool screened_generation(const LinkageModel& linkage) {
    std::vector<Candidate> candidates;
    std::set<Partition> pending;
    auto estimate = [&](const Partition& p) {
      const auto* rec = known(p);
      return rec ? rec->value : surrogate_.predict(p);
    };

    for (std::size_t slot = 0; slot < population_.size(); ++slot) {
      Partition o = population_[slot].partition;
      double fo = population_[slot].value;
      for (auto s : shuffled(linkage.subsets.size())) {
        const auto& donor = population_[random_donor(slot)].partition;
        const auto c = mix(o, donor, linkage.subsets[s]);
        if (c == o || !c.both_nonempty()) continue;
        const double fc = estimate(c);
        if (fc <= fo) {
          o = c;
          fo = fc;
        }
      }
      if (!known(o) && pending.insert(o).second) candidates.push_back({o, fo, static_cast<int>(slot)});
    }

    const auto& best_rec = result_.log[best_index()];
    const auto best = best_rec.partition;

    // Guided moves: flip the scans the other subgroup's model fits best.
    std::vector<Candidate> guided;
    if (cfg_.guided_moves > 0 && best_rec.relative.size() == n_) {
      std::vector<std::size_t> order(n_);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return best_rec.relative[a] > best_rec.relative[b];
      });
      for (auto i : order) {
        if (static_cast<int>(guided.size()) >= cfg_.guided_moves) break;
        const auto nb = best.flipped(i).canonical();
        if (!nb.both_nonempty() || known(nb) || !pending.insert(nb).second) continue;
        guided.push_back({nb, best_rec.value, -1});
      }
    }

    for (std::size_t i = 0; i < n_; ++i) {
      const auto nb = best.flipped(i).canonical();
      if (!nb.both_nonempty() || known(nb) || !pending.insert(nb).second) continue;
      candidates.push_back({nb, surrogate_.predict(nb), -1});
    }
    if (candidates.empty() && guided.empty()) return false;

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.predicted < b.predicted; });
    candidates.insert(candidates.begin(), guided.begin(), guided.end());
    const auto take = std::min<std::size_t>(candidates.size(),
                                            static_cast<std::size_t>(std::min(cfg_.batch_size, budget_left())));
    std::vector<Partition> batch;
    for (std::size_t i = 0; i < take; ++i) batch.push_back(candidates[i].partition);
    const auto indices = evaluate(batch);

    for (std::size_t i = 0; i < indices.size(); ++i) {
      const auto& rec = result_.log[indices[i]];
      const int parent = candidates[i].parent;
      if (parent >= 0) {
        auto& m = population_[static_cast<std::size_t>(parent)];
        if (rec.value <= m.value) m = {rec.partition, rec.value};
      } else {
        // Replace the worst member, the last one on ties.
        std::size_t worst = 0;
        for (std::size_t k = 1; k < population_.size(); ++k)
          if (population_[k].value >= population_[worst].value) worst = k;
        if (rec.value < population_[worst].value) population_[worst] = {rec.partition, rec.value};
      }
    }
    return !indices.empty();
  }

  // Classic gene-pool optimal mixing with true evaluations only.
  bool plain_generation(const LinkageModel& linkage) {
    bool evaluated = false;
    for (std::size_t slot = 0; slot < population_.size() && budget_left() > 0; ++slot) {
      Partition o = population_[slot].partition;
      double fo = population_[slot].value;
      for (auto s : shuffled(linkage.subsets.size())) {
        if (budget_left() <= 0) break;
        const auto& donor = population_[random_donor(slot)].partition;
        const auto c = mix(o, donor, linkage.subsets[s]);
        if (c == o || !c.both_nonempty()) continue;
        double fc;
        if (const auto* rec = known(c)) {
          fc = rec->value;
        } else {
          const auto idx = evaluate({c});
          if (idx.empty()) break;
          evaluated = true;
          fc = result_.log[idx.front()].value;
        }
        if (fc <= fo) {
          o = c;
          fo = fc;
        }
      }
      population_[slot] = {o, fo};
    }
    return evaluated;
  }

  std::size_t n_;
  const PartitionObjective& objective_;
  GAConfig cfg_;
  std::mt19937_64 rng_;
  std::uint64_t space_;
  HammingKnnSurrogate surrogate_;
  std::map<Partition, std::size_t> index_;
  std::vector<Member> population_;
  OptimizationResult result_;
};

}  // namespace

OptimizationResult optimize_partition(std::size_t n, const PartitionObjective& objective, const GAConfig& cfg) {
  cfg.validate();
  if (n < 2) throw InvalidArgument("partitioning needs at least 2 positions");
  return Search(n, objective, cfg).run();
}

OptimizationResult optimize_partition(const PartitionEvaluator& evaluator, const GAConfig& cfg) {
  if (evaluator.size() < 4) throw InvalidArgument("optimisation needs at least 4 scans");
  return optimize_partition(
      evaluator.size(), [&](const Partition& p) { return evaluator.proxy_g(p); }, cfg);
}

}  // namespace stylesplit
