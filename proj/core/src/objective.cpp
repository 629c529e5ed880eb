#include "stylesplit/objective.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "stylesplit/parallel.hpp"

namespace stylesplit {

Partition::Partition(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) b = b ? 1 : 0;
}

Partition Partition::from_string(std::string_view text) {
  std::vector<std::uint8_t> bits;
  for (char ch : text) {
    if (ch != '0' && ch != '1') throw InvalidPartitionError("partition string must contain only 0/1");
    bits.push_back(ch == '1');
  }
  return Partition(std::move(bits));
}

Partition Partition::from_labels(std::span<const int> labels) {
  std::vector<std::uint8_t> bits;
  for (int l : labels) bits.push_back(l != labels.front());
  return Partition(std::move(bits));
}

Partition Partition::canonical() const { return is_canonical() ? *this : complement(); }

Partition Partition::complement() const {
  auto bits = bits_;
  for (auto& b : bits) b ^= 1;
  return Partition(std::move(bits));
}

Partition Partition::flipped(std::size_t i) const {
  auto bits = bits_;
  bits.at(i) ^= 1;
  return Partition(std::move(bits));
}

std::vector<std::size_t> Partition::group(int which) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i] == which) out.push_back(i);
  return out;
}

bool Partition::both_nonempty() const {
  const auto ones = std::count(bits_.begin(), bits_.end(), std::uint8_t{1});
  return ones > 0 && ones < static_cast<std::ptrdiff_t>(bits_.size());
}

std::size_t Partition::hamming(const Partition& other) const {
  if (other.size() != size()) throw InvalidPartitionError("hamming distance between different lengths");
  std::size_t d = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) d += bits_[i] != other.bits_[i];
  return d;
}

std::string Partition::to_string() const {
  std::string s;
  for (auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

double BaselineScores::mean_sdsc() const {
  if (raw.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : raw) s += r.sdsc;
  return s / double(raw.size());
}

double BaselineScores::mean_dsc() const {
  if (raw.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : raw) s += r.dsc;
  return s / double(raw.size());
}

std::string_view to_string(ObjectiveKind kind) { return kind == ObjectiveKind::kProxyG ? "G" : "F"; }

nlohmann::json EvaluationRecord::to_json(std::uint64_t seed) const {
  return {{"bits", partition.to_string()}, {"kind", to_string(kind)}, {"value", value},
          {"R", relative},                 {"fits", fits},            {"seed", seed}};
}

std::vector<ScorePair> leave_one_out(std::span<const Scan* const> scans, const Learner& learner, bool with_dsc) {
  if (scans.size() < 2) throw InvalidArgument("leave-one-out needs at least 2 scans");
  std::vector<ScorePair> out(scans.size());
  parallel_for(scans.size(), [&](std::size_t i) {
    std::vector<const Scan*> train;
    train.reserve(scans.size() - 1);
    for (std::size_t j = 0; j < scans.size(); ++j)
      if (j != i) train.push_back(scans[j]);
    try {
      const auto model = learner.fit(train);
      out[i] = with_dsc ? learner.score(*model, *scans[i]) : ScorePair{0.0, learner.sdsc(*model, *scans[i])};
    } catch (const std::exception& e) {
      throw LearnerError("scan '" + scans[i]->id() + "': " + e.what());
    }
  });
  return out;
}

std::vector<ScorePair> subgroup_leave_one_out(std::span<const Scan* const> scans, const Partition& p,
                                              const Learner& learner, bool with_dsc) {
  if (p.size() != scans.size()) throw InvalidPartitionError("partition length does not match scan count");
  std::vector<ScorePair> out(scans.size());
  for (int g = 0; g < 2; ++g) {
    const auto idx = p.group(g);
    if (idx.empty()) continue;
    std::vector<const Scan*> members;
    for (auto i : idx) members.push_back(scans[i]);
    const auto scores = leave_one_out(members, learner, with_dsc);
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = scores[k];
  }
  return out;
}

BaselineScores compute_baseline(std::span<const Scan* const> scans, const Learner& learner, double floor) {
  BaselineScores b;
  b.floor = floor;
  b.raw = leave_one_out(scans, learner, true);
  for (const auto& r : b.raw) b.m.push_back(std::max(floor, r.sdsc));
  return b;
}

PartitionEvaluator::PartitionEvaluator(std::vector<const Scan*> scans, const Learner& learner,
                                       BaselineScores baseline)
    : scans_(std::move(scans)), learner_(learner), baseline_(std::move(baseline)) {
  if (baseline_.m.size() != scans_.size()) throw InvalidArgument("baseline does not cover every scan");
}

Partition PartitionEvaluator::checked(const Partition& p) const {
  if (p.size() != scans_.size())
    throw InvalidPartitionError("partition length " + std::to_string(p.size()) + " != scan count " +
                                std::to_string(scans_.size()));
  return p.canonical();
}

std::shared_ptr<const SegmentationModel> PartitionEvaluator::fit_group(const std::vector<std::size_t>& idx) const {
  std::vector<const Scan*> train;
  for (auto i : idx) train.push_back(scans_[i]);
  ++fits_performed_;
  return learner_.fit(train);
}

EvaluationRecord PartitionEvaluator::proxy_g(const Partition& raw) const {
  const auto p = checked(raw);
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find({ObjectiveKind::kProxyG, p}); it != cache_.end()) return it->second;
  }
  if (!p.both_nonempty()) throw InvalidPartitionError("partition " + p.to_string() + " has an empty subgroup");

  const std::array<std::vector<std::size_t>, 2> groups{p.group(0), p.group(1)};
  EvaluationRecord rec;
  rec.partition = p;
  rec.kind = ObjectiveKind::kProxyG;
  rec.fits = 2;
  rec.scores.assign(scans_.size(), 0.0);
  parallel_for(2, [&](std::size_t g) {
    const auto model = fit_group(groups[g]);
    for (auto i : groups[1 - g]) rec.scores[i] = learner_.sdsc(*model, *scans_[i]);
  });
  for (std::size_t i = 0; i < scans_.size(); ++i) rec.relative.push_back(rec.scores[i] / baseline_.m[i]);
  rec.value = std::accumulate(rec.relative.begin(), rec.relative.end(), 0.0) / double(scans_.size());

  std::lock_guard lock(mu_);
  return cache_.emplace(std::make_pair(ObjectiveKind::kProxyG, p), rec).first->second;
}

EvaluationRecord PartitionEvaluator::direct_f(const Partition& raw) const {
  const auto p = checked(raw);
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find({ObjectiveKind::kDirectF, p}); it != cache_.end()) return it->second;
  }
  const std::array<std::vector<std::size_t>, 2> groups{p.group(0), p.group(1)};
  if (groups[0].size() < 2 || groups[1].size() < 2)
    throw InvalidPartitionError("direct objective needs both subgroups of size >= 2");

  EvaluationRecord rec;
  rec.partition = p;
  rec.kind = ObjectiveKind::kDirectF;
  rec.fits = static_cast<int>(scans_.size());
  rec.scores.assign(scans_.size(), 0.0);
  parallel_for(scans_.size(), [&](std::size_t i) {
    const auto& own = groups[p[i] ? 1 : 0];
    std::vector<std::size_t> rest;
    for (auto j : own)
      if (j != i) rest.push_back(j);
    const auto model = fit_group(rest);
    rec.scores[i] = learner_.sdsc(*model, *scans_[i]);
  });
  for (std::size_t i = 0; i < scans_.size(); ++i) rec.relative.push_back(rec.scores[i] / baseline_.m[i]);
  rec.value = std::accumulate(rec.relative.begin(), rec.relative.end(), 0.0) / double(scans_.size());

  std::lock_guard lock(mu_);
  return cache_.emplace(std::make_pair(ObjectiveKind::kDirectF, p), rec).first->second;
}

}  // namespace stylesplit
