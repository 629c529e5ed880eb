#include "stylesplit/learner.hpp"

#include "stylesplit/morphological_learner.hpp"

namespace stylesplit {

nlohmann::json LearnerSpec::to_json() const {
  nlohmann::json j = {{"kind", kind}, {"hyperparams", hyperparams}};
  if (pretrain_state) j["pretrain_state"] = *pretrain_state;
  return j;
}

LearnerSpec LearnerSpec::from_json(const nlohmann::json& j) {
  LearnerSpec s;
  s.kind = j.value("kind", s.kind);
  if (j.contains("hyperparams")) s.hyperparams = j.at("hyperparams");
  if (j.contains("pretrain_state") && !j.at("pretrain_state").is_null()) s.pretrain_state = j.at("pretrain_state");
  return s;
}

double Learner::sdsc(const SegmentationModel& model, const Scan& scan) const {
  return score(model, scan).sdsc;
}

ScorePair Learner::score(const SegmentationModel& model, const Scan& scan) const {
  const auto truth = scan.masks();
  const auto predicted = model.predict(scan);
  return score_scan(truth, predicted, metric());
}

LearnerRegistry::LearnerRegistry() {
  add(MorphologicalStyleLearner::kKind, [](const LearnerSpec& spec, const MetricConfig& metric) {
    return std::make_unique<MorphologicalStyleLearner>(spec, metric);
  });
}

LearnerRegistry& LearnerRegistry::instance() {
  static LearnerRegistry registry;
  return registry;
}

void LearnerRegistry::add(const std::string& kind, LearnerFactory factory) {
  factories_[kind] = std::move(factory);
}

bool LearnerRegistry::contains(const std::string& kind) const { return factories_.count(kind) != 0; }

std::vector<std::string> LearnerRegistry::kinds() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : factories_) out.push_back(k);
  return out;
}

std::unique_ptr<Learner> LearnerRegistry::make(const LearnerSpec& spec, const MetricConfig& metric) const {
  const auto it = factories_.find(spec.kind);
  if (it == factories_.end()) throw LearnerError("no learner registered for kind '" + spec.kind + "'");
  return it->second(spec, metric);
}

std::vector<const Scan*> as_pointers(std::span<const Scan> scans) {
  std::vector<const Scan*> out;
  out.reserve(scans.size());
  for (const auto& s : scans) out.push_back(&s);
  return out;
}

}  // namespace stylesplit
