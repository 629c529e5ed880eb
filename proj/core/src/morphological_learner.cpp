#include "stylesplit/morphological_learner.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

namespace stylesplit {

namespace {

struct PreparedScan {
  std::vector<BaseSlice> base;
  std::vector<std::vector<Pixel>> target_border;
  // Pixels within tau of the target border.
  std::vector<std::vector<std::uint8_t>> target_near;

  std::shared_mutex mu;
  std::unordered_map<std::uint64_t, SurfaceCounts> counts;
};

std::uint64_t pack(const StyleParams& p) {
  std::uint64_t key = 0;
  for (int i = 0; i < StyleParams::kSize; ++i)
    key = (key << 12) | static_cast<std::uint64_t>((p[i] + 2048) & 0xFFF);
  return key;
}

bool transformed_foreground(std::int64_t signed_d2, int offset) {
  const std::int64_t o2 = std::int64_t{offset} * offset;
  return offset >= 0 ? signed_d2 <= o2 : signed_d2 < -o2;
}

// Surface counts of the transformed base against a prepared target,
// evaluated on the bounding box of the prediction only.
SurfaceCounts slice_counts(const BaseSlice& b, const std::vector<Pixel>& target_border,
                           const std::vector<std::uint8_t>& target_near, std::span<const Pixel> offsets,
                           const StyleParams& p) {
  SurfaceCounts counts{0, target_border.size()};
  if (b.empty) return counts;
  const int top = p.global_offset + p.top_offset;
  const int bottom = p.global_offset + p.bottom_offset;
  const int grow = std::max({0, top, bottom});

  const int c0 = std::max(0, b.min_col - grow + p.shift_dx);
  const int c1 = std::min(b.width - 1, b.max_col + grow + p.shift_dx);
  const int r0 = std::max(0, b.min_row - grow + p.shift_dy);
  const int r1 = std::min(b.height - 1, b.max_row + grow + p.shift_dy);
  if (c0 > c1 || r0 > r1) return counts;

  const int bw = c1 - c0 + 3;
  const int bh = r1 - r0 + 3;
  std::vector<std::uint8_t> fg(static_cast<std::size_t>(bw) * bh, 0);
  for (int r = r0; r <= r1; ++r) {
    const int sr = r - p.shift_dy;
    if (sr < 0 || sr >= b.height) continue;
    const int offset = sr <= b.centroid_row ? top : bottom;
    for (int c = c0; c <= c1; ++c) {
      const int sc = c - p.shift_dx;
      if (sc < 0 || sc >= b.width) continue;
      if (transformed_foreground(b.signed_d2[static_cast<std::size_t>(sr) * b.width + sc], offset))
        fg[static_cast<std::size_t>(r - r0 + 1) * bw + (c - c0 + 1)] = 1;
    }
  }

  std::vector<std::uint8_t> border(fg.size(), 0);
  std::size_t pred_border = 0;
  for (int y = 1; y < bh - 1; ++y)
    for (int x = 1; x < bw - 1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * bw + x;
      if (!fg[i]) continue;
      if (!fg[i - 1] || !fg[i + 1] || !fg[i - bw] || !fg[i + bw]) {
        border[i] = 1;
        ++pred_border;
        const int gc = x - 1 + c0;
        const int gr = y - 1 + r0;
        counts.hits += target_near[static_cast<std::size_t>(gr) * b.width + gc];
      }
    }
  counts.total += pred_border;
  if (pred_border == 0) return counts;

  for (auto t : target_border) {
    for (auto o : offsets) {
      const int x = t.col + o.col - c0 + 1;
      const int y = t.row + o.row - r0 + 1;
      if (x < 1 || y < 1 || x >= bw - 1 || y >= bh - 1) continue;
      if (border[static_cast<std::size_t>(y) * bw + x]) {
        ++counts.hits;
        break;
      }
    }
  }
  return counts;
}

double scan_ratio(const SurfaceCounts& c) { return c.scoreable() ? c.ratio() : 0.0; }

}  // namespace

int& StyleParams::operator[](int i) {
  switch (i) {
    case 0: return global_offset;
    case 1: return top_offset;
    case 2: return bottom_offset;
    case 3: return shift_dx;
    default: return shift_dy;
  }
}

int StyleParams::operator[](int i) const { return const_cast<StyleParams&>(*this)[i]; }

nlohmann::json StyleParams::to_json() const {
  return {{"global_offset", global_offset},
          {"top_offset", top_offset},
          {"bottom_offset", bottom_offset},
          {"shift", {shift_dx, shift_dy}}};
}

StyleParams StyleParams::from_json(const nlohmann::json& j) {
  StyleParams p;
  p.global_offset = j.value("global_offset", 0);
  p.top_offset = j.value("top_offset", 0);
  p.bottom_offset = j.value("bottom_offset", 0);
  if (j.contains("shift")) {
    p.shift_dx = j.at("shift").at(0).get<int>();
    p.shift_dy = j.at("shift").at(1).get<int>();
  }
  return p;
}

Mask threshold_segmentation(const Image& image, double threshold, Spacing spacing) {
  Mask m(image.width(), image.height(), spacing);
  for (int r = 0; r < image.height(); ++r)
    for (int c = 0; c < image.width(); ++c) m.set(c, r, image(c, r) >= threshold);
  return m;
}

BaseSlice BaseSlice::from_mask(const Mask& base) {
  BaseSlice b;
  b.width = base.width();
  b.height = base.height();
  b.spacing = base.spacing();
  b.empty = base.empty();
  if (b.empty) return b;
  b.centroid_row = base.centroid_row();
  b.min_col = b.width;
  b.min_row = b.height;

  Grid<std::uint8_t> fg(b.width, b.height, 0);
  Grid<std::uint8_t> bg(b.width + 2, b.height + 2, 1);
  for (int r = 0; r < b.height; ++r)
    for (int c = 0; c < b.width; ++c)
      if (base.at(c, r)) {
        fg(c, r) = 1;
        bg(c + 1, r + 1) = 0;
        b.min_col = std::min(b.min_col, c);
        b.max_col = std::max(b.max_col, c);
        b.min_row = std::min(b.min_row, r);
        b.max_row = std::max(b.max_row, r);
      }
  const auto to_fg = squared_distance_transform(fg);
  const auto to_bg = squared_distance_transform(bg);
  b.signed_d2.resize(static_cast<std::size_t>(b.width) * b.height);
  for (int r = 0; r < b.height; ++r)
    for (int c = 0; c < b.width; ++c)
      b.signed_d2[static_cast<std::size_t>(r) * b.width + c] = base.at(c, r) ? -to_bg(c + 1, r + 1) : to_fg(c, r);
  return b;
}

Mask render_prediction(const BaseSlice& b, const StyleParams& p) {
  Mask out(b.width, b.height, b.spacing);
  if (b.empty) return out;
  const int top = p.global_offset + p.top_offset;
  const int bottom = p.global_offset + p.bottom_offset;
  for (int r = 0; r < b.height; ++r) {
    const int sr = r - p.shift_dy;
    if (sr < 0 || sr >= b.height) continue;
    const int offset = sr <= b.centroid_row ? top : bottom;
    for (int c = 0; c < b.width; ++c) {
      const int sc = c - p.shift_dx;
      if (sc < 0 || sc >= b.width) continue;
      out.set(c, r, transformed_foreground(b.signed_d2[static_cast<std::size_t>(sr) * b.width + sc], offset));
    }
  }
  return out;
}

MorphologicalHyperparams MorphologicalHyperparams::from_json(const nlohmann::json& j) {
  MorphologicalHyperparams h;
  h.search_radius = j.value("search_radius", h.search_radius);
  h.coarse_step = j.value("coarse_step", h.coarse_step);
  h.fine_step = j.value("fine_step", h.fine_step);
  h.max_sweeps = j.value("max_sweeps", h.max_sweeps);
  h.threshold_min = j.value("threshold_min", h.threshold_min);
  h.threshold_max = j.value("threshold_max", h.threshold_max);
  h.threshold_step = j.value("threshold_step", h.threshold_step);
  if (h.search_radius < 0 || h.coarse_step <= 0 || h.fine_step <= 0 || h.max_sweeps <= 0)
    throw LearnerError("invalid morphological learner search grid");
  if (!(h.threshold_step > 0) || h.threshold_min > h.threshold_max)
    throw LearnerError("invalid morphological learner threshold grid");
  return h;
}

nlohmann::json MorphologicalHyperparams::to_json() const {
  return {{"search_radius", search_radius}, {"coarse_step", coarse_step},   {"fine_step", fine_step},
          {"max_sweeps", max_sweeps},       {"threshold_min", threshold_min}, {"threshold_max", threshold_max},
          {"threshold_step", threshold_step}};
}

std::vector<Mask> MorphologicalStyleModel::predict(const Scan& scan) const {
  std::vector<Mask> out;
  out.reserve(scan.slice_count());
  for (const auto& s : scan.slices()) {
    const auto base = BaseSlice::from_mask(threshold_segmentation(s.image, threshold_, scan.spacing().in_plane()));
    out.push_back(render_prediction(base, params_));
  }
  return out;
}

nlohmann::json MorphologicalStyleModel::describe() const {
  return {{"kind", MorphologicalStyleLearner::kKind}, {"threshold", threshold_}, {"params", params_.to_json()}};
}

struct MorphologicalStyleLearner::Cache {
  std::mutex mu;
  std::unordered_map<std::string, std::shared_ptr<PreparedScan>> scans;
};

MorphologicalStyleLearner::MorphologicalStyleLearner(LearnerSpec spec, MetricConfig metric)
    : spec_(std::move(spec)), metric_(metric), cache_(std::make_unique<Cache>()) {
  metric_.validate();
  hyper_ = MorphologicalHyperparams::from_json(spec_.hyperparams);
  if (spec_.pretrain_state) threshold_ = spec_.pretrain_state->at("threshold").get<double>();
}

MorphologicalStyleLearner::~MorphologicalStyleLearner() = default;

LearnerSpec MorphologicalStyleLearner::pretrain(std::span<const Scan* const> scans) const {
  if (scans.empty()) throw LearnerError("pretrain set is empty");
  bool any = false;
  for (const auto* s : scans)
    for (const auto& sl : s->slices()) any = any || !sl.mask.empty();
  if (!any) throw LearnerError("pretrain set has no foreground");

  const int steps = static_cast<int>(std::floor((hyper_.threshold_max - hyper_.threshold_min) / hyper_.threshold_step + 1e-9));
  double best_t = hyper_.threshold_min;
  double best = -1.0;
  for (int k = 0; k <= steps; ++k) {
    const double t = hyper_.threshold_min + k * hyper_.threshold_step;
    double sum = 0.0;
    for (const auto* s : scans) {
      std::size_t inter = 0, sizes = 0;
      for (const auto& sl : s->slices()) {
        const auto seg = threshold_segmentation(sl.image, t, s->spacing().in_plane());
        auto a = seg.pixels();
        auto b = sl.mask.pixels();
        for (std::size_t i = 0; i < a.size(); ++i) {
          inter += a[i] & b[i];
          sizes += a[i] + b[i];
        }
      }
      sum += sizes == 0 ? 1.0 : 2.0 * double(inter) / double(sizes);
    }
    const double mean = sum / double(scans.size());
    if (mean > best) {
      best = mean;
      best_t = t;
    }
  }
  LearnerSpec out = spec_;
  out.hyperparams = hyper_.to_json();
  out.pretrain_state = nlohmann::json{{"threshold", best_t}, {"pretrain_dsc", best}};
  return out;
}

SurfaceCounts MorphologicalStyleLearner::scan_counts(const Scan& scan, const StyleParams& params) const {
  std::shared_ptr<PreparedScan> prepared;
  {
    std::lock_guard lock(cache_->mu);
    auto& slot = cache_->scans[scan.id()];
    if (!slot) {
      auto ps = std::make_shared<PreparedScan>();
      const auto offsets = tolerance_offsets(scan.spacing().in_plane(), metric_.tau_mm);
      for (const auto& sl : scan.slices()) {
        ps->base.push_back(BaseSlice::from_mask(threshold_segmentation(sl.image, *threshold_, scan.spacing().in_plane())));
        auto border = boundary(sl.mask).points();
        std::vector<std::uint8_t> near(sl.mask.pixel_count(), 0);
        const int w = sl.mask.width();
        const int h = sl.mask.height();
        for (auto t : border)
          for (auto o : offsets) {
            const int c = t.col + o.col;
            const int r = t.row + o.row;
            if (c >= 0 && r >= 0 && c < w && r < h) near[static_cast<std::size_t>(r) * w + c] = 1;
          }
        ps->target_border.push_back(std::move(border));
        ps->target_near.push_back(std::move(near));
      }
      slot = std::move(ps);
    }
    prepared = slot;
  }

  const auto key = pack(params);
  {
    std::shared_lock lock(prepared->mu);
    if (auto it = prepared->counts.find(key); it != prepared->counts.end()) return it->second;
  }
  const auto offsets = tolerance_offsets(scan.spacing().in_plane(), metric_.tau_mm);
  SurfaceCounts total;
  for (std::size_t i = 0; i < prepared->base.size(); ++i)
    total += slice_counts(prepared->base[i], prepared->target_border[i], prepared->target_near[i], offsets, params);
  std::unique_lock lock(prepared->mu);
  prepared->counts.emplace(key, total);
  return total;
}

double MorphologicalStyleLearner::training_objective(std::span<const Scan* const> scans,
                                                     const StyleParams& params) const {
  if (!threshold_) throw LearnerError("learner is not pretrained");
  double sum = 0.0;
  for (const auto* s : scans) sum += scan_ratio(scan_counts(*s, params));
  return sum / static_cast<double>(scans.size());
}

std::shared_ptr<const SegmentationModel> MorphologicalStyleLearner::fit(std::span<const Scan* const> train) const {
  if (!threshold_) throw LearnerError("learner is not pretrained");
  if (train.empty()) throw LearnerError("training set is empty");

  std::vector<const Scan*> ordered(train.begin(), train.end());
  std::sort(ordered.begin(), ordered.end(), [](const Scan* a, const Scan* b) { return a->id() < b->id(); });

  const int radius = hyper_.search_radius;
  StyleParams incumbent;
  double best = training_objective(ordered, incumbent);

  // One coordinate line: take the best value, ties to the lexicographically
  // smallest parameter vector. Progress on (value, -lex order) is strict,
  // so sweeps terminate.
  auto line = [&](int coord, const std::vector<int>& values) {
    bool moved = false;
    for (int v : values) {
      if (v < -radius || v > radius || v == incumbent[coord]) continue;
      StyleParams q = incumbent;
      q[coord] = v;
      const double val = training_objective(ordered, q);
      if (val > best || (val == best && q < incumbent)) {
        incumbent = q;
        best = val;
        moved = true;
      }
    }
    return moved;
  };

  std::vector<int> coarse;
  for (int v = -radius; v <= radius; v += hyper_.coarse_step) coarse.push_back(v);
  if (std::find(coarse.begin(), coarse.end(), 0) == coarse.end()) coarse.push_back(0);

  for (int sweep = 0; sweep < hyper_.max_sweeps; ++sweep) {
    bool moved = false;
    for (int c = 0; c < StyleParams::kSize; ++c) moved = line(c, coarse) || moved;
    if (!moved) break;
  }
  for (int sweep = 0; sweep < hyper_.max_sweeps; ++sweep) {
    bool moved = false;
    for (int c = 0; c < StyleParams::kSize; ++c) {
      std::vector<int> fine;
      for (int d = -(hyper_.coarse_step - 1); d <= hyper_.coarse_step - 1; d += hyper_.fine_step)
        fine.push_back(incumbent[c] + d);
      moved = line(c, fine) || moved;
    }
    if (!moved) break;
  }
  return std::make_shared<MorphologicalStyleModel>(*threshold_, incumbent);
}

double MorphologicalStyleLearner::sdsc(const SegmentationModel& model, const Scan& scan) const {
  const auto* m = dynamic_cast<const MorphologicalStyleModel*>(&model);
  if (m && threshold_ && m->threshold() == *threshold_) return scan_ratio(scan_counts(scan, m->params()));
  return Learner::sdsc(model, scan);
}

}  // namespace stylesplit
