#include "stylesplit/style_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>

#include "stylesplit/cohort_io.hpp"

namespace stylesplit {

namespace {

constexpr std::array<std::pair<StyleOperation, std::string_view>, 8> kOperationNames{{
    {StyleOperation::kErosion, "erosion"},
    {StyleOperation::kDilation, "dilation"},
    {StyleOperation::kShiftUp, "shift-up"},
    {StyleOperation::kShiftDown, "shift-down"},
    {StyleOperation::kTopOver, "top-over"},
    {StyleOperation::kTopUnder, "top-under"},
    {StyleOperation::kBottomOver, "bottom-over"},
    {StyleOperation::kBottomUnder, "bottom-under"},
}};

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_number(std::string_view s, std::string_view what) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("invalid " + std::string(what) + ": '" + std::string(s) + "'");
  }
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Separable blur with edge clamping.
Grid<double> blur(const Mask& m, double sigma) {
  const int w = m.width();
  const int h = m.height();
  Grid<double> out(w, h, 0.0);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out(c, r) = m.at(c, r) ? 1.0 : 0.0;
  if (sigma <= 0.0) return out;
  const auto k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  Grid<double> tmp(w, h, 0.0);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * out(std::clamp(c + i, 0, w - 1), r);
      tmp(c, r) = acc;
    }
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * tmp(c, std::clamp(r + i, 0, h - 1));
      out(c, r) = acc;
    }
  return out;
}

// Keeps `changed` on the rows selected by `in_region` and `original` elsewhere.
Mask merge_rows(const Mask& original, const Mask& changed, int split_row, bool top) {
  Mask out = original;
  for (int r = 0; r < original.height(); ++r) {
    const bool in_region = top ? r <= split_row : r > split_row;
    if (!in_region) continue;
    for (int c = 0; c < original.width(); ++c) out.set(c, r, changed.at(c, r));
  }
  return out;
}

}  // namespace

std::string_view to_string(StyleOperation op) {
  for (const auto& [k, name] : kOperationNames)
    if (k == op) return name;
  return "unknown";
}

StyleOperation parse_style_operation(std::string_view name) {
  for (const auto& [k, n] : kOperationNames)
    if (n == name) return k;
  throw InvalidArgument("unknown style operation '" + std::string(name) + "'");
}

void StyleSpec::validate() const {
  if (!(magnitude_mean > 0.0)) throw InvalidArgument("style magnitude mean must be positive");
  if (!(magnitude_std >= 0.0)) throw InvalidArgument("style magnitude std must be non-negative");
}

std::string StyleSpec::to_string() const {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return std::string(buf);
  };
  return std::string(stylesplit::to_string(operation)) + ":" + num(magnitude_mean) + ":" + num(magnitude_std);
}

StyleSpec StyleSpec::parse(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw InvalidArgument("style must look like op:mean:std, got '" + std::string(text) + "'");
  StyleSpec s{parse_style_operation(parts[0]), parse_number(parts[1], "magnitude mean"),
              parse_number(parts[2], "magnitude std")};
  s.validate();
  return s;
}

int StyleSpec::sample_magnitude(Rng& rng) const {
  std::normal_distribution<double> dist(magnitude_mean, magnitude_std);
  const double t = magnitude_std > 0.0 ? dist(rng) : magnitude_mean;
  return static_cast<int>(std::lround(std::max(0.0, t)));
}

std::vector<StyleSpec> parse_style_list(std::string_view text) {
  std::vector<StyleSpec> specs;
  for (auto part : split(text, ','))
    if (!part.empty()) specs.push_back(StyleSpec::parse(part));
  return specs;
}

void PhantomConfig::validate() const {
  if (width < 32 || height < 32) throw InvalidArgument("phantom grid must be at least 32x32");
  if (slices_per_scan < 3) throw InvalidArgument("phantom needs at least 3 slices per scan");
  if (!(spacing.x > 0 && spacing.y > 0 && spacing.z > 0)) throw InvalidArgument("phantom spacing must be positive");
  if (blur_sigma < 0 || noise_sd < 0) throw InvalidArgument("phantom blur and noise must be non-negative");
}

std::vector<Scan> generate_phantom(Rng& rng, int n_scans, const PhantomConfig& cfg) {
  cfg.validate();
  if (n_scans < 2) throw InvalidArgument("phantom cohort needs at least 2 scans");
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * uni(rng); };
  const double scale = std::min(cfg.width, cfg.height) / 128.0;

  std::vector<Scan> scans;
  scans.reserve(n_scans);
  for (int s = 0; s < n_scans; ++s) {
    const double cx0 = cfg.width / 2.0 + between(-6, 6) * scale;
    const double cy0 = cfg.height / 2.0 + between(-6, 6) * scale;
    const double a0 = between(22, 30) * scale;
    const double b0 = between(18, 26) * scale;
    const double exponent = between(2.0, 3.2);
    const double angle = between(-0.3, 0.3);
    const double drift_x = between(-0.4, 0.4) * scale;
    const double drift_y = between(-0.4, 0.4) * scale;

    std::vector<Slice> slices;
    slices.reserve(cfg.slices_per_scan);
    const int n = cfg.slices_per_scan;
    for (int z = 0; z < n; ++z) {
      // Sizes taper toward both ends of the volume.
      const double taper = 0.6 + 0.4 * std::sin(std::numbers::pi * (z + 0.5) / n);
      const double a = a0 * taper * between(0.97, 1.03);
      const double b = b0 * taper * between(0.97, 1.03);
      const double cx = cx0 + drift_x * (z - n / 2.0);
      const double cy = cy0 + drift_y * (z - n / 2.0);
      const double ca = std::cos(angle), sa = std::sin(angle);

      Mask mask(cfg.width, cfg.height, cfg.spacing.in_plane());
      for (int r = 0; r < cfg.height; ++r)
        for (int c = 0; c < cfg.width; ++c) {
          const double x = c + 0.5 - cx;
          const double y = r + 0.5 - cy;
          const double u = (ca * x + sa * y) / a;
          const double v = (-sa * x + ca * y) / b;
          if (std::pow(std::abs(u), exponent) + std::pow(std::abs(v), exponent) <= 1.0) mask.set(c, r, true);
        }

      const auto smooth = blur(mask, cfg.blur_sigma);
      std::normal_distribution<double> noise(0.0, cfg.noise_sd > 0 ? cfg.noise_sd : 1.0);
      Image image(cfg.width, cfg.height);
      for (int r = 0; r < cfg.height; ++r)
        for (int c = 0; c < cfg.width; ++c) {
          const double e = cfg.noise_sd > 0 ? noise(rng) : 0.0;
          const double v = 0.15 + 0.7 * smooth(c, r) + e;
          image(c, r) = static_cast<float>(quantize_intensity(static_cast<float>(v))) / 255.0f;
        }
      slices.push_back({std::move(image), std::move(mask)});
    }
    char id[32];
    std::snprintf(id, sizeof id, "scan_%03d", s);
    scans.emplace_back(id, std::move(slices), cfg.spacing);
  }
  return scans;
}

std::vector<Scan> generate_phantom(std::uint64_t seed, int n_scans, const PhantomConfig& cfg) {
  Rng rng(seed);
  return generate_phantom(rng, n_scans, cfg);
}

Mask apply_style_op(const Mask& m, StyleOperation op, int magnitude) {
  if (magnitude < 0) throw InvalidArgument("style magnitude must be non-negative");
  if (m.empty() || magnitude == 0) return m;
  switch (op) {
    case StyleOperation::kErosion:
      return erode(m, magnitude);
    case StyleOperation::kDilation:
      return dilate(m, magnitude);
    case StyleOperation::kShiftUp:
      return magnitude >= m.height() ? Mask(m.width(), m.height(), m.spacing()) : shift(m, 0, -magnitude);
    case StyleOperation::kShiftDown:
      return magnitude >= m.height() ? Mask(m.width(), m.height(), m.spacing()) : shift(m, 0, magnitude);
    case StyleOperation::kTopOver:
      return merge_rows(m, dilate(m, magnitude), m.centroid_row(), true);
    case StyleOperation::kTopUnder:
      return merge_rows(m, erode(m, magnitude), m.centroid_row(), true);
    case StyleOperation::kBottomOver:
      return merge_rows(m, dilate(m, magnitude), m.centroid_row(), false);
    case StyleOperation::kBottomUnder:
      return merge_rows(m, erode(m, magnitude), m.centroid_row(), false);
  }
  throw InvalidArgument("unknown style operation");
}

Scan apply_style(const Scan& scan, const StyleSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<Mask> out;
  out.reserve(scan.slice_count());
  for (const auto& slice : scan.slices()) {
    int t = spec.sample_magnitude(rng);
    Mask styled = apply_style_op(slice.mask, spec.operation, t);
    while (styled.empty() && !slice.mask.empty() && t > 0) {
      --t;
      styled = apply_style_op(slice.mask, spec.operation, t);
    }
    out.push_back(std::move(styled));
  }
  return scan.with_masks(std::move(out));
}

CohortLayout CohortLayout::parse(std::string_view name) {
  if (name == "two-style") return two_style();
  if (name == "three-style") return three_style();
  if (name == "one-style") return one_style();
  throw InvalidArgument("unknown cohort layout '" + std::string(name) + "'");
}

const Scan& StyledCohort::scan(const std::string& id) const {
  for (const auto& s : scans)
    if (s.id() == id) return s;
  throw InvalidArgument("no scan with id '" + id + "'");
}

std::vector<const Scan*> StyledCohort::pretrain_scans() const {
  std::vector<const Scan*> out;
  for (const auto& id : pretrain_ids) out.push_back(&scan(id));
  return out;
}

std::vector<const Scan*> StyledCohort::optimize_scans() const {
  std::vector<const Scan*> out;
  for (const auto& id : optimize_ids) out.push_back(&scan(id));
  return out;
}

std::vector<int> StyledCohort::optimize_labels() const {
  std::vector<int> out;
  for (const auto& id : optimize_ids) out.push_back(style_labels.at(id));
  return out;
}

StyledCohort build_experiment_cohort(std::uint64_t seed, const std::vector<StyleSpec>& specs,
                                     const CohortLayout& layout, const PhantomConfig& phantom) {
  if (static_cast<int>(specs.size()) != layout.styles)
    throw InvalidArgument("layout '" + layout.name + "' expects " + std::to_string(layout.styles) +
                          " styles, got " + std::to_string(specs.size()));
  if (layout.pretrain_scans < 0 || layout.pretrain_scans >= layout.total_scans)
    throw InvalidArgument("layout pretrain count out of range");
  for (const auto& s : specs) s.validate();

  Rng rng(seed);
  auto base = generate_phantom(rng, layout.total_scans, phantom);

  StyledCohort cohort;
  cohort.specs = specs;
  cohort.layout = layout.name;
  cohort.seed = seed;

  const int styles = layout.styles;
  std::vector<std::vector<std::string>> by_style(styles);
  for (int i = 0; i < layout.total_scans; ++i) {
    const int label = i % styles;
    cohort.scans.push_back(apply_style(base[i], specs[label], rng));
    cohort.style_labels[cohort.scans.back().id()] = label;
    by_style[label].push_back(cohort.scans.back().id());
  }

  // Spread the pretrain quota as evenly as possible across styles.
  for (int s = 0; s < styles; ++s) {
    auto& ids = by_style[s];
    std::shuffle(ids.begin(), ids.end(), rng);
    const int quota = layout.pretrain_scans / styles + (s < layout.pretrain_scans % styles ? 1 : 0);
    if (quota > static_cast<int>(ids.size())) throw InvalidArgument("pretrain quota exceeds style group size");
    cohort.pretrain_ids.insert(cohort.pretrain_ids.end(), ids.begin(), ids.begin() + quota);
    cohort.optimize_ids.insert(cohort.optimize_ids.end(), ids.begin() + quota, ids.end());
  }
  std::sort(cohort.pretrain_ids.begin(), cohort.pretrain_ids.end());
  std::sort(cohort.optimize_ids.begin(), cohort.optimize_ids.end());
  return cohort;
}

nlohmann::json cohort_manifest(const StyledCohort& cohort) {
  nlohmann::json specs = nlohmann::json::array();
  for (const auto& s : cohort.specs) specs.push_back(s.to_string());
  nlohmann::json labels = nlohmann::json::object();
  for (const auto& [id, label] : cohort.style_labels) labels[id] = label;
  return {{"seed", cohort.seed},          {"layout", cohort.layout},
          {"specs", specs},               {"style_labels", labels},
          {"pretrain_ids", cohort.pretrain_ids}, {"optimize_ids", cohort.optimize_ids}};
}

void write_cohort(const std::filesystem::path& dir, const StyledCohort& cohort) {
  write_scans(dir, cohort.scans);
  std::ofstream out(dir / "cohort.json");
  out << cohort_manifest(cohort).dump(2) << '\n';
  if (!out) throw IoError("failed writing cohort.json in " + dir.string());
}

StyledCohort read_cohort(const std::filesystem::path& dir) {
  std::ifstream in(dir / "cohort.json");
  if (!in) throw IoError("missing cohort.json in " + dir.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(dir.string() + "/cohort.json: " + e.what());
  }
  StyledCohort cohort;
  cohort.scans = read_scans(dir);
  cohort.seed = j.at("seed").get<std::uint64_t>();
  cohort.layout = j.at("layout").get<std::string>();
  for (const auto& s : j.at("specs")) cohort.specs.push_back(StyleSpec::parse(s.get<std::string>()));
  for (const auto& [id, label] : j.at("style_labels").items()) cohort.style_labels[id] = label.get<int>();
  cohort.pretrain_ids = j.at("pretrain_ids").get<std::vector<std::string>>();
  cohort.optimize_ids = j.at("optimize_ids").get<std::vector<std::string>>();
  for (const auto& id : cohort.pretrain_ids) (void)cohort.scan(id);
  for (const auto& id : cohort.optimize_ids) (void)cohort.scan(id);
  return cohort;
}

}  // namespace stylesplit
