#include "stylesplit/cohort_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace stylesplit {

namespace fs = std::filesystem;

namespace {

std::string slice_name(const char* prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03zu.pgm", prefix, index);
  return buf;
}

// Next whitespace-separated header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

}  // namespace

std::uint8_t quantize_intensity(float v) {
  const float clamped = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0f));
}

void write_pgm(const fs::path& path, const Grid<std::uint8_t>& raster) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << raster.width() << ' ' << raster.height() << "\n255\n";
  auto v = raster.values();
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Grid<std::uint8_t> read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (header_token(in) != "P5") throw IoError(path.string() + ": not a binary PGM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(header_token(in));
    h = std::stoi(header_token(in));
    maxval = std::stoi(header_token(in));
  } catch (const std::exception&) {
    throw IoError(path.string() + ": malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) throw IoError(path.string() + ": unsupported PGM geometry");
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size()))
    throw IoError(path.string() + ": truncated pixel data");
  return Grid<std::uint8_t>(w, h, std::move(data));
}

void write_scan(const fs::path& scan_dir, const Scan& scan) {
  fs::create_directories(scan_dir);
  const int w = scan.width();
  const int h = scan.height();
  for (std::size_t i = 0; i < scan.slice_count(); ++i) {
    const auto& s = scan.slices()[i];
    Grid<std::uint8_t> img(w, h), msk(w, h);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        img(c, r) = quantize_intensity(s.image(c, r));
        msk(c, r) = s.mask.at(c, r) ? 255 : 0;
      }
    write_pgm(scan_dir / slice_name("image", i), img);
    write_pgm(scan_dir / slice_name("mask", i), msk);
  }
  const auto sp = scan.spacing();
  nlohmann::json meta = {{"id", scan.id()},
                         {"spacing", {sp.x, sp.y, sp.z}},
                         {"slices", scan.slice_count()},
                         {"width", w},
                         {"height", h}};
  std::ofstream out(scan_dir / "meta.json");
  out << meta.dump(2) << '\n';
  if (!out) throw IoError("failed writing meta.json in " + scan_dir.string());
}

Scan read_scan(const fs::path& scan_dir) {
  std::ifstream in(scan_dir / "meta.json");
  if (!in) throw IoError("missing meta.json in " + scan_dir.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(scan_dir.string() + "/meta.json: " + e.what());
  }
  const auto id = meta.at("id").get<std::string>();
  const auto sp = meta.at("spacing").get<std::vector<double>>();
  if (sp.size() != 3) throw IoError(scan_dir.string() + "/meta.json: spacing needs 3 values");
  const VoxelSpacing spacing{sp[0], sp[1], sp[2]};
  const auto n = meta.at("slices").get<std::size_t>();

  std::vector<Slice> slices;
  slices.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto img = read_pgm(scan_dir / slice_name("image", i));
    const auto msk = read_pgm(scan_dir / slice_name("mask", i));
    if (img.width() != msk.width() || img.height() != msk.height())
      throw IoError(scan_dir.string() + ": image/mask size mismatch at slice " + std::to_string(i));
    Image image(img.width(), img.height());
    std::vector<std::uint8_t> bits(msk.size());
    for (std::size_t k = 0; k < msk.size(); ++k) {
      const auto m = msk.values()[k];
      if (m != 0 && m != 255) throw IoError(scan_dir.string() + ": mask values must be 0 or 255");
      bits[k] = m ? 1 : 0;
      image.values()[k] = static_cast<float>(img.values()[k]) / 255.0f;
    }
    slices.push_back({std::move(image), Mask(msk.width(), msk.height(), std::move(bits), spacing.in_plane())});
  }
  return Scan(id, std::move(slices), spacing);
}

void write_scans(const fs::path& root, const std::vector<Scan>& scans) {
  fs::create_directories(root);
  for (const auto& s : scans) write_scan(root / s.id(), s);
}

std::vector<Scan> read_scans(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError(root.string() + " is not a directory");
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && fs::exists(e.path() / "meta.json")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<Scan> scans;
  scans.reserve(dirs.size());
  for (const auto& d : dirs) scans.push_back(read_scan(d));
  return scans;
}

}  // namespace stylesplit
