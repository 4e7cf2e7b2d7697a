#include "qmrf/dataset.hpp"

#include <algorithm>
#include <fstream>

namespace qmrf {

namespace {

namespace fs = std::filesystem;

std::optional<fs::path> with_stem(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".pgm", ".ppm", ".pnm"}) {
    const fs::path p = dir / (stem + ext);
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

}  // namespace

std::optional<StereoPairFiles> find_pair(const fs::path& dir) {
  if (!fs::is_directory(dir)) return std::nullopt;
  StereoPairFiles f;
  f.name = dir.filename().string();

  if (auto l = with_stem(dir, "left"), r = with_stem(dir, "right"), g = with_stem(dir, "gt"); l && r && g) {
    f.left = *l;
    f.right = *r;
    f.gt = *g;
    std::ifstream scale(dir / "scale");
    if (double s = 0.0; scale >> s && s > 0.0) f.gt_scale = s;
    return f;
  }
  if (auto l = with_stem(dir, "scene1.row3.col3"), r = with_stem(dir, "scene1.row3.col4"),
      g = with_stem(dir, "truedisp.row3.col3");
      l && r && g) {
    f.left = *l;
    f.right = *r;
    f.gt = *g;
    f.gt_scale = 16.0;
    return f;
  }
  if (auto l = with_stem(dir, "im2"), r = with_stem(dir, "im6"), g = with_stem(dir, "disp2"); l && r && g) {
    f.left = *l;
    f.right = *r;
    f.gt = *g;
    f.gt_scale = 8.0;
    return f;
  }
  return std::nullopt;
}

std::vector<StereoPairFiles> find_pairs(const fs::path& root) {
  std::vector<StereoPairFiles> out;
  if (!fs::is_directory(root)) return out;
  for (const auto& entry : fs::directory_iterator(root))
    if (auto p = find_pair(entry.path())) out.push_back(std::move(*p));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

}  // namespace qmrf
