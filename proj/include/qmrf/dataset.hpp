#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qmrf {

/// Files of one rectified stereo pair with ground truth.
struct StereoPairFiles {
  std::string name;
  std::filesystem::path left;
  std::filesystem::path right;
  std::filesystem::path gt;
  double gt_scale = 8.0;
};

/// Recognises, in this order:
///   left.* / right.* / gt.*                    (scale from a "scale" file, else 8)
///   scene1.row3.col3.ppm / col4 / truedisp.row3.col3.pgm   (scale 16)
///   im2.ppm / im6.ppm / disp2.pgm               (scale 8)
/// Returns nullopt when the directory holds none of these layouts.
std::optional<StereoPairFiles> find_pair(const std::filesystem::path& dir);

/// Pairs in the sub-directories of root, sorted by name.
std::vector<StereoPairFiles> find_pairs(const std::filesystem::path& root);

}  // namespace qmrf
