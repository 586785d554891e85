#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "panda/panoptic_io.hpp"
#include "panda/rng.hpp"

namespace panda::testing {

/// Builds a valid sample from a label map: one SegmentInfo per distinct
/// nonzero id (ascending), category taken from `category_of`, RGB a
/// deterministic function of (id, x, y).
PanopticSample sample_from_labels(const std::string& image_id, const LabelMap& labels,
                                  const std::map<std::uint32_t, int>& category_of);

/// Label map from rows of ids, e.g. {{1,1,2},{1,2,2}}.
LabelMap labels_from_rows(const std::vector<std::vector<std::uint32_t>>& rows);

/// Two 8x6 images with three segments each (two stuff, one thing).
Dataset two_image_fixture();

/// Street-scene style dataset: six classes (road, building, sky as stuff;
/// car, person, pole as things), mixed segment sizes, some void.
Dataset toy_dataset(int images, std::uint64_t seed, int width = 96, int height = 64);

/// Scene for class-balance checks: one stuff class covering `dominant_fraction`
/// of the frame plus several small (< 10%) segments of other classes.
Dataset dominant_class_dataset(int images, double dominant_fraction, std::uint64_t seed);

/// Small random dataset for property tests: up to 4 images of at most
/// 16x16, random ids (including large ones), random categories.
Dataset random_dataset(RngStream& rng);

/// RAII temporary directory.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Dataset paths for the standard layout {root}/panoptic.json, images/, labels/.
DatasetPaths layout(const std::filesystem::path& root);

/// Relative path -> file bytes for every regular file under `root`.
std::map<std::string, std::string> tree_bytes(const std::filesystem::path& root);

std::string read_file(const std::filesystem::path& path);

}  // namespace panda::testing
