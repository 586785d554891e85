#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panda/raster.hpp"

namespace panda {

inline constexpr std::uint32_t kMaxSegmentId = (1u << 24) - 1;

struct CategoryDef {
    int id = 0;
    std::string name;
    bool is_thing = false;
    std::string supercategory;
    std::optional<std::array<std::uint8_t, 3>> color;

    bool operator==(const CategoryDef&) const = default;
};

struct SegmentInfo {
    std::uint32_t id = 0;
    int category_id = 0;
    std::int64_t area = 0;
    /// [x, y, width, height], recomputed from the raster.
    std::array<int, 4> bbox{};
    bool iscrowd = false;

    bool operator==(const SegmentInfo&) const = default;
};

struct PanopticSample {
    std::string image_id;
    /// The JSON id was an integer rather than a string.
    bool numeric_id = false;
    std::string image_file;
    std::string label_file;
    RgbImage rgb;
    LabelMap label_map;
    std::vector<SegmentInfo> segments;

    Extent extent() const noexcept { return label_map.extent(); }
    bool operator==(const PanopticSample&) const = default;
};

struct Dataset {
    std::vector<CategoryDef> categories;
    std::vector<PanopticSample> samples;

    bool operator==(const Dataset&) const = default;
};

/// Per-image metadata as it appears in the annotation JSON.
struct ManifestEntry {
    std::string image_id;
    bool numeric_id = false;
    std::string image_file;
    std::string label_file;
    int width = 0;
    int height = 0;
    std::vector<SegmentInfo> segments;
};

/// The annotation JSON without rasters. Samples can be materialised one at a
/// time from it, so large datasets never need to be resident.
struct DatasetManifest {
    std::vector<CategoryDef> categories;
    std::vector<ManifestEntry> entries;

    const CategoryDef* find_category(int id) const noexcept;
};

struct DatasetPaths {
    std::filesystem::path annotations;
    std::filesystem::path images_dir;
    std::filesystem::path labels_dir;
};

struct LoadOptions {
    /// Drop inconsistent segments (with a log record) instead of failing.
    bool lenient = false;
    /// Skip decoding RGB images, e.g. for evaluation or statistics.
    bool load_rgb = true;
};

// --- label-map codec -------------------------------------------------------

/// id = R + 256 G + 65536 B for every pixel.
LabelMap decode_label_map(const RgbImage& raster);

/// Inverse of decode_label_map. Throws IdOverflow for ids >= 2^24.
RgbImage encode_label_map(const LabelMap& labels);

// --- manifest --------------------------------------------------------------

DatasetManifest parse_manifest(std::string_view json_text);
DatasetManifest read_manifest(const std::filesystem::path& annotations);
std::string serialize_manifest(const DatasetManifest& manifest);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& annotations);

ManifestEntry manifest_entry(const PanopticSample& sample);

// --- samples and datasets --------------------------------------------------

/// Checks sample invariants against the category table. Strict mode throws
/// ConsistencyError; lenient mode repairs the sample in place and logs.
void validate_sample(PanopticSample& sample, std::span<const CategoryDef> categories, bool lenient);

/// Recomputes area and bbox of every listed segment from the raster.
/// Segment ids that do not appear in the raster get area 0.
void refresh_segment_geometry(PanopticSample& sample);

PanopticSample load_sample(const DatasetManifest& manifest, std::size_t index,
                           const DatasetPaths& paths, const LoadOptions& options = {});

Dataset load_dataset(const DatasetPaths& paths, const LoadOptions& options = {});

/// Writes the sample's label PNG and RGB PNG into the output directories.
/// File names come from the sample; empty names default to `{image_id}.png`.
void save_sample(const PanopticSample& sample, const DatasetPaths& out);

/// Writes label PNGs, RGB PNGs and the annotation JSON. RGB images are always
/// stored as PNG, so loading the result reproduces the dataset exactly.
void save_dataset(const Dataset& dataset, const DatasetPaths& out);

}  // namespace panda
