#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "panda/augment.hpp"
#include "panda/metrics.hpp"
#include "panda/panoptic_io.hpp"

namespace panda {

/// Runs fn(0..count-1) on `workers` threads. Every index runs at most once;
/// after the first failure no new index is started. The exception from the
/// lowest failing index is rethrown once all threads have joined.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn);

/// Output layout written by run_augment.
struct OutputLayout {
    std::filesystem::path root;

    std::filesystem::path annotations() const { return root / "panoptic.json"; }
    std::filesystem::path images_dir() const { return root / "images"; }
    std::filesystem::path labels_dir() const { return root / "labels"; }
    DatasetPaths paths() const { return {annotations(), images_dir(), labels_dir()}; }
};

struct JobSpec {
    DatasetPaths input;
    std::filesystem::path output_dir;
    int copies = 1;
    AugmentConfig config;
    unsigned workers = 1;
    /// Copy the originals into the output and list them ahead of the
    /// synthetic samples in one annotation file.
    bool merge_originals = false;
    bool lenient = false;

    /// Throws InvalidConfig on k < 1, workers < 1, a bad AugmentConfig, or an
    /// output directory that coincides with an input directory.
    void validate() const;
};

struct SkipRecord {
    std::string image_id;
    std::uint32_t segment_id = 0;
    std::string reason;
};

struct AugmentSummary {
    std::size_t originals = 0;
    std::size_t synthetic = 0;
    std::size_t written = 0;
    std::size_t segments_in = 0;
    std::size_t segments_out = 0;
    std::size_t dropped = 0;
    std::vector<SkipRecord> skipped;
    double wall_seconds = 0.0;
};

/// Writes `copies` synthetic samples per original, named
/// `{image_id}_panda{k}` for k = 1..copies, into the OutputLayout rooted at
/// job.output_dir. Output bytes do not depend on the worker count.
AugmentSummary run_augment(const JobSpec& job);

std::string summary_json(const AugmentSummary& summary, const JobSpec& job);

// --- class statistics -------------------------------------------------------

struct ClassStatsRow {
    int category_id = 0;
    std::string name;
    bool is_thing = false;
    /// Images in which the class has at least one pixel.
    std::size_t images_present = 0;
    double mean_pixels = 0.0;
    double mean_fraction = 0.0;
    /// Mean over images with any non-void pixel of (class pixels / non-void pixels).
    double mean_nonvoid_share = 0.0;
};

struct ClassStats {
    std::size_t images = 0;
    double mean_void_pixels = 0.0;
    double mean_void_fraction = 0.0;
    std::vector<ClassStatsRow> rows;

    const ClassStatsRow* find(int category_id) const noexcept;
};

/// Incremental form of the statistics; add samples, then finish().
class ClassStatsAccumulator {
public:
    explicit ClassStatsAccumulator(std::vector<CategoryDef> categories);

    void add(const PanopticSample& sample);
    void merge(const ClassStatsAccumulator& other);
    /// Throws EmptyDataset if nothing was added.
    ClassStats finish() const;

private:
    struct Sums {
        std::size_t present = 0;
        double pixels = 0.0;
        double fraction = 0.0;
        double share = 0.0;
    };
    std::vector<CategoryDef> categories_;
    std::vector<Sums> sums_;
    std::size_t images_ = 0;
    std::size_t images_nonvoid_ = 0;
    double void_pixels_ = 0.0;
    double void_fraction_ = 0.0;
};

ClassStats run_stats(const Dataset& dataset);
ClassStats run_stats(const DatasetPaths& paths, unsigned workers, bool lenient = false);

std::string class_stats_csv(const ClassStats& stats);
std::string class_stats_json(const ClassStats& stats);

// --- evaluation -------------------------------------------------------------

/// PQ of predictions against ground truth, matched by image id. RGB images
/// are not read.
PqReport evaluate_dataset(const DatasetPaths& gt, const DatasetPaths& pred, unsigned workers,
                          bool include_fp_only_classes = false);

}  // namespace panda
