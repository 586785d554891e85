#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "panda/decompose.hpp"
#include "panda/panoptic_io.hpp"
#include "panda/raster.hpp"
#include "panda/rng.hpp"

namespace panda {

enum class ShiftMode {
    /// Resized segments move along the ray from the image centre: enlarged
    /// ones outward, shrunk ones inward.
    zoom_coupled,
    /// Uniform placement keeping the bounding-box centre inside the frame.
    uniform_random,
};

struct AugmentConfig {
    double drop_low = 0.10;
    double drop_high = 0.50;
    double resize_min = 0.5;
    double resize_max = 1.5;
    bool enable_dropout = true;
    bool enable_resize = true;
    bool enable_shift = true;
    ShiftMode shift_mode = ShiftMode::zoom_coupled;
    std::uint64_t global_seed = 0;

    /// Throws InvalidConfig unless 0 <= drop_low < drop_high <= 1 and
    /// 0 < resize_min <= resize_max.
    void validate() const;
};

/// 0 below drop_low, 1 at or above drop_high, linear in between.
double dropout_probability(double area_fraction, const AugmentConfig& cfg) noexcept;

/// Uniform draw from [resize_min, resize_max]. Consumes exactly one draw.
double sample_scale(RngStream& rng, const AugmentConfig& cfg);

/// Central dilation about the frame centre: C + s (c - C).
Point2d zoom_displace(Point2d centroid, double scale, Extent dims) noexcept;

/// Nearest-neighbour rescale of mask and patch. The output frame is
/// floor(w s) x floor(h s) with the same top-left origin. Throws
/// DegenerateSegment when the result has no set pixel.
Segment resize_segment(const Segment& seg, double scale);

/// Offset (dx, dy) moving the segment's top-left so that its bounding-box
/// centre pixel (left + w/2, top + h/2, integer halves) is uniform over the frame.
Point2i random_shift(RngStream& rng, const Segment& seg, Extent dims);

/// Result of layering segments over a noise background.
struct Composite {
    RgbImage rgb;
    LabelMap label_map;
    /// Visible segments, in input order, with visible areas and bboxes.
    std::vector<SegmentInfo> segments;
    /// Ids of input segments that ended up with no visible pixel.
    std::vector<std::uint32_t> hidden;
};

/// Fills the frame with i.i.d. uniform bytes (row-major, R,G,B; each
/// next_u64 supplies 8 bytes, least significant first), then paints segments
/// largest area first, ties broken by ascending segment_id. Pixels outside
/// the frame are clipped. Segment ids must be unique and nonzero.
Composite compose(std::span<const Segment> segments, Extent dims, RngStream& rng);

struct SkippedSegment {
    std::uint32_t segment_id = 0;
    std::string reason;
};

struct AugmentOutcome {
    PanopticSample sample;
    std::size_t input_segments = 0;
    std::size_t dropped = 0;
    /// Degenerate after resize or fully clipped/occluded.
    std::vector<SkippedSegment> skipped;
};

/// `{image_id}_panda{copy_index}`
std::string synthetic_image_id(std::string_view image_id, std::uint64_t copy_index);

/// Synthesises one augmented copy of `sample`. The result is a pure function
/// of (sample, categories, cfg, copy_index).
AugmentOutcome augment_sample(const PanopticSample& sample, std::span<const CategoryDef> categories,
                              const AugmentConfig& cfg, std::uint64_t copy_index);

}  // namespace panda
