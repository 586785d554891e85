#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "panda/panoptic_io.hpp"
#include "panda/raster.hpp"

namespace panda {

/// A single foreground region (thing or stuff) lifted out of its image.
/// `mask` and `patch` share the bounding-box frame; `origin` places that
/// frame in the image.
struct Segment {
    std::uint32_t segment_id = 0;
    int category_id = 0;
    bool is_thing = false;
    Bitmap mask;
    RgbImage patch;
    Point2i origin;
    std::int64_t area_px = 0;
    double area_fraction = 0.0;
    /// Image-frame coordinates, pixel-centre convention.
    Point2d centroid;

    Extent extent() const noexcept { return {mask.width, mask.height}; }
};

struct Decomposition {
    std::vector<Segment> segments;
    Bitmap void_mask;
};

/// One Segment per SegmentInfo, in SegmentInfo order. Segments are not split
/// into connected components. If the sample has no RGB pixels the patches
/// are left empty.
Decomposition extract_segments(const PanopticSample& sample, std::span<const CategoryDef> categories);

/// Mean of set-pixel centres (x + 0.5, y + 0.5), offset by `origin`.
/// Throws EmptyMask when no pixel is set.
Point2d centroid_of(const Bitmap& mask, Point2i origin);

}  // namespace panda
