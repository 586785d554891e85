#include "panda/decompose.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <unordered_map>

#include "panda/error.hpp"

namespace panda {

Point2d centroid_of(const Bitmap& mask, Point2i origin) {
    // Integer sums keep the result exact for any raster that fits in memory.
    std::int64_t n = 0, sx = 0, sy = 0;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.test(x, y)) continue;
            ++n;
            sx += x;
            sy += y;
        }
    }
    if (n == 0) throw EmptyMask("centroid of an empty mask");
    const double inv = 1.0 / static_cast<double>(n);
    return {origin.x + static_cast<double>(sx) * inv + 0.5, origin.y + static_cast<double>(sy) * inv + 0.5};
}

Decomposition extract_segments(const PanopticSample& sample, std::span<const CategoryDef> categories) {
    const LabelMap& lm = sample.label_map;
    const bool with_rgb = !sample.rgb.empty();
    if (with_rgb && sample.rgb.extent() != lm.extent()) {
        throw DimensionMismatch("image " + sample.image_id + ": RGB and label map sizes differ");
    }

    struct Box {
        int x0 = std::numeric_limits<int>::max(), y0 = std::numeric_limits<int>::max();
        int x1 = -1, y1 = -1;
    };
    std::unordered_map<std::uint32_t, std::size_t> slot;
    std::vector<Box> boxes(sample.segments.size());
    for (std::size_t i = 0; i < sample.segments.size(); ++i) slot.emplace(sample.segments[i].id, i);

    Decomposition out;
    out.void_mask = Bitmap(lm.width, lm.height);
    for (int y = 0; y < lm.height; ++y) {
        for (int x = 0; x < lm.width; ++x) {
            auto it = slot.find(lm.at(x, y));
            if (it == slot.end()) {
                out.void_mask.set(x, y);
                continue;
            }
            Box& b = boxes[it->second];
            b.x0 = std::min(b.x0, x);
            b.y0 = std::min(b.y0, y);
            b.x1 = std::max(b.x1, x);
            b.y1 = std::max(b.y1, y);
        }
    }

    const double frame_area = static_cast<double>(lm.extent().area());
    out.segments.reserve(sample.segments.size());
    for (std::size_t i = 0; i < sample.segments.size(); ++i) {
        const SegmentInfo& info = sample.segments[i];
        const Box& b = boxes[i];
        if (b.x1 < 0) {
            throw ConsistencyError("image " + sample.image_id + ": segment " + std::to_string(info.id) +
                                   " has no pixels");
        }
        Segment seg;
        seg.segment_id = info.id;
        seg.category_id = info.category_id;
        auto cat = std::find_if(categories.begin(), categories.end(),
                                [&](const CategoryDef& c) { return c.id == info.category_id; });
        if (cat == categories.end()) {
            throw ConsistencyError("image " + sample.image_id + ": unknown category " +
                                   std::to_string(info.category_id));
        }
        seg.is_thing = cat->is_thing;
        seg.origin = {b.x0, b.y0};
        const int w = b.x1 - b.x0 + 1;
        const int h = b.y1 - b.y0 + 1;
        seg.mask = Bitmap(w, h);
        if (with_rgb) seg.patch = RgbImage(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (lm.at(b.x0 + x, b.y0 + y) != info.id) continue;
                seg.mask.set(x, y);
                ++seg.area_px;
                if (with_rgb) std::copy_n(sample.rgb.at(b.x0 + x, b.y0 + y), 3, seg.patch.at(x, y));
            }
        }
        seg.area_fraction = static_cast<double>(seg.area_px) / frame_area;
        seg.centroid = centroid_of(seg.mask, seg.origin);
        out.segments.push_back(std::move(seg));
    }
    return out;
}

}  // namespace panda
