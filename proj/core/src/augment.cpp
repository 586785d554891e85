#include "panda/augment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "panda/error.hpp"
#include "panda/log.hpp"

namespace panda {

void AugmentConfig::validate() const {
    if (!(drop_low >= 0.0 && drop_low < drop_high && drop_high <= 1.0)) {
        throw InvalidConfig("dropout thresholds must satisfy 0 <= drop_low < drop_high <= 1");
    }
    if (!(resize_min > 0.0 && resize_min <= resize_max && std::isfinite(resize_max))) {
        throw InvalidConfig("resize range must satisfy 0 < resize_min <= resize_max");
    }
}

double dropout_probability(double area_fraction, const AugmentConfig& cfg) noexcept {
    if (area_fraction <= cfg.drop_low) return 0.0;
    if (area_fraction >= cfg.drop_high) return 1.0;
    return (area_fraction - cfg.drop_low) / (cfg.drop_high - cfg.drop_low);
}

double sample_scale(RngStream& rng, const AugmentConfig& cfg) {
    return rng.uniform(cfg.resize_min, cfg.resize_max);
}

Point2d zoom_displace(Point2d centroid, double scale, Extent dims) noexcept {
    const double cx = dims.width / 2.0;
    const double cy = dims.height / 2.0;
    return {cx + scale * (centroid.x - cx), cy + scale * (centroid.y - cy)};
}

Segment resize_segment(const Segment& seg, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InvalidConfig("resize scale must be positive and finite");
    }
    if (scale == 1.0) return seg;

    const int w = seg.mask.width;
    const int h = seg.mask.height;
    const auto new_w = static_cast<std::int64_t>(std::floor(w * scale));
    const auto new_h = static_cast<std::int64_t>(std::floor(h * scale));
    if (new_w <= 0 || new_h <= 0) {
        throw DegenerateSegment("segment " + std::to_string(seg.segment_id) + " vanishes at scale " +
                                std::to_string(scale));
    }
    if (new_w > std::numeric_limits<int>::max() / 4 || new_h > std::numeric_limits<int>::max() / 4) {
        throw InvalidConfig("resized segment too large");
    }

    Segment out;
    out.segment_id = seg.segment_id;
    out.category_id = seg.category_id;
    out.is_thing = seg.is_thing;
    out.origin = seg.origin;
    out.mask = Bitmap(static_cast<int>(new_w), static_cast<int>(new_h));
    const bool with_patch = !seg.patch.empty();
    if (with_patch) out.patch = RgbImage(static_cast<int>(new_w), static_cast<int>(new_h));

    // Destination pixel centre (x + 0.5) maps to source coordinate
    // (x + 0.5) * w / new_w; integer form avoids rounding drift.
    std::vector<int> src_x(static_cast<std::size_t>(new_w));
    for (std::int64_t x = 0; x < new_w; ++x) src_x[x] = static_cast<int>(((2 * x + 1) * w) / (2 * new_w));
    for (std::int64_t y = 0; y < new_h; ++y) {
        const int sy = static_cast<int>(((2 * y + 1) * h) / (2 * new_h));
        for (std::int64_t x = 0; x < new_w; ++x) {
            const int sx = src_x[x];
            if (!seg.mask.test(sx, sy)) continue;
            out.mask.set(static_cast<int>(x), static_cast<int>(y));
            ++out.area_px;
            if (with_patch) std::copy_n(seg.patch.at(sx, sy), 3, out.patch.at(static_cast<int>(x), static_cast<int>(y)));
        }
    }
    if (out.area_px == 0) {
        throw DegenerateSegment("segment " + std::to_string(seg.segment_id) + " has no pixels at scale " +
                                std::to_string(scale));
    }
    out.area_fraction = seg.area_px > 0 ? seg.area_fraction * static_cast<double>(out.area_px) /
                                              static_cast<double>(seg.area_px)
                                        : 0.0;
    out.centroid = centroid_of(out.mask, out.origin);
    return out;
}

Point2i random_shift(RngStream& rng, const Segment& seg, Extent dims) {
    const int half_w = seg.mask.width / 2;
    const int half_h = seg.mask.height / 2;
    const auto left = rng.uniform_int(-half_w, dims.width - 1 - half_w);
    const auto top = rng.uniform_int(-half_h, dims.height - 1 - half_h);
    return {static_cast<int>(left - seg.origin.x), static_cast<int>(top - seg.origin.y)};
}

Composite compose(std::span<const Segment> segments, Extent dims, RngStream& rng) {
    if (dims.width <= 0 || dims.height <= 0) throw InvalidConfig("compose: frame must be non-empty");
    Composite out;
    out.rgb = RgbImage(dims.width, dims.height);
    out.label_map = LabelMap(dims.width, dims.height);

    auto& px = out.rgb.pixels;
    std::size_t i = 0;
    while (i < px.size()) {
        std::uint64_t word = rng.next_u64();
        for (int b = 0; b < 8 && i < px.size(); ++b, ++i) {
            px[i] = static_cast<std::uint8_t>(word & 0xFFu);
            word >>= 8;
        }
    }

    std::unordered_set<std::uint32_t> ids;
    for (const auto& s : segments) {
        if (s.segment_id == 0 || !ids.insert(s.segment_id).second) {
            throw ConsistencyError("compose: segment ids must be unique and nonzero");
        }
    }

    std::vector<std::size_t> order(segments.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& sa = segments[a];
        const auto& sb = segments[b];
        if (sa.area_px != sb.area_px) return sa.area_px > sb.area_px;
        return sa.segment_id < sb.segment_id;
    });

    for (std::size_t idx : order) {
        const Segment& s = segments[idx];
        const bool with_patch = !s.patch.empty();
        const int x_begin = std::max(0, -s.origin.x);
        const int y_begin = std::max(0, -s.origin.y);
        const int x_end = std::min(s.mask.width, dims.width - s.origin.x);
        const int y_end = std::min(s.mask.height, dims.height - s.origin.y);
        for (int y = y_begin; y < y_end; ++y) {
            for (int x = x_begin; x < x_end; ++x) {
                if (!s.mask.test(x, y)) continue;
                const int fx = s.origin.x + x;
                const int fy = s.origin.y + y;
                out.label_map.at(fx, fy) = s.segment_id;
                if (with_patch) std::copy_n(s.patch.at(x, y), 3, out.rgb.at(fx, fy));
            }
        }
    }

    struct Visible {
        std::int64_t area = 0;
        int x0 = std::numeric_limits<int>::max(), y0 = std::numeric_limits<int>::max();
        int x1 = -1, y1 = -1;
    };
    std::unordered_map<std::uint32_t, Visible> visible;
    for (int y = 0; y < dims.height; ++y) {
        for (int x = 0; x < dims.width; ++x) {
            const auto id = out.label_map.at(x, y);
            if (id == 0) continue;
            Visible& v = visible[id];
            ++v.area;
            v.x0 = std::min(v.x0, x);
            v.y0 = std::min(v.y0, y);
            v.x1 = std::max(v.x1, x);
            v.y1 = std::max(v.y1, y);
        }
    }
    for (const auto& s : segments) {
        auto it = visible.find(s.segment_id);
        if (it == visible.end()) {
            out.hidden.push_back(s.segment_id);
            continue;
        }
        const Visible& v = it->second;
        SegmentInfo info;
        info.id = s.segment_id;
        info.category_id = s.category_id;
        info.area = v.area;
        info.bbox = {v.x0, v.y0, v.x1 - v.x0 + 1, v.y1 - v.y0 + 1};
        out.segments.push_back(info);
    }
    return out;
}

std::string synthetic_image_id(std::string_view image_id, std::uint64_t copy_index) {
    std::string id(image_id);
    id += "_panda";
    id += std::to_string(copy_index);
    return id;
}

namespace {

Point2i round_to_pixel(Point2d p) {
    return {static_cast<int>(std::floor(p.x + 0.5)), static_cast<int>(std::floor(p.y + 0.5))};
}

}  // namespace

AugmentOutcome augment_sample(const PanopticSample& sample, std::span<const CategoryDef> categories,
                              const AugmentConfig& cfg, std::uint64_t copy_index) {
    cfg.validate();
    if (sample.rgb.empty()) {
        throw ConsistencyError("image " + sample.image_id + ": augmentation needs RGB pixels");
    }
    const Extent dims = sample.extent();
    Decomposition parts = extract_segments(sample, categories);

    AugmentOutcome outcome;
    outcome.input_segments = parts.segments.size();

    std::sort(parts.segments.begin(), parts.segments.end(),
              [](const Segment& a, const Segment& b) { return a.segment_id < b.segment_id; });

    const RngStream root = RngStream::for_sample(cfg.global_seed, sample.image_id, copy_index);
    std::vector<Segment> placed;
    placed.reserve(parts.segments.size());
    for (Segment& seg : parts.segments) {
        // One stream per segment: a segment's draws do not depend on what
        // happened to the segments before it.
        RngStream rng = root.fork("segment/" + std::to_string(seg.segment_id));
        bool drop = false;
        if (cfg.enable_dropout) {
            const double u = rng.uniform01();
            drop = u < dropout_probability(seg.area_fraction, cfg);
        }
        const double scale = cfg.enable_resize ? sample_scale(rng, cfg) : 1.0;
        if (drop) {
            ++outcome.dropped;
            continue;
        }

        Segment moved;
        if (scale == 1.0) {
            moved = std::move(seg);
        } else {
            try {
                moved = resize_segment(seg, scale);
            } catch (const DegenerateSegment& e) {
                log::info("image " + sample.image_id + ": " + e.what() + "; skipped");
                outcome.skipped.push_back({seg.segment_id, "degenerate after resize"});
                continue;
            }
            // Keep the centroid where it was (or where the zoom map sends it).
            const Point2d target = cfg.enable_shift && cfg.shift_mode == ShiftMode::zoom_coupled
                                       ? zoom_displace(seg.centroid, scale, dims)
                                       : seg.centroid;
            const Point2d local = centroid_of(moved.mask, {0, 0});
            moved.origin = round_to_pixel({target.x - local.x, target.y - local.y});
        }
        if (cfg.enable_shift && cfg.shift_mode == ShiftMode::uniform_random) {
            const Point2i d = random_shift(rng, moved, dims);
            moved.origin.x += d.x;
            moved.origin.y += d.y;
        }
        moved.centroid = centroid_of(moved.mask, moved.origin);
        placed.push_back(std::move(moved));
    }

    RngStream noise = root.fork("noise");
    Composite comp = compose(placed, dims, noise);
    for (auto id : comp.hidden) {
        log::info("image " + sample.image_id + ": segment " + std::to_string(id) + " not visible; skipped");
        outcome.skipped.push_back({id, "clipped or occluded"});
    }

    PanopticSample& out = outcome.sample;
    out.image_id = synthetic_image_id(sample.image_id, copy_index);
    out.numeric_id = false;
    out.image_file = out.image_id + ".png";
    out.label_file = out.image_id + ".png";
    out.rgb = std::move(comp.rgb);
    out.label_map = std::move(comp.label_map);
    out.segments = std::move(comp.segments);
    return outcome;
}

}  // namespace panda
