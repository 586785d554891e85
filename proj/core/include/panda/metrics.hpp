#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "panda/panoptic_io.hpp"

namespace panda {

struct ClassAccumulator {
    double iou_sum = 0.0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;

    ClassAccumulator& operator+=(const ClassAccumulator& o) noexcept {
        iou_sum += o.iou_sum;
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
};

/// Per-class PQ accumulators. Merging is associative and commutative, so
/// per-image stats can be computed in parallel and folded in any order.
struct PqStat {
    std::map<int, ClassAccumulator> per_class;
    std::size_t images = 0;

    PqStat& merge(const PqStat& other);
};

/// Matches predicted and ground-truth segments of one image. A pair matches
/// when categories agree and IoU > 0.5; pixels that are void in the ground
/// truth are excluded from both intersection and union. Throws
/// DimensionMismatch if the label maps differ in size.
void match_and_accumulate(const PanopticSample& pred, const PanopticSample& gt, PqStat& acc);

struct Quality {
    double pq = 0.0;
    double sq = 0.0;
    double rq = 0.0;
};

struct ClassQuality {
    int category_id = 0;
    std::string name;
    bool is_thing = false;
    Quality quality;
    ClassAccumulator counts;
    /// Counted in the aggregates.
    bool in_aggregate = false;
};

struct AggregateQuality {
    Quality quality;
    std::size_t classes = 0;
};

struct PqReport {
    std::vector<ClassQuality> per_class;
    AggregateQuality all;
    AggregateQuality things;
    AggregateQuality stuff;
    std::size_t images = 0;
};

Quality class_quality(const ClassAccumulator& c) noexcept;

/// Aggregates average over classes that appear in the ground truth
/// (tp + fn > 0). With `include_fp_only_classes`, classes that only have
/// false positives are averaged in too. Throws EmptyAccumulator if no image
/// was accumulated.
PqReport finalize(const PqStat& acc, std::span<const CategoryDef> categories, bool include_fp_only_classes = false);

std::string pq_report_json(const PqReport& report);

}  // namespace panda
