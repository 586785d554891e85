#include "panda/metrics.hpp"

#include <algorithm>
#include <unordered_map>

#include <json.hpp>

#include "panda/error.hpp"

namespace panda {

PqStat& PqStat::merge(const PqStat& other) {
    for (const auto& [cat, c] : other.per_class) per_class[cat] += c;
    images += other.images;
    return *this;
}

void match_and_accumulate(const PanopticSample& pred, const PanopticSample& gt, PqStat& acc) {
    const LabelMap& gl = gt.label_map;
    const LabelMap& pl = pred.label_map;
    if (gl.extent() != pl.extent()) {
        throw DimensionMismatch("image " + gt.image_id + ": prediction is " + std::to_string(pl.width) + "x" +
                                std::to_string(pl.height) + ", ground truth is " + std::to_string(gl.width) + "x" +
                                std::to_string(gl.height));
    }

    std::unordered_map<std::uint32_t, int> gt_cat, pred_cat;
    for (const auto& s : gt.segments) gt_cat.emplace(s.id, s.category_id);
    for (const auto& s : pred.segments) pred_cat.emplace(s.id, s.category_id);

    std::unordered_map<std::uint32_t, std::int64_t> gt_area, pred_area, pred_on_void;
    std::unordered_map<std::uint64_t, std::int64_t> inter;
    for (std::size_t i = 0; i < gl.ids.size(); ++i) {
        std::uint32_t g = gl.ids[i];
        std::uint32_t p = pl.ids[i];
        if (g != 0 && !gt_cat.contains(g)) g = 0;
        if (p != 0 && !pred_cat.contains(p)) p = 0;
        if (g != 0) ++gt_area[g];
        if (p == 0) continue;
        ++pred_area[p];
        if (g == 0) {
            ++pred_on_void[p];
        } else {
            ++inter[(static_cast<std::uint64_t>(g) << 32) | p];
        }
    }

    std::unordered_map<std::uint32_t, bool> gt_matched, pred_matched;
    // Sorted so floating-point summation order does not depend on hashing.
    std::vector<std::pair<std::uint64_t, std::int64_t>> pairs(inter.begin(), inter.end());
    std::sort(pairs.begin(), pairs.end());
    for (const auto& [key, n] : pairs) {
        const auto g = static_cast<std::uint32_t>(key >> 32);
        const auto p = static_cast<std::uint32_t>(key & 0xFFFFFFFFu);
        if (gt_cat.at(g) != pred_cat.at(p)) continue;
        const std::int64_t uni = gt_area[g] + pred_area[p] - pred_on_void[p] - n;
        const double iou = static_cast<double>(n) / static_cast<double>(uni);
        if (iou <= 0.5) continue;
        ClassAccumulator& c = acc.per_class[gt_cat.at(g)];
        ++c.tp;
        c.iou_sum += iou;
        gt_matched[g] = true;
        pred_matched[p] = true;
    }

    for (const auto& s : gt.segments) {
        if (gt_area[s.id] > 0 && !gt_matched[s.id]) ++acc.per_class[s.category_id].fn;
    }
    for (const auto& s : pred.segments) {
        if (pred_area[s.id] > 0 && !pred_matched[s.id]) ++acc.per_class[s.category_id].fp;
    }
    ++acc.images;
}

Quality class_quality(const ClassAccumulator& c) noexcept {
    Quality q;
    const double denom = static_cast<double>(c.tp) + 0.5 * static_cast<double>(c.fp) + 0.5 * static_cast<double>(c.fn);
    if (denom > 0.0) {
        q.pq = c.iou_sum / denom;
        q.rq = static_cast<double>(c.tp) / denom;
    }
    if (c.tp > 0) q.sq = c.iou_sum / static_cast<double>(c.tp);
    return q;
}

PqReport finalize(const PqStat& acc, std::span<const CategoryDef> categories, bool include_fp_only_classes) {
    if (acc.images == 0) throw EmptyAccumulator("no image was evaluated");
    PqReport report;
    report.images = acc.images;

    auto add = [](AggregateQuality& a, const Quality& q) {
        a.quality.pq += q.pq;
        a.quality.sq += q.sq;
        a.quality.rq += q.rq;
        ++a.classes;
    };
    for (const auto& [cat, counts] : acc.per_class) {
        ClassQuality row;
        row.category_id = cat;
        row.counts = counts;
        row.quality = class_quality(counts);
        auto def = std::find_if(categories.begin(), categories.end(), [&](const CategoryDef& c) { return c.id == cat; });
        if (def != categories.end()) {
            row.name = def->name;
            row.is_thing = def->is_thing;
        }
        const bool in_gt = counts.tp + counts.fn > 0;
        row.in_aggregate = in_gt || (include_fp_only_classes && counts.fp > 0);
        if (row.in_aggregate) {
            add(report.all, row.quality);
            add(row.is_thing ? report.things : report.stuff, row.quality);
        }
        report.per_class.push_back(std::move(row));
    }
    for (AggregateQuality* a : {&report.all, &report.things, &report.stuff}) {
        if (a->classes == 0) continue;
        const double n = static_cast<double>(a->classes);
        a->quality.pq /= n;
        a->quality.sq /= n;
        a->quality.rq /= n;
    }
    return report;
}

std::string pq_report_json(const PqReport& report) {
    using ordered_json = nlohmann::ordered_json;
    ordered_json root;
    root["schema"] = "panda.pq_report/1";
    root["images"] = report.images;
    root["PQ"] = report.all.quality.pq;
    root["SQ"] = report.all.quality.sq;
    root["RQ"] = report.all.quality.rq;
    root["PQ_th"] = report.things.quality.pq;
    root["SQ_th"] = report.things.quality.sq;
    root["RQ_th"] = report.things.quality.rq;
    root["PQ_st"] = report.stuff.quality.pq;
    root["SQ_st"] = report.stuff.quality.sq;
    root["RQ_st"] = report.stuff.quality.rq;
    root["classes"] = report.all.classes;
    root["thing_classes"] = report.things.classes;
    root["stuff_classes"] = report.stuff.classes;
    root["per_class"] = ordered_json::array();
    for (const auto& row : report.per_class) {
        ordered_json r;
        r["category_id"] = row.category_id;
        r["name"] = row.name;
        r["isthing"] = row.is_thing;
        r["PQ"] = row.quality.pq;
        r["SQ"] = row.quality.sq;
        r["RQ"] = row.quality.rq;
        r["tp"] = row.counts.tp;
        r["fp"] = row.counts.fp;
        r["fn"] = row.counts.fn;
        r["iou_sum"] = row.counts.iou_sum;
        r["in_aggregate"] = row.in_aggregate;
        root["per_class"].push_back(std::move(r));
    }
    return root.dump(2) + "\n";
}

}  // namespace panda
