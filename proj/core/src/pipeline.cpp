#include "panda/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "panda/error.hpp"
#include "panda/log.hpp"

namespace panda {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::size_t>(count, 1024))));

    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    auto body = [&] {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) return;
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

namespace {

bool same_dir(const fs::path& a, const fs::path& b) {
    if (a.empty() || b.empty()) return false;
    std::error_code ec1, ec2;
    const auto ca = fs::weakly_canonical(a, ec1);
    const auto cb = fs::weakly_canonical(b, ec2);
    if (ec1 || ec2) return a.lexically_normal() == b.lexically_normal();
    return ca == cb;
}

}  // namespace

void JobSpec::validate() const {
    if (copies < 1) throw InvalidConfig("copies per image must be at least 1");
    if (workers < 1) throw InvalidConfig("worker count must be at least 1");
    config.validate();
    if (output_dir.empty()) throw InvalidConfig("output directory is required");
    const OutputLayout out{output_dir};
    for (const fs::path& in : {input.images_dir, input.labels_dir}) {
        if (same_dir(in, output_dir) || same_dir(in, out.images_dir()) || same_dir(in, out.labels_dir())) {
            throw InvalidConfig("output directory must differ from the input directories");
        }
    }
    if (same_dir(input.annotations, out.annotations())) {
        throw InvalidConfig("output annotations would overwrite the input annotations");
    }
}

namespace {

struct TaskResult {
    ManifestEntry entry;
    std::size_t input_segments = 0;
    std::size_t dropped = 0;
    std::vector<SkipRecord> skipped;
};

void copy_exact(const fs::path& from, const fs::path& to) {
    std::error_code ec;
    if (!fs::is_regular_file(from, ec)) throw MissingFile("missing file: " + from.string());
    fs::create_directories(to.parent_path(), ec);
    fs::copy_file(from, to, fs::copy_options::overwrite_existing, ec);
    if (ec) throw IoError("cannot copy " + from.string() + " to " + to.string() + ": " + ec.message());
}

}  // namespace

AugmentSummary run_augment(const JobSpec& job) {
    const auto started = std::chrono::steady_clock::now();
    job.validate();
    const DatasetManifest manifest = read_manifest(job.input.annotations);
    const OutputLayout out{job.output_dir};
    const DatasetPaths out_paths = out.paths();
    for (const auto& dir : {out.root, out.images_dir(), out.labels_dir()}) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
    }

    const std::size_t k = static_cast<std::size_t>(job.copies);
    const std::size_t tasks = manifest.entries.size() * k;
    std::vector<std::optional<TaskResult>> results(tasks);
    log::info("augmenting " + std::to_string(manifest.entries.size()) + " images x " + std::to_string(k) +
              " copies on " + std::to_string(job.workers) + " workers");

    parallel_for(tasks, job.workers, [&](std::size_t t) {
        const std::size_t image = t / k;
        const std::uint64_t copy = t % k + 1;
        PanopticSample original = load_sample(manifest, image, job.input, {.lenient = job.lenient, .load_rgb = true});
        AugmentOutcome outcome = augment_sample(original, manifest.categories, job.config, copy);
        validate_sample(outcome.sample, manifest.categories, false);
        save_sample(outcome.sample, out_paths);

        TaskResult r;
        r.entry = manifest_entry(outcome.sample);
        r.input_segments = outcome.input_segments;
        r.dropped = outcome.dropped;
        for (auto& s : outcome.skipped) r.skipped.push_back({outcome.sample.image_id, s.segment_id, std::move(s.reason)});
        results[t] = std::move(r);
    });

    DatasetManifest merged;
    merged.categories = manifest.categories;
    if (job.merge_originals) {
        std::unordered_set<std::string> synthetic_names;
        for (const auto& r : results) {
            synthetic_names.insert(r->entry.image_file);
            synthetic_names.insert("L/" + r->entry.label_file);
        }
        for (const auto& e : manifest.entries) {
            if (synthetic_names.contains(e.image_file) || synthetic_names.contains("L/" + e.label_file)) {
                throw ConsistencyError("original file name " + e.image_file + " collides with a synthetic sample");
            }
        }
        parallel_for(manifest.entries.size(), job.workers, [&](std::size_t i) {
            const ManifestEntry& e = manifest.entries[i];
            copy_exact(job.input.images_dir / e.image_file, out.images_dir() / e.image_file);
            copy_exact(job.input.labels_dir / e.label_file, out.labels_dir() / e.label_file);
        });
        merged.entries = manifest.entries;
    }

    AugmentSummary summary;
    summary.originals = manifest.entries.size();
    summary.synthetic = tasks;
    for (auto& r : results) {
        summary.segments_in += r->input_segments;
        summary.segments_out += r->entry.segments.size();
        summary.dropped += r->dropped;
        for (auto& s : r->skipped) summary.skipped.push_back(std::move(s));
        merged.entries.push_back(std::move(r->entry));
    }
    summary.written = merged.entries.size();
    write_manifest(merged, out.annotations());

    summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return summary;
}

std::string summary_json(const AugmentSummary& summary, const JobSpec& job) {
    ordered_json root;
    root["schema"] = "panda.augment_summary/1";
    root["originals"] = summary.originals;
    root["synthetic"] = summary.synthetic;
    root["written"] = summary.written;
    root["segments_in"] = summary.segments_in;
    root["segments_out"] = summary.segments_out;
    root["dropped"] = summary.dropped;
    root["skipped_count"] = summary.skipped.size();
    ordered_json skipped = ordered_json::array();
    for (const auto& s : summary.skipped) {
        skipped.push_back({{"image_id", s.image_id}, {"segment_id", s.segment_id}, {"reason", s.reason}});
    }
    root["skipped"] = std::move(skipped);
    const auto& c = job.config;
    root["config"] = {
        {"copies", job.copies},
        {"seed", c.global_seed},
        {"drop_low", c.drop_low},
        {"drop_high", c.drop_high},
        {"resize_min", c.resize_min},
        {"resize_max", c.resize_max},
        {"dropout", c.enable_dropout},
        {"resize", c.enable_resize},
        {"shift", c.enable_shift},
        {"shift_mode", c.shift_mode == ShiftMode::zoom_coupled ? "zoom" : "random"},
        {"merge_originals", job.merge_originals},
    };
    root["workers"] = job.workers;
    root["wall_seconds"] = summary.wall_seconds;
    return root.dump(2) + "\n";
}

// --- statistics ---------------------------------------------------------------

const ClassStatsRow* ClassStats::find(int category_id) const noexcept {
    for (const auto& r : rows) {
        if (r.category_id == category_id) return &r;
    }
    return nullptr;
}

ClassStatsAccumulator::ClassStatsAccumulator(std::vector<CategoryDef> categories)
    : categories_(std::move(categories)) {
    std::sort(categories_.begin(), categories_.end(),
              [](const CategoryDef& a, const CategoryDef& b) { return a.id < b.id; });
    sums_.resize(categories_.size());
}

void ClassStatsAccumulator::add(const PanopticSample& sample) {
    std::unordered_map<int, std::size_t> slot;
    for (std::size_t i = 0; i < categories_.size(); ++i) slot.emplace(categories_[i].id, i);
    std::unordered_map<std::uint32_t, std::size_t> seg_slot;
    for (const auto& s : sample.segments) {
        auto it = slot.find(s.category_id);
        if (it == slot.end()) {
            throw ConsistencyError("image " + sample.image_id + ": unknown category " + std::to_string(s.category_id));
        }
        seg_slot.emplace(s.id, it->second);
    }

    std::vector<std::int64_t> counts(categories_.size(), 0);
    std::int64_t void_px = 0;
    for (auto id : sample.label_map.ids) {
        auto it = id == 0 ? seg_slot.end() : seg_slot.find(id);
        if (it == seg_slot.end()) {
            ++void_px;
        } else {
            ++counts[it->second];
        }
    }
    const auto total = static_cast<std::int64_t>(sample.label_map.ids.size());
    const std::int64_t nonvoid = total - void_px;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) continue;
        Sums& s = sums_[c];
        ++s.present;
        s.pixels += static_cast<double>(counts[c]);
        s.fraction += static_cast<double>(counts[c]) / static_cast<double>(total);
        s.share += static_cast<double>(counts[c]) / static_cast<double>(nonvoid);
    }
    ++images_;
    if (nonvoid > 0) ++images_nonvoid_;
    void_pixels_ += static_cast<double>(void_px);
    void_fraction_ += total > 0 ? static_cast<double>(void_px) / static_cast<double>(total) : 0.0;
}

void ClassStatsAccumulator::merge(const ClassStatsAccumulator& other) {
    if (other.categories_ != categories_) throw ConsistencyError("cannot merge statistics over different categories");
    for (std::size_t c = 0; c < sums_.size(); ++c) {
        sums_[c].present += other.sums_[c].present;
        sums_[c].pixels += other.sums_[c].pixels;
        sums_[c].fraction += other.sums_[c].fraction;
        sums_[c].share += other.sums_[c].share;
    }
    images_ += other.images_;
    images_nonvoid_ += other.images_nonvoid_;
    void_pixels_ += other.void_pixels_;
    void_fraction_ += other.void_fraction_;
}

ClassStats ClassStatsAccumulator::finish() const {
    if (images_ == 0) throw EmptyDataset("statistics need at least one image");
    ClassStats out;
    out.images = images_;
    const double n = static_cast<double>(images_);
    out.mean_void_pixels = void_pixels_ / n;
    out.mean_void_fraction = void_fraction_ / n;
    for (std::size_t c = 0; c < categories_.size(); ++c) {
        ClassStatsRow row;
        row.category_id = categories_[c].id;
        row.name = categories_[c].name;
        row.is_thing = categories_[c].is_thing;
        row.images_present = sums_[c].present;
        row.mean_pixels = sums_[c].pixels / n;
        row.mean_fraction = sums_[c].fraction / n;
        row.mean_nonvoid_share = images_nonvoid_ > 0 ? sums_[c].share / static_cast<double>(images_nonvoid_) : 0.0;
        out.rows.push_back(std::move(row));
    }
    return out;
}

ClassStats run_stats(const Dataset& dataset) {
    ClassStatsAccumulator acc(dataset.categories);
    for (const auto& s : dataset.samples) acc.add(s);
    return acc.finish();
}

ClassStats run_stats(const DatasetPaths& paths, unsigned workers, bool lenient) {
    const DatasetManifest manifest = read_manifest(paths.annotations);
    if (manifest.entries.empty()) throw EmptyDataset("dataset has no images");
    std::vector<std::optional<ClassStatsAccumulator>> partial(manifest.entries.size());
    parallel_for(manifest.entries.size(), workers, [&](std::size_t i) {
        ClassStatsAccumulator acc(manifest.categories);
        acc.add(load_sample(manifest, i, paths, {.lenient = lenient, .load_rgb = false}));
        partial[i] = std::move(acc);
    });
    // Folded in image order so floating-point sums do not depend on scheduling.
    ClassStatsAccumulator total(manifest.categories);
    for (const auto& p : partial) total.merge(*p);
    return total.finish();
}

std::string class_stats_csv(const ClassStats& stats) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "category_id,name,isthing,images_present,mean_pixels,mean_fraction,mean_nonvoid_share\n";
    for (const auto& r : stats.rows) {
        std::string name = r.name;
        if (name.find_first_of(",\"\n") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : name) {
                if (c == '"') quoted += '"';
                quoted += c;
            }
            name = quoted + "\"";
        }
        os << r.category_id << ',' << name << ',' << (r.is_thing ? 1 : 0) << ',' << r.images_present << ','
           << r.mean_pixels << ',' << r.mean_fraction << ',' << r.mean_nonvoid_share << '\n';
    }
    os << "0,void,0," << stats.images << ',' << stats.mean_void_pixels << ',' << stats.mean_void_fraction << ",\n";
    return os.str();
}

std::string class_stats_json(const ClassStats& stats) {
    ordered_json root;
    root["schema"] = "panda.class_stats/1";
    root["images"] = stats.images;
    root["void"] = {{"mean_pixels", stats.mean_void_pixels}, {"mean_fraction", stats.mean_void_fraction}};
    root["classes"] = ordered_json::array();
    for (const auto& r : stats.rows) {
        ordered_json row;
        row["category_id"] = r.category_id;
        row["name"] = r.name;
        row["isthing"] = r.is_thing;
        row["images_present"] = r.images_present;
        row["mean_pixels"] = r.mean_pixels;
        row["mean_fraction"] = r.mean_fraction;
        row["mean_nonvoid_share"] = r.mean_nonvoid_share;
        root["classes"].push_back(std::move(row));
    }
    return root.dump(2) + "\n";
}

// --- evaluation ---------------------------------------------------------------

PqReport evaluate_dataset(const DatasetPaths& gt, const DatasetPaths& pred, unsigned workers,
                          bool include_fp_only_classes) {
    const DatasetManifest gt_manifest = read_manifest(gt.annotations);
    const DatasetManifest pred_manifest = read_manifest(pred.annotations);
    std::unordered_map<std::string, std::size_t> pred_index;
    for (std::size_t i = 0; i < pred_manifest.entries.size(); ++i) {
        pred_index.emplace(pred_manifest.entries[i].image_id, i);
    }
    for (const auto& e : gt_manifest.entries) {
        if (!pred_index.contains(e.image_id)) {
            throw ConsistencyError("no prediction for image " + e.image_id);
        }
    }

    std::vector<PqStat> partial(gt_manifest.entries.size());
    parallel_for(gt_manifest.entries.size(), workers, [&](std::size_t i) {
        const LoadOptions opts{.lenient = false, .load_rgb = false};
        const PanopticSample g = load_sample(gt_manifest, i, gt, opts);
        const PanopticSample p =
            load_sample(pred_manifest, pred_index.at(gt_manifest.entries[i].image_id), pred, opts);
        match_and_accumulate(p, g, partial[i]);
    });
    PqStat total;
    for (const auto& p : partial) total.merge(p);
    if (total.images == 0) throw EmptyAccumulator("ground truth has no images");
    return finalize(total, gt_manifest.categories, include_fp_only_classes);
}

}  // namespace panda
