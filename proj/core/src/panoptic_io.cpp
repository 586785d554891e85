#include "panda/panoptic_io.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "panda/error.hpp"
#include "panda/image_codec.hpp"
#include "panda/log.hpp"

namespace panda {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const CategoryDef* DatasetManifest::find_category(int id) const noexcept {
    for (const auto& c : categories) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

LabelMap decode_label_map(const RgbImage& raster) {
    LabelMap out(raster.width, raster.height);
    const std::uint8_t* p = raster.pixels.data();
    for (auto& id : out.ids) {
        id = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
             (static_cast<std::uint32_t>(p[2]) << 16);
        p += 3;
    }
    return out;
}

RgbImage encode_label_map(const LabelMap& labels) {
    RgbImage out(labels.width, labels.height);
    std::uint8_t* p = out.pixels.data();
    for (auto id : labels.ids) {
        if (id > kMaxSegmentId) {
            throw IdOverflow("segment id " + std::to_string(id) + " does not fit in 24 bits");
        }
        p[0] = static_cast<std::uint8_t>(id & 0xFFu);
        p[1] = static_cast<std::uint8_t>((id >> 8) & 0xFFu);
        p[2] = static_cast<std::uint8_t>((id >> 16) & 0xFFu);
        p += 3;
    }
    return out;
}

namespace {

std::string id_string(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    throw SchemaError("image id must be a string or an integer");
}

template <class T>
T required(const json& obj, const char* key, const char* where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw SchemaError(std::string(where) + ": missing field '" + key + "'");
    }
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string(where) + ": bad field '" + key + "': " + e.what());
    }
}

const json& required_array(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_array()) {
        throw SchemaError(std::string("top-level '") + key + "' must be an array");
    }
    return *it;
}

bool flag_value(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (it->is_boolean()) return it->get<bool>();
    if (it->is_number_integer()) return it->get<int>() != 0;
    throw SchemaError(std::string("field '") + key + "' must be boolean or 0/1");
}

CategoryDef parse_category(const json& c) {
    if (!c.is_object()) throw SchemaError("category entry must be an object");
    CategoryDef def;
    def.id = required<int>(c, "id", "category");
    def.name = required<std::string>(c, "name", "category");
    def.is_thing = flag_value(c, "isthing");
    if (auto it = c.find("supercategory"); it != c.end() && it->is_string()) {
        def.supercategory = it->get<std::string>();
    }
    if (auto it = c.find("color"); it != c.end()) {
        if (!it->is_array() || it->size() != 3) throw SchemaError("category color must be [r, g, b]");
        std::array<std::uint8_t, 3> rgb{};
        for (std::size_t i = 0; i < 3; ++i) rgb[i] = (*it)[i].get<std::uint8_t>();
        def.color = rgb;
    }
    if (def.id <= 0) throw SchemaError("category id must be positive");
    if (def.name.empty()) throw SchemaError("category name must be nonempty");
    return def;
}

SegmentInfo parse_segment(const json& s) {
    if (!s.is_object()) throw SchemaError("segments_info entry must be an object");
    SegmentInfo info;
    const auto id = required<std::int64_t>(s, "id", "segments_info");
    if (id <= 0 || id > kMaxSegmentId) {
        throw SchemaError("segment id " + std::to_string(id) + " outside [1, 2^24)");
    }
    info.id = static_cast<std::uint32_t>(id);
    info.category_id = required<int>(s, "category_id", "segments_info");
    if (auto it = s.find("area"); it != s.end()) info.area = it->get<std::int64_t>();
    if (auto it = s.find("bbox"); it != s.end() && it->is_array() && it->size() == 4) {
        for (std::size_t i = 0; i < 4; ++i) info.bbox[i] = (*it)[i].get<int>();
    }
    info.iscrowd = flag_value(s, "iscrowd");
    return info;
}

}  // namespace

DatasetManifest parse_manifest(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object()) throw SchemaError("annotation root must be an object");

    DatasetManifest manifest;
    try {
        std::unordered_set<int> category_ids;
        for (const auto& c : required_array(root, "categories")) {
            auto def = parse_category(c);
            if (!category_ids.insert(def.id).second) {
                throw SchemaError("duplicate category id " + std::to_string(def.id));
            }
            manifest.categories.push_back(std::move(def));
        }

        struct ImageRecord {
            std::string file;
            int width;
            int height;
            bool numeric;
        };
        std::unordered_map<std::string, ImageRecord> images;
        for (const auto& img : required_array(root, "images")) {
            if (!img.is_object()) throw SchemaError("image entry must be an object");
            auto id_it = img.find("id");
            if (id_it == img.end()) throw SchemaError("image: missing field 'id'");
            ImageRecord rec{required<std::string>(img, "file_name", "image"),
                            required<int>(img, "width", "image"), required<int>(img, "height", "image"),
                            id_it->is_number_integer()};
            if (rec.width <= 0 || rec.height <= 0) throw SchemaError("image dimensions must be positive");
            if (!images.emplace(id_string(*id_it), std::move(rec)).second) {
                throw SchemaError("duplicate image id " + id_string(*id_it));
            }
        }

        std::unordered_set<std::string> seen;
        for (const auto& ann : required_array(root, "annotations")) {
            if (!ann.is_object()) throw SchemaError("annotation entry must be an object");
            auto id_it = ann.find("image_id");
            if (id_it == ann.end()) throw SchemaError("annotation: missing field 'image_id'");
            ManifestEntry entry;
            entry.image_id = id_string(*id_it);
            if (!seen.insert(entry.image_id).second) {
                throw SchemaError("duplicate annotation for image " + entry.image_id);
            }
            auto img = images.find(entry.image_id);
            if (img == images.end()) {
                throw SchemaError("annotation references unknown image " + entry.image_id);
            }
            entry.numeric_id = img->second.numeric;
            entry.image_file = img->second.file;
            entry.width = img->second.width;
            entry.height = img->second.height;
            entry.label_file = required<std::string>(ann, "file_name", "annotation");
            auto seg_it = ann.find("segments_info");
            if (seg_it == ann.end() || !seg_it->is_array()) {
                throw SchemaError("annotation " + entry.image_id + ": 'segments_info' must be an array");
            }
            for (const auto& s : *seg_it) entry.segments.push_back(parse_segment(s));
            manifest.entries.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("schema violation: ") + e.what());
    }
    return manifest;
}

DatasetManifest read_manifest(const fs::path& annotations) {
    std::ifstream in(annotations, std::ios::binary);
    if (!in) {
        std::error_code ec;
        if (!fs::exists(annotations, ec)) throw MissingFile("missing file: " + annotations.string());
        throw IoError("cannot read " + annotations.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest(buf.str());
}

namespace {

ordered_json id_json(const std::string& id, bool numeric) {
    if (numeric) return ordered_json(std::stoll(id));
    return ordered_json(id);
}

}  // namespace

std::string serialize_manifest(const DatasetManifest& manifest) {
    ordered_json root;
    root["images"] = ordered_json::array();
    root["annotations"] = ordered_json::array();
    root["categories"] = ordered_json::array();
    for (const auto& e : manifest.entries) {
        ordered_json img;
        img["id"] = id_json(e.image_id, e.numeric_id);
        img["file_name"] = e.image_file;
        img["width"] = e.width;
        img["height"] = e.height;
        root["images"].push_back(std::move(img));

        ordered_json ann;
        ann["image_id"] = id_json(e.image_id, e.numeric_id);
        ann["file_name"] = e.label_file;
        ann["segments_info"] = ordered_json::array();
        for (const auto& s : e.segments) {
            ordered_json seg;
            seg["id"] = s.id;
            seg["category_id"] = s.category_id;
            seg["area"] = s.area;
            seg["bbox"] = s.bbox;
            seg["iscrowd"] = s.iscrowd ? 1 : 0;
            ann["segments_info"].push_back(std::move(seg));
        }
        root["annotations"].push_back(std::move(ann));
    }
    for (const auto& c : manifest.categories) {
        ordered_json cat;
        cat["id"] = c.id;
        cat["name"] = c.name;
        cat["supercategory"] = c.supercategory;
        cat["isthing"] = c.is_thing ? 1 : 0;
        if (c.color) cat["color"] = *c.color;
        root["categories"].push_back(std::move(cat));
    }
    return root.dump(1) + "\n";
}

void write_manifest(const DatasetManifest& manifest, const fs::path& annotations) {
    std::error_code ec;
    if (annotations.has_parent_path()) {
        fs::create_directories(annotations.parent_path(), ec);
        if (ec) throw IoError("cannot create " + annotations.parent_path().string() + ": " + ec.message());
    }
    const std::string text = serialize_manifest(manifest);
    std::ofstream out(annotations, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + annotations.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("short write: " + annotations.string());
}

ManifestEntry manifest_entry(const PanopticSample& sample) {
    ManifestEntry e;
    e.image_id = sample.image_id;
    e.numeric_id = sample.numeric_id;
    e.image_file = sample.image_file.empty() ? sample.image_id + ".png" : sample.image_file;
    e.label_file = sample.label_file.empty() ? sample.image_id + ".png" : sample.label_file;
    e.width = sample.label_map.width;
    e.height = sample.label_map.height;
    e.segments = sample.segments;
    return e;
}

void refresh_segment_geometry(PanopticSample& sample) {
    struct Box {
        std::int64_t area = 0;
        int x0 = std::numeric_limits<int>::max(), y0 = std::numeric_limits<int>::max();
        int x1 = -1, y1 = -1;
    };
    std::unordered_map<std::uint32_t, Box> boxes;
    for (const auto& s : sample.segments) boxes.emplace(s.id, Box{});
    const auto& lm = sample.label_map;
    for (int y = 0; y < lm.height; ++y) {
        for (int x = 0; x < lm.width; ++x) {
            auto it = boxes.find(lm.at(x, y));
            if (it == boxes.end()) continue;
            Box& b = it->second;
            ++b.area;
            b.x0 = std::min(b.x0, x);
            b.y0 = std::min(b.y0, y);
            b.x1 = std::max(b.x1, x);
            b.y1 = std::max(b.y1, y);
        }
    }
    for (auto& s : sample.segments) {
        const Box& b = boxes.at(s.id);
        s.area = b.area;
        s.bbox = b.area > 0 ? std::array<int, 4>{b.x0, b.y0, b.x1 - b.x0 + 1, b.y1 - b.y0 + 1}
                            : std::array<int, 4>{0, 0, 0, 0};
    }
}

void validate_sample(PanopticSample& sample, std::span<const CategoryDef> categories, bool lenient) {
    const std::string where = "image " + sample.image_id + ": ";
    auto& lm = sample.label_map;
    if (lm.ids.size() != lm.extent().area() || lm.width <= 0 || lm.height <= 0) {
        throw ConsistencyError(where + "label map is malformed");
    }
    if (!sample.rgb.empty() && sample.rgb.extent() != lm.extent()) {
        throw ConsistencyError(where + "RGB is " + std::to_string(sample.rgb.width) + "x" +
                               std::to_string(sample.rgb.height) + " but label map is " +
                               std::to_string(lm.width) + "x" + std::to_string(lm.height));
    }

    auto fail_or_warn = [&](const std::string& msg) {
        if (!lenient) throw ConsistencyError(where + msg);
        log::warn(where + msg + " (dropped)");
    };

    // Duplicate ids and unknown categories.
    std::unordered_set<std::uint32_t> listed;
    std::vector<SegmentInfo> kept;
    kept.reserve(sample.segments.size());
    for (const auto& s : sample.segments) {
        if (!listed.insert(s.id).second) {
            fail_or_warn("duplicate segment id " + std::to_string(s.id));
            continue;
        }
        const bool known = std::any_of(categories.begin(), categories.end(),
                                       [&](const CategoryDef& c) { return c.id == s.category_id; });
        if (!known) {
            fail_or_warn("segment " + std::to_string(s.id) + " has unknown category " +
                         std::to_string(s.category_id));
            listed.erase(s.id);
            continue;
        }
        if (s.iscrowd) {
            log::warn(where + "segment " + std::to_string(s.id) + " is marked iscrowd; treated as a regular segment");
        }
        kept.push_back(s);
    }
    sample.segments = std::move(kept);

    // Raster ids without an entry.
    std::unordered_map<std::uint32_t, std::int64_t> counts;
    for (auto id : lm.ids) {
        if (id != 0) ++counts[id];
    }
    std::vector<std::uint32_t> orphans;
    for (const auto& [id, n] : counts) {
        if (!listed.contains(id)) orphans.push_back(id);
    }
    std::sort(orphans.begin(), orphans.end());
    if (!orphans.empty()) {
        fail_or_warn("label map contains id " + std::to_string(orphans.front()) +
                     " with no segments_info entry");
        std::unordered_set<std::uint32_t> orphan_set(orphans.begin(), orphans.end());
        for (auto& id : lm.ids) {
            if (orphan_set.contains(id)) id = 0;
        }
    }

    // Area consistency; bbox is always recomputed.
    std::vector<SegmentInfo> stored = sample.segments;
    refresh_segment_geometry(sample);
    std::vector<SegmentInfo> consistent;
    consistent.reserve(sample.segments.size());
    for (std::size_t i = 0; i < sample.segments.size(); ++i) {
        const auto& s = sample.segments[i];
        if (s.area == 0) {
            fail_or_warn("segment " + std::to_string(s.id) + " has no pixels in the label map");
            continue;
        }
        if (stored[i].area != s.area) {
            if (!lenient) {
                throw ConsistencyError(where + "segment " + std::to_string(s.id) + " declares area " +
                                       std::to_string(stored[i].area) + " but the label map has " +
                                       std::to_string(s.area));
            }
            log::warn(where + "segment " + std::to_string(s.id) + " area corrected to " + std::to_string(s.area));
        }
        consistent.push_back(s);
    }
    sample.segments = std::move(consistent);
}

PanopticSample load_sample(const DatasetManifest& manifest, std::size_t index, const DatasetPaths& paths,
                           const LoadOptions& options) {
    const ManifestEntry& e = manifest.entries.at(index);
    PanopticSample sample;
    sample.image_id = e.image_id;
    sample.numeric_id = e.numeric_id;
    sample.image_file = e.image_file;
    sample.label_file = e.label_file;
    sample.segments = e.segments;
    sample.label_map = decode_label_map(read_rgb_image(paths.labels_dir / e.label_file));
    if (sample.label_map.width != e.width || sample.label_map.height != e.height) {
        throw ConsistencyError("image " + e.image_id + ": label PNG is " + std::to_string(sample.label_map.width) +
                               "x" + std::to_string(sample.label_map.height) + " but JSON declares " +
                               std::to_string(e.width) + "x" + std::to_string(e.height));
    }
    if (options.load_rgb) sample.rgb = read_rgb_image(paths.images_dir / e.image_file);
    validate_sample(sample, manifest.categories, options.lenient);
    return sample;
}

Dataset load_dataset(const DatasetPaths& paths, const LoadOptions& options) {
    DatasetManifest manifest = read_manifest(paths.annotations);
    Dataset ds;
    ds.samples.reserve(manifest.entries.size());
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        ds.samples.push_back(load_sample(manifest, i, paths, options));
    }
    ds.categories = std::move(manifest.categories);
    return ds;
}

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create directory " + dir.string() + (ec ? ": " + ec.message() : ""));
    }
}

std::string png_name(const std::string& file, const std::string& fallback_stem) {
    if (file.empty()) return fallback_stem + ".png";
    fs::path p(file);
    p.replace_extension(".png");
    return p.string();
}

}  // namespace

void save_sample(const PanopticSample& sample, const DatasetPaths& out) {
    if (sample.rgb.empty()) {
        throw ConsistencyError("image " + sample.image_id + ": cannot save a sample without RGB pixels");
    }
    const fs::path label_path = out.labels_dir / png_name(sample.label_file, sample.image_id);
    const fs::path image_path = out.images_dir / png_name(sample.image_file, sample.image_id);
    ensure_dir(label_path.parent_path());
    ensure_dir(image_path.parent_path());
    write_png_rgb(label_path, encode_label_map(sample.label_map));
    write_png_rgb(image_path, sample.rgb);
}

void save_dataset(const Dataset& dataset, const DatasetPaths& out) {
    ensure_dir(out.labels_dir);
    ensure_dir(out.images_dir);
    DatasetManifest manifest;
    manifest.categories = dataset.categories;
    manifest.entries.reserve(dataset.samples.size());
    for (const auto& s : dataset.samples) {
        save_sample(s, out);
        ManifestEntry e = manifest_entry(s);
        e.image_file = png_name(s.image_file, s.image_id);
        e.label_file = png_name(s.label_file, s.image_id);
        manifest.entries.push_back(std::move(e));
    }
    write_manifest(manifest, out.annotations);
}

}  // namespace panda
