#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace panda::testing {

namespace fs = std::filesystem;

namespace {

std::uint8_t shade(std::uint32_t id, int x, int y, int channel) {
    const std::uint64_t h = fnv1a64(std::to_string(id) + ":" + std::to_string(channel)) ^
                            (static_cast<std::uint64_t>(x * 7 + y * 13) & 0x1Fu);
    return static_cast<std::uint8_t>(h & 0xFFu);
}

void fill_rect(LabelMap& lm, int x0, int y0, int w, int h, std::uint32_t id) {
    for (int y = std::max(0, y0); y < std::min(lm.height, y0 + h); ++y) {
        for (int x = std::max(0, x0); x < std::min(lm.width, x0 + w); ++x) lm.at(x, y) = id;
    }
}

void fill_ellipse(LabelMap& lm, double cx, double cy, double rx, double ry, std::uint32_t id) {
    for (int y = 0; y < lm.height; ++y) {
        for (int x = 0; x < lm.width; ++x) {
            const double dx = (x + 0.5 - cx) / rx;
            const double dy = (y + 0.5 - cy) / ry;
            if (dx * dx + dy * dy <= 1.0) lm.at(x, y) = id;
        }
    }
}

std::vector<CategoryDef> street_categories() {
    return {
        {1, "road", false, "flat", std::array<std::uint8_t, 3>{128, 64, 128}},
        {2, "building", false, "construction", std::array<std::uint8_t, 3>{70, 70, 70}},
        {3, "sky", false, "sky", std::array<std::uint8_t, 3>{70, 130, 180}},
        {4, "car", true, "vehicle", std::array<std::uint8_t, 3>{0, 0, 142}},
        {5, "person", true, "human", std::array<std::uint8_t, 3>{220, 20, 60}},
        {6, "pole", true, "object", std::array<std::uint8_t, 3>{153, 153, 153}},
    };
}

}  // namespace

PanopticSample sample_from_labels(const std::string& image_id, const LabelMap& labels,
                                  const std::map<std::uint32_t, int>& category_of) {
    PanopticSample s;
    s.image_id = image_id;
    s.image_file = image_id + ".png";
    s.label_file = image_id + ".png";
    s.label_map = labels;
    s.rgb = RgbImage(labels.width, labels.height);
    for (int y = 0; y < labels.height; ++y) {
        for (int x = 0; x < labels.width; ++x) {
            for (int c = 0; c < 3; ++c) s.rgb.at(x, y)[c] = shade(labels.at(x, y), x, y, c);
        }
    }
    std::set<std::uint32_t> ids;
    for (auto id : labels.ids) {
        if (id != 0) ids.insert(id);
    }
    for (auto id : ids) {
        SegmentInfo info;
        info.id = id;
        info.category_id = category_of.at(id);
        s.segments.push_back(info);
    }
    refresh_segment_geometry(s);
    return s;
}

LabelMap labels_from_rows(const std::vector<std::vector<std::uint32_t>>& rows) {
    LabelMap lm(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
    for (int y = 0; y < lm.height; ++y) {
        for (int x = 0; x < lm.width; ++x) lm.at(x, y) = rows[y][x];
    }
    return lm;
}

Dataset two_image_fixture() {
    Dataset ds;
    ds.categories = {{1, "road", false, "flat", std::nullopt},
                     {2, "sky", false, "sky", std::nullopt},
                     {3, "car", true, "vehicle", std::nullopt}};
    LabelMap a(8, 6);
    fill_rect(a, 0, 0, 8, 2, 5);       // sky
    fill_rect(a, 0, 3, 8, 3, 9);       // road
    fill_rect(a, 2, 2, 3, 2, 300);     // car, overlapping the road top row
    ds.samples.push_back(sample_from_labels("frankfurt_000000", a, {{5, 2}, {9, 1}, {300, 3}}));

    LabelMap b(8, 6);
    fill_rect(b, 0, 0, 8, 3, 1);
    fill_rect(b, 0, 4, 6, 2, 2);
    fill_rect(b, 5, 1, 2, 4, 65536 + 7);
    b.at(7, 5) = 0;
    ds.samples.push_back(sample_from_labels("frankfurt_000001", b, {{1, 2}, {2, 1}, {65543, 3}}));
    return ds;
}

Dataset toy_dataset(int images, std::uint64_t seed, int width, int height) {
    Dataset ds;
    ds.categories = street_categories();
    for (int i = 0; i < images; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "toy_%04d", i);
        RngStream rng = RngStream::for_sample(seed, name, 0);
        LabelMap lm(width, height);
        std::map<std::uint32_t, int> cats;
        std::uint32_t next_id = 1;
        auto add = [&](int cat) {
            const std::uint32_t id = next_id++;
            cats[id] = cat;
            return id;
        };

        // Sky and building split the upper part; road takes the lower half
        // in most images, so it is the dominant class.
        const int horizon = static_cast<int>(height * rng.uniform(0.35, 0.55));
        const int sky_h = static_cast<int>(horizon * rng.uniform(0.3, 0.6));
        if (rng.bernoulli(0.8)) fill_rect(lm, 0, 0, width, sky_h, add(3));
        fill_rect(lm, 0, sky_h, width, horizon - sky_h, add(2));
        fill_rect(lm, 0, horizon + 1, width, height - horizon - 1, add(1));

        const int cars = static_cast<int>(rng.uniform_int(1, 3));
        for (int c = 0; c < cars; ++c) {
            const double cx = rng.uniform(0.1, 0.9) * width;
            const double cy = horizon + rng.uniform(0.2, 0.8) * (height - horizon);
            fill_ellipse(lm, cx, cy, rng.uniform(4.0, 12.0), rng.uniform(2.5, 6.0), add(4));
        }
        const int people = static_cast<int>(rng.uniform_int(0, 3));
        for (int p = 0; p < people; ++p) {
            const int px = static_cast<int>(rng.uniform_int(0, width - 3));
            const int py = static_cast<int>(rng.uniform_int(horizon - 6, height - 9));
            fill_rect(lm, px, py, 2 + static_cast<int>(rng.uniform_int(0, 1)), 7, add(5));
        }
        if (rng.bernoulli(0.7)) {
            const int px = static_cast<int>(rng.uniform_int(0, width - 1));
            fill_rect(lm, px, sky_h / 2, 1, horizon, add(6));
        }
        // A strip of void along the bottom (ego vehicle).
        fill_rect(lm, 0, height - 3, width, 3, 0);

        // Ids that got fully overpainted are dropped by sample_from_labels.
        std::map<std::uint32_t, int> present;
        for (auto id : lm.ids) {
            if (id != 0) present[id] = cats.at(id);
        }
        ds.samples.push_back(sample_from_labels(name, lm, present));
    }
    return ds;
}

Dataset dominant_class_dataset(int images, double dominant_fraction, std::uint64_t seed) {
    Dataset ds;
    ds.categories = street_categories();
    const int w = 64, h = 64;
    for (int i = 0; i < images; ++i) {
        const std::string name = "dom_" + std::to_string(i);
        RngStream rng = RngStream::for_sample(seed, name, 0);
        LabelMap lm(w, h);
        const int rows = static_cast<int>(std::lround(dominant_fraction * h));
        fill_rect(lm, 0, h - rows, w, rows, 1);  // road
        std::map<std::uint32_t, int> cats{{1, 1}};
        std::uint32_t id = 2;
        // Four small segments of about 2-6% each in the upper part.
        const int cats_small[] = {2, 4, 5, 6};
        for (int k = 0; k < 4; ++k) {
            const int sw = static_cast<int>(rng.uniform_int(8, 14));
            const int sh = static_cast<int>(rng.uniform_int(8, 14));
            const int x0 = k * 16 + static_cast<int>(rng.uniform_int(0, 1));
            const int y0 = static_cast<int>(rng.uniform_int(0, std::max(0, h - rows - sh)));
            fill_rect(lm, x0, y0, sw, sh, id);
            cats[id] = cats_small[k];
            ++id;
        }
        std::map<std::uint32_t, int> present;
        for (auto v : lm.ids) {
            if (v != 0) present[v] = cats.at(v);
        }
        ds.samples.push_back(sample_from_labels(name, lm, present));
    }
    return ds;
}

Dataset random_dataset(RngStream& rng) {
    Dataset ds;
    const int ncat = static_cast<int>(rng.uniform_int(1, 5));
    for (int c = 0; c < ncat; ++c) {
        CategoryDef def;
        def.id = static_cast<int>(rng.uniform_int(1, 200)) * 10 + c;  // unique
        def.name = "class_" + std::to_string(def.id);
        def.is_thing = rng.bernoulli(0.5);
        if (rng.bernoulli(0.5)) {
            def.color = std::array<std::uint8_t, 3>{static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                                                     static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                                                     static_cast<std::uint8_t>(rng.uniform_int(0, 255))};
        }
        ds.categories.push_back(def);
    }
    const int images = static_cast<int>(rng.uniform_int(0, 4));
    for (int i = 0; i < images; ++i) {
        const int w = static_cast<int>(rng.uniform_int(1, 16));
        const int h = static_cast<int>(rng.uniform_int(1, 16));
        const int nseg = static_cast<int>(rng.uniform_int(0, 6));
        std::vector<std::uint32_t> ids;
        for (int s = 0; s < nseg; ++s) {
            std::uint32_t id;
            do {
                id = rng.bernoulli(0.3) ? static_cast<std::uint32_t>(rng.uniform_int(1, kMaxSegmentId))
                                        : static_cast<std::uint32_t>(rng.uniform_int(1, 300));
            } while (std::find(ids.begin(), ids.end(), id) != ids.end());
            ids.push_back(id);
        }
        LabelMap lm(w, h);
        for (auto& v : lm.ids) {
            if (ids.empty() || rng.bernoulli(0.2)) continue;
            v = ids[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(ids.size()) - 1))];
        }
        std::map<std::uint32_t, int> cats;
        for (auto id : ids) cats[id] = ds.categories[static_cast<std::size_t>(rng.uniform_int(0, ncat - 1))].id;
        std::map<std::uint32_t, int> present;
        for (auto v : lm.ids) {
            if (v != 0) present[v] = cats.at(v);
        }
        PanopticSample s = sample_from_labels("img" + std::to_string(i), lm, present);
        if (rng.bernoulli(0.5)) {
            s.image_id = std::to_string(1000 + i);
            s.numeric_id = true;
        }
        // Random RGB so image content is not derived from ids only.
        for (auto& b : s.rgb.pixels) b = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
        // Shuffle segment order to check it survives a round trip.
        for (std::size_t k = s.segments.size(); k > 1; --k) {
            std::swap(s.segments[k - 1], s.segments[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(k) - 1))]);
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    const auto base = fs::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto p = base / ("panda_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::error_code ec;
        if (fs::create_directory(p, ec)) {
            path_ = p;
            return;
        }
    }
    throw std::runtime_error("cannot create temporary directory");
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

DatasetPaths layout(const fs::path& root) {
    return {root / "panoptic.json", root / "images", root / "labels"};
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
    }
    return out;
}

}  // namespace panda::testing
