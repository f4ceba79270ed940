#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "s4od/geometry.hpp"
#include "s4od/rng.hpp"

namespace s4od {

/// Synthetic scene generation. Curated scenes stand in for the labeled set,
/// web scenes draw from shifted distributions (dimmer targets, shifted sizes,
/// possibly zero objects) and stand in for the crawled unlabeled pool.
struct SceneConfig {
    int width = 64, height = 64, channels = 3;

    int count_min = 1, count_max = 3;       // target objects per scene
    double size_min = 4.0, size_max = 24.0; // object width range, pixels
    double aspect_min = 0.75, aspect_max = 1.35;

    // target texture: bright channel 0 with a checkerboard pattern
    double target_level = 0.78;
    double target_contrast = 0.14;
    // distractor texture: same channel-0 mean, striped instead of checkered
    int distractor_min = 0, distractor_max = 2;
    double distractor_level = 0.78;
    double distractor_contrast = 0.14;

    double background_level = 0.35;
    double noise_sigma = 0.05;

    // std of the edge noise applied to stored annotations (rater disagreement)
    double annotation_jitter = 0.0;

    // domain-shift deltas, applied only when web is set
    double shift_intensity = 0.0;  // subtracted from texture levels
    double shift_size = 0.0;       // added to object widths
    double absence_prob = 0.0;     // probability of a zero-target scene
    bool web = false;

    std::uint64_t seed = 1;
    int id_offset = 0;

    void validate() const {
        if (width < 8 || height < 8 || channels < 1)
            throw std::invalid_argument("SceneConfig: image dimensions too small");
        if (count_min < 0 || count_max < count_min)
            throw std::invalid_argument("SceneConfig: bad object count range");
        if (size_min < 2.0 || size_max < size_min)
            throw std::invalid_argument("SceneConfig: bad object size range");
        if (size_max + shift_size > std::min(width, height))
            throw std::invalid_argument("SceneConfig: size range exceeds image");
        if (absence_prob < 0.0 || absence_prob > 1.0)
            throw std::invalid_argument("SceneConfig: absence_prob outside [0,1]");
        if (distractor_min < 0 || distractor_max < distractor_min)
            throw std::invalid_argument("SceneConfig: bad distractor count range");
    }
};

struct Scene {
    ImageGrid image;
    std::vector<BBox> gt_boxes;          // stored annotations (jitter included)
    std::vector<BBox> distractor_boxes;  // rendered distractors; metadata, never annotated
    int image_id = 0;
    bool web = false;
};

namespace detail {

struct IntRect {
    int x, y, w, h;
    BBox box() const { return BBox{double(x), double(y), double(w), double(h)}; }
};

inline IntRect place_rect(Rng& rng, const SceneConfig& cfg) {
    double fw = rng.uniform_range(cfg.size_min, cfg.size_max);
    if (cfg.web) fw += cfg.shift_size;
    const double r = rng.uniform_range(cfg.aspect_min, cfg.aspect_max);
    double fh = fw * r;
    fw = std::clamp(fw, 3.0, double(cfg.width));
    fh = std::clamp(fh, 3.0, double(cfg.height));
    const int w = static_cast<int>(std::lround(fw));
    const int h = static_cast<int>(std::lround(fh));
    const int x = static_cast<int>(rng.uniform_int(cfg.width - w + 1));
    const int y = static_cast<int>(rng.uniform_int(cfg.height - h + 1));
    return IntRect{x, y, w, h};
}

inline void paint_rect(ImageGrid& img, const IntRect& r, const SceneConfig& cfg,
                       bool distractor, Rng& rng) {
    const double level = (distractor ? cfg.distractor_level : cfg.target_level) -
                         (cfg.web ? cfg.shift_intensity : 0.0);
    const double contrast = distractor ? cfg.distractor_contrast : cfg.target_contrast;
    const int phase = static_cast<int>(rng.uniform_int(2));
    for (int y = r.y; y < r.y + r.h; ++y)
        for (int x = r.x; x < r.x + r.w; ++x) {
            // checkerboard for targets, horizontal stripes for distractors:
            // same mean and amplitude, different gradient signature
            const int par = distractor ? (y + phase) % 2 : (x + y + phase) % 2;
            const double tex = (par == 0 ? contrast : -contrast);
            img.set(y, x, 0, level + tex + cfg.noise_sigma * rng.normal());
            if (img.channels() > 1)
                img.set(y, x, 1, 0.45 + 0.5 * tex + cfg.noise_sigma * rng.normal());
            if (img.channels() > 2)
                img.set(y, x, 2, 0.5 + cfg.noise_sigma * rng.normal());
        }
}

inline BBox jitter_annotation(const IntRect& r, const SceneConfig& cfg, Rng& rng) {
    if (cfg.annotation_jitter <= 0.0) return r.box();
    const double j = cfg.annotation_jitter;
    double x1 = r.x + j * rng.normal();
    double y1 = r.y + j * rng.normal();
    double x2 = r.x + r.w + j * rng.normal();
    double y2 = r.y + r.h + j * rng.normal();
    x1 = std::clamp(x1, 0.0, double(cfg.width) - 2.0);
    y1 = std::clamp(y1, 0.0, double(cfg.height) - 2.0);
    x2 = std::clamp(x2, x1 + 2.0, double(cfg.width));
    y2 = std::clamp(y2, y1 + 2.0, double(cfg.height));
    return BBox{x1, y1, x2 - x1, y2 - y1};
}

}  // namespace detail

inline Scene generate_scene(const SceneConfig& cfg, Rng& rng) {
    cfg.validate();
    Scene scene;
    scene.web = cfg.web;
    scene.image = ImageGrid(cfg.width, cfg.height, cfg.channels);

    for (int y = 0; y < cfg.height; ++y)
        for (int x = 0; x < cfg.width; ++x)
            for (int c = 0; c < cfg.channels; ++c) {
                const double base = (c == 0) ? cfg.background_level : 0.45;
                scene.image.set(y, x, c, base + cfg.noise_sigma * rng.normal());
            }

    int count = cfg.count_min +
                static_cast<int>(rng.uniform_int(cfg.count_max - cfg.count_min + 1));
    if (cfg.web && rng.bernoulli(cfg.absence_prob)) count = 0;

    std::vector<detail::IntRect> targets;
    for (int k = 0; k < count; ++k) {
        detail::IntRect r{};
        for (int attempt = 0; attempt < 20; ++attempt) {
            r = detail::place_rect(rng, cfg);
            double worst = 0.0;
            for (const auto& t : targets) worst = std::max(worst, iou(r.box(), t.box()));
            if (worst <= 0.3) break;
        }
        targets.push_back(r);
    }

    const int dspan = cfg.distractor_max - cfg.distractor_min + 1;
    const int dcount = cfg.distractor_min + static_cast<int>(rng.uniform_int(dspan));
    std::vector<detail::IntRect> distractors;
    for (int k = 0; k < dcount; ++k) {
        detail::IntRect r{};
        for (int attempt = 0; attempt < 20; ++attempt) {
            r = detail::place_rect(rng, cfg);
            double worst = 0.0;
            for (const auto& t : targets) worst = std::max(worst, iou(r.box(), t.box()));
            if (worst <= 0.1) break;
        }
        distractors.push_back(r);
    }

    for (const auto& r : distractors) detail::paint_rect(scene.image, r, cfg, true, rng);
    for (const auto& r : targets) detail::paint_rect(scene.image, r, cfg, false, rng);

    for (const auto& r : targets)
        scene.gt_boxes.push_back(detail::jitter_annotation(r, cfg, rng));
    for (const auto& r : distractors) scene.distractor_boxes.push_back(r.box());
    return scene;
}

/// n independent scenes with ids id_offset..id_offset+n-1, one derived RNG
/// stream per scene so generation order is irrelevant.
inline std::vector<Scene> generate_dataset(const SceneConfig& cfg, int n) {
    if (n < 0) throw std::invalid_argument("generate_dataset: n < 0");
    cfg.validate();
    std::vector<Scene> scenes;
    scenes.reserve(n);
    for (int i = 0; i < n; ++i) {
        Rng rng = make_rng(cfg.seed, "scene", static_cast<std::uint64_t>(i));
        Scene s = generate_scene(cfg, rng);
        s.image_id = cfg.id_offset + i;
        scenes.push_back(std::move(s));
    }
    return scenes;
}

}  // namespace s4od
