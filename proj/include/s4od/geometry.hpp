#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "s4od/rng.hpp"

namespace s4od {

/// Axis-aligned box: top-left corner plus size, continuous image coordinates.
/// Area is w*h and intersections are interval overlaps; there is no +1 pixel
/// convention anywhere.
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double x2() const { return x + w; }
    double y2() const { return y + h; }
    double cx() const { return x + 0.5 * w; }
    double cy() const { return y + 0.5 * h; }
    double area() const { return w * h; }

    bool valid() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) &&
               std::isfinite(h) && w > 0.0 && h > 0.0;
    }
    bool inside_image(double img_w, double img_h) const {
        return x >= 0.0 && y >= 0.0 && x2() <= img_w && y2() <= img_h;
    }

    friend bool operator==(const BBox& a, const BBox& b) = default;
};

inline double iou(const BBox& a, const BBox& b) {
    const double iw = std::min(a.x2(), b.x2()) - std::max(a.x, b.x);
    if (iw <= 0.0) return 0.0;
    const double ih = std::min(a.y2(), b.y2()) - std::max(a.y, b.y);
    if (ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

/// Max IoU of `b` against a box list; 0 when the list is empty.
inline double max_iou(const BBox& b, const std::vector<BBox>& boxes) {
    double m = 0.0;
    for (const BBox& g : boxes) m = std::max(m, iou(b, g));
    return m;
}

inline std::array<double, 4> normalize_box(const BBox& b, double img_w, double img_h) {
    if (img_w <= 0.0 || img_h <= 0.0)
        throw std::invalid_argument("normalize_box: image dimensions must be positive");
    return {b.x / img_w, b.y / img_h, b.w / img_w, b.h / img_h};
}

// ---------------------------------------------------------------------------
// Images. H x W x C grid of values in [0,1], stored quantized to 1/1024 steps
// so that 90-degree transforms, box-mass checks and text serialization are
// exact (sums of quantized pixels are dyadic rationals, immune to reordering).
// ---------------------------------------------------------------------------

class ImageGrid {
public:
    static constexpr int kQuant = 1024;

    ImageGrid() = default;
    ImageGrid(int width, int height, int channels)
        : w_(width), h_(height), c_(channels),
          q_(static_cast<std::size_t>(width) * height * channels, 0) {}

    int width() const { return w_; }
    int height() const { return h_; }
    int channels() const { return c_; }

    double at(int y, int x, int c) const {
        return static_cast<double>(q_[index(y, x, c)]) / kQuant;
    }
    std::uint16_t raw(int y, int x, int c) const { return q_[index(y, x, c)]; }
    void set_raw(int y, int x, int c, std::uint16_t v) { q_[index(y, x, c)] = v; }
    void set(int y, int x, int c, double v) { q_[index(y, x, c)] = quantize(v); }
    void add(int y, int x, int c, double v) { set(y, x, c, at(y, x, c) + v); }

    static std::uint16_t quantize(double v) {
        v = std::clamp(v, 0.0, 1.0);
        return static_cast<std::uint16_t>(std::lround(v * kQuant));
    }

    friend bool operator==(const ImageGrid& a, const ImageGrid& b) = default;

private:
    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * w_ + x) * c_ + c;
    }
    int w_ = 0, h_ = 0, c_ = 0;
    std::vector<std::uint16_t> q_;
};

// ---------------------------------------------------------------------------
// Transform algebra: quarter-turn rotation, horizontal flip, optional crop,
// applied in that order. The crop window lives in the rotated/flipped frame.
// ---------------------------------------------------------------------------

struct Transform {
    int quarter_turns = 0;  // clockwise 90-degree turns, 0..3
    bool hflip = false;
    std::optional<BBox> crop;  // integer-aligned window in the post-rotation/flip frame

    bool identity() const { return quarter_turns == 0 && !hflip && !crop; }
};

/// One clockwise quarter turn of a box inside a W x H image. The result lives
/// in the rotated H x W image.
inline BBox rotate_box_cw(const BBox& b, double img_w, double img_h) {
    (void)img_w;
    return BBox{img_h - b.y - b.h, b.x, b.h, b.w};
}

inline BBox hflip_box(const BBox& b, double img_w) {
    return BBox{img_w - b.x - b.w, b.y, b.w, b.h};
}

/// Box coordinates under rotation -> flip -> crop, in the output frame.
/// Returns nullopt when the crop removes more than half of the box area.
/// Boxes the crop window was sampled around are never clipped at all.
inline std::optional<BBox> transform_box(BBox b, const Transform& t, int img_w, int img_h) {
    double cw = img_w, ch = img_h;
    for (int k = 0; k < t.quarter_turns; ++k) {
        b = rotate_box_cw(b, cw, ch);
        std::swap(cw, ch);
    }
    if (t.hflip) b = hflip_box(b, cw);
    if (!t.crop) return b;
    const BBox& win = *t.crop;
    const double x0 = std::max(b.x, win.x);
    const double y0 = std::max(b.y, win.y);
    const double x1 = std::min(b.x2(), win.x2());
    const double y1 = std::min(b.y2(), win.y2());
    if (x1 - x0 <= 0.0 || y1 - y0 <= 0.0) return std::nullopt;
    const double kept = (x1 - x0) * (y1 - y0);
    if (kept < 0.5 * b.area()) return std::nullopt;
    return BBox{x0 - win.x, y0 - win.y, x1 - x0, y1 - y0};
}

inline ImageGrid rotate_image_cw(const ImageGrid& img) {
    ImageGrid out(img.height(), img.width(), img.channels());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < img.channels(); ++c)
                out.set_raw(x, img.height() - 1 - y, c, img.raw(y, x, c));
    return out;
}

inline ImageGrid hflip_image(const ImageGrid& img) {
    ImageGrid out(img.width(), img.height(), img.channels());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < img.channels(); ++c)
                out.set_raw(y, img.width() - 1 - x, c, img.raw(y, x, c));
    return out;
}

inline ImageGrid crop_image(const ImageGrid& img, const BBox& win) {
    const int ox = static_cast<int>(std::llround(win.x));
    const int oy = static_cast<int>(std::llround(win.y));
    const int cw = static_cast<int>(std::llround(win.w));
    const int ch = static_cast<int>(std::llround(win.h));
    if (ox < 0 || oy < 0 || cw < 1 || ch < 1 || ox + cw > img.width() ||
        oy + ch > img.height())
        throw std::invalid_argument("crop_image: window outside image");
    ImageGrid out(cw, ch, img.channels());
    for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x)
            for (int c = 0; c < img.channels(); ++c)
                out.set_raw(y, x, c, img.raw(y + oy, x + ox, c));
    return out;
}

/// Lossless pixel realization of a Transform: 90-degree multiples permute
/// cells exactly, then the optional crop copies a sub-window.
inline ImageGrid transform_image(const ImageGrid& img, const Transform& t) {
    ImageGrid out = img;
    for (int k = 0; k < t.quarter_turns; ++k) out = rotate_image_cw(out);
    if (t.hflip) out = hflip_image(out);
    if (t.crop) out = crop_image(out, *t.crop);
    return out;
}

/// Uniform draw over {4 rotations} x {flip, no flip}; crop window of ratio 0.9
/// placed uniformly over the integer offsets whose window contains every
/// protected box. When no such placement exists the crop is omitted.
inline Transform sample_transform(Rng& rng, const std::vector<BBox>& protected_boxes,
                                  int img_w, int img_h) {
    Transform t;
    t.quarter_turns = static_cast<int>(rng.uniform_int(4));
    t.hflip = rng.uniform_int(2) == 1;

    const int rw = (t.quarter_turns % 2 == 0) ? img_w : img_h;
    const int rh = (t.quarter_turns % 2 == 0) ? img_h : img_w;
    const int cw = static_cast<int>(std::lround(0.9 * rw));
    const int ch = static_cast<int>(std::lround(0.9 * rh));
    if (cw < 1 || ch < 1) return t;

    // Containment bounds for the window offset, computed over the protected
    // boxes as they sit in the rotated/flipped frame.
    double min_x1 = std::numeric_limits<double>::infinity();
    double min_y1 = std::numeric_limits<double>::infinity();
    double max_x2 = -std::numeric_limits<double>::infinity();
    double max_y2 = -std::numeric_limits<double>::infinity();
    const Transform rf{t.quarter_turns, t.hflip, std::nullopt};
    for (const BBox& p : protected_boxes) {
        const BBox q = *transform_box(p, rf, img_w, img_h);
        min_x1 = std::min(min_x1, q.x);
        min_y1 = std::min(min_y1, q.y);
        max_x2 = std::max(max_x2, q.x2());
        max_y2 = std::max(max_y2, q.y2());
    }

    long ox_lo = 0, ox_hi = rw - cw, oy_lo = 0, oy_hi = rh - ch;
    if (!protected_boxes.empty()) {
        ox_lo = std::max(ox_lo, static_cast<long>(std::ceil(max_x2 - cw)));
        ox_hi = std::min(ox_hi, static_cast<long>(std::floor(min_x1)));
        oy_lo = std::max(oy_lo, static_cast<long>(std::ceil(max_y2 - ch)));
        oy_hi = std::min(oy_hi, static_cast<long>(std::floor(min_y1)));
    }
    if (ox_lo > ox_hi || oy_lo > oy_hi) return t;  // no valid window, crop omitted

    const long ox = ox_lo + static_cast<long>(rng.uniform_int(
                                static_cast<std::uint64_t>(ox_hi - ox_lo + 1)));
    const long oy = oy_lo + static_cast<long>(rng.uniform_int(
                                static_cast<std::uint64_t>(oy_hi - oy_lo + 1)));
    t.crop = BBox{static_cast<double>(ox), static_cast<double>(oy),
                  static_cast<double>(cw), static_cast<double>(ch)};
    return t;
}

}  // namespace s4od
