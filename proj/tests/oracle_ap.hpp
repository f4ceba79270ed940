#pragma once

// Naive full-recompute AP oracle. Written independently of the library
// evaluation path: flat O(N^2) precision/recall recomputation per rank and a
// direct max-scan per recall point. Shares only the protocol definition
// (greedy highest-IoU matching, ignore semantics for out-of-stratum gt,
// 101-point interpolation, thresholds 0.50:0.05:0.95).

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "s4od/coco_io.hpp"

namespace oracle {

inline double box_iou(const s4od::BBox& a, const s4od::BBox& b) {
    const double ox = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    const double oy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    if (ox <= 0.0 || oy <= 0.0) return 0.0;
    const double inter = ox * oy;
    const double uni = a.w * a.h + b.w * b.h - inter;
    return inter / uni;
}

struct FlatDet {
    int img;
    int idx;
    double score;
    s4od::BBox box;
};

inline std::optional<double> ap_at(const s4od::DetectionSet& dets,
                                   const std::map<int, std::vector<s4od::BBox>>& gts,
                                   double thresh, double area_lo, double area_hi) {
    std::vector<FlatDet> all;
    for (const auto& [img, list] : dets)
        for (std::size_t i = 0; i < list.size(); ++i)
            all.push_back(FlatDet{img, static_cast<int>(i), list[i].score, list[i].box});
    std::stable_sort(all.begin(), all.end(), [](const FlatDet& a, const FlatDet& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.img != b.img) return a.img < b.img;
        return a.idx < b.idx;
    });

    long total_gt = 0;
    std::map<int, std::vector<int>> used;
    for (const auto& [img, boxes] : gts) {
        used[img].assign(boxes.size(), 0);
        for (const auto& g : boxes) {
            const double a = g.w * g.h;
            if (a >= area_lo && a < area_hi) ++total_gt;
        }
    }
    if (total_gt == 0) return std::nullopt;

    std::vector<int> kept;  // 1 = TP, 0 = FP; matched-to-ignored dropped
    for (const FlatDet& d : all) {
        const auto git = gts.find(d.img);
        int pick = -1;
        double best = -1.0;
        if (git != gts.end()) {
            for (std::size_t g = 0; g < git->second.size(); ++g) {
                const s4od::BBox& gb = git->second[g];
                const double a = gb.w * gb.h;
                if (!(a >= area_lo && a < area_hi) || used[d.img][g]) continue;
                const double v = box_iou(d.box, gb);
                if (v >= thresh && v > best) {
                    best = v;
                    pick = static_cast<int>(g);
                }
            }
        }
        if (pick >= 0) {
            used[d.img][pick] = 1;
            kept.push_back(1);
            continue;
        }
        bool ignored = false;
        if (git != gts.end()) {
            for (std::size_t g = 0; g < git->second.size(); ++g) {
                const s4od::BBox& gb = git->second[g];
                const double a = gb.w * gb.h;
                if (a >= area_lo && a < area_hi) continue;
                if (box_iou(d.box, gb) >= thresh) {
                    ignored = true;
                    break;
                }
            }
        }
        if (!ignored) kept.push_back(0);
    }

    double ap = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double r = i / 100.0;
        double pbest = 0.0;
        for (std::size_t k = 1; k <= kept.size(); ++k) {
            long tp = 0;
            for (std::size_t j = 0; j < k; ++j) tp += kept[j];
            const double prec = static_cast<double>(tp) / static_cast<double>(k);
            const double rec = static_cast<double>(tp) / static_cast<double>(total_gt);
            if (rec >= r && prec > pbest) pbest = prec;
        }
        ap += pbest;
    }
    return ap / 101.0;
}

struct Report {
    std::optional<double> ap_50_95, ap_50, ap_75, ap_small, ap_medium, ap_large;
};

inline std::optional<double> mean_defined(const std::vector<std::optional<double>>& v) {
    double s = 0.0;
    int n = 0;
    for (const auto& x : v)
        if (x) {
            s += *x;
            ++n;
        }
    if (!n) return std::nullopt;
    return s / n;
}

inline Report coco_ap(const s4od::DetectionSet& dets,
                      const std::map<int, std::vector<s4od::BBox>>& gts) {
    const double inf = std::numeric_limits<double>::infinity();
    Report rep;
    std::vector<std::optional<double>> overall, small, medium, large;
    for (int i = 0; i < 10; ++i) {
        const double t = 0.50 + 0.05 * i;
        overall.push_back(ap_at(dets, gts, t, 0.0, inf));
        small.push_back(ap_at(dets, gts, t, 0.0, 144.0));
        medium.push_back(ap_at(dets, gts, t, 144.0, 576.0));
        large.push_back(ap_at(dets, gts, t, 576.0, inf));
    }
    rep.ap_50_95 = mean_defined(overall);
    rep.ap_50 = overall[0];
    rep.ap_75 = overall[5];
    rep.ap_small = mean_defined(small);
    rep.ap_medium = mean_defined(medium);
    rep.ap_large = mean_defined(large);
    return rep;
}

}  // namespace oracle
