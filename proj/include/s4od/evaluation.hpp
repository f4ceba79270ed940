#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "s4od/coco_io.hpp"
#include "s4od/geometry.hpp"

namespace s4od {

// COCO-protocol average precision: greedy highest-IoU matching, 101-point
// interpolation, AP averaged over IoU thresholds 0.50:0.05:0.95, size strata
// with area breaks (144, 576). Ground truth outside the evaluated stratum is
// "ignored": detections matching it drop out of the PR curve instead of
// counting as false positives.

inline std::vector<double> ap_iou_thresholds() {
    std::vector<double> t;
    for (int i = 0; i < 10; ++i) t.push_back(0.50 + 0.05 * i);
    return t;
}

enum class DetOutcome : std::uint8_t { TP, FP, Ignored };

/// Greedy matching of one image's detections (already sorted by score
/// descending, ties by lower box index) against its ground truth. Each
/// detection takes the unmatched counted gt with the highest IoU >= thresh
/// (ties by lower gt index); counted gts match at most once. Detections that
/// only reach ignored gts are marked Ignored.
inline std::vector<DetOutcome> match_detections(const std::vector<ScoredBox>& dets_sorted,
                                                const std::vector<BBox>& gts,
                                                double iou_thresh,
                                                const std::vector<char>* gt_counted = nullptr) {
    std::vector<DetOutcome> out(dets_sorted.size(), DetOutcome::FP);
    std::vector<char> used(gts.size(), 0);
    for (std::size_t d = 0; d < dets_sorted.size(); ++d) {
        int best = -1;
        double best_iou = 0.0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (used[g] || (gt_counted && !(*gt_counted)[g])) continue;
            const double v = iou(dets_sorted[d].box, gts[g]);
            if (v >= iou_thresh && v > best_iou) {
                best_iou = v;
                best = static_cast<int>(g);
            }
        }
        if (best >= 0) {
            used[best] = 1;
            out[d] = DetOutcome::TP;
            continue;
        }
        if (gt_counted) {
            for (std::size_t g = 0; g < gts.size(); ++g) {
                if ((*gt_counted)[g]) continue;
                if (iou(dets_sorted[d].box, gts[g]) >= iou_thresh) {
                    out[d] = DetOutcome::Ignored;
                    break;
                }
            }
        }
    }
    return out;
}

namespace detail {

struct RankedDet {
    double score;
    int image_id;
    int index;  // original position within the image's detection list
    DetOutcome outcome;
};

inline bool rank_before(const RankedDet& a, const RankedDet& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return a.index < b.index;
}

/// Whole-instance ranked TP/FP labels plus counted-gt total at one threshold.
inline std::pair<std::vector<RankedDet>, long> rank_instance(
    const DetectionSet& dets, const std::map<int, std::vector<BBox>>& gts,
    double iou_thresh,
    const std::map<int, std::vector<char>>* counted = nullptr) {
    std::vector<RankedDet> ranked;
    long gt_total = 0;
    for (const auto& [id, boxes] : gts) {
        if (!counted) {
            gt_total += static_cast<long>(boxes.size());
        } else {
            const auto it = counted->find(id);
            for (std::size_t g = 0; g < boxes.size(); ++g)
                if (it == counted->end() || it->second[g]) ++gt_total;
        }
    }
    for (const auto& [id, list] : dets) {
        std::vector<int> order(list.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (list[a].score != list[b].score) return list[a].score > list[b].score;
            return a < b;
        });
        std::vector<ScoredBox> sorted;
        sorted.reserve(list.size());
        for (int i : order) sorted.push_back(list[i]);

        static const std::vector<BBox> no_gt;
        const auto git = gts.find(id);
        const std::vector<BBox>& img_gts = git == gts.end() ? no_gt : git->second;
        const std::vector<char>* mask = nullptr;
        if (counted && git != gts.end()) {
            const auto mit = counted->find(id);
            if (mit != counted->end()) mask = &mit->second;
        }
        const auto outcomes = match_detections(sorted, img_gts, iou_thresh, mask);
        for (std::size_t i = 0; i < sorted.size(); ++i)
            ranked.push_back(RankedDet{sorted[i].score, id, order[i], outcomes[i]});
    }
    std::sort(ranked.begin(), ranked.end(), rank_before);
    return {std::move(ranked), gt_total};
}

}  // namespace detail

/// 101-point interpolated AP at one IoU threshold; nullopt when there is no
/// (counted) ground truth. `curve_out`, when given, receives the interpolated
/// precision at recalls 0.00..1.00.
inline std::optional<double> average_precision(
    const DetectionSet& dets, const std::map<int, std::vector<BBox>>& gts,
    double iou_thresh, const std::map<int, std::vector<char>>* counted = nullptr,
    std::vector<double>* curve_out = nullptr) {
    auto [ranked, gt_total] = detail::rank_instance(dets, gts, iou_thresh, counted);
    if (gt_total == 0) return std::nullopt;

    std::vector<double> precision, recall;
    long tp = 0, fp = 0;
    for (const auto& r : ranked) {
        if (r.outcome == DetOutcome::Ignored) continue;
        (r.outcome == DetOutcome::TP ? tp : fp)++;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(gt_total));
    }

    const std::size_t n = precision.size();
    std::vector<double> envelope(n);
    double pmax = 0.0;
    for (std::size_t k = n; k-- > 0;) {
        pmax = std::max(pmax, precision[k]);
        envelope[k] = pmax;
    }

    double ap = 0.0;
    std::size_t k = 0;
    for (int i = 0; i <= 100; ++i) {
        const double r = i / 100.0;
        while (k < n && recall[k] < r) ++k;
        const double p = (k < n) ? envelope[k] : 0.0;
        ap += p;
        if (curve_out) curve_out->push_back(p);
    }
    return ap / 101.0;
}

struct APReport {
    std::optional<double> ap_50_95, ap_50, ap_75;
    std::optional<double> ap_small, ap_medium, ap_large;
    // interpolated precision at recalls 0.00..1.00, one row per IoU threshold
    std::vector<std::vector<double>> pr_curves;

    static double sentinel(const std::optional<double>& v) { return v ? *v : -1.0; }
};

inline constexpr double kAreaBreakSmall = 144.0;   // desk-scale analogue of 32^2
inline constexpr double kAreaBreakMedium = 576.0;  // desk-scale analogue of 96^2

namespace detail {

inline std::optional<double> mean_defined(const std::vector<std::optional<double>>& v) {
    double sum = 0.0;
    int n = 0;
    for (const auto& x : v)
        if (x) {
            sum += *x;
            ++n;
        }
    if (n == 0) return std::nullopt;
    return sum / n;
}

}  // namespace detail

inline APReport coco_ap(const DetectionSet& dets, const std::map<int, std::vector<BBox>>& gts) {
    APReport rep;
    const std::vector<double> thresholds = ap_iou_thresholds();

    std::vector<std::optional<double>> overall;
    for (const double t : thresholds) {
        std::vector<double> curve;
        overall.push_back(average_precision(dets, gts, t, nullptr, &curve));
        rep.pr_curves.push_back(std::move(curve));
    }
    rep.ap_50_95 = detail::mean_defined(overall);
    rep.ap_50 = overall[0];
    rep.ap_75 = overall[5];

    const auto stratum_ap = [&](double lo, double hi) -> std::optional<double> {
        std::map<int, std::vector<char>> counted;
        for (const auto& [id, boxes] : gts) {
            std::vector<char> mask(boxes.size(), 0);
            for (std::size_t g = 0; g < boxes.size(); ++g) {
                const double a = boxes[g].area();
                mask[g] = (a >= lo && a < hi) ? 1 : 0;
            }
            counted.emplace(id, std::move(mask));
        }
        std::vector<std::optional<double>> per_thresh;
        for (const double t : thresholds)
            per_thresh.push_back(average_precision(dets, gts, t, &counted));
        return detail::mean_defined(per_thresh);
    };
    const double inf = std::numeric_limits<double>::infinity();
    rep.ap_small = stratum_ap(0.0, kAreaBreakSmall);
    rep.ap_medium = stratum_ap(kAreaBreakSmall, kAreaBreakMedium);
    rep.ap_large = stratum_ap(kAreaBreakMedium, inf);
    return rep;
}

// ---------------------------------------------------------------------------
// gamma_h calibration: sweep the positive-group IoU threshold over the grid
// 0.50:0.05:0.95, score the positive group as if it were the teacher's final
// output, and keep the argmax. Ties break toward the larger threshold: at
// equal mAP the stricter cut gives the cleaner positive group.
// ---------------------------------------------------------------------------

struct CalibrationResult {
    double gamma_h = 0.0;
    std::vector<std::pair<double, double>> sweep;  // (gamma, metric)
};

inline CalibrationResult calibrate_gamma_h(const DetectionSet& pseudo,
                                           const std::map<int, std::vector<BBox>>& gts,
                                           bool use_ap50 = false) {
    std::size_t total = 0;
    for (const auto& [id, list] : pseudo) total += list.size();
    if (total == 0) throw std::invalid_argument("calibrate_gamma_h: empty pseudo set");

    CalibrationResult result;
    double best = -1.0;
    for (int i = 0; i < 10; ++i) {
        const double gamma = 0.50 + 0.05 * i;
        DetectionSet positives;
        for (const auto& [id, list] : pseudo) {
            const auto git = gts.find(id);
            static const std::vector<BBox> none;
            const std::vector<BBox>& img_gts = git == gts.end() ? none : git->second;
            for (const ScoredBox& d : list)
                if (max_iou(d.box, img_gts) >= gamma) positives[id].push_back(d);
        }
        const APReport rep = coco_ap(positives, gts);
        const std::optional<double> metric = use_ap50 ? rep.ap_50 : rep.ap_50_95;
        if (!metric)
            throw std::invalid_argument("calibrate_gamma_h: no ground truth boxes");
        result.sweep.emplace_back(gamma, *metric);
        if (*metric >= best) {
            best = *metric;
            result.gamma_h = gamma;
        }
    }
    return result;
}

}  // namespace s4od
