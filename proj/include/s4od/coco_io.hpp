#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "s4od/geometry.hpp"
#include "s4od/scenegen.hpp"

namespace s4od {

// COCO-layout annotation and detection-result files. Field names follow the
// reference layout exactly so real COCO extracts can be ingested; unknown
// extra fields are tolerated, listed fields are validated.

struct ImageInfo {
    int id = 0;
    int width = 0;
    int height = 0;
};

struct AnnotationSet {
    std::vector<ImageInfo> images;              // in file order
    std::map<int, std::vector<BBox>> boxes;     // image_id -> gt boxes

    const std::vector<BBox>& boxes_for(int image_id) const {
        static const std::vector<BBox> empty;
        const auto it = boxes.find(image_id);
        return it == boxes.end() ? empty : it->second;
    }
    std::size_t total_boxes() const {
        std::size_t n = 0;
        for (const auto& [id, bs] : boxes) n += bs.size();
        return n;
    }
};

struct ScoredBox {
    BBox box;
    double score = 0.0;
};

using DetectionSet = std::map<int, std::vector<ScoredBox>>;  // image_id -> dets

namespace detail {

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << text;
    if (!out) throw std::runtime_error(path + ": write failed");
}

inline BBox parse_bbox(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4)
        throw std::runtime_error(where + ": bbox must be [x,y,w,h]");
    BBox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
           j[3].get<double>()};
    if (!b.valid())
        throw std::runtime_error(where + ": bbox has non-positive width/height");
    return b;
}

}  // namespace detail

inline void save_annotations(const std::vector<Scene>& scenes, const std::string& path) {
    nlohmann::json images = nlohmann::json::array();
    nlohmann::json annotations = nlohmann::json::array();
    int ann_id = 1;
    for (const Scene& s : scenes) {
        images.push_back({{"id", s.image_id},
                          {"width", s.image.width()},
                          {"height", s.image.height()}});
        for (const BBox& b : s.gt_boxes) {
            annotations.push_back({{"id", ann_id++},
                                   {"image_id", s.image_id},
                                   {"bbox", {b.x, b.y, b.w, b.h}},
                                   {"category_id", 1}});
        }
    }
    nlohmann::json root{{"images", images},
                        {"annotations", annotations},
                        {"categories", {{{"id", 1}, {"name", "object"}}}}};
    detail::write_text_file(path, root.dump(1) + "\n");
}

inline AnnotationSet load_annotations(const std::string& path) {
    const nlohmann::json root = detail::load_json_file(path);
    if (!root.is_object() || !root.contains("images") || !root.contains("annotations"))
        throw std::runtime_error(path + ": missing images/annotations arrays");
    AnnotationSet out;
    for (std::size_t i = 0; i < root["images"].size(); ++i) {
        const auto& j = root["images"][i];
        const std::string where = path + ": images[" + std::to_string(i) + "]";
        if (!j.contains("id") || !j.contains("width") || !j.contains("height"))
            throw std::runtime_error(where + ": needs id, width, height");
        ImageInfo info{j["id"].get<int>(), j["width"].get<int>(), j["height"].get<int>()};
        if (info.width <= 0 || info.height <= 0)
            throw std::runtime_error(where + ": non-positive dimensions");
        out.images.push_back(info);
        out.boxes.emplace(info.id, std::vector<BBox>{});
    }
    for (std::size_t i = 0; i < root["annotations"].size(); ++i) {
        const auto& j = root["annotations"][i];
        const std::string where = path + ": annotations[" + std::to_string(i) + "]";
        if (!j.contains("image_id") || !j.contains("bbox"))
            throw std::runtime_error(where + ": needs image_id and bbox");
        const int image_id = j["image_id"].get<int>();
        if (!out.boxes.count(image_id))
            throw std::runtime_error(where + ": unknown image_id " +
                                     std::to_string(image_id));
        out.boxes[image_id].push_back(detail::parse_bbox(j["bbox"], where));
    }
    return out;
}

inline void save_detections(const DetectionSet& dets, const std::string& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [image_id, list] : dets)
        for (const ScoredBox& d : list)
            arr.push_back({{"image_id", image_id},
                           {"category_id", 1},
                           {"bbox", {d.box.x, d.box.y, d.box.w, d.box.h}},
                           {"score", d.score}});
    detail::write_text_file(path, arr.dump(1) + "\n");
}

inline DetectionSet load_detections(const std::string& path) {
    const nlohmann::json root = detail::load_json_file(path);
    if (!root.is_array())
        throw std::runtime_error(path + ": detections file must be an array");
    DetectionSet out;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const auto& j = root[i];
        const std::string where = path + ": [" + std::to_string(i) + "]";
        if (!j.contains("image_id") || !j.contains("bbox") || !j.contains("score"))
            throw std::runtime_error(where + ": needs image_id, bbox, score");
        const double score = j["score"].get<double>();
        if (!(score >= 0.0 && score <= 1.0))
            throw std::runtime_error(where + ": score outside [0,1]");
        out[j["image_id"].get<int>()].push_back(
            ScoredBox{detail::parse_bbox(j["bbox"], where), score});
    }
    return out;
}

}  // namespace s4od
