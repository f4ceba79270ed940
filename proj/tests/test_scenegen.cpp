#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "s4od/coco_io.hpp"
#include "s4od/scenegen.hpp"

using namespace s4od;

namespace {

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

double mean_target_intensity(const std::vector<Scene>& scenes) {
    double sum = 0.0;
    long n = 0;
    for (const Scene& s : scenes)
        for (const BBox& b : s.gt_boxes)
            for (int y = int(b.y); y < int(b.y2()) && y < s.image.height(); ++y)
                for (int x = int(b.x); x < int(b.x2()) && x < s.image.width(); ++x) {
                    sum += s.image.at(y, x, 0);
                    ++n;
                }
    return n ? sum / n : 0.0;
}

}  // namespace

TEST(SceneGen, ZeroCountRangeGivesEmptyBoxes) {
    SceneConfig cfg;
    cfg.count_min = cfg.count_max = 0;
    Rng rng(3);
    const Scene s = generate_scene(cfg, rng);
    EXPECT_TRUE(s.gt_boxes.empty());
}

TEST(SceneGen, DeterministicPerSeed) {
    SceneConfig cfg;
    cfg.annotation_jitter = 0.8;
    cfg.seed = 77;
    const auto a = generate_dataset(cfg, 5);
    const auto b = generate_dataset(cfg, 5);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].image, b[i].image);
        EXPECT_EQ(a[i].gt_boxes, b[i].gt_boxes);
        EXPECT_EQ(a[i].image_id, b[i].image_id);
    }
}

TEST(SceneGen, AbsenceProbabilityOneGivesZeroTargets) {
    SceneConfig cfg;
    cfg.web = true;
    cfg.absence_prob = 1.0;
    cfg.seed = 5;
    for (const Scene& s : generate_dataset(cfg, 50)) EXPECT_TRUE(s.gt_boxes.empty());
}

TEST(SceneGen, BoxesInsideImageAndSizesRequested) {
    SceneConfig cfg;
    cfg.seed = 11;
    cfg.annotation_jitter = 1.0;
    const auto scenes = generate_dataset(cfg, 100);
    for (const Scene& s : scenes)
        for (const BBox& b : s.gt_boxes) {
            EXPECT_TRUE(b.valid());
            EXPECT_TRUE(b.inside_image(cfg.width, cfg.height));
        }
}

TEST(SceneGen, DatasetSizesAndDisjointIdNamespaces) {
    SceneConfig cfg;
    cfg.seed = 1;
    EXPECT_TRUE(generate_dataset(cfg, 0).empty());
    EXPECT_THROW(generate_dataset(cfg, -1), std::invalid_argument);

    SceneConfig web = cfg;
    web.web = true;
    web.id_offset = 1000000;
    const auto curated = generate_dataset(cfg, 20);
    const auto webset = generate_dataset(web, 30);
    EXPECT_EQ(curated.size(), 20u);
    EXPECT_EQ(webset.size(), 30u);
    EXPECT_EQ(curated.front().image_id, 0);
    EXPECT_EQ(webset.front().image_id, 1000000);
}

TEST(SceneGen, SizeRangeExceedingImageRejected) {
    SceneConfig cfg;
    cfg.size_max = 100.0;
    Rng rng(1);
    EXPECT_THROW(generate_scene(cfg, rng), std::invalid_argument);
}

TEST(SceneGen, IntensityShiftShowsUpInWebScenes) {
    SceneConfig cur;
    cur.seed = 21;
    cur.count_min = cur.count_max = 2;
    cur.target_level = 0.7;     // keep the texture away from the clamp
    cur.target_contrast = 0.1;
    cur.noise_sigma = 0.04;
    SceneConfig web = cur;
    web.web = true;
    web.shift_intensity = 0.12;
    web.seed = 22;
    const double mc = mean_target_intensity(generate_dataset(cur, 1000));
    const double mw = mean_target_intensity(generate_dataset(web, 1000));
    EXPECT_NEAR(mc - mw, 0.12, 0.02);
}

TEST(CocoIo, AnnotationRoundTrip) {
    SceneConfig cfg;
    cfg.seed = 31;
    cfg.annotation_jitter = 0.9;
    const auto scenes = generate_dataset(cfg, 10);
    const auto path = temp_file("s4od_ann_roundtrip.json");
    save_annotations(scenes, path.string());
    const AnnotationSet loaded = load_annotations(path.string());
    ASSERT_EQ(loaded.images.size(), scenes.size());
    for (const Scene& s : scenes) {
        const auto& boxes = loaded.boxes_for(s.image_id);
        ASSERT_EQ(boxes.size(), s.gt_boxes.size());
        for (std::size_t i = 0; i < boxes.size(); ++i) EXPECT_EQ(boxes[i], s.gt_boxes[i]);
    }
    std::filesystem::remove(path);
}

TEST(CocoIo, EmptySceneListIsValidFile) {
    const auto path = temp_file("s4od_ann_empty.json");
    save_annotations({}, path.string());
    const AnnotationSet loaded = load_annotations(path.string());
    EXPECT_TRUE(loaded.images.empty());
    EXPECT_EQ(loaded.total_boxes(), 0u);
    std::filesystem::remove(path);
}

TEST(CocoIo, NegativeWidthRejected) {
    const auto path = temp_file("s4od_ann_badbox.json");
    std::ofstream(path) << R"({"images":[{"id":1,"width":64,"height":64}],
        "annotations":[{"id":1,"image_id":1,"bbox":[4,4,-2,5],"category_id":1}]})";
    EXPECT_THROW(load_annotations(path.string()), std::runtime_error);
    std::filesystem::remove(path);
}

TEST(CocoIo, MalformedJsonDiagnosed) {
    const auto path = temp_file("s4od_ann_malformed.json");
    std::ofstream(path) << "{\"images\": [";
    try {
        load_annotations(path.string());
        FAIL() << "expected parse error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("s4od_ann_malformed"), std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST(CocoIo, DetectionRoundTripAndScoreValidation) {
    DetectionSet dets;
    dets[3] = {{BBox{1.5, 2.25, 8.125, 4.0625}, 0.73}, {BBox{0, 0, 3, 3}, 0.1}};
    dets[7] = {{BBox{10.000000000000002, 5, 6, 6}, 1.0}};
    const auto path = temp_file("s4od_det_roundtrip.json");
    save_detections(dets, path.string());
    const DetectionSet loaded = load_detections(path.string());
    ASSERT_EQ(loaded.size(), dets.size());
    for (const auto& [id, list] : dets) {
        const auto& got = loaded.at(id);
        ASSERT_EQ(got.size(), list.size());
        for (std::size_t i = 0; i < list.size(); ++i) {
            EXPECT_EQ(got[i].box, list[i].box);
            EXPECT_EQ(got[i].score, list[i].score);
        }
    }
    std::filesystem::remove(path);

    const auto bad = temp_file("s4od_det_badscore.json");
    std::ofstream(bad) << R"([{"image_id":1,"category_id":1,"bbox":[0,0,2,2],"score":1.5}])";
    EXPECT_THROW(load_detections(bad.string()), std::runtime_error);
    std::filesystem::remove(bad);
}

TEST(CocoIo, ByteIdenticalFilesFromIdenticalInputs) {
    SceneConfig cfg;
    cfg.seed = 8;
    cfg.annotation_jitter = 0.4;
    const auto scenes = generate_dataset(cfg, 6);
    const auto p1 = temp_file("s4od_ann_a.json");
    const auto p2 = temp_file("s4od_ann_b.json");
    save_annotations(scenes, p1.string());
    save_annotations(scenes, p2.string());
    std::ifstream f1(p1), f2(p2);
    const std::string s1((std::istreambuf_iterator<char>(f1)), {});
    const std::string s2((std::istreambuf_iterator<char>(f2)), {});
    EXPECT_EQ(s1, s2);
    EXPECT_FALSE(s1.empty());
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}
