#include <doctest.h>

#include <fstream>

#include "support.hpp"
#include "viprof/error.hpp"
#include "viprof/extract.hpp"

#ifdef VIPROF_HAVE_OPENCV
#include <opencv2/imgcodecs.hpp>

#include "viprof/extract_opencv.hpp"
#endif

using namespace viprof;
using namespace viprof::testing;

namespace {

#ifdef VIPROF_HAVE_OPENCV
// Global average pool -> fc7 (4096) -> fc8 (1000) -> softmax "prob". Small
// enough to build in memory, with the layer names the extractor expects.
cv::dnn::Net stub_net() {
    cv::dnn::Net net;
    cv::dnn::LayerParams pool;
    pool.set("pool", "ave");
    pool.set("global_pooling", true);
    net.addLayerToPrev("gap", "Pooling", pool);

    cv::dnn::LayerParams fc7;
    fc7.set("num_output", 4096);
    fc7.set("bias_term", false);
    cv::Mat w7(4096, 3, CV_32F);
    cv::randu(w7, -0.01, 0.01);
    fc7.blobs.push_back(w7);
    net.addLayerToPrev("fc7", "InnerProduct", fc7);

    cv::dnn::LayerParams fc8;
    fc8.set("num_output", 1000);
    fc8.set("bias_term", false);
    cv::Mat w8(1000, 4096, CV_32F);
    cv::randu(w8, -0.01, 0.01);
    fc8.blobs.push_back(w8);
    net.addLayerToPrev("fc8", "InnerProduct", fc8);

    cv::dnn::LayerParams prob;
    net.addLayerToPrev("prob", "Softmax", prob);
    return net;
}
#endif

} // namespace

TEST_SUITE("extract") {

TEST_CASE("empty input needs no network") {
    const std::vector<ImageInput> none;
    if (extraction_available()) {
        CHECK(extract_embeddings("/nonexistent/model.onnx", none).vectors.empty());
    } else {
        CHECK_THROWS_AS(extract_embeddings("/nonexistent/model.onnx", none), CapabilityUnavailable);
    }
}

#ifdef VIPROF_HAVE_OPENCV

TEST_CASE("unreadable model is a data error") {
    ScratchDir dir("model");
    const auto img = dir / "a.png";
    cv::imwrite(img.string(), cv::Mat(8, 8, CV_8UC3, cv::Scalar(10, 20, 30)));
    const std::vector<ImageInput> inputs{{"a", img}};
    CHECK_THROWS_AS(extract_embeddings(dir / "missing.onnx", inputs), DataError);
}

TEST_CASE("stub network yields both layers and skips corrupt images") {
    ScratchDir dir("extract");
    cv::imwrite((dir / "red.png").string(), cv::Mat(40, 30, CV_8UC3, cv::Scalar(0, 0, 255)));
    cv::imwrite((dir / "blue.jpg").string(), cv::Mat(20, 50, CV_8UC3, cv::Scalar(255, 0, 0)));
    std::ofstream(dir / "broken.jpg") << "not an image";

    const std::vector<ImageInput> inputs{
        {"red", dir / "red.png"}, {"broken", dir / "broken.jpg"}, {"blue", dir / "blue.jpg"}};
    auto net = stub_net();
    const auto result = extract_with_net(net, inputs);

    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].image_id == "broken");
    CHECK(result.failures[0].path.find("broken.jpg") != std::string::npos);
    REQUIRE(result.vectors.size() == 4);

    EmbeddingStore store;
    for (const auto& v : result.vectors) store.add(v);
    for (const char* id : {"red", "blue"}) {
        REQUIRE(store.find(id, EmbeddingLayer::hidden4096));
        const auto* p = store.find(id, EmbeddingLayer::softmax1000);
        REQUIRE(p);
        double sum = 0;
        for (float x : p->values) sum += x;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-4));
    }
    // Different inputs give different hidden vectors.
    CHECK(store.find("red", EmbeddingLayer::hidden4096)->values !=
          store.find("blue", EmbeddingLayer::hidden4096)->values);

    // A layer of the wrong width is reported rather than truncated.
    ExtractOptions opts;
    opts.hidden_layer = "gap";
    auto net2 = stub_net();
    CHECK_THROWS_AS(extract_with_net(net2, std::span(inputs).first(1), opts), DataError);
}

#endif

}
