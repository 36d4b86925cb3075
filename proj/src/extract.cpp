// SPDX-License-Identifier: Apache-2.0
#include "viprof/extract.hpp"

#include "viprof/error.hpp"

#ifdef VIPROF_HAVE_OPENCV
#include <opencv2/imgcodecs.hpp>

#include "viprof/extract_opencv.hpp"
#endif

namespace viprof {

#ifdef VIPROF_HAVE_OPENCV

bool extraction_available() noexcept { return true; }

namespace {

std::vector<float> layer_values(const cv::Mat& out, std::size_t want, const std::string& layer) {
    if (out.total() != want)
        throw DataError("network layer '" + layer + "' produced " + std::to_string(out.total()) + " values, expected " +
                        std::to_string(want));
    cv::Mat flat = out.reshape(1, 1);
    if (flat.type() != CV_32F) flat.convertTo(flat, CV_32F);
    return std::vector<float>(flat.ptr<float>(), flat.ptr<float>() + want);
}

} // namespace

ExtractResult extract_with_net(cv::dnn::Net& net, std::span<const ImageInput> images, const ExtractOptions& opts) {
    ExtractResult result;
    const std::vector<cv::String> layers{opts.hidden_layer, opts.scores_layer};
    const cv::Scalar mean(opts.channel_means[0], opts.channel_means[1], opts.channel_means[2]);
    for (const auto& in : images) {
        const cv::Mat img = cv::imread(in.path.string(), cv::IMREAD_COLOR);
        if (img.empty()) {
            result.failures.push_back({in.image_id, in.path.string(), "cannot decode image"});
            continue;
        }
        const cv::Mat blob = cv::dnn::blobFromImage(img, 1.0, cv::Size(opts.input_size, opts.input_size), mean,
                                                    opts.swap_rb, false);
        std::vector<cv::Mat> outs;
        try {
            net.setInput(blob);
            net.forward(outs, layers);
        } catch (const cv::Exception& e) {
            throw DataError("network forward pass failed on " + in.path.string() + ": " + e.what());
        }
        result.vectors.push_back({in.image_id, EmbeddingLayer::hidden4096,
                                  layer_values(outs.at(0), expected_length(EmbeddingLayer::hidden4096), layers[0])});
        result.vectors.push_back({in.image_id, EmbeddingLayer::softmax1000,
                                  layer_values(outs.at(1), expected_length(EmbeddingLayer::softmax1000), layers[1])});
    }
    return result;
}

ExtractResult extract_embeddings(const std::filesystem::path& model, std::span<const ImageInput> images,
                                 const ExtractOptions& opts) {
    if (images.empty()) return {};
    cv::dnn::Net net;
    try {
        net = cv::dnn::readNet(model.string(), opts.config.string());
    } catch (const cv::Exception& e) {
        throw DataError("cannot load network " + model.string() + ": " + e.what());
    }
    if (net.empty()) throw DataError("cannot load network " + model.string());
    return extract_with_net(net, images, opts);
}

#else

bool extraction_available() noexcept { return false; }

ExtractResult extract_embeddings(const std::filesystem::path&, std::span<const ImageInput>, const ExtractOptions&) {
    throw CapabilityUnavailable("this build has no neural network runtime; rebuild with OpenCV dnn to use extract");
}

#endif

} // namespace viprof
