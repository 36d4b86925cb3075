// SPDX-License-Identifier: Apache-2.0
//
// Optional CNN feature extraction. Only built when OpenCV's dnn module is
// available; otherwise every entry point throws CapabilityUnavailable.
#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "viprof/visual_features.hpp"

namespace viprof {

struct ExtractOptions {
    std::filesystem::path config;         ///< second network file for formats that need one (Caffe prototxt, ...)
    std::string hidden_layer = "fc7";     ///< 4096-wide last hidden layer
    std::string scores_layer = "prob";    ///< 1000-way class scores
    int input_size = 224;
    std::array<double, 3> channel_means{103.939, 116.779, 123.68};  ///< BGR, as in the original VGG release
    bool swap_rb = false;                 ///< images decode as BGR, matching the means above
};

struct ImageInput {
    std::string image_id;
    std::filesystem::path path;
};

struct ExtractFailure {
    std::string image_id;
    std::string path;
    std::string message;
};

struct ExtractResult {
    std::vector<EmbeddingVector> vectors;  ///< hidden4096 then softmax1000 per successful image
    std::vector<ExtractFailure> failures;
};

bool extraction_available() noexcept;

/// Loads the network with cv::dnn::readNet and runs every image through it.
/// An undecodable image becomes a failure record and the batch continues.
ExtractResult extract_embeddings(const std::filesystem::path& model, std::span<const ImageInput> images,
                                 const ExtractOptions& opts = {});

} // namespace viprof
