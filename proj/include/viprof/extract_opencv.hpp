// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opencv2/dnn.hpp>

#include "viprof/extract.hpp"

namespace viprof {

/// Same as extract_embeddings but with an already constructed network.
ExtractResult extract_with_net(cv::dnn::Net& net, std::span<const ImageInput> images, const ExtractOptions& opts = {});

} // namespace viprof
