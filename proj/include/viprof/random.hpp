// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <random>
#include <utility>
#include <vector>

namespace viprof {

/// Fisher-Yates with a modulo draw on mt19937_64. Unlike std::shuffle the
/// result is identical across standard library implementations.
template <class T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    const std::size_t n = items.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(items[i], items[j]);
    }
}

} // namespace viprof
