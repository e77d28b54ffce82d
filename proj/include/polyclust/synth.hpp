#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polyclust/common.hpp"

namespace polyclust {

struct SynthData {
    Matrix points;
    std::vector<int> truth;
};

// k Gaussian blobs (unit variance per coordinate) with centers at pairwise
// distance >= sep, sizes as even as possible.
SynthData make_blobs(int n, int d, int k, double sep, std::uint64_t seed);

// Two parallel diagonal bands in 2-D: band 0 along (t, t+offset), band 1
// along (t+offset, t), with uniform jitter of half-width `noise`. The bands
// are separable by x0 - x1 but by no single axis threshold when they
// overlap in each coordinate.
SynthData make_xor_diagonal(int n, double offset, double noise, std::uint64_t seed);

// Writes points as CSV with header f0..f{d-1}.
void write_points_csv(const Matrix& points, const std::string& path);

}  // namespace polyclust
