#pragma once

#include <cstdint>
#include <vector>

#include "kgaug/bicluster.hpp"
#include "kgaug/matrix.hpp"

namespace kgaug {

// One new feature per mined bicluster: the Euclidean distance from every
// sample (member or not) to the bicluster centroid, restricted to the
// bicluster's columns.
struct AugmentedFeature {
    std::uint32_t index = 0;
    Bicluster source;
    std::vector<double> values;   // one distance per sample, >= 0
};

// Discretization of one augmented feature for triple construction.
struct QuantizedFeature {
    std::uint32_t index = 0;
    std::uint32_t n_bins = 0;
    std::vector<double> edges;        // n_bins + 1 ascending boundaries
    std::vector<std::uint32_t> bins;  // one bin in [0, n_bins) per sample
};

// Equal-width bin boundaries for every augmented feature, emitted as the
// sidecar next to the augmented matrix dump.
struct BinScheme {
    std::uint32_t n_bins = 0;
    std::vector<std::vector<double>> edges;
};

std::vector<double> centroid(const Matrix& m, const Bicluster& b);

std::vector<AugmentedFeature> distance_features(const Matrix& m,
                                                const std::vector<Bicluster>& biclusters);

// Equal-width bins over [min, max]; the maximum lands in the top bin and a
// constant feature maps everything to bin 0.
QuantizedFeature quantize(const AugmentedFeature& feature, std::uint32_t n_bins);

std::vector<QuantizedFeature> quantize_all(const std::vector<AugmentedFeature>& features,
                                           std::uint32_t n_bins);

BinScheme bin_scheme(const std::vector<QuantizedFeature>& quantized);

}  // namespace kgaug
