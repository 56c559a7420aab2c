#include "kgaug/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kgaug {

std::vector<double> centroid(const Matrix& m, const Bicluster& b) {
    if (b.rows.empty() || b.cols.empty())
        throw std::invalid_argument("centroid: empty bicluster");
    std::vector<double> out(b.cols.size(), 0.0);
    for (std::size_t j = 0; j < b.cols.size(); ++j) {
        double sum = 0.0;
        for (const auto r : b.rows) sum += m(r, b.cols[j]);
        out[j] = sum / static_cast<double>(b.rows.size());
    }
    return out;
}

std::vector<AugmentedFeature> distance_features(const Matrix& m,
                                                const std::vector<Bicluster>& biclusters) {
    std::vector<AugmentedFeature> out;
    out.reserve(biclusters.size());
    for (std::size_t i = 0; i < biclusters.size(); ++i) {
        const auto& b = biclusters[i];
        // The stored centroid wins: with train-only mining it refers to the
        // mined submatrix, not to `m`.
        const auto t = b.centroid.size() == b.cols.size() ? b.centroid : centroid(m, b);
        AugmentedFeature f;
        f.index = static_cast<std::uint32_t>(i);
        f.source = b;
        f.source.centroid = t;
        f.values.resize(m.rows());
        for (std::size_t s = 0; s < m.rows(); ++s) {
            double sum = 0.0;
            for (std::size_t j = 0; j < b.cols.size(); ++j) {
                const double d = m(s, b.cols[j]) - t[j];
                sum += d * d;
            }
            f.values[s] = std::sqrt(sum);
        }
        out.push_back(std::move(f));
    }
    return out;
}

QuantizedFeature quantize(const AugmentedFeature& feature, std::uint32_t n_bins) {
    if (n_bins < 2) throw std::invalid_argument("quantize: n_bins must be >= 2");
    if (feature.values.empty()) throw std::invalid_argument("quantize: no values");

    const auto [lo_it, hi_it] = std::minmax_element(feature.values.begin(), feature.values.end());
    const double lo = *lo_it, hi = *hi_it;

    QuantizedFeature q;
    q.index = feature.index;
    q.n_bins = n_bins;
    q.edges.resize(n_bins + 1);
    const double width = (hi - lo) / static_cast<double>(n_bins);
    for (std::uint32_t i = 0; i <= n_bins; ++i)
        q.edges[i] = lo + width * static_cast<double>(i);
    q.edges[n_bins] = hi;

    q.bins.resize(feature.values.size());
    for (std::size_t s = 0; s < feature.values.size(); ++s) {
        std::uint32_t bin = 0;
        if (width > 0.0) {
            bin = static_cast<std::uint32_t>((feature.values[s] - lo) / width);
            bin = std::min(bin, n_bins - 1);   // max value goes to the top bin
        }
        q.bins[s] = bin;
    }
    return q;
}

std::vector<QuantizedFeature> quantize_all(const std::vector<AugmentedFeature>& features,
                                           std::uint32_t n_bins) {
    std::vector<QuantizedFeature> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(quantize(f, n_bins));
    return out;
}

BinScheme bin_scheme(const std::vector<QuantizedFeature>& quantized) {
    BinScheme s;
    s.n_bins = quantized.empty() ? 0 : quantized.front().n_bins;
    for (const auto& q : quantized) s.edges.push_back(q.edges);
    return s;
}

}  // namespace kgaug
