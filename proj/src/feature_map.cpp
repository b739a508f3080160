#include "qdmeta/feature_map.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qdmeta {

FeatureMapNetwork transform(std::span<const double> w, NetworkDims dims, double alpha_s) {
    if (w.size() != dims.genotype_size()) {
        throw std::invalid_argument("meta-genotype has length " + std::to_string(w.size()) + ", expected " +
                                    std::to_string(dims.genotype_size()));
    }
    auto clamp = [](double v) { return std::clamp(v, -1.0, 1.0); };
    FeatureMapNetwork net;
    net.dims = dims;
    net.alpha_s = alpha_s;
    const std::size_t n1 = dims.hidden * dims.base;
    const std::size_t n2 = dims.target * dims.hidden;
    net.w1.resize(n1);
    net.w2.resize(n2);
    std::transform(w.begin(), w.begin() + n1, net.w1.begin(), clamp);
    std::transform(w.begin() + n1, w.begin() + n1 + n2, net.w2.begin(), clamp);
    net.b1 = clamp(w[n1 + n2]);
    net.b2 = clamp(w[n1 + n2 + 1]);
    return net;
}

double scaled_sigmoid(double x, std::size_t n, double alpha_s) {
    if (n < 1) throw std::invalid_argument("sigmoid fan-in must be at least 1");
    return 1.0 / (1.0 + std::exp(-alpha_s * x / static_cast<double>(n + 1)));
}

std::vector<double> scaled_sigmoid(std::span<const double> x, std::size_t n, double alpha_s) {
    if (n < 1) throw std::invalid_argument("sigmoid fan-in must be at least 1");
    std::vector<double> out(x.size());
    std::transform(x.begin(), x.end(), out.begin(), [&](double v) { return scaled_sigmoid(v, n, alpha_s); });
    return out;
}

void map_features(const FeatureMapNetwork& net, std::span<const double> base, std::span<double> out) {
    const NetworkDims& d = net.dims;
    if (base.size() != d.base) throw std::invalid_argument("base-feature length mismatch");
    if (out.size() != d.target) throw std::invalid_argument("target-feature length mismatch");

    constexpr std::size_t kStackHidden = 64;
    std::array<double, kStackHidden> stack_hidden{};
    std::vector<double> heap_hidden;
    double* hidden = stack_hidden.data();
    if (d.hidden > kStackHidden) {
        heap_hidden.resize(d.hidden);
        hidden = heap_hidden.data();
    }

    for (std::size_t h = 0; h < d.hidden; ++h) {
        const double* row = net.w1.data() + h * d.base;
        double acc = net.b1;
        for (std::size_t i = 0; i < d.base; ++i) acc += row[i] * base[i];
        hidden[h] = scaled_sigmoid(acc, d.base, net.alpha_s);
    }
    for (std::size_t t = 0; t < d.target; ++t) {
        const double* row = net.w2.data() + t * d.hidden;
        double acc = net.b2;
        for (std::size_t h = 0; h < d.hidden; ++h) acc += row[h] * hidden[h];
        out[t] = scaled_sigmoid(acc, d.hidden, net.alpha_s);
    }
}

std::vector<double> map_features(const FeatureMapNetwork& net, std::span<const double> base) {
    std::vector<double> out(net.dims.target);
    map_features(net, base, out);
    return out;
}

}  // namespace qdmeta
