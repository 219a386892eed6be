#include "bethestrip/stats.hpp"

#include <algorithm>
#include <cmath>

namespace bethe {

namespace {

// mean and standard error of the grand mean from per-batch means
template <class Get>
std::pair<double, double> batched(std::size_t n, int batches, Get&& get) {
    if (n == 0) return {0.0, 0.0};
    const std::size_t B = std::min<std::size_t>(static_cast<std::size_t>(std::max(batches, 1)), n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += get(i);
    const double mean = total / static_cast<double>(n);
    if (B < 2) return {mean, 0.0};
    std::vector<double> bm(B);
    for (std::size_t b = 0; b < B; ++b) {
        const std::size_t lo = b * n / B;
        const std::size_t hi = (b + 1) * n / B;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += get(i);
        bm[b] = s / static_cast<double>(hi - lo);
    }
    double mb = 0.0;
    for (double v : bm) mb += v;
    mb /= static_cast<double>(B);
    double var = 0.0;
    for (double v : bm) var += (v - mb) * (v - mb);
    var /= static_cast<double>(B - 1);
    return {mean, std::sqrt(var / static_cast<double>(B))};
}

}  // namespace

RealEstimate batch_means(const std::vector<double>& samples, int batches) {
    auto [mean, se] = batched(samples.size(), batches, [&](std::size_t i) { return samples[i]; });
    return {mean, se, samples.size()};
}

ComplexEstimate batch_means(const std::vector<cplx>& samples, int batches) {
    auto [re, se_re] = batched(samples.size(), batches, [&](std::size_t i) { return samples[i].real(); });
    auto [im, se_im] = batched(samples.size(), batches, [&](std::size_t i) { return samples[i].imag(); });
    return {cplx(re, im), std::hypot(se_re, se_im), samples.size()};
}

MatrixEstimate batch_means(const std::vector<cplx>& samples, int rows, int cols, int batches) {
    const std::size_t block = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    const std::size_t n = block == 0 ? 0 : samples.size() / block;
    MatrixEstimate out{MatrixC::Zero(rows, cols), MatrixR::Zero(rows, cols), n};
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) {
            const std::size_t off = static_cast<std::size_t>(c) * rows + r;
            auto [re, se_re] = batched(n, batches, [&](std::size_t i) { return samples[i * block + off].real(); });
            auto [im, se_im] = batched(n, batches, [&](std::size_t i) { return samples[i * block + off].imag(); });
            out.mean(r, c) = cplx(re, im);
            out.std_error(r, c) = std::hypot(se_re, se_im);
        }
    return out;
}

}  // namespace bethe
