#pragma once

#include <cstddef>
#include <vector>

#include "bethestrip/linalg.hpp"

namespace bethe {

inline constexpr int default_batches = 20;

struct RealEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

// std_error is sqrt(se_re^2 + se_im^2).
struct ComplexEstimate {
    cplx mean = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

// Entrywise means and batch-means standard errors of complex matrices.
struct MatrixEstimate {
    MatrixC mean;
    MatrixR std_error;
    std::size_t count = 0;
};

// Batch means over samples in index order; batch b spans
// [b n / B, (b+1) n / B). Fewer samples than batches fall back to one
// sample per batch.
RealEstimate batch_means(const std::vector<double>& samples, int batches = default_batches);
ComplexEstimate batch_means(const std::vector<cplx>& samples, int batches = default_batches);
// `samples` holds count matrices of size rows x cols stored contiguously (column-major each).
MatrixEstimate batch_means(const std::vector<cplx>& samples, int rows, int cols, int batches = default_batches);

}  // namespace bethe
