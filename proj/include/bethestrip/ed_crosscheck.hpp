#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/SparseCore>

#include "bethestrip/linalg.hpp"
#include "bethestrip/model.hpp"

namespace bethe {

// Finite-volume ground truth: H_L on the ball of radius L, assembled as a
// sparse matrix and solved by a general sparse LU, sharing nothing with the
// tree recursion except the site numbering and the potential streams.

inline constexpr std::size_t max_assembled_dimension = 200000;

// Ball B_L in breadth-first order; site 0 is the root.
struct TruncatedTree {
    int K = 2;
    int L = 0;
    std::vector<int> parent;  // -1 for the root
    std::vector<int> depth;
    std::vector<std::vector<int>> children;

    std::size_t size() const { return parent.size(); }
};

// Throws SizeOverflow when m |B_L| exceeds max_assembled_dimension.
TruncatedTree build_tree(int K, int L, int m = 1);

using SparseReal = Eigen::SparseMatrix<double>;

// Real symmetric matrix of H_L for one realization; index (site * m + orbital).
// Hopping blocks are I/2 between adjacent sites, diagonal blocks A + lambda V(x).
SparseReal assemble_operator(const TruncatedTree& tree, const BetheStripModel& model, std::uint64_t seed,
                             std::uint64_t realization);

struct GreenColumn {
    Eigen::VectorXcd column;
    double residual = 0.0;  // |(H - z) u - delta|_inf
};

// Column (site, orbital) of (H_L - z)^{-1}.
GreenColumn green_column(const TruncatedTree& tree, const BetheStripModel& model, std::uint64_t seed,
                         std::uint64_t realization, const SpectralPoint& z, int site, int orbital);

// m x m block G_L(0,0;z) from m solves with one factorization. Throws
// VerificationFailure when a solve residual exceeds 1e-10.
ComplexSymMatrix root_block(const TruncatedTree& tree, const BetheStripModel& model, std::uint64_t seed,
                            std::uint64_t realization, const SpectralPoint& z);

struct DosRow {
    double E = 0.0;
    double dos = 0.0;
    double std_error = 0.0;
};

// Realization average of (1/(m pi)) Im Tr G_L(0,0;E+i eta) on a grid.
std::vector<DosRow> dos_histogram(const TruncatedTree& tree, const BetheStripModel& model,
                                  const std::vector<double>& energies, double eta, int realizations,
                                  std::uint64_t seed, int workers = 0);

}  // namespace bethe
