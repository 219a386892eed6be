#include "bethestrip/ed_crosscheck.hpp"

#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

#include <Eigen/SparseLU>

#include "bethestrip/errors.hpp"
#include "bethestrip/parallel.hpp"
#include "bethestrip/stats.hpp"

namespace bethe {

namespace {

using SparseComplex = Eigen::SparseMatrix<cplx>;

SparseComplex shifted(const SparseReal& H, const SpectralPoint& z) {
    SparseComplex A = H.cast<cplx>();
    for (Eigen::Index k = 0; k < A.rows(); ++k) A.coeffRef(k, k) -= z.z();
    A.makeCompressed();
    return A;
}

double residual_inf(const SparseComplex& A, const Eigen::VectorXcd& u, Eigen::Index unit) {
    Eigen::VectorXcd r = A * u;
    r(unit) -= 1.0;
    return r.cwiseAbs().maxCoeff();
}

}  // namespace

TruncatedTree build_tree(int K, int L, int m) {
    if (K < 2) throw ConfigError("build_tree: K must be >= 2");
    if (L < 0) throw ConfigError("build_tree: L must be >= 0");
    // |B_L| without overflow
    double count = 1.0, level = K + 1.0;
    for (int l = 1; l <= L; ++l, level *= K) count += level;
    if (count * m > static_cast<double>(max_assembled_dimension)) {
        std::ostringstream msg;
        msg << "build_tree: dimension " << count * m << " exceeds " << max_assembled_dimension;
        throw SizeOverflow(msg.str());
    }
    TruncatedTree tree;
    tree.K = K;
    tree.L = L;
    tree.parent.push_back(-1);
    tree.depth.push_back(0);
    tree.children.emplace_back();
    std::deque<int> queue{0};
    while (!queue.empty()) {
        const int x = queue.front();
        queue.pop_front();
        if (tree.depth[x] == L) continue;
        const int n_children = x == 0 ? K + 1 : K;
        for (int c = 0; c < n_children; ++c) {
            const int y = static_cast<int>(tree.parent.size());
            tree.parent.push_back(x);
            tree.depth.push_back(tree.depth[x] + 1);
            tree.children.emplace_back();
            tree.children[x].push_back(y);
            queue.push_back(y);
        }
    }
    return tree;
}

SparseReal assemble_operator(const TruncatedTree& tree, const BetheStripModel& model, std::uint64_t seed,
                             std::uint64_t realization) {
    const int m = model.m();
    const auto n = static_cast<Eigen::Index>(tree.size() * m);
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(tree.size() * (m * m + 2 * m));
    for (std::size_t x = 0; x < tree.size(); ++x) {
        const RealSymMatrix V = site_potential(model.ensemble(), seed, realization, x);
        const auto base = static_cast<Eigen::Index>(x * m);
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                double v = model.lambda() * V(j, k);
                if (j == k) v += model.a()[j];
                if (v != 0.0 || j == k) entries.emplace_back(base + j, base + k, v);
            }
        if (tree.parent[x] >= 0) {
            const auto pbase = static_cast<Eigen::Index>(tree.parent[x]) * m;
            for (int j = 0; j < m; ++j) {
                entries.emplace_back(base + j, pbase + j, 0.5);
                entries.emplace_back(pbase + j, base + j, 0.5);
            }
        }
    }
    SparseReal H(n, n);
    H.setFromTriplets(entries.begin(), entries.end());
    return H;
}

GreenColumn green_column(const TruncatedTree& tree, const BetheStripModel& model, std::uint64_t seed,
                         std::uint64_t realization, const SpectralPoint& z, int site, int orbital) {
    if (z.eta <= 0.0) throw ConfigError("green_column requires eta > 0");
    if (site < 0 || static_cast<std::size_t>(site) >= tree.size() || orbital < 0 || orbital >= model.m())
        throw ConfigError("green_column: site or orbital out of range");
    const SparseComplex A = shifted(assemble_operator(tree, model, seed, realization), z);
    Eigen::SparseLU<SparseComplex> lu(A);
    if (lu.info() != Eigen::Success) throw SingularMatrix("green_column: sparse factorization failed");
    const Eigen::Index unit = static_cast<Eigen::Index>(site) * model.m() + orbital;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(A.rows());
    rhs(unit) = 1.0;
    GreenColumn out;
    out.column = lu.solve(rhs);
    out.residual = residual_inf(A, out.column, unit);
    return out;
}

ComplexSymMatrix root_block(const TruncatedTree& tree, const BetheStripModel& model, std::uint64_t seed,
                            std::uint64_t realization, const SpectralPoint& z) {
    if (z.eta <= 0.0) throw ConfigError("root_block requires eta > 0");
    const int m = model.m();
    const SparseComplex A = shifted(assemble_operator(tree, model, seed, realization), z);
    Eigen::SparseLU<SparseComplex> lu(A);
    if (lu.info() != Eigen::Success) throw SingularMatrix("root_block: sparse factorization failed");
    MatrixC block(m, m);
    for (int k = 0; k < m; ++k) {
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(A.rows());
        rhs(k) = 1.0;
        const Eigen::VectorXcd u = lu.solve(rhs);
        const double res = residual_inf(A, u, k);
        if (res > 1e-10) {
            std::ostringstream msg;
            msg << "root_block: solve residual " << res << " exceeds 1e-10";
            throw VerificationFailure(msg.str());
        }
        block.col(k) = u.head(m);
    }
    return ComplexSymMatrix::symmetrize(block);
}

std::vector<DosRow> dos_histogram(const TruncatedTree& tree, const BetheStripModel& model,
                                  const std::vector<double>& energies, double eta, int realizations,
                                  std::uint64_t seed, int workers) {
    if (!(eta > 0.0)) throw ConfigError("dos_histogram requires eta > 0");
    if (realizations < 1) throw ConfigError("dos_histogram needs at least one realization");
    const double scale = 1.0 / (model.m() * std::numbers::pi);
    std::vector<std::vector<double>> values(energies.size(), std::vector<double>(realizations));
    parallel_chunks(static_cast<std::size_t>(realizations), realizations, workers,
                    [&](std::size_t lo, std::size_t hi) {
                        for (std::size_t r = lo; r < hi; ++r)
                            for (std::size_t e = 0; e < energies.size(); ++e) {
                                const ComplexSymMatrix G = root_block(tree, model, seed, r, SpectralPoint(energies[e], eta));
                                values[e][r] = scale * G.trace().imag();
                            }
                    });
    std::vector<DosRow> rows;
    for (std::size_t e = 0; e < energies.size(); ++e) {
        const RealEstimate est = batch_means(values[e]);
        rows.push_back({energies[e], est.mean, est.std_error});
    }
    return rows;
}

}  // namespace bethe
