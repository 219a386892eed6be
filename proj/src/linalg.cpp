#include "bethestrip/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "bethestrip/errors.hpp"

namespace bethe {

SpectralPoint::SpectralPoint(double energy, double imag) : E(energy), eta(imag) {
    if (!std::isfinite(energy) || !std::isfinite(imag) || imag < 0.0) {
        std::ostringstream msg;
        msg << "spectral point requires finite E and eta >= 0, got E=" << energy << " eta=" << imag;
        throw ConfigError(msg.str());
    }
}

ComplexSymMatrix::ComplexSymMatrix(int m) : data_(MatrixC::Zero(m, m)) {
    if (m < 1) throw ConfigError("matrix dimension must be positive");
}

ComplexSymMatrix ComplexSymMatrix::identity(int m) {
    ComplexSymMatrix out(m);
    out.data_.setIdentity();
    return out;
}

ComplexSymMatrix ComplexSymMatrix::diagonal(const std::vector<cplx>& diag) {
    ComplexSymMatrix out(static_cast<int>(diag.size()));
    for (std::size_t k = 0; k < diag.size(); ++k) out.data_(k, k) = diag[k];
    return out;
}

ComplexSymMatrix ComplexSymMatrix::symmetrize(const MatrixC& a) {
    if (a.rows() != a.cols() || a.rows() < 1) throw ConfigError("symmetrize: matrix must be square");
    if (!a.allFinite()) throw ConfigError("symmetrize: non-finite entry");
    ComplexSymMatrix out;
    out.data_ = 0.5 * (a + a.transpose());
    return out;
}

ComplexSymMatrix ComplexSymMatrix::from_dense(const MatrixC& a) {
    if (a.rows() != a.cols() || a.rows() < 1) throw ConfigError("from_dense: matrix must be square");
    if (!a.allFinite()) throw ConfigError("from_dense: non-finite entry");
    for (Eigen::Index j = 0; j < a.rows(); ++j)
        for (Eigen::Index k = j + 1; k < a.cols(); ++k)
            if (a(j, k) != a(k, j)) throw ConfigError("from_dense: matrix is not symmetric");
    ComplexSymMatrix out;
    out.data_ = a;
    return out;
}

ComplexSymMatrix ComplexSymMatrix::from_rows(std::initializer_list<std::initializer_list<cplx>> rows) {
    const auto m = static_cast<Eigen::Index>(rows.size());
    MatrixC a(m, m);
    Eigen::Index j = 0;
    for (const auto& row : rows) {
        if (static_cast<Eigen::Index>(row.size()) != m) throw ConfigError("from_rows: ragged rows");
        Eigen::Index k = 0;
        for (cplx v : row) a(j, k++) = v;
        ++j;
    }
    return from_dense(a);
}

void ComplexSymMatrix::set(int j, int k, cplx value) {
    data_(j, k) = value;
    data_(k, j) = value;
}

double ComplexSymMatrix::max_norm() const { return max_abs(data_); }

bool ComplexSymMatrix::is_diagonal(double tol) const {
    for (int j = 0; j < dim(); ++j)
        for (int k = 0; k < dim(); ++k)
            if (j != k && std::abs(data_(j, k)) > tol) return false;
    return true;
}

std::vector<cplx> ComplexSymMatrix::diag() const {
    std::vector<cplx> out(dim());
    for (int k = 0; k < dim(); ++k) out[k] = data_(k, k);
    return out;
}

ComplexSymMatrix ComplexSymMatrix::conj() const {
    ComplexSymMatrix out;
    out.data_ = data_.conjugate();
    return out;
}

ComplexSymMatrix ComplexSymMatrix::operator+(const ComplexSymMatrix& rhs) const {
    ComplexSymMatrix out;
    out.data_ = data_ + rhs.data_;
    return out;
}

ComplexSymMatrix ComplexSymMatrix::operator-(const ComplexSymMatrix& rhs) const {
    ComplexSymMatrix out;
    out.data_ = data_ - rhs.data_;
    return out;
}

ComplexSymMatrix ComplexSymMatrix::operator*(cplx s) const {
    ComplexSymMatrix out;
    out.data_ = data_ * s;
    return out;
}

double max_abs(const MatrixC& a) {
    double out = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) out = std::max(out, std::abs(a.data()[k]));
    return out;
}

cplx sqrt_upper(cplx w) {
    cplx r = std::sqrt(w);
    // principal root has Re r >= 0; flipping keeps r^2 and fixes the half plane
    if (r.imag() < 0.0) r = -r;
    return r;
}

SymInverter::SymInverter(int m) : lu_(m, m), perm_(m) {}

void SymInverter::invert(MatrixC& a, double* drift) {
    const int m = static_cast<int>(a.rows());
    const double scale = max_abs(a);
    const double floor = tolerance::pivot_floor * scale;
    if (m == 1) {
        if (!(std::abs(a(0, 0)) > floor) || scale == 0.0) throw SingularMatrix("sym_inverse: zero pivot");
        a(0, 0) = 1.0 / a(0, 0);
        if (drift) *drift = 0.0;
        return;
    }
    if (lu_.rows() != m) {
        lu_.resize(m, m);
        perm_.resize(m);
    }
    lu_ = a;
    for (int k = 0; k < m; ++k) perm_[k] = k;

    for (int col = 0; col < m; ++col) {
        int piv = col;
        double best = std::abs(lu_(col, col));
        for (int r = col + 1; r < m; ++r) {
            const double v = std::abs(lu_(r, col));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (!(best > floor) || scale == 0.0) {
            std::ostringstream msg;
            msg << "sym_inverse: pivot " << best << " below floor " << floor;
            throw SingularMatrix(msg.str());
        }
        if (piv != col) {
            lu_.row(col).swap(lu_.row(piv));
            std::swap(perm_[col], perm_[piv]);
        }
        const cplx inv_pivot = 1.0 / lu_(col, col);
        for (int r = col + 1; r < m; ++r) {
            const cplx f = lu_(r, col) * inv_pivot;
            lu_(r, col) = f;
            for (int c = col + 1; c < m; ++c) lu_(r, c) -= f * lu_(col, c);
        }
    }

    // Solve L U x = P e_c for every column c.
    for (int c = 0; c < m; ++c) {
        for (int r = 0; r < m; ++r) {
            cplx s = (perm_[r] == c) ? cplx(1.0) : cplx(0.0);
            for (int q = 0; q < r; ++q) s -= lu_(r, q) * a(q, c);
            a(r, c) = s;
        }
        for (int r = m - 1; r >= 0; --r) {
            cplx s = a(r, c);
            for (int q = r + 1; q < m; ++q) s -= lu_(r, q) * a(q, c);
            a(r, c) = s / lu_(r, r);
        }
    }

    double d = 0.0;
    for (int j = 0; j < m; ++j)
        for (int k = j + 1; k < m; ++k) {
            d = std::max(d, std::abs(a(j, k) - a(k, j)));
            const cplx avg = 0.5 * (a(j, k) + a(k, j));
            a(j, k) = avg;
            a(k, j) = avg;
        }
    if (drift) *drift = d;
}

ComplexSymMatrix sym_inverse(const ComplexSymMatrix& m) {
    MatrixC a = m.dense();
    SymInverter inv(m.dim());
    inv.invert(a);
    return ComplexSymMatrix::from_dense(a);
}

double min_imag_eigenvalue(const MatrixC& m) {
    if (m.rows() == 1) return m(0, 0).imag();
    const MatrixR im = 0.5 * (m.imag() + m.imag().transpose());
    Eigen::SelfAdjointEigenSolver<MatrixR> es(im, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double min_imag_eigenvalue(const ComplexSymMatrix& m) { return min_imag_eigenvalue(m.dense()); }

double spectral_norm(const MatrixC& m) {
    if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
    Eigen::JacobiSVD<MatrixC> svd(m);
    return svd.singularValues()(0);
}

bool is_symmetric(const MatrixR& a, double tol) {
    if (a.rows() != a.cols()) return false;
    for (Eigen::Index j = 0; j < a.rows(); ++j)
        for (Eigen::Index k = j + 1; k < a.cols(); ++k)
            if (std::abs(a(j, k) - a(k, j)) > tol) return false;
    return true;
}

}  // namespace bethe
