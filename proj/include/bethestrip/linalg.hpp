#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

#include <Eigen/Core>

namespace bethe {

using cplx = std::complex<double>;
using MatrixC = Eigen::MatrixXcd;
using MatrixR = Eigen::MatrixXd;

// Real symmetric m x m matrices (potentials V, test matrices M) are carried as
// plain Eigen matrices; symmetry is enforced at construction sites.
using RealSymMatrix = MatrixR;

namespace tolerance {
inline constexpr double solve_residual = 1e-10;  // |M N - I|_max relative to |M|_max
inline constexpr double pivot_floor = 1e-14;     // relative to |M|_max
inline constexpr double herglotz = 1e-10;        // admissible negative Im eigenvalue
}  // namespace tolerance

inline constexpr int max_width = 16;

// A point z = E + i*eta of the closed upper half plane.
struct SpectralPoint {
    double E = 0.0;
    double eta = 0.0;

    SpectralPoint() = default;
    SpectralPoint(double energy, double imag);

    cplx z() const { return {E, eta}; }
    bool on_axis() const { return eta == 0.0; }
};

// Dense complex symmetric (not Hermitian) matrix: entries(j, k) == entries(k, j).
class ComplexSymMatrix {
public:
    ComplexSymMatrix() = default;
    explicit ComplexSymMatrix(int m);

    static ComplexSymMatrix identity(int m);
    static ComplexSymMatrix diagonal(const std::vector<cplx>& diag);
    static ComplexSymMatrix scalar(cplx value) { return diagonal({value}); }
    // Averages `a` with its transpose; throws ConfigError on non-finite input.
    static ComplexSymMatrix symmetrize(const MatrixC& a);
    // Requires exact symmetry.
    static ComplexSymMatrix from_dense(const MatrixC& a);
    static ComplexSymMatrix from_rows(std::initializer_list<std::initializer_list<cplx>> rows);

    int dim() const { return static_cast<int>(data_.rows()); }
    cplx operator()(int j, int k) const { return data_(j, k); }
    void set(int j, int k, cplx value);
    const MatrixC& dense() const { return data_; }

    double max_norm() const;
    bool is_diagonal(double tol = 0.0) const;
    std::vector<cplx> diag() const;
    cplx trace() const { return data_.trace(); }

    ComplexSymMatrix conj() const;
    ComplexSymMatrix operator+(const ComplexSymMatrix& rhs) const;
    ComplexSymMatrix operator-(const ComplexSymMatrix& rhs) const;
    ComplexSymMatrix operator*(cplx s) const;
    friend ComplexSymMatrix operator*(cplx s, const ComplexSymMatrix& a) { return a * s; }

private:
    MatrixC data_;
};

// Largest |a_jk|.
double max_abs(const MatrixC& a);

// r with r^2 = w and Im r > 0 off the non-negative real axis; +sqrt(w) for real w >= 0.
cplx sqrt_upper(cplx w);

// Inverse by LU with partial pivoting followed by symmetrization. Throws
// SingularMatrix when a pivot drops below pivot_floor * |M|_max.
ComplexSymMatrix sym_inverse(const ComplexSymMatrix& m);

// In-place variant for hot loops: overwrites `a` with its symmetrized inverse.
// `drift`, when given, receives max|N - N^T| before symmetrization.
class SymInverter {
public:
    explicit SymInverter(int m);
    void invert(MatrixC& a, double* drift = nullptr);

private:
    MatrixC lu_;
    std::vector<int> perm_;
};

// Smallest eigenvalue of the real symmetric matrix (M - conj M) / 2i.
double min_imag_eigenvalue(const ComplexSymMatrix& m);
double min_imag_eigenvalue(const MatrixC& m);

// Largest singular value.
double spectral_norm(const MatrixC& m);

bool is_symmetric(const MatrixR& a, double tol = 0.0);

}  // namespace bethe
