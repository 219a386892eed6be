#include "bethestrip/free_solver.hpp"

#include <cmath>
#include <sstream>

#include "bethestrip/errors.hpp"

namespace bethe {

namespace {

void require_strict_interior(double E, const BetheStripModel& model, const char* who) {
    const double s = std::sqrt(static_cast<double>(model.K()));
    for (double a : model.a()) {
        if (!(std::abs(E - a) < s)) {
            std::ostringstream msg;
            msg << who << ": E=" << E << " is not strictly inside the band around a=" << a;
            throw OutOfBand(msg.str());
        }
    }
}

}  // namespace

ComplexSymMatrix a_e_matrix(double E, const BetheStripModel& model) {
    const double K = model.K();
    const double s = std::sqrt(K);
    std::vector<cplx> diag;
    for (double a : model.a()) {
        const double d = E - a;
        if (std::abs(d) > s) {
            std::ostringstream msg;
            msg << "a_e_matrix: |E - a_k| = " << std::abs(d) << " exceeds sqrt(K)";
            throw OutOfBand(msg.str());
        }
        const double root = std::sqrt(std::max(0.0, K - d * d));
        diag.emplace_back(d / (2.0 * K), -root / (2.0 * K));
    }
    return ComplexSymMatrix::diagonal(diag);
}

ComplexSymMatrix free_forward_green(const SpectralPoint& z, const BetheStripModel& model) {
    if (z.on_axis()) require_strict_interior(z.E, model, "free_forward_green");
    const double K = model.K();
    std::vector<cplx> diag;
    for (double a : model.a()) {
        const cplx w = z.z() - a;
        diag.push_back((2.0 / K) * (-w + sqrt_upper(w * w - K)));
    }
    return ComplexSymMatrix::diagonal(diag);
}

ComplexSymMatrix free_forward_green_boundary(double E, const BetheStripModel& model) {
    const double K = model.K();
    const double s = std::sqrt(K);
    std::vector<cplx> diag;
    for (double a : model.a()) {
        const double d = E - a;
        if (std::abs(d) < s) {
            diag.emplace_back(-(2.0 / K) * d, (2.0 / K) * std::sqrt(K - d * d));
        } else if (std::abs(d) > s) {
            // decaying root; the limit from above picks sign(d)
            const double root = std::sqrt(d * d - K);
            diag.emplace_back((2.0 / K) * (-d + std::copysign(root, d)), 0.0);
        } else {
            throw OutOfBand("free_forward_green_boundary: E sits on a band edge");
        }
    }
    return ComplexSymMatrix::diagonal(diag);
}

ComplexSymMatrix free_full_green(const SpectralPoint& z, const BetheStripModel& model) {
    const ComplexSymMatrix g = free_forward_green(z, model);
    const double factor = (model.K() + 1) / 4.0;
    std::vector<cplx> diag;
    for (int k = 0; k < model.m(); ++k) diag.push_back(1.0 / (model.a()[k] - z.z() - factor * g(k, k)));
    return ComplexSymMatrix::diagonal(diag);
}

cplx zeta_free(const SpectralPoint& z, const BetheStripModel& model, const RealSymMatrix& M) {
    const ComplexSymMatrix g = free_forward_green(z, model);
    cplx tr = 0.0;
    for (int k = 0; k < model.m(); ++k) tr += g(k, k) * M(k, k);
    return std::exp(cplx(0.0, 0.25) * tr);
}

cplx xi_free(const SpectralPoint& z, const BetheStripModel& model, const RealSymMatrix& Mp,
             const RealSymMatrix& Mm) {
    return zeta_free(z, model, Mp) * std::conj(zeta_free(z, model, Mm));
}

FreeSolution free_solution(const SpectralPoint& z, const BetheStripModel& model) {
    FreeSolution out{z, free_forward_green(z, model), free_full_green(z, model), std::nullopt};
    if (z.on_axis()) out.ae = a_e_matrix(z.E, model);
    return out;
}

}  // namespace bethe
