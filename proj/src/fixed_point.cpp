#include "bethestrip/fixed_point.hpp"

#include <cmath>
#include <sstream>
#include <variant>

#include <Eigen/LU>

#include "bethestrip/errors.hpp"
#include "bethestrip/free_solver.hpp"

namespace bethe {

namespace {

MatrixC shift_matrix(const BetheStripModel& model, const SpectralPoint& z) {
    MatrixC s = a_matrix(model).cast<cplx>();
    if (model.lambda() != 0.0) s += model.lambda() * std::get<PointMass>(model.ensemble()).v0.cast<cplx>();
    s.diagonal().array() -= z.z();
    return s;
}

}  // namespace

FixedPointProblem::FixedPointProblem(BetheStripModel model_, SpectralPoint z_, ComplexSymMatrix initial_)
    : model(std::move(model_)), z(z_), initial(std::move(initial_)) {
    if (!model.is_deterministic())
        throw ConfigError("fixed-point solver needs point-mass disorder or lambda == 0");
    if (initial.dim() != model.m()) throw ConfigError("initial guess has wrong size");
}

std::vector<int> upper_index_pairs(int m) {
    std::vector<int> out;
    for (int j = 0; j < m; ++j)
        for (int k = j; k < m; ++k) {
            out.push_back(j);
            out.push_back(k);
        }
    return out;
}

MatrixC upper_vector(const MatrixC& a) {
    const int m = static_cast<int>(a.rows());
    MatrixC v(m * (m + 1) / 2, 1);
    int p = 0;
    for (int j = 0; j < m; ++j)
        for (int k = j; k < m; ++k) v(p++, 0) = a(j, k);
    return v;
}

ComplexSymMatrix from_upper_vector(const MatrixC& v, int m) {
    ComplexSymMatrix out(m);
    int p = 0;
    for (int j = 0; j < m; ++j)
        for (int k = j; k < m; ++k) out.set(j, k, v(p++, 0));
    return out;
}

ComplexSymMatrix fixed_point_map(const BetheStripModel& model, const SpectralPoint& z, const ComplexSymMatrix& G) {
    const MatrixC M = shift_matrix(model, z) - (model.K() / 4.0) * G.dense();
    return sym_inverse(ComplexSymMatrix::symmetrize(M));
}

double fixed_point_residual_norm(const BetheStripModel& model, const SpectralPoint& z, const ComplexSymMatrix& G) {
    const MatrixC M = shift_matrix(model, z) - (model.K() / 4.0) * G.dense();
    const MatrixC inv = M.partialPivLu().inverse();
    return max_abs(G.dense() - inv);
}

MatrixC fixed_point_jacobian(const BetheStripModel& model, const SpectralPoint& z, const ComplexSymMatrix& G) {
    const int m = model.m();
    const MatrixC F = fixed_point_map(model, z, G).dense();
    const auto pairs = upper_index_pairs(m);
    const int p = static_cast<int>(pairs.size() / 2);
    MatrixC J(p, p);
    const double c = model.K() / 4.0;
    for (int col = 0; col < p; ++col) {
        MatrixC E = MatrixC::Zero(m, m);
        E(pairs[2 * col], pairs[2 * col + 1]) = 1.0;
        E(pairs[2 * col + 1], pairs[2 * col]) = 1.0;
        // d(M^{-1}) = -M^{-1} dM M^{-1} with dM = -(K/4) dG
        const MatrixC dR = E - c * F * E * F;
        J.col(col) = upper_vector(dR);
    }
    return J;
}

SolveReport picard_solve(const FixedPointProblem& problem, double theta, double tol, int max_iter) {
    if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
    SolveReport report;
    report.method = SolveReport::Method::picard;
    report.eta = problem.z.eta;
    ComplexSymMatrix G = problem.initial;
    for (int it = 0; it <= max_iter; ++it) {
        const ComplexSymMatrix F = fixed_point_map(problem.model, problem.z, G);
        const double r = max_abs(G.dense() - F.dense());
        report.residual_history.push_back(r);
        if (r <= tol) {
            report.solution = G;
            report.residual = fixed_point_residual_norm(problem.model, problem.z, G);
            report.iterations = it;
            report.converged = report.residual <= tol;
            if (report.converged) return report;
        }
        G = ComplexSymMatrix::symmetrize((1.0 - theta) * G.dense() + theta * F.dense());
    }
    throw NoConvergence("picard_solve: no convergence within max_iter", max_iter);
}

SolveReport newton_solve(const FixedPointProblem& problem, double tol, int max_iter) {
    SolveReport report;
    report.method = SolveReport::Method::newton;
    report.eta = problem.z.eta;
    const int m = problem.model.m();
    ComplexSymMatrix G = problem.initial;
    for (int it = 0; it <= max_iter; ++it) {
        const ComplexSymMatrix F = fixed_point_map(problem.model, problem.z, G);
        const MatrixC R = G.dense() - F.dense();
        const double r = max_abs(R);
        report.residual_history.push_back(r);
        if (r <= tol) {
            report.solution = G;
            report.residual = fixed_point_residual_norm(problem.model, problem.z, G);
            report.iterations = it;
            report.converged = report.residual <= tol;
            if (report.converged) return report;
        }
        if (it == max_iter) break;
        const MatrixC J = fixed_point_jacobian(problem.model, problem.z, G);
        Eigen::PartialPivLU<MatrixC> lu(J);
        if (!(lu.rcond() > 1e-13)) {
            std::ostringstream msg;
            msg << "newton_solve: Jacobian reciprocal condition " << lu.rcond() << " at eta=" << problem.z.eta;
            throw SingularJacobian(msg.str());
        }
        const MatrixC step = lu.solve(upper_vector(R));
        G = G - from_upper_vector(step, m);
    }
    throw NoConvergence("newton_solve: no convergence within max_iter", max_iter);
}

SolveReport hybrid_solve(const FixedPointProblem& problem, double theta, double switch_at, double tol) {
    SolveReport warm = picard_solve(problem, theta, std::max(switch_at, tol));
    if (warm.residual <= tol) return warm;
    FixedPointProblem next(problem.model, problem.z, warm.solution);
    SolveReport out = newton_solve(next, tol);
    out.iterations += warm.iterations;
    out.residual_history.insert(out.residual_history.begin(), warm.residual_history.begin(),
                                warm.residual_history.end());
    return out;
}

std::vector<SolveReport> continuation_to_boundary(const BetheStripModel& model, double E,
                                                  const ContinuationOptions& options) {
    if (!(options.eta_start > 0.0) || !(options.eta_factor > 0.0 && options.eta_factor < 1.0) ||
        !(options.eta_min > 0.0))
        throw ConfigError("continuation needs eta_start > 0, eta_factor in (0,1), eta_min > 0");
    std::vector<double> etas;
    for (double eta = options.eta_start; eta >= options.eta_min; eta *= options.eta_factor) etas.push_back(eta);
    etas.push_back(0.0);

    std::vector<SolveReport> reports;
    const SpectralPoint first(E, etas.front());
    ComplexSymMatrix guess = free_forward_green(first, model);
    for (std::size_t k = 0; k < etas.size(); ++k) {
        const SpectralPoint z(E, etas[k]);
        SolveReport rep;
        try {
            FixedPointProblem problem(model, z, guess);
            rep = k == 0 ? hybrid_solve(problem, 0.5, 1e-3, options.tol) : newton_solve(problem, options.tol);
        } catch (const SingularJacobian& e) {
            throw ContinuationBreakdown(std::string("continuation: ") + e.what(), etas[k]);
        } catch (const NoConvergence& e) {
            throw ContinuationBreakdown(std::string("continuation: ") + e.what(), etas[k]);
        } catch (const SingularMatrix& e) {
            throw ContinuationBreakdown(std::string("continuation: ") + e.what(), etas[k]);
        }
        const double im = min_imag_eigenvalue(rep.solution);
        const bool boundary = etas[k] == 0.0;
        const double floor = boundary ? 1e-8 * std::max(1.0, rep.solution.max_norm()) : -tolerance::herglotz;
        if (!(boundary ? im > floor : im >= floor)) {
            std::ostringstream msg;
            msg << "continuation lost the Herglotz branch at eta=" << etas[k] << " (min Im eigenvalue " << im << ")";
            throw ContinuationBreakdown(msg.str(), etas[k]);
        }
        guess = rep.solution;
        reports.push_back(std::move(rep));
    }
    return reports;
}

}  // namespace bethe
