#include "bethestrip/susy_spectrum.hpp"

#include <cmath>
#include <sstream>

#include "bethestrip/errors.hpp"
#include "bethestrip/free_solver.hpp"

namespace bethe {

namespace {

constexpr std::size_t max_basis_size = 500;

void require_inside(double E, const BetheStripModel& model, const char* who) {
    if (!interval_iak(model).contains(E)) {
        std::ostringstream msg;
        msg << who << ": E=" << E << " is not strictly inside I_{A,K}";
        throw OutOfBand(msg.str());
    }
}

void fill_degree(int p, int slot, int remaining, std::vector<int>& cur, int m, std::vector<MonomialIndex>& out) {
    if (slot == p - 1) {
        cur[slot] = remaining;
        out.push_back({m, cur});
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        cur[slot] = e;
        fill_degree(p, slot + 1, remaining - e, cur, m, out);
    }
    cur[slot] = 0;
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

int slot_of(int m, int j, int k) {
    if (j > k) std::swap(j, k);
    // row-major upper triangle
    return j * m - j * (j - 1) / 2 + (k - j);
}

// Truncated power series in the slot parameters tau_p, coefficients indexed
// like enumerate_indices(m, d).
class JetSpace {
public:
    using Jet = std::vector<cplx>;

    JetSpace(int m, int d) : m_(m), d_(d), basis_(enumerate_indices(m, d)) {
        for (std::size_t a = 0; a < basis_.size(); ++a) index_[basis_[a].exps] = static_cast<int>(a);
        const int p = slot_count(m);
        times_var_.assign(p, std::vector<int>(basis_.size(), -1));
        for (std::size_t a = 0; a < basis_.size(); ++a) {
            if (basis_[a].degree() >= d) continue;
            for (int q = 0; q < p; ++q) {
                auto e = basis_[a].exps;
                ++e[q];
                times_var_[q][a] = index_.at(e);
            }
        }
        for (std::size_t a = 0; a < basis_.size(); ++a)
            for (std::size_t b = 0; b < basis_.size(); ++b) {
                if (basis_[a].degree() + basis_[b].degree() > d) continue;
                auto e = basis_[a].exps;
                for (int q = 0; q < p; ++q) e[q] += basis_[b].exps[q];
                products_.push_back({static_cast<int>(a), static_cast<int>(b), index_.at(e)});
            }
    }

    std::size_t size() const { return basis_.size(); }
    const std::vector<MonomialIndex>& basis() const { return basis_; }
    Jet zero() const { return Jet(basis_.size(), 0.0); }
    Jet one() const {
        Jet j = zero();
        j[0] = 1.0;
        return j;
    }

    Jet mul(const Jet& x, const Jet& y) const {
        Jet out = zero();
        for (const auto& [a, b, c] : products_)
            if (x[a] != 0.0 && y[b] != 0.0) out[c] += x[a] * y[b];
        return out;
    }

    // x * coeff * tau_q
    void add_times_var(const Jet& x, int q, cplx coeff, Jet& out) const {
        for (std::size_t a = 0; a < x.size(); ++a) {
            const int c = times_var_[q][a];
            if (c >= 0 && x[a] != 0.0) out[c] += coeff * x[a];
        }
    }

private:
    struct Triple {
        int a, b, c;
    };
    int m_, d_;
    std::vector<MonomialIndex> basis_;
    std::map<std::vector<int>, int> index_;
    std::vector<std::vector<int>> times_var_;
    std::vector<Triple> products_;
};

}  // namespace

MonomialIndex MonomialIndex::zero(int m) { return {m, std::vector<int>(slot_count(m), 0)}; }

int MonomialIndex::degree() const {
    int s = 0;
    for (int e : exps) s += e;
    return s;
}

int MonomialIndex::at(int j, int k) const {
    if (j > k) return 0;
    return exps[slot_of(m, j, k)];
}

std::string MonomialIndex::label() const {
    std::ostringstream out;
    for (std::size_t q = 0; q < exps.size(); ++q) out << (q ? "-" : "") << exps[q];
    return out.str();
}

int slot_count(int m) { return m * (m + 1) / 2; }

std::vector<MonomialIndex> enumerate_indices(int m, int max_degree) {
    if (m < 1) throw ConfigError("enumerate_indices: m must be >= 1");
    if (max_degree < 0) throw ConfigError("enumerate_indices: degree must be >= 0");
    const int p = slot_count(m);
    std::vector<MonomialIndex> out;
    std::vector<int> cur(p, 0);
    for (int deg = 0; deg <= max_degree; ++deg) fill_degree(p, 0, deg, cur, m, out);
    const double expected = binomial(p + max_degree, max_degree);
    if (static_cast<double>(out.size()) != expected) throw VerificationFailure("enumerate_indices: count mismatch");
    return out;
}

cplx lambda_j(double E, const BetheStripModel& model, const MonomialIndex& J) {
    require_inside(E, model, "lambda_j");
    if (J.m != model.m()) throw ConfigError("lambda_j: index width does not match model");
    const ComplexSymMatrix ae = a_e_matrix(E, model);
    cplx out = 1.0;
    for (int j = 0; j < model.m(); ++j)
        for (int k = j; k < model.m(); ++k) {
            const int e = J.at(j, k);
            if (e > 0) out *= std::pow(4.0 * ae(j, j) * ae(k, k), e);
        }
    return out;
}

ModulusReport verify_modulus(double E, const BetheStripModel& model, int max_degree) {
    ModulusReport report;
    report.min_distance = std::numeric_limits<double>::infinity();
    const double K = model.K();
    for (const auto& J : enumerate_indices(model.m(), max_degree)) {
        const cplx l = lambda_j(E, model, J);
        const double err = std::abs(std::abs(l) - std::pow(K, -J.degree()));
        const double dist = std::abs(l - 1.0 / K);
        if (err > 1e-12 || !(dist > 0.0)) {
            std::ostringstream msg;
            msg << "verify_modulus: J=" << J.label() << " |lambda|-K^-|J| = " << err << ", |lambda-1/K| = " << dist;
            throw VerificationFailure(msg.str());
        }
        report.max_modulus_error = std::max(report.max_modulus_error, err);
        report.min_distance = std::min(report.min_distance, dist);
        ++report.count;
    }
    return report;
}

double gap_kce(double E, const BetheStripModel& model, int max_degree) {
    require_inside(E, model, "gap_kce");
    if (max_degree < 0) throw ConfigError("gap_kce: degree must be >= 0");
    const double K = model.K();
    double gap = max_degree == 0 ? std::numeric_limits<double>::infinity() : 1.0 - 1.0 / K;
    for (const auto& J : enumerate_indices(model.m(), max_degree))
        gap = std::min(gap, std::abs(K * lambda_j(E, model, J) - 1.0));
    return gap;
}

double gap_tensor(double E, const BetheStripModel& model, int max_degree) {
    require_inside(E, model, "gap_tensor");
    if (max_degree < 0) throw ConfigError("gap_tensor: degree must be >= 0");
    const double K = model.K();
    const auto basis = enumerate_indices(model.m(), max_degree);
    std::vector<cplx> lambdas;
    for (const auto& J : basis) lambdas.push_back(lambda_j(E, model, J));
    double gap = max_degree == 0 ? std::numeric_limits<double>::infinity() : 1.0 - 1.0 / K;
    for (std::size_t a = 0; a < basis.size(); ++a)
        for (std::size_t b = 0; b < basis.size(); ++b) {
            if (basis[a].degree() + basis[b].degree() > max_degree) continue;
            gap = std::min(gap, std::abs(K * lambdas[a] * std::conj(lambdas[b]) - 1.0));
        }
    return gap;
}

double min_distance_to_inverse_k(double E, const BetheStripModel& model, int max_degree) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& J : enumerate_indices(model.m(), max_degree))
        d = std::min(d, std::abs(lambda_j(E, model, J) - 1.0 / model.K()));
    return d;
}

int PolyGaussSymbol::degree() const {
    int d = 0;
    for (const auto& [J, c] : coeffs)
        if (c != 0.0) d = std::max(d, J.degree());
    return d;
}

PolyGaussSymbol working_symbol(double E, const BetheStripModel& model, const MonomialIndex& J, cplx coeff) {
    PolyGaussSymbol s;
    s.m = model.m();
    s.gauss = a_e_matrix(E, model) * cplx(-1.0);
    s.coeffs[J] = coeff;
    return s;
}

ComplexSymMatrix generating_inverse(double E, const BetheStripModel& model) {
    const ComplexSymMatrix ae = a_e_matrix(E, model);
    std::vector<cplx> diag;
    for (int k = 0; k < model.m(); ++k) diag.push_back(1.0 / (model.a()[k] - E + double(model.K()) * ae(k, k)));
    return ComplexSymMatrix::diagonal(diag);
}

OperatorMatrix build_ce_matrix(double E, const BetheStripModel& model, int max_degree) {
    require_inside(E, model, "build_ce_matrix");
    if (max_degree < 0) throw ConfigError("build_ce_matrix: degree must be >= 0");
    const int m = model.m();
    const int p = slot_count(m);
    if (binomial(p + max_degree, max_degree) > static_cast<double>(max_basis_size))
        throw SizeOverflow("build_ce_matrix: basis exceeds 500 elements");

    const JetSpace space(m, max_degree);
    const std::size_t n = space.size();
    const ComplexSymMatrix binv = generating_inverse(E, model);

    // (B - M)^{-1} - B^{-1} = sum_{s>=1} B^{-1} (M B^{-1})^s with
    // M = sum_p tau_p E_p, Tr(E_p X) = X_p.
    auto weight = [](int l, int k) { return l == k ? 1.0 : 0.5; };
    std::vector<JetSpace::Jet> N(m * m, space.zero()), P(m * m, space.zero());
    if (max_degree >= 1) {
        const JetSpace::Jet unit = space.one();
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                space.add_times_var(unit, slot_of(m, j, k), binv(j, j) * weight(j, k) * binv(k, k), P[j * m + k]);
    }
    for (int s = 1; s <= max_degree; ++s) {
        for (int q = 0; q < m * m; ++q)
            for (std::size_t a = 0; a < n; ++a) N[q][a] += P[q][a];
        if (s == max_degree) break;
        std::vector<JetSpace::Jet> next(m * m, space.zero());
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l)
                    space.add_times_var(P[j * m + l], slot_of(m, l, k), weight(l, k) * binv(k, k), next[j * m + k]);
        P.swap(next);
    }

    // exp((i/4) Tr(N X)) = prod_p exp(X_p u_p),  u_p = (i/4) w_p N_p
    std::vector<JetSpace::Jet> u(p);
    for (int j = 0; j < m; ++j)
        for (int k = j; k < m; ++k) {
            const double w = j == k ? 1.0 : 2.0;
            JetSpace::Jet v = N[j * m + k];
            for (auto& c : v) c *= cplx(0.0, 0.25 * w);
            u[slot_of(m, j, k)] = std::move(v);
        }
    std::vector<std::vector<JetSpace::Jet>> powers(p);
    for (int q = 0; q < p; ++q) {
        powers[q].push_back(space.one());
        for (int e = 1; e <= max_degree; ++e) powers[q].push_back(space.mul(powers[q].back(), u[q]));
    }

    OperatorMatrix out;
    out.basis = space.basis();
    out.entries = MatrixC::Zero(n, n);
    for (std::size_t row = 0; row < n; ++row) {
        const auto& Jp = out.basis[row];
        JetSpace::Jet prod = space.one();
        double denom = 1.0;
        for (int q = 0; q < p; ++q) {
            if (Jp.exps[q] == 0) continue;
            prod = space.mul(prod, powers[q][Jp.exps[q]]);
            denom *= factorial(Jp.exps[q]);
        }
        for (std::size_t col = 0; col < n; ++col) {
            const auto& J = out.basis[col];
            double jfact = 1.0;
            for (int e : J.exps) jfact *= factorial(e);
            // left side: exp(i Tr(M X)) = sum_J i^{|J|} tau^J X^J / J!
            const cplx scale = jfact / std::pow(cplx(0.0, 1.0), J.degree());
            out.entries(row, col) = scale * prod[col] / denom;
        }
    }

    for (std::size_t row = 0; row < n; ++row)
        for (std::size_t col = 0; col < n; ++col)
            if (out.basis[row].degree() > out.basis[col].degree())
                out.triangularity_residual = std::max(out.triangularity_residual, std::abs(out.entries(row, col)));
    for (std::size_t k = 0; k < n; ++k)
        out.diagonal_error =
            std::max(out.diagonal_error, std::abs(out.entries(k, k) - lambda_j(E, model, out.basis[k])));
    if (out.diagonal_error > 1e-8) {
        std::ostringstream msg;
        msg << "build_ce_matrix: diagonal deviates from lambda_J by " << out.diagonal_error;
        throw VerificationFailure(msg.str());
    }
    return out;
}

PolyGaussSymbol ce_apply_symbol(double E, const BetheStripModel& model, const PolyGaussSymbol& s, int max_degree) {
    require_inside(E, model, "ce_apply_symbol");
    if (s.m != model.m()) throw ConfigError("ce_apply_symbol: symbol width does not match model");
    const ComplexSymMatrix working = a_e_matrix(E, model) * cplx(-1.0);
    if (s.gauss.dim() != model.m() || max_abs(s.gauss.dense() - working.dense()) > 1e-12)
        throw ConfigError("ce_apply_symbol: symbol must carry the working Gaussian -A_E");
    if (s.degree() > max_degree) throw TruncationOverflow("ce_apply_symbol: symbol degree exceeds truncation");

    const OperatorMatrix op = build_ce_matrix(E, model, max_degree);
    std::map<MonomialIndex, std::size_t> pos;
    for (std::size_t k = 0; k < op.basis.size(); ++k) pos[op.basis[k]] = k;
    Eigen::VectorXcd in = Eigen::VectorXcd::Zero(op.basis.size());
    for (const auto& [J, c] : s.coeffs) in(pos.at(J)) += c;
    const Eigen::VectorXcd image = op.entries * in;

    PolyGaussSymbol out;
    out.m = s.m;
    out.gauss = working;
    for (std::size_t k = 0; k < op.basis.size(); ++k)
        if (image(k) != 0.0) out.coeffs[op.basis[k]] = image(k);
    return out;
}

}  // namespace bethe
