#include "bethestrip/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "bethestrip/errors.hpp"

namespace bethe {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::vector<double> parse_row(const std::string& row, char sep) {
    std::vector<double> out;
    std::stringstream ss(row);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse number '" + item + "'");
        }
        if (item.find_first_not_of(" \t", used) != std::string::npos)
            throw ConfigError("trailing characters in number '" + item + "'");
        out.push_back(v);
    }
    return out;
}

RealSymMatrix rows_to_matrix(const std::vector<std::vector<double>>& rows) {
    const auto m = static_cast<Eigen::Index>(rows.size());
    if (m == 0) throw ConfigError("point-mass matrix is empty");
    RealSymMatrix v(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        if (static_cast<Eigen::Index>(rows[j].size()) != m)
            throw ConfigError("point-mass matrix must be square");
        for (Eigen::Index k = 0; k < m; ++k) v(j, k) = rows[j][k];
    }
    if (!is_symmetric(v)) throw ConfigError("point-mass matrix must be symmetric");
    return v;
}

RealSymMatrix parse_point_matrix(const std::string& body) {
    std::ifstream file(body);
    std::vector<std::vector<double>> rows;
    if (file) {
        std::string line;
        while (std::getline(file, line)) {
            std::replace(line.begin(), line.end(), ',', ' ');
            std::replace(line.begin(), line.end(), '\t', ' ');
            auto row = parse_row(line, ' ');
            if (!row.empty()) rows.push_back(std::move(row));
        }
    } else {
        std::stringstream ss(body);
        std::string row;
        while (std::getline(ss, row, ';')) rows.push_back(parse_row(row, ','));
    }
    return rows_to_matrix(rows);
}

double scalar_characteristic(DiagonalIID::Law law, double t) {
    switch (law) {
        case DiagonalIID::Law::uniform:
            return t == 0.0 ? 1.0 : std::sin(t) / t;
        case DiagonalIID::Law::gauss:
            return std::exp(-0.5 * t * t);
        case DiagonalIID::Law::bernoulli:
            return std::cos(t);
    }
    return 1.0;
}

std::vector<RealInterval> merge(std::vector<RealInterval> bands) {
    std::sort(bands.begin(), bands.end(), [](const auto& x, const auto& y) { return x.lo < y.lo; });
    std::vector<RealInterval> out;
    for (const auto& b : bands) {
        if (!out.empty() && b.lo <= out.back().hi)
            out.back().hi = std::max(out.back().hi, b.hi);
        else
            out.push_back(b);
    }
    return out;
}

}  // namespace

int ensemble_dim(const DisorderEnsemble& ensemble) {
    return std::visit(overloaded{[](const PointMass& p) { return static_cast<int>(p.v0.rows()); },
                                 [](const DiagonalIID& d) { return d.m; },
                                 [](const GOE& g) { return g.m; }},
                      ensemble);
}

std::string ensemble_name(const DisorderEnsemble& ensemble) {
    return std::visit(overloaded{[](const PointMass&) { return std::string("point"); },
                                 [](const DiagonalIID& d) {
                                     switch (d.law) {
                                         case DiagonalIID::Law::uniform: return std::string("diag:uniform");
                                         case DiagonalIID::Law::gauss: return std::string("diag:gauss");
                                         case DiagonalIID::Law::bernoulli: return std::string("diag:bernoulli");
                                     }
                                     return std::string("diag");
                                 },
                                 [](const GOE&) { return std::string("goe"); }},
                      ensemble);
}

bool has_bounded_support(const DisorderEnsemble& ensemble) {
    if (std::holds_alternative<GOE>(ensemble)) return false;
    if (const auto* d = std::get_if<DiagonalIID>(&ensemble)) return d->law != DiagonalIID::Law::gauss;
    return true;
}

DisorderEnsemble parse_ensemble(const std::string& spec, int m) {
    if (m < 1 || m > max_width) throw ConfigError("ensemble width out of range");
    if (spec.rfind("point:", 0) == 0) {
        RealSymMatrix v = parse_point_matrix(spec.substr(6));
        if (v.rows() != m) throw ConfigError("point-mass matrix size does not match m");
        return PointMass{v};
    }
    if (spec == "diag:uniform") return DiagonalIID{DiagonalIID::Law::uniform, m};
    if (spec == "diag:gauss") return DiagonalIID{DiagonalIID::Law::gauss, m};
    if (spec == "diag:bernoulli") return DiagonalIID{DiagonalIID::Law::bernoulli, m};
    if (spec == "goe") return GOE{m};
    throw ConfigError("unknown ensemble '" + spec + "'");
}

BetheStripModel::BetheStripModel(int K, std::vector<double> a, double lambda, DisorderEnsemble ensemble)
    : K_(K), a_(std::move(a)), lambda_(lambda), ensemble_(std::move(ensemble)) {
    if (K_ < 2) throw ConfigError("connectivity K must be >= 2");
    if (a_.empty() || static_cast<int>(a_.size()) > max_width)
        throw ConfigError("width m must be in [1, 16]");
    for (double v : a_)
        if (!std::isfinite(v)) throw ConfigError("diagonal of A must be finite");
    if (!std::is_sorted(a_.begin(), a_.end())) throw ConfigError("diagonal of A must be ascending");
    if (!std::isfinite(lambda_)) throw ConfigError("lambda must be finite");
    if (ensemble_dim(ensemble_) != m()) throw ConfigError("ensemble width does not match m");
    if (const auto* p = std::get_if<PointMass>(&ensemble_)) {
        if (!p->v0.allFinite() || !is_symmetric(p->v0)) throw ConfigError("point mass must be finite and symmetric");
    }
}

bool BetheStripModel::is_deterministic() const {
    return lambda_ == 0.0 || std::holds_alternative<PointMass>(ensemble_);
}

BetheStripModel BetheStripModel::with_lambda(double lambda) const {
    return BetheStripModel(K_, a_, lambda, ensemble_);
}

RealInterval interval_iak(const BetheStripModel& model) {
    const double s = std::sqrt(static_cast<double>(model.K()));
    return {-s + model.a_max(), s + model.a_min()};
}

RealSymMatrix sample_potential(const DisorderEnsemble& ensemble, Stream& rng) {
    return std::visit(
        overloaded{[](const PointMass& p) -> RealSymMatrix { return p.v0; },
                   [&rng](const DiagonalIID& d) -> RealSymMatrix {
                       RealSymMatrix v = RealSymMatrix::Zero(d.m, d.m);
                       for (int k = 0; k < d.m; ++k) {
                           switch (d.law) {
                               case DiagonalIID::Law::uniform: v(k, k) = 2.0 * rng.uniform() - 1.0; break;
                               case DiagonalIID::Law::gauss: v(k, k) = rng.normal(); break;
                               case DiagonalIID::Law::bernoulli: v(k, k) = (rng.next() >> 63) ? 1.0 : -1.0; break;
                           }
                       }
                       return v;
                   },
                   [&rng](const GOE& g) -> RealSymMatrix {
                       RealSymMatrix v(g.m, g.m);
                       const double off = std::sqrt(0.5);
                       for (int j = 0; j < g.m; ++j) {
                           v(j, j) = rng.normal();
                           for (int k = j + 1; k < g.m; ++k) {
                               v(j, k) = off * rng.normal();
                               v(k, j) = v(j, k);
                           }
                       }
                       return v;
                   }},
        ensemble);
}

RealSymMatrix site_potential(const DisorderEnsemble& ensemble, std::uint64_t seed, std::uint64_t realization,
                             std::uint64_t site) {
    Stream rng(seed, {stream_tag::site, realization, site});
    return sample_potential(ensemble, rng);
}

cplx characteristic_fn(const DisorderEnsemble& ensemble, const RealSymMatrix& M) {
    const cplx I(0.0, 1.0);
    return std::visit(overloaded{[&](const PointMass& p) { return std::exp(-I * (M * p.v0).trace()); },
                                 [&](const DiagonalIID& d) {
                                     double h = 1.0;
                                     for (int k = 0; k < d.m; ++k) h *= scalar_characteristic(d.law, M(k, k));
                                     return cplx(h, 0.0);
                                 },
                                 [&](const GOE&) { return cplx(std::exp(-0.5 * (M * M).trace()), 0.0); }},
                      ensemble);
}

std::vector<RealInterval> deterministic_spectrum(const BetheStripModel& model) {
    const double s = std::sqrt(static_cast<double>(model.K()));
    std::vector<RealInterval> shifts;  // sigma(A + lambda V) as intervals
    if (model.lambda() == 0.0) {
        for (double a : model.a()) shifts.push_back({a, a});
    } else if (const auto* p = std::get_if<PointMass>(&model.ensemble())) {
        Eigen::SelfAdjointEigenSolver<MatrixR> es(a_matrix(model) + model.lambda() * p->v0, Eigen::EigenvaluesOnly);
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
            shifts.push_back({es.eigenvalues()(k), es.eigenvalues()(k)});
    } else if (const auto* d = std::get_if<DiagonalIID>(&model.ensemble())) {
        const double l = std::abs(model.lambda());
        for (double a : model.a()) {
            switch (d->law) {
                case DiagonalIID::Law::uniform: shifts.push_back({a - l, a + l}); break;
                case DiagonalIID::Law::bernoulli:
                    shifts.push_back({a - l, a - l});
                    shifts.push_back({a + l, a + l});
                    break;
                case DiagonalIID::Law::gauss:
                    throw UnsupportedEnsemble("deterministic_spectrum: gaussian disorder has unbounded support");
            }
        }
    } else {
        throw UnsupportedEnsemble("deterministic_spectrum: GOE disorder has unbounded support");
    }
    std::vector<RealInterval> bands;
    for (const auto& sh : shifts) bands.push_back({sh.lo - s, sh.hi + s});
    return merge(std::move(bands));
}

RealSymMatrix a_matrix(const BetheStripModel& model) {
    RealSymMatrix a = RealSymMatrix::Zero(model.m(), model.m());
    for (int k = 0; k < model.m(); ++k) a(k, k) = model.a()[k];
    return a;
}

}  // namespace bethe
