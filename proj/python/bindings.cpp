#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bethestrip/errors.hpp"
#include "bethestrip/experiment.hpp"
#include "bethestrip/fixed_point.hpp"
#include "bethestrip/free_solver.hpp"
#include "bethestrip/recursion.hpp"
#include "bethestrip/susy_spectrum.hpp"

namespace py = pybind11;
using namespace bethe;

namespace {

BetheStripModel make_model(int K, const std::vector<double>& a, double lambda, const std::string& ensemble) {
    return BetheStripModel(K, a, lambda, parse_ensemble(ensemble, static_cast<int>(a.size())));
}

}  // namespace

PYBIND11_MODULE(_bethestrip, m) {
    m.doc() = "Bethe-strip random Schroedinger operators";

    static py::exception<Error> base(m, "BetheError", PyExc_RuntimeError);
    static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
    static py::exception<VerificationFailure> verification(m, "VerificationFailure", base.ptr());
    static py::exception<Error> domain_error(m, "DomainError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            py::set_error(config_error, e.what());
        } catch (const VerificationFailure& e) {
            py::set_error(verification, e.what());
        } catch (const Error& e) {
            py::set_error(domain_error, e.what());
        }
    });

    py::class_<BetheStripModel>(m, "Model")
        .def(py::init(&make_model), py::arg("K"), py::arg("a"), py::arg("lam") = 0.0, py::arg("ensemble") = "goe")
        .def_property_readonly("K", &BetheStripModel::K)
        .def_property_readonly("m", &BetheStripModel::m)
        .def_property_readonly("a", &BetheStripModel::a)
        .def_property_readonly("lam", &BetheStripModel::lambda)
        .def_property_readonly("ensemble", [](const BetheStripModel& s) { return ensemble_name(s.ensemble()); })
        .def("interval_iak", [](const BetheStripModel& s) {
            const RealInterval r = interval_iak(s);
            return py::make_tuple(r.lo, r.hi);
        });

    m.def("free_forward_green", [](const BetheStripModel& s, double E, double eta) {
        return free_forward_green(SpectralPoint(E, eta), s).dense();
    }, py::arg("model"), py::arg("E"), py::arg("eta") = 0.0);
    m.def("free_full_green", [](const BetheStripModel& s, double E, double eta) {
        return free_full_green(SpectralPoint(E, eta), s).dense();
    }, py::arg("model"), py::arg("E"), py::arg("eta") = 0.0);
    m.def("a_e_matrix", [](const BetheStripModel& s, double E) { return a_e_matrix(E, s).dense(); });

    m.def("sample_tree", [](const BetheStripModel& s, double E, double eta, int depth, std::uint64_t seed,
                            std::uint64_t realization) {
        return sample_tree(SpectralPoint(E, eta), s, depth, seed, realization).dense();
    }, py::arg("model"), py::arg("E"), py::arg("eta"), py::arg("depth"), py::arg("seed") = 1,
       py::arg("realization") = 0);

    m.def("boundary_green", [](const BetheStripModel& s, double E) {
        return continuation_to_boundary(s, E).back().solution.dense();
    }, py::arg("model"), py::arg("E"), "Deterministic fixed point continued to eta = 0.");

    m.def("dos_scan", [](const BetheStripModel& s, double E, const std::vector<double>& etas, std::size_t pool,
                         int sweeps, std::size_t samples, std::uint64_t seed) {
        PopulationParams p;
        p.pool_size = pool;
        p.sweeps_per_level = sweeps;
        p.burn_in = sweeps;
        p.samples = samples;
        p.seed = seed;
        py::list rows;
        for (const auto& level : eta_continuation(s, E, etas, p)) {
            py::dict row;
            row["eta"] = level.eta;
            row["dos"] = level.moments.dos.mean;
            row["dos_stderr"] = level.moments.dos.std_error;
            row["trace_abs2"] = level.moments.trace_abs2.mean;
            row["trace_abs2_stderr"] = level.moments.trace_abs2.std_error;
            rows.append(row);
        }
        return rows;
    }, py::arg("model"), py::arg("E"), py::arg("etas"), py::arg("pool") = 2000, py::arg("sweeps") = 50,
       py::arg("samples") = 2000, py::arg("seed") = 1);

    m.def("lambda_j", [](const BetheStripModel& s, double E, const std::vector<int>& exps) {
        return lambda_j(E, s, MonomialIndex{s.m(), exps});
    });
    m.def("gap_kce", &gap_kce, py::arg("E"), py::arg("model"), py::arg("degree"));
    m.def("gap_tensor", &gap_tensor, py::arg("E"), py::arg("model"), py::arg("degree"));
    m.def("ce_matrix", [](const BetheStripModel& s, double E, int degree) {
        const OperatorMatrix op = build_ce_matrix(E, s, degree);
        std::vector<std::string> labels;
        for (const auto& J : op.basis) labels.push_back(J.label());
        return py::make_tuple(op.entries, labels, op.triangularity_residual);
    }, py::arg("model"), py::arg("E"), py::arg("degree"));

    m.def("run", [](const std::map<std::string, std::string>& kv) {
        const CommandResult r = run_command(ExperimentConfig::from_kv(kv));
        return py::make_tuple(r.csv, r.report.is_null() ? std::string() : r.report.dump(), r.exit_code);
    }, py::arg("config"), "Run a subcommand from key=value settings; returns (csv, json, exit_code).");

    m.attr("__version__") = BETHESTRIP_VERSION;
}
