#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qbath/errors.hpp"
#include "qbath/master_eq.hpp"
#include "qbath/observables.hpp"
#include "qbath/rwa_oracle.hpp"
#include "qbath/stock_models.hpp"

namespace py = pybind11;
using namespace qbath;

namespace {

CouplingFamily family_from(const std::string& name) {
    if (name == "rwa") return CouplingFamily::RWA;
    if (name == "position_position") return CouplingFamily::PositionPosition;
    if (name == "custom") return CouplingFamily::Custom;
    throw ParameterError("unknown coupling family '" + name + "'");
}

ModelSpec spectral_model(SpectralFamily family, std::size_t n, double nu, const std::string& coupling, double strength,
                         double cutoff, double omega_min, double omega_max, double hbar, double mass) {
    SpectralDiscretization disc;
    disc.family = family;
    disc.n_modes = n;
    disc.coupling_strength = strength;
    disc.cutoff = cutoff;
    disc.omega_min = omega_min;
    disc.omega_max = omega_max;
    return build_model(disc, nu, family_from(coupling), Units{hbar, mass});
}

std::size_t checked_index(const PropagatorCoefficients& p, std::size_t i) {
    if (i >= p.size()) throw py::index_error("time index out of range");
    return i;
}

py::dict generator_dict(const GeneratorCoefficients& g) {
    py::dict d;
    d["xi"] = g.xi;
    d["zeta"] = g.zeta;
    d["kappa"] = g.kappa;
    d["mu"] = g.mu;
    d["sigma"] = g.sigma;
    d["denom"] = g.denom;
    d["valid"] = g.valid;
    return d;
}

}  // namespace

PYBIND11_MODULE(_qbath, m) {
    m.doc() = "Exact reduced dynamics of a harmonic oscillator coupled to a discretized harmonic bath.";

    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<PhysicalityError>(m, "PhysicalityError", PyExc_ArithmeticError);
    py::register_exception<AccuracyError>(m, "AccuracyError", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const std::invalid_argument& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    py::class_<ModelSpec>(m, "ModelSpec")
        .def_readonly("nu", &ModelSpec::nu)
        .def_readonly("omegas", &ModelSpec::omegas)
        .def_readonly("u", &ModelSpec::u)
        .def_readonly("v", &ModelSpec::v)
        .def_property_readonly("hbar", [](const ModelSpec& s) { return s.units.hbar; })
        .def_property_readonly("mass", [](const ModelSpec& s) { return s.units.mass; })
        .def_property_readonly("coupling_family", [](const ModelSpec& s) { return std::string(to_string(s.coupling_family)); })
        .def_property_readonly("modes", &ModelSpec::modes)
        .def("__repr__", [](const ModelSpec& s) {
            return "<ModelSpec N=" + std::to_string(s.modes()) + " nu=" + std::to_string(s.nu) + " " +
                   to_string(s.coupling_family) + ">";
        });

    m.def(
        "ohmic_model",
        [](std::size_t n, const std::string& coupling, double nu, double strength, double cutoff, double omega_min,
           double omega_max, double hbar, double mass) {
            return spectral_model(SpectralFamily::OhmicExpCutoff, n, nu, coupling, strength, cutoff, omega_min, omega_max,
                                  hbar, mass);
        },
        py::arg("n_modes"), py::arg("coupling") = "position_position", py::arg("nu") = stock::ohmic_nu,
        py::arg("strength") = stock::ohmic_strength, py::arg("cutoff") = stock::ohmic_cutoff,
        py::arg("omega_min") = stock::ohmic_omega_min, py::arg("omega_max") = stock::ohmic_omega_max,
        py::arg("hbar") = 1.0, py::arg("mass") = 1.0, "Ohmic bath J(w) = strength w exp(-w/cutoff) on a midpoint grid.");
    m.def(
        "flat_model",
        [](std::size_t n, const std::string& coupling, double nu, double strength, double omega_min, double omega_max,
           double hbar, double mass) {
            return spectral_model(SpectralFamily::FlatBand, n, nu, coupling, strength, 1.0, omega_min, omega_max, hbar, mass);
        },
        py::arg("n_modes"), py::arg("coupling"), py::arg("nu"), py::arg("strength"), py::arg("omega_min"),
        py::arg("omega_max"), py::arg("hbar") = 1.0, py::arg("mass") = 1.0);
    m.def(
        "explicit_model",
        [](double nu, const Eigen::VectorXd& omegas, const Eigen::VectorXcd& u, std::optional<Eigen::VectorXcd> v,
           const std::string& coupling, double hbar, double mass) {
            SpectralDiscretization disc;
            disc.family = SpectralFamily::Explicit;
            disc.omegas = omegas;
            disc.u = u;
            if (v) disc.v = *v;
            return build_model(disc, nu, family_from(coupling), Units{hbar, mass});
        },
        py::arg("nu"), py::arg("omegas"), py::arg("u"), py::arg("v") = py::none(), py::arg("coupling") = "rwa",
        py::arg("hbar") = 1.0, py::arg("mass") = 1.0);
    m.def("validate_model", &validate_model, py::arg("model"),
          "Smallest eigenvalue of the symmetrized Hamiltonian quadratic form.");
    m.def("dynamical_matrix", &dynamical_matrix, py::arg("model"));

    py::class_<PropagatorCoefficients>(m, "PropagatorCoefficients")
        .def_property_readonly("t", [](const PropagatorCoefficients& p) { return p.grid.t; })
        .def_readonly("A", &PropagatorCoefficients::A)
        .def_readonly("C", &PropagatorCoefficients::C)
        .def_readonly("B", &PropagatorCoefficients::B)
        .def_readonly("D", &PropagatorCoefficients::D)
        .def_readonly("dA", &PropagatorCoefficients::dA)
        .def_readonly("dC", &PropagatorCoefficients::dC)
        .def_readonly("model", &PropagatorCoefficients::model)
        .def("__len__", &PropagatorCoefficients::size)
        .def("sum_rule_defect",
             [](const PropagatorCoefficients& p) {
                 Eigen::VectorXd out(static_cast<Eigen::Index>(p.size()));
                 for (std::size_t i = 0; i < p.size(); ++i) out(static_cast<Eigen::Index>(i)) = sum_rule_defect(p, i);
                 return out;
             })
        .def(
            "plateau_window",
            [](const PropagatorCoefficients& p, double level) -> std::optional<std::pair<std::size_t, std::size_t>> {
                const auto w = plateau_window(p, level);
                if (!w) return std::nullopt;
                return std::make_pair(w->begin, w->end);
            },
            py::arg("level") = 0.01, "Half-open index range [begin, end) of the plateau, or None.");

    m.def(
        "propagate",
        [](const ModelSpec& model, std::vector<double> t, unsigned threads) {
            return compute_propagator(model, TimeGrid{std::move(t)}, threads);
        },
        py::arg("model"), py::arg("t"), py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>(),
        "A, B, C, D and their derivatives on a grid starting at t = 0.");

    py::class_<Equilibrium>(m, "Equilibrium")
        .def(py::init<double>(), py::arg("beta") = zero_temperature)
        .def_readonly("beta", &Equilibrium::beta);
    py::class_<NumberState>(m, "NumberState")
        .def(py::init<std::vector<std::uint64_t>>(), py::arg("n"))
        .def_readonly("n", &NumberState::n);
    py::class_<CoherentState>(m, "CoherentState")
        .def(py::init<Eigen::VectorXcd>(), py::arg("amps"))
        .def_readonly("amps", &CoherentState::amps);
    m.def("sample_number_state", &sample_number_state, py::arg("beta"), py::arg("model"), py::arg("seed"));
    m.def("sample_coherent_state", &sample_coherent_state, py::arg("beta"), py::arg("model"), py::arg("seed"));

    py::class_<GaussianMoments>(m, "GaussianMoments")
        .def(py::init<cplx, double, cplx>(), py::arg("mean_a") = cplx{}, py::arg("n_ex") = 0.0, py::arg("aa") = cplx{});
    py::class_<SqueezedDisplaced>(m, "SqueezedDisplaced")
        .def(py::init<cplx, double, double>(), py::arg("disp") = cplx{}, py::arg("r") = 0.0, py::arg("phi") = 0.0);
    py::class_<CatState>(m, "CatState").def(py::init<cplx, cplx>(), py::arg("alpha"), py::arg("beta"));

    m.def(
        "moments",
        [](const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s) {
            const Moments r = moments(p, checked_index(p, i), bath, s);
            py::dict d;
            d["mean_x"] = r.mean_x;
            d["mean_p"] = r.mean_p;
            d["var_x"] = r.var_x;
            d["var_p"] = r.var_p;
            d["purity"] = r.purity;
            return d;
        },
        py::arg("p"), py::arg("i"), py::arg("bath"), py::arg("state"));
    m.def(
        "purity",
        [](const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s,
           bool force_quadrature) {
            PurityOptions opts;
            opts.force_quadrature = force_quadrature;
            return purity(p, checked_index(p, i), bath, s, opts);
        },
        py::arg("p"), py::arg("i"), py::arg("bath"), py::arg("state"), py::arg("force_quadrature") = false);
    m.def(
        "chi",
        [](const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s, cplx eta) {
            return chi_eval(p, checked_index(p, i), bath, s, eta);
        },
        py::arg("p"), py::arg("i"), py::arg("bath"), py::arg("state"), py::arg("eta"));
    m.def(
        "number_variance_of_variance",
        [](const PropagatorCoefficients& p, std::size_t i, double beta) {
            return number_variance_of_variance(p, checked_index(p, i), beta);
        },
        py::arg("p"), py::arg("i"), py::arg("beta"));
    m.def(
        "averaged_purity_number_exact",
        [](const PropagatorCoefficients& p, std::size_t i, double beta, const OscillatorState& s) {
            return averaged_purity_number_exact(p, checked_index(p, i), beta, s);
        },
        py::arg("p"), py::arg("i"), py::arg("beta"), py::arg("state"));

    m.def(
        "gaussian_generator",
        [](const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, double denom_floor) {
            const auto jet = gaussian_F_jet(p, checked_index(p, i), bath);
            if (!jet) throw ParameterError("gaussian_generator: needs an equilibrium or coherent bath");
            return generator_dict(try_gaussian_generator(p, i, *jet, denom_floor));
        },
        py::arg("p"), py::arg("i"), py::arg("bath"), py::arg("denom_floor") = default_denom_floor,
        "xi, zeta, kappa, mu, sigma at one instant; valid is False where |A|^2 - |C|^2 is below the floor.");
    m.def(
        "generator_residual",
        [](const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s) {
            checked_index(p, i);
            const bool gaussian = gaussian_F_jet(p, i, bath).has_value() && is_gaussian(s);
            const ResidualReport r = gaussian ? generator_residual(p, i, bath, s)
                                              : general_residual(p, i, bath, s, eta_test_grid(), default_denom_floor);
            return py::make_tuple(r.max_residual, r.flagged_nodes);
        },
        py::arg("p"), py::arg("i"), py::arg("bath"), py::arg("state"));

    m.def("purity_squeezed_rwa", &purity_squeezed_rwa, py::arg("abs_a2"), py::arg("r"));
    m.def("purity_cat_rwa", &purity_cat_rwa, py::arg("abs_a2"), py::arg("alpha"), py::arg("beta"));
}
