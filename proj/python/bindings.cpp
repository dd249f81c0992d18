#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "torsion/analytic.hpp"
#include "torsion/errors.hpp"
#include "torsion/fem2d.hpp"
#include "torsion/radial.hpp"
#include "torsion/report.hpp"

namespace py = pybind11;
using namespace torsion;

namespace {

py::dict estimate_to_dict(const fem::FemEstimate& est) {
    py::list levels;
    for (const auto& lv : est.levels) {
        py::dict d;
        d["h"] = lv.h;
        d["nodes"] = lv.nodes;
        d["min_angle_degrees"] = lv.min_angle_degrees;
        d["energies"] = lv.energies;
        d["c1"] = lv.fit.c1;
        d["c2"] = lv.fit.c2;
        d["c1_stderr"] = lv.fit.c1_stderr;
        d["residual_rms"] = lv.fit.residual_rms;
        levels.append(d);
    }
    py::dict out;
    out["k"] = est.k;
    out["constraint"] = std::string(to_string(est.constraint));
    out["t_samples"] = est.t_samples;
    out["levels"] = levels;
    out["q_estimate"] = est.q_estimate;
    out["q_analytic"] = est.q_analytic;
    out["rel_error"] = est.rel_error;
    return out;
}

cli::RunConfig make_config(int dim, double radius, double sigma_in, double sigma_out,
                           const std::string& constraint, int kmin, std::optional<int> kmax) {
    cli::RunConfig c;
    c.dim = dim;
    c.radius = radius;
    c.sigma_in = sigma_in;
    c.sigma_out = sigma_out;
    c.constraint = parse_constraint(constraint);
    c.kmin = kmin;
    c.kmax = kmax;
    c.validate();
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Two-phase torsion on the unit ball: closed forms, radial and planar FEM oracles";
    m.attr("__version__") = TORSION_VERSION;

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<DegenerateSystemError>(m, "DegenerateSystemError", PyExc_ArithmeticError);
    py::register_exception<MeshError>(m, "MeshError", PyExc_RuntimeError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);

    py::class_<Medium>(m, "Medium")
        .def(py::init<double, double>(), py::arg("sigma_minus"), py::arg("sigma_plus"))
        .def_property_readonly("sigma_minus", &Medium::sigma_minus)
        .def_property_readonly("sigma_plus", &Medium::sigma_plus)
        .def_property_readonly("rho", &Medium::rho)
        .def("is_uniform", &Medium::is_uniform, py::arg("rel_tol") = 1e-12);

    py::class_<BallGeometry>(m, "BallGeometry")
        .def(py::init<int, double>(), py::arg("dim"), py::arg("radius"))
        .def_property_readonly("dim", &BallGeometry::dim)
        .def_property_readonly("radius", &BallGeometry::radius)
        .def_property_readonly("mean_curvature", &BallGeometry::mean_curvature);

    m.def("stress_function", &stress_function, py::arg("geometry"), py::arg("medium"), py::arg("r"));
    m.def("torsional_rigidity_concentric", &torsional_rigidity_concentric);
    m.def("harmonic_multiplicity", &harmonic_multiplicity, py::arg("dim"), py::arg("k"));
    m.def("b_coefficient", &b_coefficient, py::arg("geometry"), py::arg("medium"), py::arg("k"));
    m.def("solve_mode_coefficients", [](const BallGeometry& g, const Medium& med, int k) {
        const ModeCoefficients c = solve_mode_coefficients(g, med, k);
        return py::make_tuple(c.b, c.c, c.d);
    });
    m.def("q_volume", [](const BallGeometry& g, const Medium& med, double k) { return q_volume(g, med, k).value; },
          py::arg("geometry"), py::arg("medium"), py::arg("k"));
    m.def("q_perimeter",
          [](const BallGeometry& g, const Medium& med, double k) { return q_perimeter(g, med, k).value; },
          py::arg("geometry"), py::arg("medium"), py::arg("k"));
    m.def("j_function", &j_function, py::arg("x"), py::arg("dim"), py::arg("radius"), py::arg("rho"));
    m.def("volume_sap_coefficient", &volume_sap_coefficient, py::arg("geometry"), py::arg("k"));
    m.def(
        "classify",
        [](const BallGeometry& g, const Medium& med, const std::string& constraint) {
            const Classification c = classify(g, med, parse_constraint(constraint));
            return py::make_tuple(std::string(to_string(c.verdict)), c.critical_mode);
        },
        py::arg("geometry"), py::arg("medium"), py::arg("constraint") = "volume");

    m.def(
        "solve_radial",
        [](const BallGeometry& g, const Medium& med, int cells) {
            const radial::RadialSolution s = radial::solve_radial(g, med, cells);
            py::dict d;
            d["nodes"] = s.grid.nodes;
            d["values"] = s.values;
            d["energy"] = s.energy;
            d["max_relative_error"] = radial::max_relative_error(s);
            return d;
        },
        py::arg("geometry"), py::arg("medium"), py::arg("cells") = 4096);
    m.def("extrapolated_energy", &radial::extrapolated_energy, py::arg("geometry"), py::arg("medium"),
          py::arg("cells") = 4096);

    m.def(
        "estimate_q",
        [](const BallGeometry& g, const Medium& med, int k, const std::string& constraint, double h,
           std::optional<std::vector<double>> t, int levels) {
            const Constraint con = parse_constraint(constraint);
            const fem::PerturbationFamily fam(g, k, con);
            const std::vector<double> ts = t ? *t : fem::default_t_samples(fam);
            fem::EstimateOptions opts;
            opts.levels = levels;
            fem::FemEstimate est;
            {
                py::gil_scoped_release release;
                est = fem::estimate_q(g, med, k, con, h, ts, opts);
            }
            return estimate_to_dict(est);
        },
        py::arg("geometry"), py::arg("medium"), py::arg("k"), py::arg("constraint") = "volume",
        py::arg("h") = 0.01, py::arg("t_samples") = py::none(), py::arg("levels") = 2);

    // Command payloads as JSON text, identical to the CLI's "payload" object.
    auto command = [&m](const char* name, cli::Report (*fn)(const cli::RunConfig&)) {
        m.def(
            name,
            [fn](int dim, double radius, double sigma_in, double sigma_out, const std::string& constraint, int kmin,
                 std::optional<int> kmax) {
                return fn(make_config(dim, radius, sigma_in, sigma_out, constraint, kmin, kmax)).payload().dump();
            },
            py::arg("dim") = 2, py::arg("radius") = 0.5, py::arg("sigma_in") = 2.0, py::arg("sigma_out") = 1.0,
            py::arg("constraint") = "volume", py::arg("kmin") = 1, py::arg("kmax") = py::none());
    };
    command("cmd_classify", cli::cmd_classify);
    command("cmd_qcurve", cli::cmd_qcurve);
    command("cmd_sweep", cli::cmd_sweep);
}
