// Python bindings over the main operations. High-precision inputs arrive as
// decimal strings (floats are accepted and converted exactly); results come
// back as floats plus full-precision decimal strings where it matters.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kgsplit/inner.hpp"
#include "kgsplit/manifold.hpp"
#include "kgsplit/melnikov.hpp"
#include "kgsplit/scanio.hpp"

namespace py = pybind11;
using namespace kgsplit;

namespace {

XReal to_xreal(const PrecisionContext& ctx, const py::object& v) {
    if (py::isinstance<py::str>(v)) return ctx.from_string(v.cast<std::string>());
    return ctx.real(v.cast<double>());
}

OddPowerSeries to_series(const PrecisionContext& ctx, const std::vector<std::pair<int, py::object>>& coeffs) {
    OddPowerSeries f;
    for (const auto& [deg, val] : coeffs) {
        if (deg < 3 || deg % 2 == 0) throw ConfigError("power series degrees must be odd and >= 3");
        int d = (deg - 1) / 2;
        if (static_cast<int>(f.c.size()) < d) f.c.resize(d, ctx.zero());
        f.c[d - 1] = to_xreal(ctx, val);
    }
    return f;
}

std::complex<double> to_c(const XComplex& z) { return {z.re.to_double(), z.im.to_double()}; }

} // namespace

PYBIND11_MODULE(_kgsplit, m) {
    m.doc() = "exponentially small splitting of Klein-Gordon spatial dynamics";

    m.def("required_bits",
          [](const py::object& nats, long guard) {
              PrecisionContext ctx(128);
              return required_bits(to_xreal(ctx, nats), guard);
          },
          py::arg("target_magnitude_nats"), py::arg("guard_bits") = kDefaultGuardBits);

    m.def("auto_bits", [](int k, const py::object& eps) {
        PrecisionContext ctx(128);
        return auto_bits(k, to_xreal(ctx, eps));
    });

    m.def("duffing_homoclinic", [](std::complex<double> y) {
        PrecisionContext ctx(128);
        auto [v, dv] = duffing_homoclinic(XComplex{ctx.real(y.real()), ctx.real(y.imag())});
        return std::make_pair(to_c(v), to_c(dv));
    });

    m.def("classify_frequency", [](const py::object& omega, const py::object& eps0) {
        PrecisionContext ctx(160);
        FrequencyClass c = classify_frequency(to_xreal(ctx, omega), to_xreal(ctx, eps0));
        return std::make_pair(std::string(c.tag == FrequencyClass::I_k ? "I" : "J"), c.k);
    });

    m.def("lambda_n", [](int k, const py::object& eps, int n) {
        PrecisionContext ctx(160);
        ModelParams p = make_model(k, to_xreal(ctx, eps), OddPowerSeries{}, std::nullopt, 11, 160);
        return lambda_n(p, n).to_double();
    });

    m.def("mu_n", [](int n) {
        PrecisionContext ctx(128);
        return mu_n(ctx, n).to_double();
    });

    m.def("toy_splitting_closed_form",
          [](const std::vector<std::pair<int, py::object>>& a, const py::object& kappa) {
              PrecisionContext ctx(256);
              std::vector<XComplex> av;
              for (const auto& [l, val] : a) {
                  if (l < 3) throw ConfigError("toy coefficients start at a_3");
                  if (static_cast<int>(av.size()) < l - 2) av.resize(l - 2, XComplex(ctx));
                  av[l - 3] = XComplex{to_xreal(ctx, val), ctx.zero()};
              }
              return to_c(toy_splitting_closed_form(av, to_xreal(ctx, kappa), ctx));
          });

    m.def("toy_splitting_numeric",
          [](const std::vector<std::pair<int, py::object>>& a, const py::object& kappa, double R) {
              PrecisionContext ctx(256);
              std::vector<XComplex> av;
              for (const auto& [l, val] : a) {
                  if (l < 3) throw ConfigError("toy coefficients start at a_3");
                  if (static_cast<int>(av.size()) < l - 2) av.resize(l - 2, XComplex(ctx));
                  av[l - 3] = XComplex{to_xreal(ctx, val), ctx.zero()};
              }
              return to_c(toy_splitting_numeric(av, to_xreal(ctx, kappa), ctx.real(R), ctx,
                                                ctx.from_string("1e-18")));
          },
          py::arg("a"), py::arg("kappa"), py::arg("R") = 25.0);

    m.def("c_in_prime",
          [](const std::vector<std::pair<int, py::object>>& f_coeffs, int Q) {
              PrecisionContext ctx(256);
              return to_c(c_in_prime(to_series(ctx, f_coeffs), Q, ctx));
          },
          py::arg("f_coeffs") = std::vector<std::pair<int, py::object>>{}, py::arg("Q") = 14);

    m.def("melnikov_quadrature",
          [](const std::vector<std::pair<int, py::object>>& f_coeffs, double r, double S_cut,
             int n_tau) {
              PrecisionContext ctx(256);
              MelnikovGrid grid;
              grid.n_tau = n_tau;
              QuadratureResult q =
                  melnikov_quadrature(to_series(ctx, f_coeffs), ctx.real(r), ctx.real(S_cut), grid, ctx);
              py::dict out;
              out["value"] = to_c(q.value);
              out["tail_bound"] = q.tail_bound.to_double();
              return out;
          },
          py::arg("f_coeffs") = std::vector<std::pair<int, py::object>>{}, py::arg("r") = 3.0,
          py::arg("S_cut") = 30.0, py::arg("n_tau") = 48);

    m.def("appendix_c_family",
          [](const py::object& mu, const std::vector<std::pair<int, py::object>>& f_coeffs, int D) {
              PrecisionContext ctx(192);
              OddPowerSeries g = appendix_c_family(to_xreal(ctx, mu), to_series(ctx, f_coeffs), D);
              std::vector<std::pair<int, std::string>> out;
              for (int d = 1; d <= g.terms(); ++d)
                  if (!g.c[d - 1].is_zero()) out.emplace_back(2 * d + 1, g.c[d - 1].to_string());
              return out;
          },
          py::arg("mu"), py::arg("f_coeffs") = std::vector<std::pair<int, py::object>>{},
          py::arg("D") = 15);

    m.def("measure_splitting",
          [](int k, const py::object& eps, int n_max, int order_P) {
              PrecisionContext parse(128);
              long bits = auto_bits(k, to_xreal(parse, eps));
              PrecisionContext ctx(bits);
              ModelParams p = make_model(k, to_xreal(ctx, eps), OddPowerSeries{}, std::nullopt,
                                         n_max, bits);
              SplittingSample s = measure_splitting(p, order_P, ctx.real(4.0) * ctx.sqrt2(),
                                                    ctx.zero(), auto_tolerance(p));
              py::dict out;
              out["s_eps"] = s.s_eps.to_double();
              out["s_eps_str"] = s.s_eps.to_string();
              out["bits"] = s.bits_used;
              out["energy_drift"] = s.energy_drift.to_double();
              out["trusted"] = s.trusted;
              out["steps"] = s.steps;
              return out;
          },
          py::arg("k") = 1, py::arg("eps") = 0.35, py::arg("n_max") = 7, py::arg("order_P") = 8);

    m.def("extract_stokes",
          [](const std::vector<std::pair<int, py::object>>& f_coeffs, const py::object& mu_obj,
             double R, double r0, int n_max, long bits) {
              PrecisionContext parse(256);
              OddPowerSeries f = to_series(parse, f_coeffs);
              if (!mu_obj.is_none()) f = appendix_c_family(to_xreal(parse, mu_obj), f, 15);
              if (bits <= 0)
                  bits = required_bits(mu_n(parse, 3) * parse.real(r0), kDefaultGuardBits);
              StokesEstimate est = extract_stokes(f, parse.real(R), parse.real(r0), n_max, bits);
              py::dict out;
              out["C_in"] = to_c(est.c_stab);
              out["C_in_str"] = est.c_stab.im.to_string();
              out["error_bar"] = est.error_bar.to_double();
              out["trusted"] = est.trusted;
              out["bits"] = est.bits;
              return out;
          },
          py::arg("f_coeffs") = std::vector<std::pair<int, py::object>>{},
          py::arg("mu") = py::none(), py::arg("R") = 10.0, py::arg("r0") = 6.0,
          py::arg("n_max") = 5, py::arg("bits") = 0);

    m.attr("__version__") = "0.1.0";
}
