#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "toeporb/acceptance.hpp"
#include "toeporb/arith.hpp"
#include "toeporb/averaging.hpp"
#include "toeporb/common.hpp"
#include "toeporb/constructions.hpp"
#include "toeporb/polyres.hpp"
#include "toeporb/sturmian.hpp"
#include "toeporb/toeplitz.hpp"

namespace py = pybind11;
using namespace toeporb;

namespace {

averaging::ObservableSpec make_observable(const std::string& name, int alphabet) {
  if (name == "parity") return averaging::ObservableSpec::parity();
  if (name.rfind("indicator:", 0) == 0)
    return averaging::ObservableSpec::indicator(std::stoi(name.substr(10)), alphabet);
  throw ContractError("unknown observable shorthand: " + name);
}

py::dict report_dict(const averaging::AverageReport& rep) {
  py::dict d;
  d["kind"] = averaging::index_kind_name(rep.kind);
  d["poly"] = rep.poly;
  d["N"] = rep.N;
  d["r"] = rep.shift;
  d["value"] = rep.value;
  d["normalization"] = rep.normalization;
  if (rep.predicted) d["predicted"] = *rep.predicted;
  if (rep.error_bound) d["error_bound"] = *rep.error_bound;
  return d;
}

}  // namespace

PYBIND11_MODULE(toeporb, m) {
  m.doc() = "Toeplitz orbit-average laboratory";
  m.attr("__version__") = kVersion;

  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_MemoryError);
  py::register_exception<BuildError>(m, "BuildError", PyExc_RuntimeError);

  // arith -------------------------------------------------------------------
  py::class_<arith::PrimeTable>(m, "PrimeTable")
      .def(py::init<std::int64_t>(), py::arg("limit"))
      .def_property_readonly("limit", &arith::PrimeTable::limit)
      .def("is_prime", &arith::PrimeTable::is_prime)
      .def("prime_pi", &arith::PrimeTable::prime_pi)
      .def("prime_pi_ap", &arith::PrimeTable::prime_pi_ap, py::arg("N"), py::arg("n"),
           py::arg("a"))
      .def("primes_up_to", &arith::PrimeTable::primes_up_to);

  py::enum_<arith::SemiprimeMode>(m, "SemiprimeMode")
      .value("PAIRS", arith::SemiprimeMode::kPairs)
      .value("DISTINCT", arith::SemiprimeMode::kDistinct);

  m.def("semiprime_pi", &arith::semiprime_pi, py::arg("table"), py::arg("N"),
        py::arg("mode") = arith::SemiprimeMode::kPairs);
  m.def("semiprime_pi_ap", &arith::semiprime_pi_ap, py::arg("table"), py::arg("N"), py::arg("m"),
        py::arg("a"), py::arg("mode") = arith::SemiprimeMode::kPairs);
  m.def("semiprime_noncoprime_count", &arith::semiprime_noncoprime_count, py::arg("table"),
        py::arg("N"), py::arg("n"), py::arg("mode") = arith::SemiprimeMode::kPairs);
  m.def("euler_phi", py::overload_cast<std::int64_t>(&arith::euler_phi));
  m.def("factorize", [](std::int64_t n) {
    const auto f = arith::factorize(n);
    return py::make_tuple(f.prime_powers, f.omega(), f.radical());
  });

  // polyres -----------------------------------------------------------------
  py::class_<polyres::PolynomialSpec>(m, "PolynomialSpec")
      .def(py::init<std::vector<std::int64_t>>(), py::arg("coefficients"))
      .def_static("square", &polyres::PolynomialSpec::square)
      .def_static("parse", &polyres::PolynomialSpec::parse)
      .def_property_readonly("degree", &polyres::PolynomialSpec::degree)
      .def("eval", &polyres::PolynomialSpec::eval)
      .def("inverse_floor", &polyres::PolynomialSpec::inverse_floor)
      .def("__repr__", &polyres::PolynomialSpec::to_string);

  py::class_<polyres::ResidueProfile>(m, "ResidueProfile")
      .def_readonly("modulus", &polyres::ResidueProfile::modulus)
      .def_readonly("entries", &polyres::ResidueProfile::entries)
      .def_readonly("rho_max", &polyres::ResidueProfile::rho_max)
      .def_property_readonly("psi", &polyres::ResidueProfile::psi)
      .def("attains", &polyres::ResidueProfile::attains)
      .def("rho_of", &polyres::ResidueProfile::rho_of);

  m.def("residue_profile", &polyres::residue_profile, py::arg("P"), py::arg("n"));
  m.def("residue_profile_brute", &polyres::residue_profile_brute, py::arg("P"), py::arg("n"));
  m.def("rho_count", &polyres::rho_count, py::arg("P"), py::arg("N"), py::arg("n"), py::arg("a"));
  m.def("albis_bound_check", &polyres::albis_bound_check, py::arg("P"), py::arg("n"));
  m.def("interval_count_bounds", [](const polyres::PolynomialSpec& P, std::int64_t n,
                                    std::int64_t a, std::int64_t N) {
    const auto [lo, hi] = polyres::interval_count_bounds(P, n, a, N);
    return py::make_tuple(py::make_tuple(lo.numerator(), lo.denominator()),
                          py::make_tuple(hi.numerator(), hi.denominator()));
  });
  m.def("square_rho_closed", &polyres::square_rho_closed, py::arg("p"), py::arg("n_exp"),
        py::arg("a"));
  m.def("square_psi_closed", &polyres::square_psi_closed, py::arg("p"), py::arg("n_exp"));
  m.def("tilde_residues", [](std::int64_t n) {
    const auto t = polyres::tilde_residues(n);
    return py::make_tuple(t.residues, t.psi_tilde);
  });
  m.def("tilde_bounds_check", &polyres::tilde_bounds_check, py::arg("n"));

  // toeplitz ----------------------------------------------------------------
  py::class_<toeplitz::ToeplitzSkeleton>(m, "ToeplitzSkeleton")
      .def_static("from_text", &toeplitz::ToeplitzSkeleton::from_text)
      .def("to_text", &toeplitz::ToeplitzSkeleton::to_text)
      .def_property_readonly("alphabet_size", &toeplitz::ToeplitzSkeleton::alphabet_size)
      .def_property_readonly("stage_count", &toeplitz::ToeplitzSkeleton::stage_count)
      .def("period", &toeplitz::ToeplitzSkeleton::period)
      .def("eval", &toeplitz::ToeplitzSkeleton::eval)
      .def("holes", &toeplitz::ToeplitzSkeleton::holes)
      .def("window", &toeplitz::ToeplitzSkeleton::window)
      .def("tower_diameter",
           [](const toeplitz::ToeplitzSkeleton& sk, int t) {
             return rat_str(sk.tower_diameter(t));
           })
      .def("metadata", [](const toeplitz::ToeplitzSkeleton& sk) { return sk.metadata(); })
      .def("hole_report", [](const toeplitz::ToeplitzSkeleton& sk) {
        const auto rep = sk.hole_report();
        py::list stages;
        for (const auto& s : rep.stages) {
          py::dict d;
          d["period"] = s.period;
          d["holes"] = s.holes;
          d["hole_density"] = rat_str(s.hole_density);
          d["totient_ratio"] = rat_str(s.totient_ratio);
          d["poly_ratio"] = rat_str(s.poly_ratio);
          stages.append(d);
        }
        py::dict out;
        out["stages"] = stages;
        out["regularity_consistent"] = rep.regularity_consistent;
        out["totient_consistent"] = rep.totient_consistent;
        out["poly_consistent"] = rep.poly_consistent;
        return out;
      });

  // constructions -----------------------------------------------------------
  py::class_<constructions::BuildConfig>(m, "BuildConfig")
      .def(py::init<>())
      .def_readwrite("growth_constant", &constructions::BuildConfig::growth_constant)
      .def_readwrite("stage_budget", &constructions::BuildConfig::stage_budget)
      .def_readwrite("modulus_budget", &constructions::BuildConfig::modulus_budget)
      .def_readwrite("seed", &constructions::BuildConfig::seed)
      .def_readwrite("square_support", &constructions::BuildConfig::square_support)
      .def_property(
          "ratio_bound",
          [](const constructions::BuildConfig& c) { return rat_str(c.ratio_bound); },
          [](constructions::BuildConfig& c, const std::string& s) {
            const auto slash = s.find('/');
            c.ratio_bound = slash == std::string::npos
                                ? Rat64(std::stoll(s))
                                : Rat64(std::stoll(s.substr(0, slash)),
                                        std::stoll(s.substr(slash + 1)));
          });

  auto build_result = [](constructions::BuildResult&& res) {
    py::list certs;
    for (const auto& cert : res.certificates) {
      py::dict d;
      d["stage"] = cert.stage;
      d["all_pass"] = cert.all_pass();
      py::list conds;
      for (const auto& c : cert.conditions) {
        py::dict cd;
        cd["name"] = c.name;
        cd["lhs"] = c.lhs;
        cd["relation"] = c.relation;
        cd["rhs"] = c.rhs;
        cd["pass"] = c.pass;
        conds.append(cd);
      }
      d["conditions"] = conds;
      certs.append(d);
    }
    return py::make_tuple(std::move(res.skeleton), certs);
  };
  m.def("build_theorem_a", [build_result](const constructions::BuildConfig& cfg) {
    return build_result(constructions::build_theorem_a(cfg));
  });
  m.def("build_spnt_counterexample", [build_result](const constructions::BuildConfig& cfg) {
    return build_result(constructions::build_spnt_counterexample(cfg));
  });
  m.def("build_squares_counterexample", [build_result](const constructions::BuildConfig& cfg) {
    return build_result(constructions::build_squares_counterexample(cfg));
  });
  m.def("build_bounded_holes", &constructions::build_bounded_holes, py::arg("alphabet_size"),
        py::arg("periods"), py::arg("holes_per_stage"));
  m.def("validate_stage", [](const toeplitz::ToeplitzSkeleton& sk, int t,
                             const std::string& theorem) {
    const auto cert =
        constructions::validate_stage(sk, t, constructions::theorem_from_name(theorem));
    py::list conds;
    for (const auto& c : cert.conditions) {
      py::dict cd;
      cd["name"] = c.name;
      cd["lhs"] = c.lhs;
      cd["relation"] = c.relation;
      cd["rhs"] = c.rhs;
      cd["pass"] = c.pass;
      conds.append(cd);
    }
    return conds;
  });

  // averaging ---------------------------------------------------------------
  m.def(
      "prime_average",
      [](const toeplitz::ToeplitzSkeleton& sk, const arith::PrimeTable& table, std::int64_t N,
         std::int64_t r, const std::string& obs) {
        return report_dict(
            averaging::prime_average(sk, make_observable(obs, sk.alphabet_size()), table, N, r));
      },
      py::arg("skeleton"), py::arg("table"), py::arg("N"), py::arg("r") = 0,
      py::arg("obs") = "parity");
  m.def(
      "semiprime_average",
      [](const toeplitz::ToeplitzSkeleton& sk, const arith::PrimeTable& table, std::int64_t N,
         std::int64_t r, const std::string& obs) {
        return report_dict(averaging::semiprime_average(
            sk, make_observable(obs, sk.alphabet_size()), table, N, r));
      },
      py::arg("skeleton"), py::arg("table"), py::arg("N"), py::arg("r") = 0,
      py::arg("obs") = "parity");
  m.def(
      "poly_average",
      [](const toeplitz::ToeplitzSkeleton& sk, const polyres::PolynomialSpec& P, std::int64_t N,
         std::int64_t r, const std::string& obs) {
        return report_dict(
            averaging::poly_average(sk, P, make_observable(obs, sk.alphabet_size()), N, r));
      },
      py::arg("skeleton"), py::arg("P"), py::arg("N"), py::arg("r") = 0,
      py::arg("obs") = "parity");
  m.def(
      "predicted_prime_limit",
      [](const toeplitz::ToeplitzSkeleton& sk, int stage, std::int64_t r, const std::string& obs) {
        const auto pred = averaging::predicted_prime_limit(
            sk, stage, make_observable(obs, sk.alphabet_size()), r);
        py::dict d;
        d["value"] = pred.value;
        d["error_bound"] = pred.error_bound;
        d["stage_modulus"] = pred.stage_modulus;
        d["holes"] = pred.holes;
        return d;
      },
      py::arg("skeleton"), py::arg("stage"), py::arg("r") = 0, py::arg("obs") = "parity");
  m.def(
      "predicted_poly_limit",
      [](const toeplitz::ToeplitzSkeleton& sk, const polyres::PolynomialSpec& P, int stage,
         std::int64_t r, const std::string& obs) {
        const auto pred = averaging::predicted_poly_limit(
            sk, P, stage, make_observable(obs, sk.alphabet_size()), r);
        py::dict d;
        d["value"] = pred.value;
        d["error_bound"] = pred.error_bound;
        d["stage_modulus"] = pred.stage_modulus;
        d["holes"] = pred.holes;
        return d;
      },
      py::arg("skeleton"), py::arg("P"), py::arg("stage"), py::arg("r") = 0,
      py::arg("obs") = "parity");
  m.def(
      "oscillation_witness",
      [](const toeplitz::ToeplitzSkeleton& sk, const std::string& kind,
         const std::vector<int>& stages, const arith::PrimeTable& table) {
        const auto points = averaging::oscillation_witness(
            sk, averaging::index_kind_from_name(kind), stages,
            averaging::ObservableSpec::parity(), table);
        py::list out;
        for (const auto& pt : points) {
          py::dict d;
          d["stage"] = pt.stage;
          d["scale"] = pt.scale;
          d["value"] = pt.value;
          if (pt.gap) d["gap"] = *pt.gap;
          out.append(d);
        }
        return out;
      },
      py::arg("skeleton"), py::arg("kind"), py::arg("stages"), py::arg("table"));

  // sturmian ----------------------------------------------------------------
  py::class_<sturmian::RotationSpec>(m, "RotationSpec")
      .def_static("golden", &sturmian::RotationSpec::golden)
      .def_static("golden_conjugate", &sturmian::RotationSpec::golden_conjugate)
      .def_readonly("description", &sturmian::RotationSpec::description)
      .def_property_readonly("alpha",
                             [](const sturmian::RotationSpec& s) { return s.alpha.to_double(); })
      .def_property_readonly("beta",
                             [](const sturmian::RotationSpec& s) { return s.beta.to_double(); })
      .def("surrogate_gap_bound", &sturmian::RotationSpec::surrogate_gap_bound);

  m.def("sturmian_code", &sturmian::code, py::arg("spec"), py::arg("k"));
  m.def(
      "prime_orbit_average",
      [](const sturmian::RotationSpec& spec, const arith::PrimeTable& table, std::int64_t N,
         const std::string& obs) {
        return report_dict(sturmian::prime_orbit_average(spec, make_observable(obs, 2), table, N));
      },
      py::arg("spec"), py::arg("table"), py::arg("N"), py::arg("obs") = "indicator:0");
  m.def("vinogradov_sum",
        [](const sturmian::RotationSpec& spec, const arith::PrimeTable& table, std::int64_t N) {
          return sturmian::vinogradov_sum(spec.alpha, table, N);
        });

  // acceptance ---------------------------------------------------------------
  m.def("run_acceptance", []() {
    std::ostringstream os;
    const int failures = acceptance::run_acceptance(os);
    return py::make_tuple(failures, os.str());
  });
}
