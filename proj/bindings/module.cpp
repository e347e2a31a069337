#include "fincds/circuit.hpp"
#include "fincds/clearing.hpp"
#include "fincds/compiler.hpp"
#include "fincds/errors.hpp"
#include "fincds/fragments.hpp"
#include "fincds/graph.hpp"
#include "fincds/io.hpp"
#include "fincds/solvers.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <sstream>

namespace py = pybind11;
using namespace fincds;

namespace {

FinancialSystem system_from_json(const std::string& text) {
    return normalize_system(parse_instance(text));
}

std::map<std::string, std::string> rates_to_map(const FinancialSystem& sys,
                                                const std::vector<Rational>& r) {
    std::map<std::string, std::string> out;
    for (int i = 0; i < sys.bank_count(); ++i) out[sys.bank_id(i)] = format_rational(r[i]);
    return out;
}

std::map<std::string, double> rates_to_float_map(const FinancialSystem& sys,
                                                 const std::vector<double>& r) {
    std::map<std::string, double> out;
    for (int i = 0; i < sys.bank_count(); ++i) out[sys.bank_id(i)] = r[i];
    return out;
}

py::dict solve_json(const std::string& instance_json, const std::string& solver, double eps,
                    long max_iter, double damping) {
    FinancialSystem sys = system_from_json(instance_json);
    py::dict out;
    auto exact = [&](const SolveReport& rep) {
        out["solver"] = solver_kind_name(rep.solver);
        py::list sols;
        for (const auto& sol : rep.solutions) sols.append(rates_to_map(sys, sol));
        out["solutions"] = sols;
        out["warnings"] = rep.warnings;
        out["max_coeff_bits"] = rep.max_coeff_bits;
    };
    if (solver == "acyclic") {
        exact(solve_acyclic(sys));
    } else if (solver == "dedicated") {
        exact(solve_dedicated(sys));
    } else if (solver == "scc") {
        exact(solve_no_weakly_switched(sys));
    } else if (solver == "iterate") {
        IterateOptions opts;
        opts.eps = eps;
        opts.max_iter = max_iter;
        opts.damping = damping;
        SolveReport rep = iterate_clearing(sys, opts);
        out["solver"] = "iterate";
        out["converged"] = rep.converged;
        out["iterations"] = rep.iterations;
        out["residual"] = rep.float_residual;
        out["solution"] = rates_to_float_map(sys, rep.float_solution);
    } else {  // auto
        AuxiliaryGraph aux = build_auxiliary_graph(sys);
        bool nondeg = check_nondegenerate(sys).ok;
        if (is_acyclic(aux))
            exact(solve_acyclic(sys));
        else if (nondeg && !find_weakly_switched_cycle(aux))
            exact(solve_no_weakly_switched(sys));
        else if (nondeg && check_dedicated_cds_debtor(sys).ok)
            exact(solve_dedicated(sys));
        else
            return solve_json(instance_json, "iterate", eps, max_iter, damping);
    }
    return out;
}

py::dict analyze_json(const std::string& instance_json) {
    FinancialSystem sys = system_from_json(instance_json);
    AuxiliaryGraph aux = build_auxiliary_graph(sys);
    py::dict out;
    out["banks"] = sys.bank_count();
    out["contracts"] = sys.contracts().size();
    out["non_degenerate"] = check_nondegenerate(sys).ok;
    out["acyclic"] = is_acyclic(aux);
    py::dict switches;
    for (int v = 0; v < aux.n; ++v)
        switches[py::str(sys.bank_id(v))] = switch_class_name(classify_switch(aux, v));
    out["switch_classes"] = switches;
    auto cycle_ids = [&](const CycleWitness& w) {
        py::list ids;
        for (int v : w.vertices()) ids.append(sys.bank_id(v));
        return ids;
    };
    auto weak = find_weakly_switched_cycle(aux);
    auto strong = find_strongly_switched_cycle(aux);
    out["weakly_switched_cycle"] = weak ? py::object(cycle_ids(*weak)) : py::none();
    out["strongly_switched_cycle"] = strong ? py::object(cycle_ids(*strong)) : py::none();
    out["dedicated_cds_debtor"] = check_dedicated_cds_debtor(sys).ok;
    return out;
}

py::dict verify_json(const std::string& instance_json, const std::string& vector_json,
                     const std::string& eps) {
    FinancialSystem sys = system_from_json(instance_json);
    RecoveryVector r = parse_recovery_vector(vector_json, sys, NumericMode::Rational);
    py::dict out;
    out["residual"] = format_rational(clearing_residual_exact(sys, r));
    out["clearing"] = is_clearing(sys, r);
    out["weak_eps"] = is_weak_eps(sys, r, parse_rational(eps));
    return out;
}

py::tuple compile_json(const std::string& circuit_json) {
    Circuit source = parse_circuit(circuit_json);
    Circuit normalized = normalize_pipeline(source);
    CompiledNetwork net = compile_circuit(normalized);
    return py::make_tuple(serialize_instance(net.sys), serialize_portmap(normalized, net));
}

py::dict fragment_solve(const std::string& spec) {
    FragmentString cycle = assign_arithmetic(close_cycle(parse_fragment_string(spec)));
    QuadraticSurd r = solve_cycle_closed_form(cycle);
    py::dict out;
    out["surd"] = r.to_string();
    out["decimal"] = r.to_decimal(30);
    out["value"] = r.to_double();
    return out;
}

std::string fragment_rewrite(const std::string& spec) {
    FragmentString cycle = assign_arithmetic(close_cycle(parse_fragment_string(spec)));
    return rewrite_to_canonical(cycle).to_string();
}

std::string fragment_emit(const std::string& spec) {
    FragmentString cycle = assign_arithmetic(close_cycle(parse_fragment_string(spec)));
    return serialize_instance(emit_financial_system(cycle));
}

}  // namespace

PYBIND11_MODULE(_fincds, m) {
    m.doc() = "Clearing engine for financial networks with credit default swaps";

    py::register_exception<Error>(m, "FincdsError");

    m.def("solve", &solve_json, py::arg("instance_json"), py::arg("solver") = "auto",
          py::arg("eps") = 1e-9, py::arg("max_iter") = 100000L, py::arg("damping") = 0.5,
          "Solve an instance document; returns a dict with exact or float solutions.");
    m.def("analyze", &analyze_json, py::arg("instance_json"),
          "Structural report: non-degeneracy, acyclicity, switch classes, cycles.");
    m.def("verify", &verify_json, py::arg("instance_json"), py::arg("vector_json"),
          py::arg("eps") = "1/1000000", "Exact residual and clearing checks for a candidate vector.");
    m.def("compile_circuit", &compile_json, py::arg("circuit_json"),
          "Normalize a circuit and compile it; returns (instance_json, portmap_json).");
    m.def("fragment_solve", &fragment_solve, py::arg("spec"));
    m.def("fragment_rewrite", &fragment_rewrite, py::arg("spec"));
    m.def("fragment_emit", &fragment_emit, py::arg("spec"));
    m.def("export_dot", [](const std::string& instance_json) {
        return export_dot(system_from_json(instance_json));
    });
}
