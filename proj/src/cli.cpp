#include "fincds/cli.hpp"

#include "fincds/clearing.hpp"
#include "fincds/errors.hpp"
#include "fincds/fragments.hpp"
#include "fincds/graph.hpp"
#include "fincds/io.hpp"
#include "fincds/solvers.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <sstream>

namespace fincds {

namespace {

std::string float_str(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

std::string rational_tuple(const std::vector<Rational>& v) {
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_rational(v[i]);
    }
    return out + ")";
}

std::string float_tuple(const std::vector<double>& v) {
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += float_str(v[i]);
    }
    return out + ")";
}

std::string cycle_str(const FinancialSystem& sys, const CycleWitness& w) {
    std::string out;
    for (int v : w.vertices()) {
        if (!out.empty()) out += "→";
        out += sys.bank_id(v);
    }
    return out;
}

SolverOptions solver_options_from_env(int branch_bits, std::size_t warn_bits) {
    SolverOptions opts;
    opts.max_branch_bits = branch_bits;
    opts.warn_bits = warn_bits;
    if (const char* env = std::getenv("FINCDS_BRANCH_CAP_BITS")) {
        int v = std::atoi(env);
        if (v > 0) opts.max_branch_bits = v;
    }
    return opts;
}

void print_exact_report(std::ostream& out, const FinancialSystem& sys, const SolveReport& rep,
                        bool float_mode) {
    out << "solver: " << solver_kind_name(rep.solver) << "\n";
    out << "solutions: " << rep.solutions.size() << "\n";
    for (std::size_t i = 0; i < rep.solutions.size(); ++i) {
        if (float_mode) {
            std::vector<double> f;
            for (const auto& q : rep.solutions[i]) f.push_back(to_double(q));
            out << "solution " << (i + 1) << ": " << float_tuple(f) << "\n";
        } else {
            out << "solution " << (i + 1) << ": " << rational_tuple(rep.solutions[i]) << "\n";
        }
        out << "residual: 0\n";
    }
    out << "max coefficient bits: " << rep.max_coeff_bits << "\n";
    for (const auto& w : rep.warnings) out << "warning: " << w << "\n";
    (void)sys;
}

void print_iterate_report(std::ostream& out, const SolveReport& rep) {
    out << "solver: iterate\n";
    out << "converged: " << (rep.converged ? "yes" : "no") << "\n";
    out << "iterations: " << rep.iterations << "\n";
    std::ostringstream res;
    res << std::setprecision(6) << std::scientific << rep.float_residual;
    out << "residual: " << res.str() << "\n";
    out << "solution 1: " << float_tuple(rep.float_solution) << "\n";
    for (const auto& w : rep.warnings) out << "warning: " << w << "\n";
}

int cmd_solve(const std::string& path, const std::string& solver, double eps, long max_iter,
              double damping, const std::string& mode, int branch_bits, std::size_t warn_bits,
              std::ostream& out) {
    FinancialSystem sys = normalize_system(parse_instance(read_file(path)));
    SolverOptions opts = solver_options_from_env(branch_bits, warn_bits);
    bool float_mode = mode == "float";

    auto run_iterate = [&] {
        IterateOptions iopts;
        iopts.eps = eps;
        iopts.max_iter = max_iter;
        iopts.damping = damping;
        SolveReport rep = iterate_clearing(sys, iopts);
        print_iterate_report(out, rep);
        return rep.converged ? 0 : 2;
    };

    if (solver == "acyclic") {
        print_exact_report(out, sys, solve_acyclic(sys), float_mode);
        return 0;
    }
    if (solver == "dedicated") {
        print_exact_report(out, sys, solve_dedicated(sys, opts), float_mode);
        return 0;
    }
    if (solver == "scc") {
        print_exact_report(out, sys, solve_no_weakly_switched(sys, opts), float_mode);
        return 0;
    }
    if (solver == "iterate") return run_iterate();

    // auto: acyclic, then the SCC procedure, then plain branch enumeration,
    // then damped iteration
    AuxiliaryGraph aux = build_auxiliary_graph(sys);
    if (is_acyclic(aux)) {
        print_exact_report(out, sys, solve_acyclic(sys), float_mode);
        return 0;
    }
    bool nondeg = check_nondegenerate(sys).ok;
    if (nondeg && !find_weakly_switched_cycle(aux)) {
        print_exact_report(out, sys, solve_no_weakly_switched(sys, opts), float_mode);
        return 0;
    }
    if (nondeg && check_dedicated_cds_debtor(sys).ok) {
        print_exact_report(out, sys, solve_dedicated(sys, opts), float_mode);
        return 0;
    }
    return run_iterate();
}

int cmd_analyze(const std::string& path, std::ostream& out) {
    FinancialSystem sys = normalize_system(parse_instance(read_file(path)));
    AuxiliaryGraph aux = build_auxiliary_graph(sys);

    out << "banks: " << sys.bank_count() << "\n";
    out << "contracts: " << sys.contracts().size() << "\n";
    auto nondeg = check_nondegenerate(sys);
    out << "non-degenerate: " << (nondeg.ok ? "yes" : "no") << "\n";
    for (auto [bank, cond] : nondeg.violations)
        out << "  violation: bank " << sys.bank_id(bank) << " fails condition " << cond << "\n";
    out << "acyclic: " << (is_acyclic(aux) ? "yes" : "no") << "\n";

    for (int v = 0; v < aux.n; ++v) {
        SwitchClass s = classify_switch(aux, v);
        if (s != SwitchClass::Neither)
            out << "switch class: " << sys.bank_id(v) << " = " << switch_class_name(s) << "\n";
    }

    auto weak = find_weakly_switched_cycle(aux);
    auto strong = find_strongly_switched_cycle(aux);
    out << "weakly switched cycle: " << (weak ? cycle_str(sys, *weak) : "none") << "\n";
    out << "strongly switched cycle: " << (strong ? cycle_str(sys, *strong) : "none") << "\n";
    out << "weakly-but-not-strongly switched: " << ((weak && !strong) ? "yes" : "no") << "\n";
    auto simple = find_simple_strongly_switched_cycle(sys, aux);
    switch (simple.status) {
        case SimpleCycleSearch::Found:
            out << "simple strongly switched cycle: " << cycle_str(sys, *simple.witness) << "\n";
            break;
        case SimpleCycleSearch::Absent: out << "simple strongly switched cycle: none\n"; break;
        case SimpleCycleSearch::Inconclusive:
            out << "simple strongly switched cycle: inconclusive (cycle cap reached)\n";
            break;
    }

    Condensation cond = scc_condensation(aux);
    out << "sccs: " << cond.members.size() << "\n";
    out << "scc topological order:";
    for (int comp : cond.topo_order) {
        out << " {";
        for (std::size_t i = 0; i < cond.members[comp].size(); ++i)
            out << (i ? "," : "") << sys.bank_id(cond.members[comp][i]);
        out << "}";
    }
    out << "\n";
    auto ded = check_dedicated_cds_debtor(sys);
    out << "dedicated CDS debtor property: " << (ded.ok ? "yes" : "no");
    if (!ded.ok) {
        out << " (violations:";
        for (int b : ded.violations) out << " " << sys.bank_id(b);
        out << ")";
    }
    out << "\n";
    return 0;
}

int cmd_verify(const std::string& path, const std::string& vector_path, const std::string& eps_text,
               const std::string& mode, std::ostream& out) {
    FinancialSystem sys = normalize_system(parse_instance(read_file(path)));
    NumericMode m = mode == "float" ? NumericMode::Float : NumericMode::Rational;
    RecoveryVector r = parse_recovery_vector(read_file(vector_path), sys, m);
    Rational eps = parse_rational(eps_text);
    if (m == NumericMode::Rational) {
        Rational res = clearing_residual_exact(sys, r);
        out << "residual: " << format_rational(res) << "\n";
        out << "clearing: " << (is_clearing(sys, r) ? "yes" : "no") << "\n";
    } else {
        double res = clearing_residual_float(sys, r.flt);
        std::ostringstream os;
        os << std::setprecision(6) << std::scientific << res;
        out << "residual: " << os.str() << "\n";
        out << "clearing: unknown (float mode)\n";
    }
    out << "weak-eps (" << format_rational(eps) << "): " << (is_weak_eps(sys, r, eps) ? "yes" : "no")
        << "\n";
    return 0;
}

int cmd_export_dot(const std::string& path, std::ostream& out) {
    FinancialSystem sys = normalize_system(parse_instance(read_file(path)));
    out << export_dot(sys);
    return 0;
}

int cmd_compile(const std::string& path, std::string out_instance, std::string out_portmap,
                std::ostream& out) {
    Circuit source = parse_circuit(read_file(path));
    Circuit normalized = normalize_pipeline(source);
    CompiledNetwork net = compile_circuit(normalized);
    std::string stem = path;
    auto dot = stem.rfind('.');
    if (dot != std::string::npos) stem = stem.substr(0, dot);
    if (out_instance.empty()) out_instance = stem + ".instance.json";
    if (out_portmap.empty()) out_portmap = stem + ".portmap.json";
    write_file(out_instance, serialize_instance(net.sys));
    write_file(out_portmap, serialize_portmap(normalized, net));
    out << "normalized gates: " << normalized.gates.size() << "\n";
    if (normalized.norm) {
        out << "scaling exponent d: " << normalized.norm->d << "\n";
        out << "constant scale: " << format_rational(normalized.norm->const_scale) << "\n";
    }
    out << "banks: " << net.sys.bank_count() << "\n";
    out << "contracts: " << net.sys.contracts().size() << "\n";
    out << "instance: " << out_instance << "\n";
    out << "portmap: " << out_portmap << "\n";
    return 0;
}

int cmd_fragment(const std::string& spec, bool do_solve, bool do_rewrite, bool do_emit,
                 const std::string& out_path, std::ostream& out) {
    FragmentString cycle = close_cycle(parse_fragment_string(spec));
    FragmentString arithmetic = assign_arithmetic(cycle);
    if (do_rewrite) {
        FragmentString canonical = rewrite_to_canonical(arithmetic);
        out << canonical.to_string() << "\n";
    }
    if (do_solve) {
        QuadraticSurd r = solve_cycle_closed_form(arithmetic);
        out << r.to_string() << " ≈ " << r.to_decimal(30) << "...\n";
    }
    if (do_emit) {
        FinancialSystem sys = emit_financial_system(arithmetic);
        std::string text = serialize_instance(sys);
        if (out_path.empty())
            out << text;
        else {
            write_file(out_path, text);
            out << "instance: " << out_path << "\n";
        }
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Clearing engine and structural analyzer for financial networks with CDSes"};
    app.require_subcommand(1);

    std::string path, vector_path, solver = "auto", mode = "rational", eps_text = "1/1000000";
    std::string out_instance, out_portmap, fragment_spec, out_path;
    double eps = 1e-9, damping = 0.5;
    long max_iter = 100000;
    int branch_bits = 20;
    std::size_t warn_bits = 10000;
    bool do_solve = false, do_rewrite = false, do_emit = false;

    auto* solve = app.add_subcommand("solve", "compute clearing recovery rates");
    solve->add_option("instance", path)->required();
    solve->add_option("--solver", solver)->check(CLI::IsMember({"auto", "acyclic", "dedicated", "scc", "iterate"}));
    solve->add_option("--eps", eps);
    solve->add_option("--max-iter", max_iter);
    solve->add_option("--damping", damping);
    solve->add_option("--mode", mode)->check(CLI::IsMember({"rational", "float"}));
    solve->add_option("--branch-cap-bits", branch_bits);
    solve->add_option("--warn-bits", warn_bits);

    auto* analyze = app.add_subcommand("analyze", "cycle structure and property report");
    analyze->add_option("instance", path)->required();

    auto* verify = app.add_subcommand("verify", "check a candidate recovery vector");
    verify->add_option("instance", path)->required();
    verify->add_option("vector", vector_path)->required();
    verify->add_option("--eps", eps_text);
    verify->add_option("--mode", mode)->check(CLI::IsMember({"rational", "float"}));

    auto* dot = app.add_subcommand("export-dot", "emit the contract graph as DOT");
    dot->add_option("instance", path)->required();

    auto* compile = app.add_subcommand("compile", "normalize a circuit and compile it to a network");
    compile->add_option("circuit", path)->required();
    compile->add_option("--out-instance", out_instance);
    compile->add_option("--out-portmap", out_portmap);

    auto* fragment = app.add_subcommand("fragment", "fragment-cycle algebra");
    fragment->add_option("spec", fragment_spec)->required();
    fragment->add_flag("--solve", do_solve);
    fragment->add_flag("--rewrite", do_rewrite);
    fragment->add_flag("--emit", do_emit);
    fragment->add_option("--out", out_path);

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (solve->parsed())
            return cmd_solve(path, solver, eps, max_iter, damping, mode, branch_bits, warn_bits, out);
        if (analyze->parsed()) return cmd_analyze(path, out);
        if (verify->parsed()) return cmd_verify(path, vector_path, eps_text, mode, out);
        if (dot->parsed()) return cmd_export_dot(path, out);
        if (compile->parsed()) return cmd_compile(path, out_instance, out_portmap, out);
        if (fragment->parsed()) {
            if (!do_solve && !do_rewrite && !do_emit) {
                err << "error: fragment needs --solve, --rewrite or --emit\n";
                return 1;
            }
            return cmd_fragment(fragment_spec, do_solve, do_rewrite, do_emit, out_path, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return is_precondition_failure(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace fincds
