#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fincds/compiler.hpp"
#include "fincds/errors.hpp"
#include "fincds/solvers.hpp"

#include "helpers.hpp"

#include <cmath>

using namespace fincds;
using namespace fincds::testing;

TEST_CASE("gadget harnesses reproduce their semantics") {
    GadgetParams none;
    GadgetCheckResult add = run_gadget_check(GadgetKind::Add, none, {Rational(1, 4), Rational(1, 2)});
    CHECK(add.ok);
    CHECK(add.exact);
    CHECK(add.exact_rates == std::vector<Rational>{Rational(3, 4)});

    GadgetCheckResult inv = run_gadget_check(GadgetKind::Inv, none, {Rational(1, 3)});
    CHECK(inv.ok);
    CHECK(inv.exact_rates == std::vector<Rational>{Rational(2, 3)});

    GadgetParams quarter;
    quarter.c = Rational(1, 4);
    GadgetCheckResult sq = run_gadget_check(GadgetKind::SqrtConst, quarter, {});
    CHECK(sq.ok);
    REQUIRE(sq.float_rates.size() == 1);
    CHECK(sq.float_rates[0] == doctest::Approx(0.5).epsilon(1e-12));

    GadgetCheckResult mul = run_gadget_check(GadgetKind::Mul, none, {Rational(1, 2), Rational(1, 2)});
    CHECK(mul.ok);
    CHECK(mul.exact);
    CHECK(mul.exact_rates == std::vector<Rational>{Rational(1, 4)});

    GadgetCheckResult pos = run_gadget_check(GadgetKind::PosSub, none, {Rational(1, 4), Rational(1, 2)});
    CHECK(pos.ok);
    CHECK(pos.exact_rates == std::vector<Rational>{Rational(0)});

    GadgetParams unit;
    unit.c = Rational(1);
    GadgetCheckResult dup = run_gadget_check(GadgetKind::Dup, unit, {Rational(2, 3)});
    CHECK(dup.ok);
    CHECK(dup.exact_rates == std::vector<Rational>{Rational(2, 3), Rational(2, 3)});

    GadgetCheckResult root = run_gadget_check(GadgetKind::Sqrt, none, {Rational(9, 16)});
    CHECK(root.ok);
    REQUIRE(root.float_rates.size() == 1);
    CHECK(root.float_rates[0] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("degenerate kinds work but fail the degeneracy check") {
    GadgetParams flagged;
    flagged.allow_degenerate = true;
    GadgetCheckResult dm =
        run_gadget_check(GadgetKind::DegenerateMul, flagged, {Rational(1, 2), Rational(1, 3)});
    CHECK(dm.ok);
    CHECK(dm.exact_rates == std::vector<Rational>{Rational(1, 6)});

    GadgetCheckResult dd =
        run_gadget_check(GadgetKind::DegenerateDiv, flagged, {Rational(1, 4), Rational(1, 2)});
    CHECK(dd.ok);
    CHECK(dd.exact_rates == std::vector<Rational>{Rational(1, 2)});
    GadgetCheckResult dd0 =
        run_gadget_check(GadgetKind::DegenerateDiv, flagged, {Rational(1, 4), Rational(0)});
    CHECK(dd0.ok);
    CHECK(dd0.exact_rates == std::vector<Rational>{Rational(1)});

    for (GadgetKind k : {GadgetKind::DegenerateMul, GadgetKind::DegenerateDiv}) {
        bool refused = false;
        try {
            instantiate_gadget(k);
        } catch (const Error& e) {
            refused = e.code() == ErrorCode::DegenerateKindRequiresFlag;
        }
        CHECK(refused);
        FinancialSystem harness = gadget_harness(instantiate_gadget(k, flagged),
                                                 {Rational(1, 2), Rational(1, 2)}, nullptr);
        CHECK_FALSE(check_nondegenerate(harness).ok);
    }

    // the production kinds are all non-degenerate in harness
    GadgetParams unit;
    unit.c = Rational(1, 2);
    unit.q = Rational(3, 2);
    for (GadgetKind k : {GadgetKind::Add, GadgetKind::Dup, GadgetKind::ScaleConst, GadgetKind::PosSub,
                         GadgetKind::AbsDiff, GadgetKind::Inv, GadgetKind::Sqrt, GadgetKind::SqrtConst,
                         GadgetKind::Mul, GadgetKind::Max, GadgetKind::Min, GadgetKind::ConstSource,
                         GadgetKind::ScaleRationalGuarded}) {
        GadgetTemplate t = instantiate_gadget(k, unit);
        std::vector<Rational> inputs(t.input_ports.size(), Rational(1, 2));
        FinancialSystem harness = gadget_harness(t, inputs, nullptr);
        CHECK(check_nondegenerate(harness).ok);
    }

    CHECK_THROWS_AS(instantiate_gadget(GadgetKind::ConstSource, {Rational(3, 2)}), Error);
}

TEST_CASE("guarded rational scaling") {
    GadgetParams p;
    p.q = Rational(7, 3);
    GadgetCheckResult r = run_gadget_check(GadgetKind::ScaleRationalGuarded, p, {Rational(1, 4)});
    CHECK(r.ok);
    CHECK(r.exact_rates == std::vector<Rational>{Rational(7, 12)});
}

TEST_CASE("compiled constant circuit pins the input rate") {
    Circuit c;
    int x = c.add_gate({GateKind::Input, -1, -1, Rational(0), 0});
    int half = c.add_gate({GateKind::Const, -1, -1, Rational(1, 2), -1});
    c.inputs = {x};
    c.outputs = {half};
    CompiledNetwork net = compile_circuit(c);
    CHECK(check_nondegenerate(net.sys).ok);
    SolveReport rep = solve_acyclic(net.sys);
    CHECK(rep.solutions[0][net.sys.bank_index("in0")] == Rational(1, 2));
}

TEST_CASE("compiled inversion fixes the midpoint") {
    // 1 - x as an absolute difference against the constant 1
    Circuit c;
    int x = c.add_gate({GateKind::Input, -1, -1, Rational(0), 0});
    int one = c.add_gate({GateKind::Const, -1, -1, Rational(1), -1});
    int inv = c.add_gate({GateKind::AbsDiff, one, x, Rational(0), -1});
    c.inputs = {x};
    c.outputs = {inv};
    CompiledNetwork net = compile_circuit(c);
    CHECK(check_nondegenerate(net.sys).ok);
    IterateOptions opts;
    opts.eps = 1e-12;
    opts.max_iter = 200000;
    SolveReport rep = iterate_clearing(net.sys, opts);
    CHECK(rep.converged);
    CHECK(rep.float_solution[net.sys.bank_index("in0")] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("compiled squaring keeps its endpoint fixed points") {
    Circuit c;
    int x = c.add_gate({GateKind::Input, -1, -1, Rational(0), 0});
    int sq = c.add_gate({GateKind::Mul, x, x, Rational(0), -1});
    c.inputs = {x};
    c.outputs = {sq};
    CompiledNetwork net = compile_circuit(c);
    CHECK(check_nondegenerate(net.sys).ok);

    IterateOptions opts;
    opts.eps = 1e-11;
    SolveReport rep = iterate_clearing(net.sys, opts);
    CHECK(rep.converged);
    double got = rep.float_solution[net.sys.bank_index("in0")];
    CHECK(std::min(std::fabs(got), std::fabs(got - 1.0)) < 1e-8);

    // planted fixed points clear; a non-fixed-point plant does not
    for (double planted : {0.0, 1.0}) {
        std::vector<double> full = plant_clearing_vector(net, {planted});
        CHECK(clearing_residual_float(net.sys, full) < 1e-12);
    }
    std::vector<double> off = plant_clearing_vector(net, {0.5});
    CHECK(clearing_residual_float(net.sys, off) > 0.2);
}

TEST_CASE("compile rejects non-normalized circuits") {
    Circuit c;
    int x = c.add_gate({GateKind::Input, -1, -1, Rational(0), 0});
    int one = c.add_gate({GateKind::Const, -1, -1, Rational(1), -1});
    int bad = c.add_gate({GateKind::Sub, one, x, Rational(0), -1});
    c.inputs = {x};
    c.outputs = {bad};
    bool refused = false;
    try {
        compile_circuit(c);
    } catch (const Error& e) {
        refused = e.code() == ErrorCode::NotNormalized;
    }
    CHECK(refused);
}
