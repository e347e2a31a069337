#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fincds/errors.hpp"
#include "fincds/fragments.hpp"
#include "fincds/graph.hpp"
#include "fincds/solvers.hpp"

#include "helpers.hpp"

#include <cmath>
#include <random>

using namespace fincds;
using namespace fincds::testing;

namespace {

const QuadraticSurd kGolden(Rational(3, 2), Rational(-1, 2), 5);  // (3 - sqrt 5)/2

FragmentString cycle_of(const std::string& spec) {
    return assign_arithmetic(close_cycle(parse_fragment_string(spec)));
}

FragmentString repeat_g1a(int k) {
    FragmentString s;
    for (int i = 0; i < k; ++i) s.cells.push_back({FragmentKind::G1a, Variant::None});
    return assign_arithmetic(close_cycle(s));
}

}  // namespace

TEST_CASE("merge and closure") {
    FragmentString a = parse_fragment_string("g1a");
    FragmentString two = merge(a, a);
    CHECK(two.cells.size() == 2);
    CHECK(two.to_string() == "g1a.g1a");

    FragmentString cyc = close_cycle(parse_fragment_string("g1a.g2b.d1.d2"));
    CHECK(cyc.closed);
    CHECK(cyc.to_string() == "g1a.g2b.d1.d2");
    CHECK_THROWS_AS(close_cycle(cyc), Error);
    CHECK_THROWS_AS(merge(cyc, a), Error);
    CHECK_THROWS_AS(parse_fragment_string("g9z"), Error);
}

TEST_CASE("arithmetic coefficient assignment") {
    FragmentString c = cycle_of("g3a.g1a.g1a");
    CHECK(c.cells[0].variant == Variant::Prime);        // preceded by g1a
    CHECK(c.cells[1].variant == Variant::DoublePrime);  // preceded by g3a
    CHECK(c.cells[2].variant == Variant::Prime);
    CHECK(c.to_string(true) == "g3a'.g1a''.g1a'");

    FragmentString plain = cycle_of("g1a.g1a");
    for (const auto& cell : plain.cells) CHECK(cell.variant == Variant::Prime);

    bool rejected = false;
    try {
        cycle_of("g3a.d1.g1a");
    } catch (const Error& e) {
        rejected = e.code() == ErrorCode::G3FollowedByG3OrD;
    }
    CHECK(rejected);
    CHECK_THROWS_AS(cycle_of("g3a.g3b.g1a"), Error);
}

TEST_CASE("transfer maps and composition") {
    FragmentCell g1a{FragmentKind::G1a, Variant::Prime};
    FragmentCell d1{FragmentKind::D1, Variant::Prime};
    MoebiusTransform m = transfer_map(g1a, g1a);
    CHECK(m.p == Rational(-1));
    CHECK(m.q == Rational(1));
    CHECK(m.s == Rational(-1));
    CHECK(m.t == Rational(2));
    CHECK(m.apply(Rational(0)) == Rational(1, 2));

    MoebiusTransform twice = m.then(m);
    MoebiusTransform one_over_three_minus_r{Rational(0), Rational(1), Rational(-1), Rational(3)};
    CHECK(twice.proportional_to(one_over_three_minus_r));

    CHECK(transfer_map(d1, g1a).proportional_to(MoebiusTransform::identity()));

    // context violations: a g1 before a double-prime, a g3 before a prime
    FragmentCell dd{FragmentKind::G1a, Variant::DoublePrime};
    FragmentCell g3{FragmentKind::G3a, Variant::Prime};
    CHECK_THROWS_AS(transfer_map(g1a, dd), Error);
    CHECK_THROWS_AS(transfer_map(g3, g1a), Error);
    CHECK(transfer_map(g3, dd).proportional_to(one_over_three_minus_r));
}

TEST_CASE("rewriting the worked cycle down to g1a copies") {
    FragmentString cyc = cycle_of("g1a.g2b.d1.d2");
    FragmentString r0 = rewrite(cyc, 0, 1);
    CHECK(r0.to_string(true) == "g1a'.g2a'.d1'.d2'");
    FragmentString r3 = rewrite(rewrite(r0, 3, 3), 3, 2);
    CHECK(r3.to_string(true) == "g1a'.g2a'");
    FragmentString r1 = rewrite(r3, 1, 1);
    CHECK(r1.to_string(true) == "g1a'.g1a'.g1a'");

    CHECK(rewrite_to_canonical(cyc).to_string() == "g1a.g1a.g1a");

    FragmentString pair = cycle_of("g3a.g1a");
    FragmentString r2 = rewrite(pair, 2, 0);
    CHECK(r2.to_string(true) == "g2a'.g1a'");

    CHECK_THROWS_AS(rewrite(cycle_of("g1a.g1a"), 3, 0), Error);   // no relay to drop
    CHECK_THROWS_AS(rewrite(cycle_of("g1a.g1a"), 0, 0), Error);   // already the a-variant
}

TEST_CASE("every rule application preserves the composed transfer") {
    std::mt19937 rng(61);
    const std::string pool[] = {"g1a", "g1b", "g1c", "g1d", "g2a", "g2b", "g2c",
                                "g2d", "g3a", "g3b", "d1",  "d2"};
    int tested = 0;
    for (int trial = 0; trial < 300 && tested < 120; ++trial) {
        std::string spec;
        int len = 2 + static_cast<int>(rng() % 4);
        for (int i = 0; i < len; ++i) spec += (i ? "." : "") + pool[rng() % 12];
        FragmentString cyc;
        try {
            cyc = cycle_of(spec);
        } catch (const Error&) {
            continue;
        }
        MoebiusTransform before = compose_cycle(cyc);
        for (int rule = 0; rule <= 3; ++rule) {
            for (std::size_t pos = 0; pos < cyc.cells.size(); ++pos) {
                FragmentString after;
                try {
                    after = rewrite(cyc, rule, pos);
                } catch (const Error&) {
                    continue;
                }
                ++tested;
                CHECK(compose_cycle(after).proportional_to(before));
            }
        }
    }
    CHECK(tested >= 60);
}

TEST_CASE("fibonacci closed form for chained fragments") {
    CHECK(fibonacci(-1) == 1);
    CHECK(fibonacci(0) == 0);
    CHECK(fibonacci(10) == 55);

    FragmentCell g1a{FragmentKind::G1a, Variant::Prime};
    MoebiusTransform single = transfer_map(g1a, g1a);
    MoebiusTransform acc = MoebiusTransform::identity();
    for (int k = 1; k <= 12; ++k) {
        acc = acc.then(single);
        MoebiusTransform fib = fibonacci_transfer(k);
        CHECK(acc.p == fib.p);
        CHECK(acc.q == fib.q);
        CHECK(acc.s == fib.s);
        CHECK(acc.t == fib.t);
    }
    // (f2 - r f0) / (f4 - r f2) is 1/(3 - r)
    MoebiusTransform f2 = fibonacci_transfer(2);
    CHECK(f2.apply(Rational(1, 3)) == Rational(1) / Rational(8, 3));
}

TEST_CASE("closed form solves to the golden quadratic for any length") {
    for (int k = 1; k <= 8; ++k) {
        QuadraticSurd r = solve_cycle_closed_form(repeat_g1a(k));
        CHECK(r == kGolden);
        CHECK(r.surd_coefficient() != 0);  // irrational witness
    }
    CHECK(solve_cycle_closed_form(cycle_of("g1a.g2b.d1.d2")) == kGolden);

    bool not_rewritable = false;
    try {
        solve_cycle_closed_form(cycle_of("d1.d2"));
    } catch (const Error& e) {
        not_rewritable = e.code() == ErrorCode::NotRewritable;
    }
    CHECK(not_rewritable);
}

TEST_CASE("emitted instances carry the closed-form clearing vector exactly") {
    for (const std::string spec : {"g1a.g1a", "g1a.g1a.g1a", "g1a.g2b.d1.d2", "g3a.g1a.g2a",
                                   "g1b.g2a", "g1c.g1d.g2c", "g2d.g1a", "g3b.g2b.d1"}) {
        FragmentString cyc = cycle_of(spec);
        EmittedInstance inst = emit_with_solution(cyc);
        REQUIRE(inst.solution.size() == static_cast<std::size_t>(inst.sys.bank_count()));
        QuadraticSurd residual = clearing_residual_t(inst.sys, inst.solution);
        CHECK(residual.sign() == 0);

        AuxiliaryGraph aux = build_auxiliary_graph(inst.sys);
        auto strong = find_strongly_switched_cycle(aux);
        CHECK(strong.has_value());

        IterateOptions opts;
        opts.eps = 1e-10;
        opts.max_iter = 500000;
        SolveReport rep = iterate_clearing(inst.sys, opts);
        CHECK(rep.converged);
        int start = inst.sys.bank_index(inst.path_banks[0]);
        CHECK(std::fabs(rep.float_solution[start] - inst.solution[start].to_double()) < 1e-8);
    }

    // fragments whose attachments are all debt contracts put nothing in the
    // way of the degeneracy conditions
    for (const std::string spec : {"g1a.g1a", "g1a.g1b", "g2a.g1a", "g2b.g1b", "g3a.g1a.d1"}) {
        EmittedInstance inst = emit_with_solution(cycle_of(spec));
        CHECK(check_nondegenerate(inst.sys).ok);
    }

    // a single fragment emits through a spliced relay
    EmittedInstance one = emit_with_solution(repeat_g1a(1));
    CHECK(clearing_residual_t(one.sys, one.solution).sign() == 0);
    CHECK(check_nondegenerate(one.sys).ok);
}

TEST_CASE("the irrational benchmark quadratic via the transfer machinery") {
    // each half of the eight-bank benchmark maps r to (1/2)/(2 - r)
    MoebiusTransform half{Rational(0), Rational(1, 2), Rational(-1), Rational(2)};
    MoebiusTransform loop = half.then(half);
    QuadraticSurd rho = loop.unit_fixed_point();
    QuadraticSurd expected(Rational(1), Rational(-1, 2), 2);  // 1 - sqrt(2)/2
    CHECK(rho == expected);

    // zero residual of 2 r^2 - 4 r + 1 at the surd
    QuadraticSurd q = QuadraticSurd(Rational(2)) * rho * rho - QuadraticSurd(Rational(4)) * rho +
                      QuadraticSurd(Rational(1));
    CHECK(q.sign() == 0);

    // and the full benchmark system clears exactly at the surd vector
    FinancialSystem fig2 = load_instance("figure2.json");
    std::vector<QuadraticSurd> vec(fig2.bank_count(), QuadraticSurd(Rational(1)));
    for (const char* id : {"2", "3", "6", "7"}) vec[fig2.bank_index(id)] = rho;
    CHECK(clearing_residual_t(fig2, vec).sign() == 0);
}
