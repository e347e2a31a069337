#pragma once

#include "fincds/surd.hpp"
#include "fincds/system.hpp"

#include <string>
#include <vector>

namespace fincds {

/// The primitive coefficientless sub-networks. g1*/g2*/g3* carry one CDS on
/// the main path; variants a-d differ in the colours of the attached arcs;
/// d1/d2 are plain relays.
enum class FragmentKind { G1a, G1b, G1c, G1d, G2a, G2b, G2c, G2d, G3a, G3b, D1, D2 };

enum class FragmentClass { G1, G2, G3, D };

/// Arithmetic coefficient choice: Prime puts weight 1 on the fragment's
/// start-node liability arc, DoublePrime weight 2 (used right after a g3).
enum class Variant { None, Prime, DoublePrime };

FragmentClass fragment_class(FragmentKind k);
const char* fragment_kind_name(FragmentKind k);
FragmentKind fragment_kind_from_name(const std::string& name);

struct FragmentCell {
    FragmentKind kind;
    Variant variant = Variant::None;
};

struct FragmentString {
    std::vector<FragmentCell> cells;
    bool closed = false;

    std::string to_string(bool with_variants = false) const;
};

FragmentString parse_fragment_string(const std::string& text);

/// Concatenation: identifies the end node of a with the start node of b.
FragmentString merge(const FragmentString& a, const FragmentString& b);

/// Identifies the end node of the string with its start node.
FragmentString close_cycle(const FragmentString& s);

/// Assigns Prime/DoublePrime coefficients: a fragment preceded by a g3 gets
/// DoublePrime, everything else Prime. Requires every g3 to be followed by a
/// g1 or g2 fragment.
FragmentString assign_arithmetic(const FragmentString& cycle);

/// r -> (p r + q) / (s r + t) with rational coefficients.
struct MoebiusTransform {
    Rational p, q, s, t;

    static MoebiusTransform identity() { return {Rational(1), Rational(0), Rational(0), Rational(1)}; }

    Rational determinant() const { return p * t - q * s; }
    QuadraticSurd apply(const QuadraticSurd& r) const;
    Rational apply(const Rational& r) const;
    /// Composition "this first, then next" via matrix multiplication.
    MoebiusTransform then(const MoebiusTransform& next) const;
    bool proportional_to(const MoebiusTransform& o) const;

    /// Solutions of apply(r) = r, i.e. roots of s r^2 + (t - p) r - q = 0.
    std::vector<QuadraticSurd> fixed_points() const;
    /// The unique fixed point inside [0,1]; NotRewritable otherwise.
    QuadraticSurd unit_fixed_point() const;
};

/// Transfer map of one arithmetic fragment given the next fragment in the
/// cycle (whose start-arc weight sets the context): g1-class fragments
/// yield (1-r)/(2-r), g2 and g3 yield 1/(3-r), relays the identity.
MoebiusTransform transfer_map(const FragmentCell& cell, const FragmentCell& follower);

MoebiusTransform compose_transfers(const std::vector<MoebiusTransform>& maps);
MoebiusTransform compose_cycle(const FragmentString& cycle);

/// Rewriting rules on arithmetic fragment cycles, positional:
///   0: g_i^{j} -> g_i^{a} (same variant)
///   1: g2a -> g1a g1a when followed by a prime a-kind or a relay
///   2: g3a g_i^{a''} -> g2a' g_i^{a'}
///   3: drop a d1'/d2' relay
FragmentString rewrite(const FragmentString& cycle, int rule, std::size_t position);

/// Applies rules 0, 3, 2, 1 in that order until the cycle is a run of
/// g1a-prime fragments; NotRewritable when stuck.
FragmentString rewrite_to_canonical(const FragmentString& cycle);

/// Clearing rate of the cycle's start node, as the unit-interval root of the
/// composed transfer's fixed-point quadratic. Requires the cycle to be
/// rewritable to g1a-prime copies; for those the quadratic is r^2 - 3r + 1.
QuadraticSurd solve_cycle_closed_form(const FragmentString& cycle);

/// Fibonacci numbers with f(-1) = 1, f(0) = 0.
Int fibonacci(int k);
/// The k-fold g1a-prime transfer (f_k - r f_{k-2}) / (f_{k+2} - r f_k).
MoebiusTransform fibonacci_transfer(int k);

struct EmittedInstance {
    FinancialSystem sys;
    std::vector<std::string> path_banks;      // start node of fragment i
    std::vector<QuadraticSurd> solution;      // exact clearing vector
};

/// Concrete financial system realizing an arithmetic fragment cycle: the
/// catalog coefficients on fragment banks, external reference banks grounded
/// by a unit debt to a fresh sink (rate 0), everything else zero assets.
FinancialSystem emit_financial_system(const FragmentString& cycle);

/// Emission plus the exact surd clearing vector derived from the closed form.
EmittedInstance emit_with_solution(const FragmentString& cycle);

}  // namespace fincds
