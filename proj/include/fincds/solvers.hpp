#pragma once

#include "fincds/clearing.hpp"
#include "fincds/graph.hpp"
#include "fincds/system.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fincds {

/// Saturated/interior choice per min-expression of the piecewise-linear
/// dedicated-debtor map: one flag per non-CDS-debtor bank with positive
/// liabilities (its recovery rate) and one per CDS contract (its payment).
struct BranchAssignment {
    std::vector<std::string> flag_names;
    std::vector<bool> saturated;  // true: capped branch, false: interior
};

enum class SolverKind { Acyclic, Dedicated, NoWeaklySwitched, Iterate };

const char* solver_kind_name(SolverKind k);

struct SolveReport {
    SolverKind solver = SolverKind::Acyclic;
    // exact solvers: every entry verified clearing with zero residual
    std::vector<std::vector<Rational>> solutions;
    std::vector<BranchAssignment> branches;  // dedicated solver, per solution

    // iteration
    std::vector<double> float_solution;
    double float_residual = 0.0;
    bool converged = true;
    long iterations = 0;

    std::vector<std::string> warnings;
    std::size_t max_coeff_bits = 0;
};

struct SolverOptions {
    // branch enumeration refuses above 2^max_branch_bits assignments
    int max_branch_bits = 20;
    // coefficient-size growth warning threshold, in bits
    std::size_t warn_bits = 10000;
};

struct IterateOptions {
    double eps = 1e-9;
    long max_iter = 100000;
    double damping = 0.5;  // r <- (1-a) r + a f(r)
    std::optional<std::vector<double>> start;  // default all-ones
};

/// Unique exact clearing vector of an acyclic system, bank by bank in
/// topological order of the auxiliary graph.
SolveReport solve_acyclic(const FinancialSystem& sys);

/// Enumerates the 2^k branch assignments of the piecewise-linear fixed-point
/// map of a non-degenerate system with the dedicated-CDS-debtor property,
/// solves each induced linear system exactly, and returns every verified
/// clearing vector.
SolveReport solve_dedicated(const FinancialSystem& sys, const SolverOptions& opts = {});

/// Iterates strongly connected components of the auxiliary graph in
/// topological order, solving each component's induced subinstance with the
/// dedicated solver and threading computed payments forward as external
/// assets. Requires the absence of weakly switched cycles.
SolveReport solve_no_weakly_switched(const FinancialSystem& sys, const SolverOptions& opts = {});

/// Damped fixed-point iteration in floating point from the all-ones start.
/// Reports the final residual honestly; no convergence guarantee.
SolveReport iterate_clearing(const FinancialSystem& sys, const IterateOptions& opts = {});

/// Exact solutions from whichever exact solver applies (acyclic, then
/// no-weakly-switched, then dedicated); throws NoExactReference otherwise.
std::vector<std::vector<Rational>> exact_solutions(const FinancialSystem& sys,
                                                   const SolverOptions& opts = {});

/// True iff the candidate lies within eps (inf-norm, strict) of an exact
/// clearing vector; references default to exact_solutions(sys). Exact
/// references may be rational or surd vectors.
bool certify_strong(const FinancialSystem& sys, const RecoveryVector& candidate, const Rational& eps,
                    const std::vector<RecoveryVector>* references = nullptr);

namespace detail {

struct LinearSolveResult {
    enum Kind { Unique, Inconsistent, Underdetermined } kind = Unique;
    std::vector<Rational> x;
};

/// Gauss-Jordan over rationals on [A | b]. Underdetermined systems take the
/// provided hint values for free variables.
LinearSolveResult solve_linear(std::vector<std::vector<Rational>> a, std::vector<Rational> b,
                               const std::vector<Rational>& free_hint);

}  // namespace detail

}  // namespace fincds
