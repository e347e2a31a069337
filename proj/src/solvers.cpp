#include "fincds/solvers.hpp"

#include "fincds/errors.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <thread>

namespace fincds {

const char* solver_kind_name(SolverKind k) {
    switch (k) {
        case SolverKind::Acyclic: return "acyclic";
        case SolverKind::Dedicated: return "dedicated";
        case SolverKind::NoWeaklySwitched: return "scc";
        case SolverKind::Iterate: return "iterate";
    }
    return "?";
}

namespace detail {

LinearSolveResult solve_linear(std::vector<std::vector<Rational>> a, std::vector<Rational> b,
                               const std::vector<Rational>& free_hint) {
    const std::size_t rows = a.size();
    const std::size_t cols = rows ? a[0].size() : 0;
    std::vector<int> pivot_of_col(cols, -1);
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t pivot = rank;
        while (pivot < rows && a[pivot][col] == 0) ++pivot;
        if (pivot == rows) continue;
        std::swap(a[pivot], a[rank]);
        std::swap(b[pivot], b[rank]);
        Rational inv = a[rank][col];
        for (std::size_t j = col; j < cols; ++j) a[rank][j] /= inv;
        b[rank] /= inv;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank || a[r][col] == 0) continue;
            Rational factor = a[r][col];
            for (std::size_t j = col; j < cols; ++j) a[r][j] -= factor * a[rank][j];
            b[r] -= factor * b[rank];
        }
        pivot_of_col[col] = static_cast<int>(rank);
        ++rank;
    }
    LinearSolveResult out;
    for (std::size_t r = rank; r < rows; ++r)
        if (b[r] != 0) {
            out.kind = LinearSolveResult::Inconsistent;
            return out;
        }
    out.x.assign(cols, Rational(0));
    bool under = false;
    for (std::size_t col = 0; col < cols; ++col)
        if (pivot_of_col[col] == -1) {
            under = true;
            out.x[col] = col < free_hint.size() ? free_hint[col] : Rational(0);
        }
    for (std::size_t col = 0; col < cols; ++col) {
        int r = pivot_of_col[col];
        if (r == -1) continue;
        Rational v = b[r];
        for (std::size_t j = 0; j < cols; ++j)
            if (j != col && a[r][j] != 0) v -= a[r][j] * out.x[j];
        out.x[col] = v;
    }
    out.kind = under ? LinearSolveResult::Underdetermined : LinearSolveResult::Unique;
    return out;
}

}  // namespace detail

namespace {

std::size_t vector_bit_size(const std::vector<Rational>& v) {
    std::size_t bits = 0;
    for (const auto& q : v) bits = std::max(bits, rational_bit_size(q));
    return bits;
}

std::vector<int> topological_vertex_order(const AuxiliaryGraph& aux) {
    auto adj = aux.successors();
    std::vector<int> indeg(aux.n, 0);
    for (int v = 0; v < aux.n; ++v)
        for (int w : adj[v]) ++indeg[w];
    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (int v = 0; v < aux.n; ++v)
        if (indeg[v] == 0) ready.push(v);
    std::vector<int> order;
    while (!ready.empty()) {
        int v = ready.top();
        ready.pop();
        order.push_back(v);
        for (int w : adj[v])
            if (--indeg[w] == 0) ready.push(w);
    }
    if (static_cast<int>(order.size()) != aux.n)
        throw Error(ErrorCode::NotAcyclic, "auxiliary graph has a directed cycle");
    return order;
}

Rational clamped_rate(const Rational& a, const Rational& l) {
    if (l == 0) return Rational(1);
    if (a >= l) return Rational(1);
    return a / l;
}

}  // namespace

SolveReport solve_acyclic(const FinancialSystem& sys) {
    AuxiliaryGraph aux = build_auxiliary_graph(sys);
    std::vector<int> order = topological_vertex_order(aux);

    int n = sys.bank_count();
    std::vector<Rational> r(n, Rational(0));
    std::vector<char> known(n, 0);
    for (int v : order) {
        // liabilities and assets of v depend only on already-solved banks
        Rational liab(0), asset(sys.external_assets(v));
        for (const Contract& c : sys.contracts()) {
            if (c.debtor == v) {
                Rational amount = c.notional;
                if (c.is_cds()) amount *= (Rational(1) - r[c.reference]);
                liab += amount;
            }
            if (c.creditor == v) {
                Rational amount = c.notional;
                if (c.is_cds()) amount *= (Rational(1) - r[c.reference]);
                asset += r[c.debtor] * amount;
            }
        }
        r[v] = clamped_rate(asset, liab);
        known[v] = 1;
    }
    (void)known;
    SolveReport report;
    report.solver = SolverKind::Acyclic;
    report.solutions.push_back(std::move(r));
    report.max_coeff_bits = vector_bit_size(report.solutions[0]);
    if (!is_clearing_t(sys, report.solutions[0]))
        throw Error(ErrorCode::Internal, "acyclic solution failed the clearing check");
    return report;
}

namespace {

// Variable layout for the dedicated-debtor linear systems: recovery rates of
// non-CDS-debtor banks with positive liabilities first, then one payment per
// CDS contract.
struct DedicatedLayout {
    std::vector<int> rate_banks;               // bank index per rate variable
    std::vector<int> var_of_bank;              // bank -> rate variable or -1
    std::vector<char> fixed_one;               // banks with zero liabilities
    std::vector<std::size_t> pay_contracts;    // contract index per payment variable
    std::vector<int> pay_var_of_contract;      // contract index -> variable or -1
    std::vector<Rational> debt_liability;      // per bank: total debt notional
    std::vector<Rational> cds_total;           // per CDS debtor: total CDS notional
    std::vector<int> reference_of_debtor;      // per bank, -1 if not a CDS debtor
    std::size_t nvars() const { return rate_banks.size() + pay_contracts.size(); }
};

DedicatedLayout build_dedicated_layout(const FinancialSystem& sys) {
    int n = sys.bank_count();
    DedicatedLayout lay;
    lay.var_of_bank.assign(n, -1);
    lay.fixed_one.assign(n, 0);
    lay.debt_liability.assign(n, Rational(0));
    lay.cds_total.assign(n, Rational(0));
    lay.reference_of_debtor.assign(n, -1);

    std::set<int> cds_debtors;
    for (const Contract& c : sys.contracts()) {
        if (c.notional == 0) continue;
        if (c.is_cds()) {
            cds_debtors.insert(c.debtor);
            lay.cds_total[c.debtor] += c.notional;
            lay.reference_of_debtor[c.debtor] = c.reference;
        } else {
            lay.debt_liability[c.debtor] += c.notional;
        }
    }
    for (int i = 0; i < n; ++i) {
        if (cds_debtors.count(i)) continue;
        if (lay.debt_liability[i] > 0) {
            lay.var_of_bank[i] = static_cast<int>(lay.rate_banks.size());
            lay.rate_banks.push_back(i);
        } else {
            lay.fixed_one[i] = 1;
        }
    }
    lay.pay_var_of_contract.assign(sys.contracts().size(), -1);
    for (std::size_t ci = 0; ci < sys.contracts().size(); ++ci) {
        const Contract& c = sys.contracts()[ci];
        if (c.is_cds() && c.notional != 0) {
            lay.pay_var_of_contract[ci] = static_cast<int>(lay.rate_banks.size() + lay.pay_contracts.size());
            lay.pay_contracts.push_back(ci);
        }
    }
    return lay;
}

struct BranchSolution {
    std::vector<Rational> full;  // recovery rates for all banks
    BranchAssignment branch;
    bool underdetermined = false;
};

// Solves one branch assignment; returns a verified clearing vector or
// nothing if the branch is infeasible.
std::optional<BranchSolution> solve_branch(const FinancialSystem& sys, const DedicatedLayout& lay,
                                           std::uint64_t mask) {
    const std::size_t nv = lay.nvars();
    std::vector<std::vector<Rational>> A(nv, std::vector<Rational>(nv, Rational(0)));
    std::vector<Rational> B(nv, Rational(0));
    std::vector<Rational> hint(nv, Rational(0));

    auto saturated = [&](std::size_t flag) { return (mask >> flag) & 1ull; };

    // Incoming value of bank i expressed over the variables: constant part
    // into B-contributions (moved to RHS), coefficients into the row.
    auto add_assets_negated = [&](std::vector<Rational>& row, Rational& rhs, int bank,
                                  const Rational& scale) {
        rhs += scale * sys.external_assets(bank);
        for (std::size_t ci = 0; ci < sys.contracts().size(); ++ci) {
            const Contract& c = sys.contracts()[ci];
            if (c.creditor != bank || c.notional == 0) continue;
            if (c.is_cds()) {
                row[lay.pay_var_of_contract[ci]] -= scale;
            } else if (lay.fixed_one[c.debtor]) {
                rhs += scale * c.notional;
            } else {
                row[lay.var_of_bank[c.debtor]] -= scale * c.notional;
            }
        }
    };

    for (std::size_t v = 0; v < lay.rate_banks.size(); ++v) {
        int bank = lay.rate_banks[v];
        hint[v] = Rational(1);
        if (saturated(v)) {
            A[v][v] = 1;
            B[v] = 1;
        } else {
            // l_i * r_i = a_i
            A[v][v] = lay.debt_liability[bank];
            add_assets_negated(A[v], B[v], bank, Rational(1));
        }
    }
    for (std::size_t pv = 0; pv < lay.pay_contracts.size(); ++pv) {
        std::size_t row = lay.rate_banks.size() + pv;
        const Contract& c = sys.contracts()[lay.pay_contracts[pv]];
        int ref_var = lay.var_of_bank[c.reference];
        if (saturated(row)) {
            // p = (1 - r_R) * notional
            A[row][row] = 1;
            if (ref_var >= 0) {
                A[row][ref_var] = c.notional;
                B[row] = c.notional;
            } else {
                B[row] = 0;  // reference has no liabilities, r_R = 1
            }
        } else {
            // total_cds * p = notional * a_i
            A[row][row] = lay.cds_total[c.debtor];
            add_assets_negated(A[row], B[row], c.debtor, c.notional);
        }
    }

    auto solved = detail::solve_linear(std::move(A), std::move(B), hint);
    if (solved.kind == detail::LinearSolveResult::Inconsistent) return std::nullopt;

    const std::vector<Rational>& x = solved.x;
    auto rate_of = [&](int bank) -> Rational {
        if (lay.fixed_one[bank]) return Rational(1);
        int v = lay.var_of_bank[bank];
        return v >= 0 ? x[v] : Rational(0);
    };
    auto assets_of = [&](int bank) {
        Rational a = sys.external_assets(bank);
        for (std::size_t ci = 0; ci < sys.contracts().size(); ++ci) {
            const Contract& c = sys.contracts()[ci];
            if (c.creditor != bank || c.notional == 0) continue;
            if (c.is_cds())
                a += x[lay.pay_var_of_contract[ci]];
            else
                a += rate_of(c.debtor) * c.notional;
        }
        return a;
    };

    // range checks
    for (std::size_t v = 0; v < lay.rate_banks.size(); ++v)
        if (x[v] < 0 || x[v] > 1) return std::nullopt;
    for (std::size_t pv = 0; pv < lay.pay_contracts.size(); ++pv)
        if (x[lay.rate_banks.size() + pv] < 0) return std::nullopt;

    // branch consistency: the chosen side of each min must be the smaller one
    for (std::size_t v = 0; v < lay.rate_banks.size(); ++v) {
        int bank = lay.rate_banks[v];
        Rational a = assets_of(bank);
        if (a < 0) return std::nullopt;
        const Rational& l = lay.debt_liability[bank];
        if (saturated(v) ? (a < l) : (a > l)) return std::nullopt;
    }
    for (std::size_t pv = 0; pv < lay.pay_contracts.size(); ++pv) {
        std::size_t flag = lay.rate_banks.size() + pv;
        const Contract& c = sys.contracts()[lay.pay_contracts[pv]];
        Rational a = assets_of(c.debtor);
        if (a < 0) return std::nullopt;
        Rational l = (Rational(1) - rate_of(c.reference)) * lay.cds_total[c.debtor];
        if (saturated(flag) ? (a < l) : (a > l)) return std::nullopt;
    }

    // reconstruct CDS-debtor recovery rates from their payments
    int n = sys.bank_count();
    std::vector<Rational> full(n);
    for (int i = 0; i < n; ++i) {
        if (lay.fixed_one[i]) {
            full[i] = Rational(1);
        } else if (lay.var_of_bank[i] >= 0) {
            full[i] = x[lay.var_of_bank[i]];
        } else {
            Rational l = (Rational(1) - rate_of(lay.reference_of_debtor[i])) * lay.cds_total[i];
            full[i] = clamped_rate(assets_of(i), l);
        }
    }
    if (!is_clearing_t(sys, full)) return std::nullopt;

    BranchSolution out;
    out.full = std::move(full);
    out.underdetermined = solved.kind == detail::LinearSolveResult::Underdetermined;
    out.branch.saturated.resize(lay.nvars());
    out.branch.flag_names.resize(lay.nvars());
    for (std::size_t v = 0; v < lay.rate_banks.size(); ++v) {
        out.branch.saturated[v] = saturated(v);
        out.branch.flag_names[v] = "rate:" + sys.bank_id(lay.rate_banks[v]);
    }
    for (std::size_t pv = 0; pv < lay.pay_contracts.size(); ++pv) {
        const Contract& c = sys.contracts()[lay.pay_contracts[pv]];
        out.branch.saturated[lay.rate_banks.size() + pv] = saturated(lay.rate_banks.size() + pv);
        out.branch.flag_names[lay.rate_banks.size() + pv] =
            "pay:" + sys.bank_id(c.debtor) + "->" + sys.bank_id(c.creditor);
    }
    return out;
}

}  // namespace

SolveReport solve_dedicated(const FinancialSystem& sys, const SolverOptions& opts) {
    auto dedicated = check_dedicated_cds_debtor(sys);
    if (!dedicated.ok) {
        std::string banks;
        for (int b : dedicated.violations) banks += (banks.empty() ? "" : ", ") + sys.bank_id(b);
        throw Error(ErrorCode::NotDedicated, "CDS debtors violate the dedicated property: " + banks);
    }
    auto nondeg = check_nondegenerate(sys);
    if (!nondeg.ok) throw Error(ErrorCode::Degenerate, "system is degenerate");

    DedicatedLayout lay = build_dedicated_layout(sys);
    std::size_t k = lay.nvars();
    if (k > static_cast<std::size_t>(opts.max_branch_bits))
        throw Error(ErrorCode::TooManyBranches,
                    std::to_string(k) + " min-expressions exceed the cap of 2^" +
                        std::to_string(opts.max_branch_bits) + " branches");

    std::uint64_t total = 1ull << k;
    std::vector<std::optional<BranchSolution>> found(total);

    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    if (total < 4096 || workers == 1) {
        for (std::uint64_t mask = 0; mask < total; ++mask) found[mask] = solve_branch(sys, lay, mask);
    } else {
        std::vector<std::thread> pool;
        std::uint64_t chunk = (total + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            std::uint64_t lo = w * chunk, hi = std::min(total, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                for (std::uint64_t mask = lo; mask < hi; ++mask) found[mask] = solve_branch(sys, lay, mask);
            });
        }
        for (auto& t : pool) t.join();
    }

    SolveReport report;
    report.solver = SolverKind::Dedicated;
    bool warned_under = false;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        if (!found[mask]) continue;
        BranchSolution& sol = *found[mask];
        bool duplicate = false;
        for (const auto& existing : report.solutions)
            if (existing == sol.full) {
                duplicate = true;
                break;
            }
        if (duplicate) continue;
        if (sol.underdetermined && !warned_under) {
            report.warnings.push_back(
                "a branch system was underdetermined; one representative solution kept");
            warned_under = true;
        }
        report.max_coeff_bits = std::max(report.max_coeff_bits, vector_bit_size(sol.full));
        report.solutions.push_back(std::move(sol.full));
        report.branches.push_back(std::move(sol.branch));
    }
    std::vector<std::size_t> order(report.solutions.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return report.solutions[a] < report.solutions[b]; });
    std::vector<std::vector<Rational>> sols;
    std::vector<BranchAssignment> brs;
    for (std::size_t i : order) {
        sols.push_back(std::move(report.solutions[i]));
        brs.push_back(std::move(report.branches[i]));
    }
    report.solutions = std::move(sols);
    report.branches = std::move(brs);
    if (report.max_coeff_bits > opts.warn_bits)
        report.warnings.push_back("coefficient size reached " + std::to_string(report.max_coeff_bits) +
                                  " bits (threshold " + std::to_string(opts.warn_bits) + ")");
    return report;
}

SolveReport solve_no_weakly_switched(const FinancialSystem& sys, const SolverOptions& opts) {
    AuxiliaryGraph aux = build_auxiliary_graph(sys);
    if (auto cycle = find_weakly_switched_cycle(aux)) {
        std::string path;
        for (int v : cycle->vertices()) path += (path.empty() ? "" : "->") + sys.bank_id(v);
        throw Error(ErrorCode::WeaklySwitchedPresent, "weakly switched cycle " + path);
    }
    auto nondeg = check_nondegenerate(sys);
    if (!nondeg.ok) throw Error(ErrorCode::Degenerate, "system is degenerate");

    Condensation cond = scc_condensation(aux);
    int n = sys.bank_count();
    std::vector<Rational> r(n, Rational(0));
    std::vector<char> solved(n, 0);

    SolveReport report;
    report.solver = SolverKind::NoWeaklySwitched;

    for (int comp : cond.topo_order) {
        const std::vector<int>& members = cond.members[comp];
        std::set<int> inside(members.begin(), members.end());

        // Subinstance: the component, its outgoing contracts, and the
        // out-neighbour creditors as payment sinks. Orange arcs whose
        // reference sits in an earlier component are recoloured into debt
        // with the CDS liability fixed at the solved reference rate; inbound
        // payments from earlier components are folded into external assets.
        FinancialSystem sub;
        for (int v : members) {
            Rational e = sys.external_assets(v);
            for (const Contract& c : sys.contracts()) {
                if (c.creditor != v || c.notional == 0 || inside.count(c.debtor)) continue;
                if (!solved[c.debtor]) throw Error(ErrorCode::Internal, "inbound payment not yet solved");
                Rational amount = c.notional;
                if (c.is_cds()) {
                    if (!solved[c.reference])
                        throw Error(ErrorCode::Internal, "inbound CDS reference not yet solved");
                    amount *= (Rational(1) - r[c.reference]);
                }
                e += r[c.debtor] * amount;
            }
            sub.add_bank(sys.bank_id(v), e);
        }
        for (const Contract& c : sys.contracts()) {
            if (c.notional == 0 || !inside.count(c.debtor)) continue;
            if (!sub.has_bank(sys.bank_id(c.creditor))) sub.add_bank(sys.bank_id(c.creditor), Rational(0));
            if (c.is_cds() && inside.count(c.reference)) {
                sub.add_cds(sys.bank_id(c.debtor), sys.bank_id(c.creditor), sys.bank_id(c.reference),
                            c.notional);
            } else if (c.is_cds()) {
                if (!solved[c.reference])
                    throw Error(ErrorCode::Internal, "outbound CDS reference not yet solved");
                Rational recoloured = (Rational(1) - r[c.reference]) * c.notional;
                if (recoloured != 0)
                    sub.add_debt(sys.bank_id(c.debtor), sys.bank_id(c.creditor), recoloured);
            } else {
                sub.add_debt(sys.bank_id(c.debtor), sys.bank_id(c.creditor), c.notional);
            }
        }

        SolveReport subreport = solve_dedicated(normalize_system(sub), opts);
        if (subreport.solutions.empty())
            throw Error(ErrorCode::Internal, "component subinstance has no clearing vector");

        // componentwise lexicographically-largest solution, in bank index order
        std::vector<Rational> best;
        for (const auto& sol : subreport.solutions) {
            std::vector<Rational> restricted;
            restricted.reserve(members.size());
            for (int v : members) restricted.push_back(sol[sub.bank_index(sys.bank_id(v))]);
            if (best.empty() || restricted > best) best = std::move(restricted);
        }
        for (std::size_t i = 0; i < members.size(); ++i) {
            r[members[i]] = best[i];
            solved[members[i]] = 1;
        }
        for (const auto& w : subreport.warnings) {
            std::string tagged = "component of " + sys.bank_id(members.front()) + ": " + w;
            if (std::find(report.warnings.begin(), report.warnings.end(), tagged) == report.warnings.end())
                report.warnings.push_back(tagged);
        }
    }

    if (!is_clearing_t(sys, r))
        throw Error(ErrorCode::Internal, "assembled SCC solution failed the clearing check");
    report.max_coeff_bits = vector_bit_size(r);
    if (report.max_coeff_bits > opts.warn_bits)
        report.warnings.push_back("coefficient size reached " + std::to_string(report.max_coeff_bits) +
                                  " bits (threshold " + std::to_string(opts.warn_bits) + ")");
    report.solutions.push_back(std::move(r));
    return report;
}

namespace {

// Once-converted float copy of the system, so the iteration loop touches no
// big-integer arithmetic.
struct FloatSystemView {
    struct C {
        int debtor, creditor, reference;
        double notional;
    };
    std::vector<double> externals;
    std::vector<C> contracts;

    explicit FloatSystemView(const FinancialSystem& sys) {
        externals.reserve(sys.bank_count());
        for (int i = 0; i < sys.bank_count(); ++i) externals.push_back(to_double(sys.external_assets(i)));
        contracts.reserve(sys.contracts().size());
        for (const Contract& c : sys.contracts())
            contracts.push_back({c.debtor, c.creditor, c.reference, to_double(c.notional)});
    }

    void apply(const std::vector<double>& r, std::vector<double>& out, std::vector<double>& liab,
               std::vector<double>& asset) const {
        std::size_t n = externals.size();
        liab.assign(n, 0.0);
        asset = externals;
        for (const C& c : contracts) {
            double amount = c.notional;
            if (c.reference >= 0) amount *= (1.0 - r[c.reference]);
            liab[c.debtor] += amount;
            asset[c.creditor] += r[c.debtor] * amount;
        }
        out.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (asset[i] >= liab[i])
                out[i] = 1.0;
            else if (asset[i] <= 0.0)
                out[i] = 0.0;
            else
                out[i] = asset[i] / liab[i];
        }
    }
};

}  // namespace

SolveReport iterate_clearing(const FinancialSystem& sys, const IterateOptions& opts) {
    if (!(opts.eps > 0)) throw Error(ErrorCode::InvalidParam, "eps must be positive");
    if (!(opts.damping > 0) || opts.damping > 1)
        throw Error(ErrorCode::InvalidParam, "damping must lie in (0, 1]");
    int n = sys.bank_count();
    std::vector<double> r = opts.start ? *opts.start : std::vector<double>(n, 1.0);
    require_vector_size(sys, r.size());

    FloatSystemView view(sys);
    std::vector<double> fr, liab, asset;
    SolveReport report;
    report.solver = SolverKind::Iterate;
    report.converged = false;
    long it = 0;
    for (; it <= opts.max_iter; ++it) {
        view.apply(r, fr, liab, asset);
        double res = distance_inf_float(r, fr);
        if (res < opts.eps) {
            report.converged = true;
            break;
        }
        if (it == opts.max_iter) break;
        for (int i = 0; i < n; ++i) r[i] = (1.0 - opts.damping) * r[i] + opts.damping * fr[i];
    }
    report.iterations = it;
    report.float_solution = std::move(r);
    report.float_residual = clearing_residual_float(sys, report.float_solution);
    if (!report.converged)
        report.warnings.push_back("iteration did not reach eps; residual " +
                                  std::to_string(report.float_residual));
    return report;
}

std::vector<std::vector<Rational>> exact_solutions(const FinancialSystem& sys,
                                                   const SolverOptions& opts) {
    AuxiliaryGraph aux = build_auxiliary_graph(sys);
    if (is_acyclic(aux)) return solve_acyclic(sys).solutions;
    if (!find_weakly_switched_cycle(aux) && check_nondegenerate(sys).ok)
        return solve_no_weakly_switched(sys, opts).solutions;
    if (check_dedicated_cds_debtor(sys).ok && check_nondegenerate(sys).ok)
        return solve_dedicated(sys, opts).solutions;
    throw Error(ErrorCode::NoExactReference, "no exact solver applies to this system");
}

bool certify_strong(const FinancialSystem& sys, const RecoveryVector& candidate, const Rational& eps,
                    const std::vector<RecoveryVector>* references) {
    std::vector<RecoveryVector> owned;
    if (!references) {
        for (auto& sol : exact_solutions(sys)) owned.push_back(RecoveryVector::rational(std::move(sol)));
        references = &owned;
    }
    if (references->empty()) throw Error(ErrorCode::NoExactReference, "empty reference set");

    auto lift_surd = [](const RecoveryVector& v) {
        std::vector<QuadraticSurd> out;
        if (v.mode == NumericMode::Surd) return v.srd;
        out.reserve(v.rat.size());
        for (const auto& q : v.rat) out.emplace_back(q);
        return out;
    };

    for (const RecoveryVector& ref : *references) {
        if (ref.mode == NumericMode::Float)
            throw Error(ErrorCode::ModeMismatch, "references must be exact vectors");
        if (candidate.mode == NumericMode::Float) {
            if (distance_inf_float(candidate.flt, ref.to_floats()) < to_double(eps)) return true;
        } else {
            QuadraticSurd d = distance_inf_t(lift_surd(candidate), lift_surd(ref));
            if (d < QuadraticSurd(eps)) return true;
        }
    }
    return false;
}

}  // namespace fincds
