#pragma once

#include "fincds/clearing.hpp"
#include "fincds/compiler.hpp"
#include "fincds/graph.hpp"
#include "fincds/io.hpp"
#include "fincds/solvers.hpp"
#include "fincds/system.hpp"

#include <random>
#include <set>
#include <string>
#include <vector>

namespace fincds::testing {

inline std::string data_path(const std::string& name) {
    return std::string(FINCDS_TEST_DATA_DIR) + "/" + name;
}

inline FinancialSystem load_instance(const std::string& name) {
    return normalize_system(parse_instance(read_file(data_path(name))));
}

inline Rational small_rational(std::mt19937& rng) {
    static const Rational pool[] = {Rational(0),       Rational(1),      Rational(1, 2), Rational(1, 3),
                                    Rational(2, 3),    Rational(1, 4),   Rational(3, 4), Rational(2),
                                    Rational(3, 2),    Rational(1, 5),   Rational(5, 4), Rational(1, 8)};
    return pool[rng() % (sizeof(pool) / sizeof(pool[0]))];
}

/// Random financial system with optional CDS contracts; may be degenerate
/// or cyclic, which is the point for the detection cross-checks.
inline FinancialSystem random_system(std::mt19937& rng, int n, bool with_cds) {
    FinancialSystem sys;
    for (int i = 0; i < n; ++i)
        sys.add_bank(std::to_string(i), rng() % 3 == 0 ? small_rational(rng) : Rational(0));
    int arcs = 1 + static_cast<int>(rng() % (2 * n));
    for (int a = 0; a < arcs; ++a) {
        int debtor = rng() % n, creditor = rng() % n;
        if (debtor == creditor) continue;
        Rational notional = small_rational(rng);
        if (notional == 0) notional = Rational(1);
        if (with_cds && rng() % 3 == 0 && n >= 3) {
            int ref = rng() % n;
            if (ref == debtor || ref == creditor) continue;
            sys.add_cds(std::to_string(debtor), std::to_string(creditor), std::to_string(ref), notional);
        } else {
            sys.add_debt(std::to_string(debtor), std::to_string(creditor), notional);
        }
    }
    return normalize_system(sys);
}

inline AuxiliaryGraph random_aux_graph(std::mt19937& rng, int n) {
    std::set<std::pair<int, int>> blue, orange, red;
    int arcs = 1 + static_cast<int>(rng() % (3 * n));
    for (int a = 0; a < arcs; ++a) {
        int u = rng() % n, v = rng() % n;
        if (u == v) continue;
        switch (rng() % 3) {
            case 0: blue.insert({u, v}); break;
            case 1: orange.insert({u, v}); break;
            default: red.insert({u, v}); break;
        }
    }
    AuxiliaryGraph aux;
    aux.n = n;
    aux.blue.assign(blue.begin(), blue.end());
    aux.orange.assign(orange.begin(), orange.end());
    aux.red.assign(red.begin(), red.end());
    return aux;
}

/// Brute-force existence of weakly/strongly switched cycles from the full
/// simple-cycle enumeration, deciding each vertex cycle by the best arc
/// choice available.
struct SwitchedBruteForce {
    bool weakly = false;
    bool strongly = false;
};

inline SwitchedBruteForce brute_force_switched(const AuxiliaryGraph& aux) {
    SwitchedBruteForce out;
    for (const CycleWitness& w : enumerate_simple_cycles(aux)) {
        std::vector<int> vs = w.vertices();
        std::size_t k = vs.size();
        bool any_red_on = false, usable = true;
        for (std::size_t i = 0; i < k; ++i) {
            int a = vs[i], b = vs[(i + 1) % k];
            bool nonred = aux.has_arc(ArcColor::Blue, a, b) || aux.has_arc(ArcColor::Orange, a, b);
            bool red = aux.has_arc(ArcColor::Red, a, b);
            bool red_on = red && classify_switch(aux, b) == SwitchClass::On;
            if (red_on) any_red_on = true;
            if (!nonred && !red_on) usable = false;  // forced through a bad red arc
        }
        if (any_red_on) out.weakly = true;
        if (any_red_on && usable) out.strongly = true;
        if (out.weakly && out.strongly) break;
    }
    return out;
}

struct InstancePorts {
    std::vector<int> in, out;
};

/// Drops a gadget template into a growing system under a prefix.
inline InstancePorts instantiate_into(FinancialSystem& sys, const GadgetTemplate& t,
                                      const std::string& prefix) {
    std::vector<int> local(t.banks.size());
    for (std::size_t i = 0; i < t.banks.size(); ++i)
        local[i] = sys.add_bank(prefix + "." + t.banks[i], t.externals[i]);
    for (const auto& c : t.contracts)
        if (c.notional != 0)
            sys.add_contract_indexed(local[c.debtor], local[c.creditor],
                                     c.reference < 0 ? -1 : local[c.reference], c.notional);
    InstancePorts p;
    for (int i : t.input_ports) p.in.push_back(local[i]);
    for (int i : t.output_ports) p.out.push_back(local[i]);
    return p;
}

/// Seeded duplicate-then-multiply squaring chain: the output bank carries
/// seed^(2^stages) under the unique clearing vector.
inline FinancialSystem build_squaring_chain(int stages, const Rational& seed, int* out_bank) {
    FinancialSystem sys;
    auto src = instantiate_into(sys, instantiate_gadget(GadgetKind::ConstSource, {seed}), "seed");
    int value = src.out[0];
    for (int s = 0; s < stages; ++s) {
        std::string p = "stage" + std::to_string(s);
        auto dup = instantiate_into(sys, instantiate_gadget(GadgetKind::Dup, {Rational(1)}), p + ".dup");
        auto mul = instantiate_into(sys, instantiate_gadget(GadgetKind::Mul), p + ".mul");
        sys.add_contract_indexed(value, dup.in[0], -1, Rational(1));
        sys.add_contract_indexed(dup.out[0], mul.in[0], -1, Rational(1));
        sys.add_contract_indexed(dup.out[1], mul.in[1], -1, Rational(1));
        value = mul.out[0];
    }
    int sink = sys.add_bank("final_sink");
    sys.add_contract_indexed(value, sink, -1, Rational(1));
    if (out_bank) *out_bank = value;
    return normalize_system(sys);
}

/// The piecewise-linear fixed-point map of a dedicated-property system on
/// the reduced coordinates (free recovery rates, CDS payments), written
/// directly from its definition. Independent of the solver path.
struct ReducedDedicatedMap {
    const FinancialSystem& sys;
    std::vector<int> rate_banks;           // variable order: rates then payments
    std::vector<std::size_t> pay_contracts;
    std::vector<int> var_of_bank;
    std::vector<char> fixed_one;
    std::vector<double> debt_liability;
    std::vector<double> cds_total;

    explicit ReducedDedicatedMap(const FinancialSystem& s) : sys(s) {
        int n = sys.bank_count();
        var_of_bank.assign(n, -1);
        fixed_one.assign(n, 0);
        debt_liability.assign(n, 0.0);
        cds_total.assign(n, 0.0);
        std::set<int> cds_debtors;
        for (const Contract& c : sys.contracts()) {
            if (c.is_cds()) {
                cds_debtors.insert(c.debtor);
                cds_total[c.debtor] += to_double(c.notional);
            } else {
                debt_liability[c.debtor] += to_double(c.notional);
            }
        }
        for (int i = 0; i < n; ++i) {
            if (cds_debtors.count(i)) continue;
            if (debt_liability[i] > 0) {
                var_of_bank[i] = static_cast<int>(rate_banks.size());
                rate_banks.push_back(i);
            } else {
                fixed_one[i] = 1;
            }
        }
        for (std::size_t ci = 0; ci < sys.contracts().size(); ++ci)
            if (sys.contracts()[ci].is_cds()) pay_contracts.push_back(ci);
    }

    std::size_t dim() const { return rate_banks.size() + pay_contracts.size(); }

    std::vector<double> apply(const std::vector<double>& x) const {
        auto rate_of = [&](int bank) {
            if (fixed_one[bank]) return 1.0;
            int v = var_of_bank[bank];
            return v >= 0 ? x[v] : 0.0;
        };
        auto assets_of = [&](int bank) {
            double a = to_double(sys.external_assets(bank));
            std::size_t pv = 0;
            for (std::size_t ci = 0; ci < sys.contracts().size(); ++ci) {
                const Contract& c = sys.contracts()[ci];
                if (c.is_cds()) {
                    if (c.creditor == bank) a += x[rate_banks.size() + pv];
                    ++pv;
                } else if (c.creditor == bank) {
                    a += rate_of(c.debtor) * to_double(c.notional);
                }
            }
            return a;
        };
        std::vector<double> out(dim());
        for (std::size_t v = 0; v < rate_banks.size(); ++v) {
            int bank = rate_banks[v];
            out[v] = std::min(1.0, assets_of(bank) / debt_liability[bank]);
        }
        for (std::size_t pv = 0; pv < pay_contracts.size(); ++pv) {
            const Contract& c = sys.contracts()[pay_contracts[pv]];
            double notional = to_double(c.notional);
            double capped = (1.0 - rate_of(c.reference)) * notional;
            double total = cds_total[c.debtor];
            double interior = total > 0 ? notional * assets_of(c.debtor) / total : 0.0;
            out[rate_banks.size() + pv] = std::min(capped, interior);
        }
        return out;
    }

    double residual(const std::vector<double>& x) const {
        std::vector<double> fx = apply(x);
        double r = 0;
        for (std::size_t i = 0; i < x.size(); ++i) r = std::max(r, std::fabs(x[i] - fx[i]));
        return r;
    }

    // max-row-sum bound on the Jacobian over all branch pieces
    double lipschitz_bound() const {
        double worst = 0;
        auto inflow_row_sum = [&](int bank) {
            double s = 0;
            for (const Contract& c : sys.contracts()) {
                if (c.creditor != bank) continue;
                s += c.is_cds() ? 1.0 : (var_of_bank[c.debtor] >= 0 ? to_double(c.notional) : 0.0);
            }
            return s;
        };
        for (int bank : rate_banks)
            worst = std::max(worst, inflow_row_sum(bank) / debt_liability[bank]);
        for (std::size_t pc : pay_contracts) {
            const Contract& c = sys.contracts()[pc];
            double notional = to_double(c.notional);
            worst = std::max(worst, notional);  // capped branch, d/dr_R
            if (cds_total[c.debtor] > 0)
                worst = std::max(worst, notional / cds_total[c.debtor] * inflow_row_sum(c.debtor));
        }
        return worst;
    }
};

/// Box-subdivision fixed-point finder over [0,1]^k for an arbitrary map:
/// sound pruning via a Lipschitz bound, refinement down to tiny boxes, then
/// dedup. Exponential in k; meant for the reduced systems of small
/// instances.
template <class MapFn>
std::vector<std::vector<double>> grid_bisection_fixed_points_fn(std::size_t k, MapFn&& apply,
                                                                double lipschitz, double tol = 1e-7) {
    auto residual = [&](const std::vector<double>& x) {
        std::vector<double> fx = apply(x);
        double r = 0;
        for (std::size_t i = 0; i < x.size(); ++i) r = std::max(r, std::fabs(x[i] - fx[i]));
        return r;
    };
    struct Box {
        std::vector<double> lo, hi;
    };
    std::vector<Box> queue{{std::vector<double>(k, 0.0), std::vector<double>(k, 1.0)}};
    std::vector<std::vector<double>> found;
    std::size_t budget = 2000000;
    while (!queue.empty() && budget-- > 0) {
        Box box = queue.back();
        queue.pop_back();
        std::vector<double> center(k);
        double radius = 0;
        for (std::size_t i = 0; i < k; ++i) {
            center[i] = 0.5 * (box.lo[i] + box.hi[i]);
            radius = std::max(radius, 0.5 * (box.hi[i] - box.lo[i]));
        }
        if (residual(center) > (1.0 + lipschitz) * radius) continue;
        if (radius < tol) {
            bool dup = false;
            for (const auto& p : found) {
                double d = 0;
                for (std::size_t i = 0; i < k; ++i) d = std::max(d, std::fabs(p[i] - center[i]));
                if (d < 64 * tol) dup = true;
            }
            if (!dup) found.push_back(center);
            continue;
        }
        std::size_t axis = 0;
        for (std::size_t i = 1; i < k; ++i)
            if (box.hi[i] - box.lo[i] > box.hi[axis] - box.lo[axis]) axis = i;
        Box left = box, right = box;
        left.hi[axis] = center[axis];
        right.lo[axis] = center[axis];
        queue.push_back(left);
        queue.push_back(right);
    }
    return found;
}

inline std::vector<std::vector<double>> grid_bisection_fixed_points(const ReducedDedicatedMap& map,
                                                                    double lipschitz,
                                                                    double tol = 1e-7) {
    return grid_bisection_fixed_points_fn(
        map.dim(), [&](const std::vector<double>& x) { return map.apply(x); }, lipschitz, tol);
}

}  // namespace fincds::testing
