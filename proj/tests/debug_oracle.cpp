// scratch reproduction harness for the oracle disagreement (not registered
// with ctest)
#include "fincds/errors.hpp"
#include "fincds/io.hpp"
#include "fincds/solvers.hpp"

#include "helpers.hpp"

#include <cmath>
#include <iostream>
#include <random>

using namespace fincds;
using namespace fincds::testing;

int main() {
    std::mt19937 rng(41);
    int covered = 0;
    for (int trial = 0; trial < 400 && covered < 12; ++trial) {
        FinancialSystem sys;
        sys.add_bank("r1", small_rational(rng));
        sys.add_bank("r2", small_rational(rng));
        sys.add_bank("sink");
        int debtors = 1 + static_cast<int>(rng() % 2);
        for (int d = 0; d < debtors; ++d) {
            std::string id = "cds" + std::to_string(d);
            sys.add_bank(id, Rational(1 + rng() % 2, 1 + rng() % 2));
        }
        sys.add_debt("r1", "r2", Rational(1 + rng() % 2, 1 + rng() % 2));
        sys.add_debt("r2", rng() % 2 ? "r1" : "sink", Rational(1 + rng() % 2, 1 + rng() % 2));
        for (int d = 0; d < debtors; ++d) {
            std::string id = "cds" + std::to_string(d);
            std::string ref = d % 2 ? "r2" : "r1";
            std::string cred = rng() % 2 ? "sink" : (d % 2 ? "r1" : "r2");
            sys.add_cds(id, cred, ref, Rational(1 + rng() % 3, 1 + rng() % 2));
        }
        sys = normalize_system(sys);
        if (!check_dedicated_cds_debtor(sys).ok || !check_nondegenerate(sys).ok) continue;

        ReducedDedicatedMap reduced(sys);
        if (reduced.dim() > 4) continue;
        SolveReport rep;
        try {
            rep = solve_dedicated(sys);
        } catch (const Error&) {
            continue;
        }
        if (!rep.warnings.empty()) continue;
        ++covered;

        double mass = 0, min_liab = 1e9;
        for (const Contract& c : sys.contracts()) mass += to_double(c.notional) + 1.0;
        for (std::size_t v = 0; v < reduced.rate_banks.size(); ++v)
            min_liab = std::min(min_liab, reduced.debt_liability[reduced.rate_banks[v]]);
        double lipschitz = 2.0 * mass / std::min(1.0, min_liab);
        auto oracle = grid_bisection_fixed_points(reduced, lipschitz, 2e-7);

        std::vector<std::vector<double>> exact_pts;
        for (const auto& sol : rep.solutions) {
            std::vector<double> x(reduced.dim());
            for (std::size_t v = 0; v < reduced.rate_banks.size(); ++v)
                x[v] = to_double(sol[reduced.rate_banks[v]]);
            for (std::size_t pv = 0; pv < reduced.pay_contracts.size(); ++pv) {
                const Contract& c = sys.contracts()[reduced.pay_contracts[pv]];
                x[reduced.rate_banks.size() + pv] =
                    to_double(sol[c.debtor]) * (1.0 - to_double(sol[c.reference])) * to_double(c.notional);
            }
            exact_pts.push_back(std::move(x));
        }
        auto near = [&](const std::vector<double>& a, const std::vector<double>& b) {
            double d = 0;
            for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
            return d < 1e-4;
        };
        bool bad = false;
        for (const auto& pt : oracle) {
            bool matched = false;
            for (const auto& ex : exact_pts) matched = matched || near(pt, ex);
            if (!matched) bad = true;
        }
        for (const auto& ex : exact_pts) {
            bool matched = false;
            for (const auto& pt : oracle) matched = matched || near(pt, ex);
            if (!matched) bad = true;
        }
        if (bad) {
            std::cout << "trial " << trial << " dim=" << reduced.dim() << "\n"
                      << serialize_instance(sys);
            std::cout << "exact (" << exact_pts.size() << "):\n";
            for (const auto& ex : exact_pts) {
                for (double v : ex) std::cout << "  " << v;
                std::cout << "\n";
            }
            std::cout << "oracle (" << oracle.size() << "):\n";
            for (const auto& pt : oracle) {
                std::cout << "  residual=" << reduced.residual(pt) << " @";
                for (double v : pt) std::cout << " " << v;
                std::cout << "\n";
            }
            for (const auto& sol : rep.solutions) {
                std::cout << "solution:";
                for (const auto& q : sol) std::cout << " " << format_rational(q);
                std::cout << "\n";
            }
            return 1;
        }
    }
    std::cout << "covered " << covered << " instances, all matched\n";
    return 0;
}
