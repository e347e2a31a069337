#pragma once

#include "fincds/errors.hpp"
#include "fincds/surd.hpp"
#include "fincds/system.hpp"

#include <vector>

namespace fincds {

enum class NumericMode { Rational, Surd, Float };

/// Candidate or clearing recovery rates, one value per bank in the system's
/// index order, with an explicit numeric mode. Exactly one of the three
/// storage vectors is populated.
struct RecoveryVector {
    NumericMode mode = NumericMode::Rational;
    std::vector<Rational> rat;
    std::vector<QuadraticSurd> srd;
    std::vector<double> flt;

    static RecoveryVector rational(std::vector<Rational> v) {
        RecoveryVector r;
        r.mode = NumericMode::Rational;
        r.rat = std::move(v);
        return r;
    }
    static RecoveryVector surd(std::vector<QuadraticSurd> v) {
        RecoveryVector r;
        r.mode = NumericMode::Surd;
        r.srd = std::move(v);
        return r;
    }
    static RecoveryVector floating(std::vector<double> v) {
        RecoveryVector r;
        r.mode = NumericMode::Float;
        r.flt = std::move(v);
        return r;
    }

    std::size_t size() const {
        switch (mode) {
            case NumericMode::Rational: return rat.size();
            case NumericMode::Surd: return srd.size();
            case NumericMode::Float: return flt.size();
        }
        return 0;
    }

    std::vector<double> to_floats() const;
};

namespace detail {

template <class T>
struct ScalarOps;

template <>
struct ScalarOps<Rational> {
    static Rational from_rational(const Rational& q) { return q; }
    static Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
};

template <>
struct ScalarOps<QuadraticSurd> {
    static QuadraticSurd from_rational(const Rational& q) { return QuadraticSurd(q); }
    static QuadraticSurd abs(const QuadraticSurd& x) { return x.sign() < 0 ? -x : x; }
};

template <>
struct ScalarOps<double> {
    static double from_rational(const Rational& q) { return to_double(q); }
    static double abs(double x) { return x < 0 ? -x : x; }
};

}  // namespace detail

void require_vector_size(const FinancialSystem& sys, std::size_t n);

/// l_i(r): debt notionals plus (1 - r_R)-weighted CDS notionals over all of
/// bank i's contracts as debtor.
template <class T>
T total_liability_t(const FinancialSystem& sys, const std::vector<T>& r, int bank) {
    using Ops = detail::ScalarOps<T>;
    if (bank < 0 || bank >= sys.bank_count()) throw Error(ErrorCode::UnknownBank, "bank index out of range");
    require_vector_size(sys, r.size());
    T one = Ops::from_rational(Rational(1));
    T total = Ops::from_rational(Rational(0));
    for (const Contract& c : sys.contracts()) {
        if (c.debtor != bank) continue;
        T v = Ops::from_rational(c.notional);
        if (c.is_cds()) v = v * (one - r[c.reference]);
        total = total + v;
    }
    return total;
}

/// a_i(r): external assets plus incoming payments r_j * l_{j,i}(r).
template <class T>
T assets_t(const FinancialSystem& sys, const std::vector<T>& r, int bank) {
    using Ops = detail::ScalarOps<T>;
    if (bank < 0 || bank >= sys.bank_count()) throw Error(ErrorCode::UnknownBank, "bank index out of range");
    require_vector_size(sys, r.size());
    T one = Ops::from_rational(Rational(1));
    T total = Ops::from_rational(sys.external_assets(bank));
    for (const Contract& c : sys.contracts()) {
        if (c.creditor != bank) continue;
        T v = Ops::from_rational(c.notional);
        if (c.is_cds()) v = v * (one - r[c.reference]);
        total = total + r[c.debtor] * v;
    }
    return total;
}

/// One application of the clearing map: a_i / max(l_i, a_i), with the 0/0
/// corner resolved to 1 so the map is total on degenerate systems too.
template <class T>
std::vector<T> clearing_map_t(const FinancialSystem& sys, const std::vector<T>& r) {
    using Ops = detail::ScalarOps<T>;
    require_vector_size(sys, r.size());
    int n = sys.bank_count();
    T zero = Ops::from_rational(Rational(0));
    T one = Ops::from_rational(Rational(1));
    // Single pass over contracts: accumulate per-bank liabilities and assets.
    std::vector<T> liab(n, zero), asset(n, zero);
    for (int i = 0; i < n; ++i) asset[i] = Ops::from_rational(sys.external_assets(i));
    for (const Contract& c : sys.contracts()) {
        T v = Ops::from_rational(c.notional);
        if (c.is_cds()) v = v * (one - r[c.reference]);
        liab[c.debtor] = liab[c.debtor] + v;
        asset[c.creditor] = asset[c.creditor] + r[c.debtor] * v;
    }
    std::vector<T> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        if (!(asset[i] < liab[i])) {
            // includes a = l = 0
            out.push_back(one);
        } else if (!(zero < asset[i])) {
            out.push_back(zero);
        } else {
            out.push_back(asset[i] / liab[i]);
        }
    }
    return out;
}

template <class T>
T distance_inf_t(const std::vector<T>& x, const std::vector<T>& y) {
    using Ops = detail::ScalarOps<T>;
    if (x.size() != y.size()) throw Error(ErrorCode::ModeMismatch, "vector length mismatch");
    T best = Ops::from_rational(Rational(0));
    for (std::size_t i = 0; i < x.size(); ++i) {
        T d = Ops::abs(x[i] - y[i]);
        if (best < d) best = d;
    }
    return best;
}

template <class T>
T clearing_residual_t(const FinancialSystem& sys, const std::vector<T>& r) {
    return distance_inf_t(r, clearing_map_t(sys, r));
}

template <class T>
bool is_clearing_t(const FinancialSystem& sys, const std::vector<T>& r) {
    using Ops = detail::ScalarOps<T>;
    T zero = Ops::from_rational(Rational(0));
    return !(zero < clearing_residual_t(sys, r));
}

// Mode-dispatching front ends used by the CLI, tests and bindings.

RecoveryVector clearing_map(const FinancialSystem& sys, const RecoveryVector& r);
RecoveryVector clearing_residual_vectorwise(const FinancialSystem& sys, const RecoveryVector& r);

Rational total_liability(const FinancialSystem& sys, const RecoveryVector& r, int bank);
Rational assets(const FinancialSystem& sys, const RecoveryVector& r, int bank);

/// inf-norm of r - f(r); exact in rational/surd mode.
Rational clearing_residual_exact(const FinancialSystem& sys, const RecoveryVector& r);
double clearing_residual_float(const FinancialSystem& sys, const std::vector<double>& r);

/// Exact test; float-mode vectors are rejected with ModeMismatch.
bool is_clearing(const FinancialSystem& sys, const RecoveryVector& r);

/// residual <= eps. Weak approximation per the clearing-map residual.
bool is_weak_eps(const FinancialSystem& sys, const RecoveryVector& r, const Rational& eps);

Rational distance_inf_exact(const RecoveryVector& a, const RecoveryVector& b);
double distance_inf_float(const std::vector<double>& a, const std::vector<double>& b);

bool in_unit_box(const RecoveryVector& r);

}  // namespace fincds
