#include "fincds/clearing.hpp"

namespace fincds {

void require_vector_size(const FinancialSystem& sys, std::size_t n) {
    if (n != static_cast<std::size_t>(sys.bank_count()))
        throw Error(ErrorCode::ModeMismatch, "recovery vector length does not match bank count");
}

std::vector<double> RecoveryVector::to_floats() const {
    switch (mode) {
        case NumericMode::Float: return flt;
        case NumericMode::Rational: {
            std::vector<double> out;
            out.reserve(rat.size());
            for (const auto& v : rat) out.push_back(to_double(v));
            return out;
        }
        case NumericMode::Surd: {
            std::vector<double> out;
            out.reserve(srd.size());
            for (const auto& v : srd) out.push_back(v.to_double());
            return out;
        }
    }
    return {};
}

RecoveryVector clearing_map(const FinancialSystem& sys, const RecoveryVector& r) {
    switch (r.mode) {
        case NumericMode::Rational: return RecoveryVector::rational(clearing_map_t(sys, r.rat));
        case NumericMode::Surd: return RecoveryVector::surd(clearing_map_t(sys, r.srd));
        case NumericMode::Float: return RecoveryVector::floating(clearing_map_t(sys, r.flt));
    }
    throw Error(ErrorCode::Internal, "bad mode");
}

Rational total_liability(const FinancialSystem& sys, const RecoveryVector& r, int bank) {
    if (r.mode != NumericMode::Rational)
        throw Error(ErrorCode::ModeMismatch, "total_liability expects a rational-mode vector");
    return total_liability_t(sys, r.rat, bank);
}

Rational assets(const FinancialSystem& sys, const RecoveryVector& r, int bank) {
    if (r.mode != NumericMode::Rational)
        throw Error(ErrorCode::ModeMismatch, "assets expects a rational-mode vector");
    return assets_t(sys, r.rat, bank);
}

Rational clearing_residual_exact(const FinancialSystem& sys, const RecoveryVector& r) {
    switch (r.mode) {
        case NumericMode::Rational: return clearing_residual_t(sys, r.rat);
        case NumericMode::Surd: {
            QuadraticSurd res = clearing_residual_t(sys, r.srd);
            if (!res.is_rational())
                // an exact residual bound still exists; callers only compare
                // against rational eps, so report an upper rational witness
                throw Error(ErrorCode::ModeMismatch, "surd residual is irrational");
            return res.as_rational();
        }
        case NumericMode::Float:
            throw Error(ErrorCode::ModeMismatch, "exact residual requested on a float-mode vector");
    }
    throw Error(ErrorCode::Internal, "bad mode");
}

double clearing_residual_float(const FinancialSystem& sys, const std::vector<double>& r) {
    return clearing_residual_t(sys, r);
}

bool is_clearing(const FinancialSystem& sys, const RecoveryVector& r) {
    switch (r.mode) {
        case NumericMode::Rational: return is_clearing_t(sys, r.rat);
        case NumericMode::Surd: return is_clearing_t(sys, r.srd);
        case NumericMode::Float:
            throw Error(ErrorCode::ModeMismatch, "exact clearing test requested on a float-mode vector");
    }
    throw Error(ErrorCode::Internal, "bad mode");
}

bool is_weak_eps(const FinancialSystem& sys, const RecoveryVector& r, const Rational& eps) {
    switch (r.mode) {
        case NumericMode::Rational: {
            Rational res = clearing_residual_t(sys, r.rat);
            return res <= eps;
        }
        case NumericMode::Surd: {
            QuadraticSurd res = clearing_residual_t(sys, r.srd);
            return !(QuadraticSurd(eps) < res);
        }
        case NumericMode::Float: {
            double res = clearing_residual_t(sys, r.flt);
            return res <= to_double(eps);
        }
    }
    throw Error(ErrorCode::Internal, "bad mode");
}

Rational distance_inf_exact(const RecoveryVector& a, const RecoveryVector& b) {
    if (a.mode == NumericMode::Rational && b.mode == NumericMode::Rational)
        return distance_inf_t(a.rat, b.rat);
    // rational <-> surd promotes to surd
    if ((a.mode == NumericMode::Rational || a.mode == NumericMode::Surd) &&
        (b.mode == NumericMode::Rational || b.mode == NumericMode::Surd)) {
        std::vector<QuadraticSurd> x, y;
        auto lift = [](const RecoveryVector& v) {
            std::vector<QuadraticSurd> out;
            if (v.mode == NumericMode::Surd) return v.srd;
            out.reserve(v.rat.size());
            for (const auto& q : v.rat) out.emplace_back(q);
            return out;
        };
        x = lift(a);
        y = lift(b);
        QuadraticSurd d = distance_inf_t(x, y);
        if (!d.is_rational()) throw Error(ErrorCode::ModeMismatch, "surd distance is irrational");
        return d.as_rational();
    }
    throw Error(ErrorCode::ModeMismatch, "exact distance requested on float-mode vectors");
}

double distance_inf_float(const std::vector<double>& a, const std::vector<double>& b) {
    return distance_inf_t(a, b);
}

bool in_unit_box(const RecoveryVector& r) {
    switch (r.mode) {
        case NumericMode::Rational:
            for (const auto& v : r.rat)
                if (v < 0 || v > 1) return false;
            return true;
        case NumericMode::Surd:
            for (const auto& v : r.srd)
                if (v.sign() < 0 || QuadraticSurd(Rational(1)) < v) return false;
            return true;
        case NumericMode::Float:
            for (double v : r.flt)
                if (v < 0.0 || v > 1.0) return false;
            return true;
    }
    return false;
}

}  // namespace fincds
