#include "fincds/surd.hpp"

#include "fincds/errors.hpp"

#include <cmath>

namespace fincds {

std::pair<Int, Int> square_free_decompose(const Int& n) {
    if (n < 0) throw Error(ErrorCode::NegativeSqrtOperand, "negative radicand");
    if (n == 0) return {0, 1};
    Int s = n;
    Int k = 1;
    // Trial division pulls out small square factors; the remainder is
    // checked for being a perfect square. Radicands here come from
    // quadratic discriminants of desk-scale systems.
    for (Int p = 2; p * p <= s && p < 1000000; ++p) {
        Int pp = p * p;
        while (s % pp == 0) {
            s /= pp;
            k *= p;
        }
    }
    Int r = isqrt(s);
    if (r * r == s) {
        k *= r;
        s = 1;
    }
    return {s, k};
}

QuadraticSurd::QuadraticSurd(Rational a, Rational b, Int d) : a_(std::move(a)), b_(std::move(b)), d_(std::move(d)) {
    if (d_ < 0) throw Error(ErrorCode::NegativeSqrtOperand, "negative radicand");
    if (b_ == 0 || d_ == 0) {
        b_ = 0;
        d_ = 0;
        return;
    }
    if (d_ == 1) {
        a_ += b_;
        b_ = 0;
        d_ = 0;
        return;
    }
    auto [s, k] = square_free_decompose(d_);
    if (s == 1) {
        a_ += b_ * Rational(k);
        b_ = 0;
        d_ = 0;
    } else {
        b_ *= Rational(k);
        d_ = s;
    }
}

QuadraticSurd QuadraticSurd::sqrt_of(const Rational& radicand) {
    if (radicand < 0) throw Error(ErrorCode::NegativeSqrtOperand, "sqrt of negative rational");
    // sqrt(p/q) = sqrt(p*q)/q
    Int pq = numerator(radicand) * denominator(radicand);
    return QuadraticSurd(Rational(0), Rational(1, denominator(radicand)), pq);
}

const Rational& QuadraticSurd::as_rational() const {
    if (!is_rational()) throw Error(ErrorCode::ModeMismatch, "surd value is irrational");
    return a_;
}

Int QuadraticSurd::common_radicand(const QuadraticSurd& x, const QuadraticSurd& y) {
    if (x.d_ == 0) return y.d_;
    if (y.d_ == 0) return x.d_;
    if (x.d_ != y.d_)
        throw Error(ErrorCode::ModeMismatch,
                    "incompatible radicands " + x.d_.str() + " and " + y.d_.str());
    return x.d_;
}

QuadraticSurd QuadraticSurd::operator+(const QuadraticSurd& o) const {
    Int d = common_radicand(*this, o);
    return QuadraticSurd(a_ + o.a_, b_ + o.b_, d);
}

QuadraticSurd QuadraticSurd::operator-(const QuadraticSurd& o) const {
    Int d = common_radicand(*this, o);
    return QuadraticSurd(a_ - o.a_, b_ - o.b_, d);
}

QuadraticSurd QuadraticSurd::operator*(const QuadraticSurd& o) const {
    Int d = common_radicand(*this, o);
    Rational rd(d);
    return QuadraticSurd(a_ * o.a_ + b_ * o.b_ * rd, a_ * o.b_ + b_ * o.a_, d);
}

QuadraticSurd QuadraticSurd::operator/(const QuadraticSurd& o) const {
    Int d = common_radicand(*this, o);
    Rational rd(d);
    Rational norm = o.a_ * o.a_ - o.b_ * o.b_ * rd;
    if (norm == 0) {
        if (o.a_ == 0 && o.b_ == 0) throw Error(ErrorCode::Internal, "surd division by zero");
        // a^2 = b^2 d with b != 0 would make sqrt(d) rational; cannot happen
        // for a square-free d > 1.
        throw Error(ErrorCode::Internal, "degenerate surd divisor");
    }
    QuadraticSurd conj(o.a_, -o.b_, d);
    QuadraticSurd num = *this * conj;
    return QuadraticSurd(num.a_ / norm, num.b_ / norm, num.d_);
}

int QuadraticSurd::sign() const {
    if (b_ == 0) return a_ == 0 ? 0 : (a_ < 0 ? -1 : 1);
    if (a_ == 0) return b_ < 0 ? -1 : 1;
    Rational rd(d_);
    if (a_ > 0 && b_ > 0) return 1;
    if (a_ < 0 && b_ < 0) return -1;
    Rational lhs = a_ * a_;
    Rational rhs = b_ * b_ * rd;
    if (lhs == rhs) return 0;
    if (a_ > 0) return lhs > rhs ? 1 : -1;  // b < 0
    return rhs > lhs ? 1 : -1;              // a < 0, b > 0
}

double QuadraticSurd::to_double() const {
    double root = 0.0;
    if (d_ != 0) {
        // Scaled integer sqrt keeps the conversion accurate for large d.
        Int scaled = isqrt(d_ << 120);
        root = scaled.convert_to<double>() / std::pow(2.0, 60);
    }
    return fincds::to_double(a_) + fincds::to_double(b_) * root;
}

std::string QuadraticSurd::to_string() const {
    if (is_rational()) return format_rational(a_);
    Int den = boost::multiprecision::lcm(denominator(a_), denominator(b_));
    Int pa = numerator(a_) * (den / denominator(a_));
    Int pb = numerator(b_) * (den / denominator(b_));
    Int apb = pb < 0 ? Int(-pb) : pb;
    std::string core = pa.str() + (pb < 0 ? " - " : " + ") + apb.str() + "*sqrt(" + d_.str() + ")";
    if (den == 1) return core;
    return "(" + core + ")/" + den.str();
}

std::string QuadraticSurd::to_decimal(int digits) const {
    // value = a + b*sqrt(d); compute floor(|value| * 10^digits) exactly.
    Int scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    // common denominator m: (p + q*sqrt(d)) / m
    Int m = boost::multiprecision::lcm(denominator(a_), denominator(b_));
    Int p = numerator(a_) * (m / denominator(a_));
    Int q = numerator(b_) * (m / denominator(b_));
    // sqrt(d) * 10^(digits+4), floor
    Int guard = 10000;
    Int root = (d_ == 0) ? Int(0) : isqrt(d_ * scale * scale * guard * guard);
    Int numer = p * scale * guard + q * root;
    Int denom = m * guard;
    bool negative = numer < 0;
    if (negative) numer = -numer;
    Int scaled = numer / denom;  // floor(|value| * 10^digits)
    Int whole = scaled / scale;
    Int frac = scaled % scale;
    std::string frac_str = frac.str();
    while (static_cast<int>(frac_str.size()) < digits) frac_str.insert(frac_str.begin(), '0');
    std::string out = (negative ? "-" : "") + whole.str();
    if (digits > 0) out += "." + frac_str;
    return out;
}

}  // namespace fincds
