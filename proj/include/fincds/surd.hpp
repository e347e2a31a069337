#pragma once

#include "fincds/rational.hpp"

#include <string>

namespace fincds {

/// Exact value of the form a + b*sqrt(d) with rational a, b and a
/// square-free non-negative integer radicand d. Closed under the four
/// arithmetic operations as long as both operands share the same radicand
/// (a rational operand is compatible with any radicand).
class QuadraticSurd {
  public:
    QuadraticSurd() : a_(0), b_(0), d_(0) {}
    QuadraticSurd(Rational rational_value) : a_(std::move(rational_value)), b_(0), d_(0) {}
    QuadraticSurd(Rational a, Rational b, Int d);

    // sqrt of a non-negative rational, as a surd with square-free radicand.
    static QuadraticSurd sqrt_of(const Rational& radicand);

    const Rational& rational_part() const { return a_; }
    const Rational& surd_coefficient() const { return b_; }
    const Int& radicand() const { return d_; }

    bool is_rational() const { return b_ == 0; }
    // Only valid when is_rational().
    const Rational& as_rational() const;

    QuadraticSurd operator-() const { return QuadraticSurd(-a_, -b_, d_); }
    QuadraticSurd operator+(const QuadraticSurd& o) const;
    QuadraticSurd operator-(const QuadraticSurd& o) const;
    QuadraticSurd operator*(const QuadraticSurd& o) const;
    QuadraticSurd operator/(const QuadraticSurd& o) const;

    int sign() const;
    bool operator==(const QuadraticSurd& o) const { return (*this - o).sign() == 0; }
    bool operator!=(const QuadraticSurd& o) const { return !(*this == o); }
    bool operator<(const QuadraticSurd& o) const { return (*this - o).sign() < 0; }
    bool operator<=(const QuadraticSurd& o) const { return (*this - o).sign() <= 0; }
    bool operator>(const QuadraticSurd& o) const { return o < *this; }
    bool operator>=(const QuadraticSurd& o) const { return o <= *this; }

    double to_double() const;
    // "a + b*sqrt(d)" rendered over a common integer denominator, e.g.
    // "(3 - 1*sqrt(5))/2".
    std::string to_string() const;
    // Truncated decimal expansion with the given number of digits.
    std::string to_decimal(int digits) const;

  private:
    // Promotes radicands: rational values adopt the other operand's d.
    static Int common_radicand(const QuadraticSurd& x, const QuadraticSurd& y);

    Rational a_, b_;
    Int d_;
};

// Square-free part s and cofactor k with n = k^2 * s.
std::pair<Int, Int> square_free_decompose(const Int& n);

}  // namespace fincds
