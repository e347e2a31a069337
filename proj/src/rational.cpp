#include "fincds/rational.hpp"

#include "fincds/errors.hpp"

#include <cctype>

namespace fincds {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedContract: return "MalformedContract";
        case ErrorCode::UnknownBank: return "UnknownBank";
        case ErrorCode::ModeMismatch: return "ModeMismatch";
        case ErrorCode::NotAcyclic: return "NotAcyclic";
        case ErrorCode::NotDedicated: return "NotDedicated";
        case ErrorCode::Degenerate: return "Degenerate";
        case ErrorCode::TooManyBranches: return "TooManyBranches";
        case ErrorCode::WeaklySwitchedPresent: return "WeaklySwitchedPresent";
        case ErrorCode::NoExactReference: return "NoExactReference";
        case ErrorCode::NegativeSqrtOperand: return "NegativeSqrtOperand";
        case ErrorCode::NotSelfMapping: return "NotSelfMapping";
        case ErrorCode::NotNormalized: return "NotNormalized";
        case ErrorCode::DegenerateOutput: return "DegenerateOutput";
        case ErrorCode::InvalidParam: return "InvalidParam";
        case ErrorCode::DegenerateKindRequiresFlag: return "DegenerateKindRequiresFlag";
        case ErrorCode::SemanticsMismatch: return "SemanticsMismatch";
        case ErrorCode::NotACycle: return "NotACycle";
        case ErrorCode::NotStronglySwitched: return "NotStronglySwitched";
        case ErrorCode::AlreadyClosed: return "AlreadyClosed";
        case ErrorCode::G3FollowedByG3OrD: return "G3FollowedByG3OrD";
        case ErrorCode::RuleNotApplicable: return "RuleNotApplicable";
        case ErrorCode::ContextMismatch: return "ContextMismatch";
        case ErrorCode::NotRewritable: return "NotRewritable";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::Internal: return "Internal";
    }
    return "Error";
}

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

}  // namespace

Rational parse_rational(const std::string& text) {
    std::string s = text;
    // trim
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (s.empty()) throw Error(ErrorCode::ParseError, "empty rational literal");

    bool negative = false;
    if (s[0] == '+' || s[0] == '-') {
        negative = (s[0] == '-');
        s.erase(s.begin());
    }

    auto slash = s.find('/');
    Rational result;
    if (slash != std::string::npos) {
        std::string num = s.substr(0, slash);
        std::string den = s.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den))
            throw Error(ErrorCode::ParseError, "bad rational literal '" + text + "'");
        Int n(num), d(den);
        if (d == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + text + "'");
        result = Rational(n, d);
    } else {
        auto dot = s.find('.');
        if (dot == std::string::npos) {
            if (!all_digits(s)) throw Error(ErrorCode::ParseError, "bad rational literal '" + text + "'");
            result = Rational(Int(s));
        } else {
            std::string whole = s.substr(0, dot);
            std::string frac = s.substr(dot + 1);
            if (whole.empty()) whole = "0";
            if (frac.empty()) frac = "0";
            if (!all_digits(whole) || !all_digits(frac))
                throw Error(ErrorCode::ParseError, "bad rational literal '" + text + "'");
            Int scale = 1;
            for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
            result = Rational(Int(whole) * scale + Int(frac), scale);
        }
    }
    if (negative) result = -result;
    return result;
}

std::string format_rational(const Rational& value) {
    Int num = numerator(value);
    Int den = denominator(value);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

std::string rational_to_decimal(const Rational& value, int digits) {
    bool negative = value < 0;
    Rational v = negative ? Rational(-value) : value;
    Int scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    Int scaled = (numerator(v) * scale) / denominator(v);
    Int whole = scaled / scale;
    Int frac = scaled % scale;
    std::string frac_str = frac.str();
    while (static_cast<int>(frac_str.size()) < digits) frac_str.insert(frac_str.begin(), '0');
    std::string out = (negative ? "-" : "") + whole.str();
    if (digits > 0) out += "." + frac_str;
    return out;
}

std::size_t rational_bit_size(const Rational& value) {
    Int num = numerator(value);
    Int den = denominator(value);
    if (num < 0) num = -num;
    std::size_t nb = (num == 0) ? 1 : boost::multiprecision::msb(num) + 1;
    std::size_t db = boost::multiprecision::msb(den) + 1;
    return nb + db;
}

Int isqrt(const Int& n) {
    if (n < 0) throw Error(ErrorCode::NegativeSqrtOperand, "isqrt of negative integer");
    if (n == 0) return 0;
    Int x = Int(1) << (boost::multiprecision::msb(n) / 2 + 1);
    // Newton iteration; converges since the start is above the root.
    while (true) {
        Int y = (x + n / x) / 2;
        if (y >= x) break;
        x = y;
    }
    return x;
}

}  // namespace fincds
