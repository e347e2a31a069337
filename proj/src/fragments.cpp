#include "fincds/fragments.hpp"

#include "fincds/errors.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace fincds {

FragmentClass fragment_class(FragmentKind k) {
    switch (k) {
        case FragmentKind::G1a:
        case FragmentKind::G1b:
        case FragmentKind::G1c:
        case FragmentKind::G1d: return FragmentClass::G1;
        case FragmentKind::G2a:
        case FragmentKind::G2b:
        case FragmentKind::G2c:
        case FragmentKind::G2d: return FragmentClass::G2;
        case FragmentKind::G3a:
        case FragmentKind::G3b: return FragmentClass::G3;
        case FragmentKind::D1:
        case FragmentKind::D2: return FragmentClass::D;
    }
    throw Error(ErrorCode::Internal, "bad fragment kind");
}

const char* fragment_kind_name(FragmentKind k) {
    switch (k) {
        case FragmentKind::G1a: return "g1a";
        case FragmentKind::G1b: return "g1b";
        case FragmentKind::G1c: return "g1c";
        case FragmentKind::G1d: return "g1d";
        case FragmentKind::G2a: return "g2a";
        case FragmentKind::G2b: return "g2b";
        case FragmentKind::G2c: return "g2c";
        case FragmentKind::G2d: return "g2d";
        case FragmentKind::G3a: return "g3a";
        case FragmentKind::G3b: return "g3b";
        case FragmentKind::D1: return "d1";
        case FragmentKind::D2: return "d2";
    }
    return "?";
}

FragmentKind fragment_kind_from_name(const std::string& name) {
    for (FragmentKind k :
         {FragmentKind::G1a, FragmentKind::G1b, FragmentKind::G1c, FragmentKind::G1d, FragmentKind::G2a,
          FragmentKind::G2b, FragmentKind::G2c, FragmentKind::G2d, FragmentKind::G3a, FragmentKind::G3b,
          FragmentKind::D1, FragmentKind::D2})
        if (name == fragment_kind_name(k)) return k;
    throw Error(ErrorCode::ParseError, "unknown fragment '" + name + "'");
}

std::string FragmentString::to_string(bool with_variants) const {
    std::string out;
    for (const FragmentCell& c : cells) {
        if (!out.empty()) out += ".";
        out += fragment_kind_name(c.kind);
        if (with_variants && c.variant == Variant::Prime) out += "'";
        if (with_variants && c.variant == Variant::DoublePrime) out += "''";
    }
    return out;
}

FragmentString parse_fragment_string(const std::string& text) {
    FragmentString s;
    std::string token;
    auto flush = [&] {
        if (token.empty()) throw Error(ErrorCode::ParseError, "empty fragment token");
        s.cells.push_back({fragment_kind_from_name(token), Variant::None});
        token.clear();
    };
    for (char ch : text) {
        if (ch == '.') {
            flush();
        } else if (!std::isspace(static_cast<unsigned char>(ch))) {
            token += ch;
        }
    }
    flush();
    return s;
}

FragmentString merge(const FragmentString& a, const FragmentString& b) {
    if (a.closed || b.closed) throw Error(ErrorCode::AlreadyClosed, "cannot merge closed cycles");
    FragmentString out = a;
    out.cells.insert(out.cells.end(), b.cells.begin(), b.cells.end());
    return out;
}

FragmentString close_cycle(const FragmentString& s) {
    if (s.closed) throw Error(ErrorCode::AlreadyClosed, "cycle is already closed");
    if (s.cells.empty()) throw Error(ErrorCode::InvalidParam, "cannot close the empty string");
    FragmentString out = s;
    out.closed = true;
    return out;
}

FragmentString assign_arithmetic(const FragmentString& cycle) {
    if (!cycle.closed) throw Error(ErrorCode::InvalidParam, "arithmetic assignment needs a closed cycle");
    FragmentString out = cycle;
    std::size_t k = out.cells.size();
    for (std::size_t i = 0; i < k; ++i) {
        const FragmentCell& prev = out.cells[(i + k - 1) % k];
        FragmentCell& cur = out.cells[i];
        if (fragment_class(prev.kind) == FragmentClass::G3) {
            FragmentClass cc = fragment_class(cur.kind);
            if (cc != FragmentClass::G1 && cc != FragmentClass::G2)
                throw Error(ErrorCode::G3FollowedByG3OrD,
                            "g3 fragment followed by " + std::string(fragment_kind_name(cur.kind)));
            cur.variant = Variant::DoublePrime;
        } else {
            cur.variant = Variant::Prime;
        }
    }
    return out;
}

QuadraticSurd MoebiusTransform::apply(const QuadraticSurd& r) const {
    QuadraticSurd num = QuadraticSurd(p) * r + QuadraticSurd(q);
    QuadraticSurd den = QuadraticSurd(s) * r + QuadraticSurd(t);
    return num / den;
}

Rational MoebiusTransform::apply(const Rational& r) const {
    Rational den = s * r + t;
    if (den == 0) throw Error(ErrorCode::Internal, "Moebius pole");
    return (p * r + q) / den;
}

MoebiusTransform MoebiusTransform::then(const MoebiusTransform& n) const {
    // matrix product [[n.p, n.q],[n.s, n.t]] * [[p, q],[s, t]]
    return {n.p * p + n.q * s, n.p * q + n.q * t, n.s * p + n.t * s, n.s * q + n.t * t};
}

bool MoebiusTransform::proportional_to(const MoebiusTransform& o) const {
    return p * o.q == q * o.p && p * o.s == s * o.p && p * o.t == t * o.p && q * o.s == s * o.q &&
           q * o.t == t * o.q && s * o.t == t * o.s;
}

std::vector<QuadraticSurd> MoebiusTransform::fixed_points() const {
    std::vector<QuadraticSurd> out;
    if (s == 0) {
        if (t == p) return out;  // identity (all fixed) or no solution; callers reject both
        out.emplace_back(q / (t - p));
        return out;
    }
    Rational disc = (t - p) * (t - p) + 4 * s * q;
    if (disc < 0) return out;
    QuadraticSurd root = QuadraticSurd::sqrt_of(disc);
    QuadraticSurd base(Rational(p - t));
    QuadraticSurd half(Rational(1) / (2 * s));
    out.push_back((base + root) * half);
    out.push_back((base - root) * half);
    return out;
}

QuadraticSurd MoebiusTransform::unit_fixed_point() const {
    QuadraticSurd zero{Rational(0)}, one{Rational(1)};
    std::vector<QuadraticSurd> unit;
    for (const QuadraticSurd& r : fixed_points())
        if (!(r < zero) && !(one < r)) unit.push_back(r);
    if (unit.size() == 1) return unit[0];
    if (unit.size() == 2 && unit[0] == unit[1]) return unit[0];
    throw Error(ErrorCode::NotRewritable,
                "composed transfer has " + std::to_string(unit.size()) + " fixed points in [0,1]");
}

namespace {

int start_arc_weight(const FragmentCell& cell) {
    if (cell.variant == Variant::None)
        throw Error(ErrorCode::ContextMismatch, "fragment lacks arithmetic coefficients");
    if (fragment_class(cell.kind) == FragmentClass::D) return 1;
    return cell.variant == Variant::DoublePrime ? 2 : 1;
}

}  // namespace

MoebiusTransform transfer_map(const FragmentCell& cell, const FragmentCell& follower) {
    if (cell.variant == Variant::None)
        throw Error(ErrorCode::ContextMismatch, "fragment lacks arithmetic coefficients");
    int wf = start_arc_weight(follower);
    FragmentClass cls = fragment_class(cell.kind);
    switch (cls) {
        case FragmentClass::G1:
            if (wf != 1)
                throw Error(ErrorCode::ContextMismatch, "g1 fragment must be followed by a prime fragment");
            return {Rational(-1), Rational(1), Rational(-1), Rational(2)};
        case FragmentClass::G2:
            if (wf != 1)
                throw Error(ErrorCode::ContextMismatch, "g2 fragment must be followed by a prime fragment");
            return {Rational(0), Rational(1), Rational(-1), Rational(3)};
        case FragmentClass::G3:
            if (wf != 2)
                throw Error(ErrorCode::ContextMismatch,
                            "g3 fragment must be followed by a double-prime fragment");
            return {Rational(0), Rational(1), Rational(-1), Rational(3)};
        case FragmentClass::D:
            if (wf != 1)
                throw Error(ErrorCode::ContextMismatch, "relay must be followed by a prime fragment");
            return MoebiusTransform::identity();
    }
    throw Error(ErrorCode::Internal, "bad fragment class");
}

MoebiusTransform compose_transfers(const std::vector<MoebiusTransform>& maps) {
    MoebiusTransform acc = MoebiusTransform::identity();
    for (const MoebiusTransform& m : maps) acc = acc.then(m);
    return acc;
}

MoebiusTransform compose_cycle(const FragmentString& cycle) {
    if (!cycle.closed) throw Error(ErrorCode::InvalidParam, "transfer composition needs a closed cycle");
    std::vector<MoebiusTransform> maps;
    std::size_t k = cycle.cells.size();
    for (std::size_t i = 0; i < k; ++i)
        maps.push_back(transfer_map(cycle.cells[i], cycle.cells[(i + 1) % k]));
    return compose_transfers(maps);
}

namespace {

FragmentKind a_kind_of_class(FragmentClass cls) {
    switch (cls) {
        case FragmentClass::G1: return FragmentKind::G1a;
        case FragmentClass::G2: return FragmentKind::G2a;
        case FragmentClass::G3: return FragmentKind::G3a;
        case FragmentClass::D: break;
    }
    throw Error(ErrorCode::Internal, "relays have no a-variant");
}

bool is_prime_a_or_relay(const FragmentCell& c) {
    if (c.variant != Variant::Prime) return false;
    switch (c.kind) {
        case FragmentKind::G1a:
        case FragmentKind::G2a:
        case FragmentKind::G3a:
        case FragmentKind::D1:
        case FragmentKind::D2: return true;
        default: return false;
    }
}

}  // namespace

FragmentString rewrite(const FragmentString& cycle, int rule, std::size_t position) {
    if (!cycle.closed) throw Error(ErrorCode::InvalidParam, "rewriting operates on closed cycles");
    std::size_t k = cycle.cells.size();
    if (position >= k) throw Error(ErrorCode::InvalidParam, "rewrite position out of range");
    const FragmentCell& cell = cycle.cells[position];
    if (cell.variant == Variant::None)
        throw Error(ErrorCode::ContextMismatch, "rewriting needs arithmetic coefficients");
    FragmentString out = cycle;
    switch (rule) {
        case 0: {
            FragmentClass cls = fragment_class(cell.kind);
            if (cls == FragmentClass::D || cell.kind == a_kind_of_class(cls))
                throw Error(ErrorCode::RuleNotApplicable, "rule 0 needs a non-a g fragment");
            out.cells[position].kind = a_kind_of_class(cls);
            return out;
        }
        case 1: {
            if (cell.kind != FragmentKind::G2a)
                throw Error(ErrorCode::RuleNotApplicable, "rule 1 replaces g2a fragments");
            const FragmentCell& next = cycle.cells[(position + 1) % k];
            if (!is_prime_a_or_relay(next))
                throw Error(ErrorCode::RuleNotApplicable,
                            "rule 1 needs a prime a-kind or relay follower");
            FragmentCell first{FragmentKind::G1a, cell.variant};
            FragmentCell second{FragmentKind::G1a, Variant::Prime};
            out.cells[position] = first;
            out.cells.insert(out.cells.begin() + position + 1, second);
            return out;
        }
        case 2: {
            if (cell.kind != FragmentKind::G3a)
                throw Error(ErrorCode::RuleNotApplicable, "rule 2 replaces g3a fragments");
            std::size_t npos = (position + 1) % k;
            const FragmentCell& next = cycle.cells[npos];
            FragmentClass ncls = fragment_class(next.kind);
            bool next_is_a_dd = next.variant == Variant::DoublePrime &&
                                (ncls != FragmentClass::D) && next.kind == a_kind_of_class(ncls);
            if (!next_is_a_dd)
                throw Error(ErrorCode::RuleNotApplicable,
                            "rule 2 needs a double-prime a-kind follower");
            out.cells[position] = {FragmentKind::G2a, Variant::Prime};
            out.cells[npos] = {next.kind, Variant::Prime};
            return out;
        }
        case 3: {
            if (fragment_class(cell.kind) != FragmentClass::D)
                throw Error(ErrorCode::RuleNotApplicable, "rule 3 removes relays");
            if (k == 1)
                throw Error(ErrorCode::RuleNotApplicable, "removing the last fragment leaves no cycle");
            out.cells.erase(out.cells.begin() + position);
            return out;
        }
        default:
            throw Error(ErrorCode::InvalidParam, "rules are numbered 0 to 3");
    }
}

FragmentString rewrite_to_canonical(const FragmentString& cycle) {
    if (!cycle.closed) throw Error(ErrorCode::InvalidParam, "rewriting operates on closed cycles");
    FragmentString cur = cycle;
    for (std::size_t i = 0; i < cur.cells.size(); ++i) {
        FragmentClass cls = fragment_class(cur.cells[i].kind);
        if (cls != FragmentClass::D && cur.cells[i].kind != a_kind_of_class(cls))
            cur = rewrite(cur, 0, i);
    }
    // relays out first, then g3 pairs, then g2 expansions
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < cur.cells.size(); ++i)
            if (fragment_class(cur.cells[i].kind) == FragmentClass::D) {
                if (cur.cells.size() == 1)
                    throw Error(ErrorCode::NotRewritable, "cycle reduces to a bare relay");
                cur = rewrite(cur, 3, i);
                changed = true;
                break;
            }
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < cur.cells.size(); ++i)
            if (cur.cells[i].kind == FragmentKind::G3a) {
                try {
                    cur = rewrite(cur, 2, i);
                } catch (const Error& e) {
                    if (e.code() == ErrorCode::RuleNotApplicable)
                        throw Error(ErrorCode::NotRewritable, "stuck g3 fragment: " + std::string(e.what()));
                    throw;
                }
                changed = true;
                break;
            }
    }
    for (const FragmentCell& c : cur.cells)
        if (c.variant != Variant::Prime)
            throw Error(ErrorCode::NotRewritable, "double-prime fragment left without its g3");
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < cur.cells.size(); ++i)
            if (cur.cells[i].kind == FragmentKind::G2a) {
                cur = rewrite(cur, 1, i);
                changed = true;
                break;
            }
    }
    for (const FragmentCell& c : cur.cells)
        if (c.kind != FragmentKind::G1a || c.variant != Variant::Prime)
            throw Error(ErrorCode::NotRewritable, "cycle does not reduce to g1a-prime copies");
    return cur;
}

QuadraticSurd solve_cycle_closed_form(const FragmentString& cycle) {
    FragmentString assigned = cycle.closed ? cycle : close_cycle(cycle);
    bool has_variants = true;
    for (const FragmentCell& c : assigned.cells)
        if (c.variant == Variant::None) has_variants = false;
    if (!has_variants) assigned = assign_arithmetic(assigned);
    FragmentString canonical = rewrite_to_canonical(assigned);
    return compose_cycle(canonical).unit_fixed_point();
}

Int fibonacci(int k) {
    if (k < -1) throw Error(ErrorCode::InvalidParam, "fibonacci index below -1");
    Int prev = 1;  // f(-1)
    Int cur = 0;   // f(0)
    if (k == -1) return prev;
    for (int i = 0; i < k; ++i) {
        Int next = prev + cur;
        prev = cur;
        cur = next;
    }
    return cur;
}

MoebiusTransform fibonacci_transfer(int k) {
    if (k < 1) throw Error(ErrorCode::InvalidParam, "fibonacci transfer needs k >= 1");
    return {Rational(-fibonacci(k - 2)), Rational(fibonacci(k)), Rational(-fibonacci(k)),
            Rational(fibonacci(k + 2))};
}

namespace {

struct Emitter {
    FinancialSystem sys;

    int bank(const std::string& id, Rational e = Rational(0)) { return sys.add_bank(id, std::move(e)); }
    void debt(int d, int c, Rational n) { sys.add_contract_indexed(d, c, -1, std::move(n)); }
    void cds(int d, int c, int r, Rational n) { sys.add_contract_indexed(d, c, r, std::move(n)); }
    // external reference banks have rate 0: no assets, one unit debt out
    int grounded_c(const std::string& id) {
        int c = bank(id);
        int sink = bank(id + "_sink");
        debt(c, sink, Rational(1));
        return c;
    }
};

}  // namespace

FinancialSystem emit_financial_system(const FragmentString& cycle) {
    return emit_with_solution(cycle).sys;
}

EmittedInstance emit_with_solution(const FragmentString& cycle) {
    if (!cycle.closed) throw Error(ErrorCode::InvalidParam, "emission needs a closed cycle");
    for (const FragmentCell& c : cycle.cells)
        if (c.variant == Variant::None)
            throw Error(ErrorCode::ContextMismatch, "emission needs arithmetic coefficients");

    if (cycle.cells.size() == 1) {
        // a single fragment would identify its end node with its own start,
        // putting one bank in two roles of the same CDS; splice in a relay,
        // which transfers the rate unchanged
        FragmentString extended = cycle;
        extended.cells.push_back({FragmentKind::D1, Variant::Prime});
        return emit_with_solution(extended);
    }

    std::size_t k = cycle.cells.size();
    Emitter em;
    EmittedInstance out;

    std::vector<int> path(k);
    for (std::size_t i = 0; i < k; ++i) {
        path[i] = em.bank("s" + std::to_string(i));
        out.path_banks.push_back("s" + std::to_string(i));
    }
    // end-node assets of a g3 fragment live on the next path bank
    for (std::size_t i = 0; i < k; ++i)
        if (fragment_class(cycle.cells[i].kind) == FragmentClass::G3)
            em.sys.set_external_assets(path[(i + 1) % k], Rational(1));

    for (std::size_t i = 0; i < k; ++i) {
        const FragmentCell& cell = cycle.cells[i];
        int s = path[i];
        int e = path[(i + 1) % k];
        std::string pre = "f" + std::to_string(i) + ".";
        Rational w(start_arc_weight(cell));
        switch (cell.kind) {
            case FragmentKind::G1a:
            case FragmentKind::G1b:
            case FragmentKind::G1c:
            case FragmentKind::G1d: {
                bool mid_orange = cell.kind == FragmentKind::G1b || cell.kind == FragmentKind::G1d;
                bool start_orange = cell.kind == FragmentKind::G1c || cell.kind == FragmentKind::G1d;
                int m = em.bank(pre + "m", Rational(1));
                int x3 = em.bank(pre + "x3");
                int x4 = em.bank(pre + "x4");
                em.cds(m, e, s, Rational(1));
                if (mid_orange)
                    em.cds(m, x3, em.grounded_c(pre + "cb"), Rational(1));
                else
                    em.debt(m, x3, Rational(1));
                if (start_orange)
                    em.cds(s, x4, em.grounded_c(pre + "ca"), w);
                else
                    em.debt(s, x4, w);
                break;
            }
            case FragmentKind::G2a:
            case FragmentKind::G2b:
            case FragmentKind::G2c:
            case FragmentKind::G2d: {
                bool main_orange = cell.kind == FragmentKind::G2b || cell.kind == FragmentKind::G2d;
                bool start_orange = cell.kind == FragmentKind::G2c || cell.kind == FragmentKind::G2d;
                int m = em.bank(pre + "m", Rational(1, 2));
                int x3 = em.bank(pre + "x3");
                int x4 = em.bank(pre + "x4");
                if (main_orange)
                    em.cds(m, e, em.grounded_c(pre + "cb"), Rational(2));
                else
                    em.debt(m, e, Rational(2));
                em.cds(m, x3, s, Rational(1));
                if (start_orange)
                    em.cds(s, x4, em.grounded_c(pre + "ca"), w);
                else
                    em.debt(s, x4, w);
                break;
            }
            case FragmentKind::G3a:
            case FragmentKind::G3b: {
                int x3 = em.bank(pre + "x3");
                int x2 = em.bank(pre + "x2");
                em.cds(e, x3, s, Rational(1));
                if (cell.kind == FragmentKind::G3b)
                    em.cds(s, x2, em.grounded_c(pre + "ca"), w);
                else
                    em.debt(s, x2, w);
                break;
            }
            case FragmentKind::D1: em.debt(s, e, Rational(1)); break;
            case FragmentKind::D2: em.cds(s, e, em.grounded_c(pre + "ca"), Rational(1)); break;
        }
    }

    out.sys = normalize_system(em.sys);

    // exact rates: start node from the closed form, then fragment by fragment
    QuadraticSurd rho = compose_cycle(cycle).unit_fixed_point();
    std::vector<QuadraticSurd> start_rate(k);
    start_rate[0] = rho;
    for (std::size_t i = 0; i + 1 < k; ++i)
        start_rate[i + 1] =
            transfer_map(cycle.cells[i], cycle.cells[(i + 1) % k]).apply(start_rate[i]);

    QuadraticSurd one{Rational(1)}, zero{Rational(0)}, two{Rational(2)}, three{Rational(3)};
    std::vector<QuadraticSurd> rates(out.sys.bank_count(), one);
    for (std::size_t i = 0; i < k; ++i) rates[path[i]] = start_rate[i];
    for (std::size_t i = 0; i < k; ++i) {
        const FragmentCell& cell = cycle.cells[i];
        std::string pre = "f" + std::to_string(i) + ".";
        auto set_if = [&](const std::string& id, const QuadraticSurd& v) {
            if (out.sys.has_bank(id)) rates[out.sys.bank_index(id)] = v;
        };
        switch (fragment_class(cell.kind)) {
            case FragmentClass::G1:
                set_if(pre + "m", one / (two - start_rate[i]));
                break;
            case FragmentClass::G2:
                set_if(pre + "m", QuadraticSurd(Rational(1, 2)) / (three - start_rate[i]));
                break;
            default: break;
        }
        set_if(pre + "ca", zero);
        set_if(pre + "cb", zero);
    }
    out.solution = std::move(rates);
    return out;
}

}  // namespace fincds
