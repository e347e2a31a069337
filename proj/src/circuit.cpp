#include "fincds/circuit.hpp"

#include "fincds/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fincds {

const char* gate_kind_name(GateKind k) {
    switch (k) {
        case GateKind::Input: return "input";
        case GateKind::Const: return "const";
        case GateKind::Add: return "add";
        case GateKind::Sub: return "sub";
        case GateKind::Mul: return "mul";
        case GateKind::Max: return "max";
        case GateKind::Min: return "min";
        case GateKind::AbsDiff: return "absdiff";
        case GateKind::Sqrt: return "sqrt";
        case GateKind::ScaleConst: return "scale";
    }
    return "?";
}

GateKind gate_kind_from_name(const std::string& name) {
    for (GateKind k : {GateKind::Input, GateKind::Const, GateKind::Add, GateKind::Sub, GateKind::Mul,
                       GateKind::Max, GateKind::Min, GateKind::AbsDiff, GateKind::Sqrt,
                       GateKind::ScaleConst})
        if (name == gate_kind_name(k)) return k;
    throw Error(ErrorCode::ParseError, "unknown gate kind '" + name + "'");
}

namespace {

int arity(GateKind k) {
    switch (k) {
        case GateKind::Input:
        case GateKind::Const: return 0;
        case GateKind::Sqrt:
        case GateKind::ScaleConst: return 1;
        default: return 2;
    }
}

}  // namespace

int Circuit::add_gate(Gate g) {
    gates.push_back(std::move(g));
    return static_cast<int>(gates.size()) - 1;
}

std::string Circuit::gate_name(int idx) const {
    if (idx >= 0 && idx < static_cast<int>(names.size()) && !names[idx].empty()) return names[idx];
    return "g" + std::to_string(idx);
}

void validate_circuit(const Circuit& c) {
    for (std::size_t i = 0; i < c.gates.size(); ++i) {
        const Gate& g = c.gates[i];
        int need = arity(g.kind);
        if (need >= 1 && (g.a < 0 || g.a >= static_cast<int>(i)))
            throw Error(ErrorCode::ParseError, "gate " + c.gate_name(static_cast<int>(i)) +
                                                   " has a bad first operand");
        if (need == 2 && (g.b < 0 || g.b >= static_cast<int>(i)))
            throw Error(ErrorCode::ParseError, "gate " + c.gate_name(static_cast<int>(i)) +
                                                   " has a bad second operand");
        if (g.kind == GateKind::ScaleConst && (g.constant < 0 || g.constant > 1))
            throw Error(ErrorCode::ParseError, "scale factor outside [0,1]");
    }
    for (int idx : c.inputs)
        if (idx < 0 || idx >= static_cast<int>(c.gates.size()) || c.gates[idx].kind != GateKind::Input)
            throw Error(ErrorCode::ParseError, "inputs list does not point at input gates");
    for (int idx : c.outputs)
        if (idx < 0 || idx >= static_cast<int>(c.gates.size()))
            throw Error(ErrorCode::ParseError, "outputs list out of range");
}

std::optional<std::vector<Rational>> eval_exact(const Circuit& c, const std::vector<Rational>& x) {
    if (x.size() != c.inputs.size()) throw Error(ErrorCode::InvalidParam, "input arity mismatch");
    std::vector<Rational> val(c.gates.size());
    for (std::size_t i = 0; i < c.gates.size(); ++i) {
        const Gate& g = c.gates[i];
        switch (g.kind) {
            case GateKind::Input: val[i] = x.at(g.input_index); break;
            case GateKind::Const: val[i] = g.constant; break;
            case GateKind::Add: val[i] = val[g.a] + val[g.b]; break;
            case GateKind::Sub: val[i] = val[g.a] - val[g.b]; break;
            case GateKind::Mul: val[i] = val[g.a] * val[g.b]; break;
            case GateKind::Max: val[i] = std::max(val[g.a], val[g.b]); break;
            case GateKind::Min: val[i] = std::min(val[g.a], val[g.b]); break;
            case GateKind::AbsDiff:
                val[i] = val[g.a] >= val[g.b] ? val[g.a] - val[g.b] : val[g.b] - val[g.a];
                break;
            case GateKind::ScaleConst: val[i] = val[g.a] * g.constant; break;
            case GateKind::Sqrt: {
                const Rational& v = val[g.a];
                if (v < 0) throw Error(ErrorCode::NegativeSqrtOperand, "sqrt of negative value");
                Int rn = isqrt(numerator(v));
                Int rd = isqrt(denominator(v));
                if (rn * rn != numerator(v) || rd * rd != denominator(v)) return std::nullopt;
                val[i] = Rational(rn, rd);
                break;
            }
        }
    }
    std::vector<Rational> out;
    for (int idx : c.outputs) out.push_back(val[idx]);
    return out;
}

std::vector<double> eval_float(const Circuit& c, const std::vector<double>& x) {
    if (x.size() != c.inputs.size()) throw Error(ErrorCode::InvalidParam, "input arity mismatch");
    std::vector<long double> val(c.gates.size());
    for (std::size_t i = 0; i < c.gates.size(); ++i) {
        const Gate& g = c.gates[i];
        switch (g.kind) {
            case GateKind::Input: val[i] = x.at(g.input_index); break;
            case GateKind::Const: val[i] = static_cast<long double>(to_double(g.constant)); break;
            case GateKind::Add: val[i] = val[g.a] + val[g.b]; break;
            case GateKind::Sub: val[i] = val[g.a] - val[g.b]; break;
            case GateKind::Mul: val[i] = val[g.a] * val[g.b]; break;
            case GateKind::Max: val[i] = std::max(val[g.a], val[g.b]); break;
            case GateKind::Min: val[i] = std::min(val[g.a], val[g.b]); break;
            case GateKind::AbsDiff: val[i] = std::fabs(static_cast<double>(val[g.a] - val[g.b])); break;
            case GateKind::ScaleConst: val[i] = val[g.a] * static_cast<long double>(to_double(g.constant)); break;
            case GateKind::Sqrt:
                if (val[g.a] < 0 && val[g.a] > -1e-15L) val[i] = 0;  // forgive rounding dust
                else if (val[g.a] < 0)
                    throw Error(ErrorCode::NegativeSqrtOperand, "sqrt of negative value");
                else
                    val[i] = sqrtl(val[g.a]);
                break;
        }
    }
    std::vector<double> out;
    for (int idx : c.outputs) out.push_back(static_cast<double>(val[idx]));
    return out;
}

namespace {

// Rational bracket of sqrt(q) via scaled integer square roots. Lower bound
// never exceeds the root, upper bound never undercuts it.
const Int kSqrtScale = Int(1) << 48;

Rational sqrt_lower(const Rational& q) {
    if (q <= 0) return Rational(0);
    Int scaled = isqrt((numerator(q) * kSqrtScale * kSqrtScale) / denominator(q));
    return Rational(scaled, kSqrtScale);
}

Rational sqrt_upper(const Rational& q) {
    if (q <= 0) return Rational(0);
    Int scaled = isqrt((numerator(q) * kSqrtScale * kSqrtScale) / denominator(q)) + 1;
    Rational up(scaled, kSqrtScale);
    if (q <= 1 && up > 1) up = 1;  // sqrt maps [0,1] into itself
    return up;
}

}  // namespace

SignalBound signal_bound(const Circuit& c) {
    validate_circuit(c);
    SignalBound sb;
    std::size_t m = c.gates.size();
    sb.lo.assign(m, Rational(0));
    sb.hi.assign(m, Rational(0));
    for (std::size_t i = 0; i < m; ++i) {
        const Gate& g = c.gates[i];
        Rational lo, hi;
        switch (g.kind) {
            case GateKind::Input: lo = 0; hi = 1; break;
            case GateKind::Const: lo = hi = g.constant; break;
            case GateKind::Add: lo = sb.lo[g.a] + sb.lo[g.b]; hi = sb.hi[g.a] + sb.hi[g.b]; break;
            case GateKind::Sub: lo = sb.lo[g.a] - sb.hi[g.b]; hi = sb.hi[g.a] - sb.lo[g.b]; break;
            case GateKind::Mul: {
                Rational cands[4] = {sb.lo[g.a] * sb.lo[g.b], sb.lo[g.a] * sb.hi[g.b],
                                     sb.hi[g.a] * sb.lo[g.b], sb.hi[g.a] * sb.hi[g.b]};
                lo = *std::min_element(cands, cands + 4);
                hi = *std::max_element(cands, cands + 4);
                break;
            }
            case GateKind::Max: lo = std::max(sb.lo[g.a], sb.lo[g.b]); hi = std::max(sb.hi[g.a], sb.hi[g.b]); break;
            case GateKind::Min: lo = std::min(sb.lo[g.a], sb.lo[g.b]); hi = std::min(sb.hi[g.a], sb.hi[g.b]); break;
            case GateKind::AbsDiff: {
                Rational gap1 = sb.lo[g.a] - sb.hi[g.b];
                Rational gap2 = sb.lo[g.b] - sb.hi[g.a];
                lo = std::max(Rational(0), std::max(gap1, gap2));
                hi = std::max(sb.hi[g.a] - sb.lo[g.b], sb.hi[g.b] - sb.lo[g.a]);
                break;
            }
            case GateKind::ScaleConst: lo = sb.lo[g.a] * g.constant; hi = sb.hi[g.a] * g.constant; break;
            case GateKind::Sqrt:
                if (sb.hi[g.a] < 0) throw Error(ErrorCode::NegativeSqrtOperand, "sqrt of negative interval");
                lo = sqrt_lower(std::max(Rational(0), sb.lo[g.a]));
                hi = sqrt_upper(sb.hi[g.a]);
                sb.exact = false;
                break;
        }
        sb.lo[i] = lo;
        sb.hi[i] = hi;
    }
    // smallest d with every upper bound strictly below 2^(2^d)
    unsigned d = 0;
    Rational cap = Rational(2);  // 2^(2^0)
    auto exceeds = [&](const Rational& cap_) {
        for (const Rational& h : sb.hi)
            if (h >= cap_) return true;
        return false;
    };
    while (exceeds(cap)) {
        cap = cap * cap;
        ++d;
        if (d > 64) throw Error(ErrorCode::Internal, "signal bounds overflow any reasonable exponent");
    }
    sb.d = d;
    return sb;
}

bool is_normalized(const Circuit& c) {
    for (const Gate& g : c.gates) {
        switch (g.kind) {
            case GateKind::Sub:
            case GateKind::Max:
            case GateKind::Min: return false;
            case GateKind::Const:
                if (g.constant < 0 || g.constant > 1) return false;
                break;
            case GateKind::ScaleConst:
                if (g.constant < 0 || g.constant > 1) return false;
                break;
            default: break;
        }
    }
    return true;
}

namespace {

// Shared rebuild helper: maps old gate indices to new ones.
struct Rebuilder {
    Circuit out;
    std::map<std::pair<long long, long long>, int> const_pool;

    int constant(const Rational& v) {
        // pool small constants to avoid a litter of duplicate nodes
        auto key = std::make_pair(numerator(v).convert_to<long long>(),
                                  denominator(v).convert_to<long long>());
        if (rational_bit_size(v) < 60) {
            auto it = const_pool.find(key);
            if (it != const_pool.end()) return it->second;
            int idx = out.add_gate({GateKind::Const, -1, -1, v, -1});
            const_pool[key] = idx;
            return idx;
        }
        return out.add_gate({GateKind::Const, -1, -1, v, -1});
    }
    int unary(GateKind k, int a, Rational cst = Rational(0)) {
        return out.add_gate({k, a, -1, std::move(cst), -1});
    }
    int binary(GateKind k, int a, int b) { return out.add_gate({k, a, b, Rational(0), -1}); }
};

}  // namespace

Circuit strip_negative_consts(const Circuit& c) {
    validate_circuit(c);
    Rebuilder rb;
    std::vector<int> map(c.gates.size());
    for (std::size_t i = 0; i < c.gates.size(); ++i) {
        Gate g = c.gates[i];
        if (g.kind == GateKind::Const && g.constant < 0) {
            int zero = rb.constant(Rational(0));
            int pos = rb.constant(-g.constant);
            map[i] = rb.binary(GateKind::Sub, zero, pos);
            continue;
        }
        if (arity(g.kind) >= 1) g.a = map[g.a];
        if (arity(g.kind) == 2) g.b = map[g.b];
        map[i] = rb.out.add_gate(g);
    }
    for (int idx : c.inputs) rb.out.inputs.push_back(map[idx]);
    for (int idx : c.outputs) rb.out.outputs.push_back(map[idx]);
    return rb.out;
}

Circuit eliminate_minmax(const Circuit& c) {
    validate_circuit(c);
    Rebuilder rb;
    std::vector<int> map(c.gates.size());
    for (std::size_t i = 0; i < c.gates.size(); ++i) {
        Gate g = c.gates[i];
        if (g.kind == GateKind::Max || g.kind == GateKind::Min) {
            int a = map[g.a], b = map[g.b];
            int sum = rb.binary(GateKind::Add, a, b);
            int diff = rb.binary(GateKind::AbsDiff, a, b);
            int comb = g.kind == GateKind::Max ? rb.binary(GateKind::Add, sum, diff)
                                               : rb.binary(GateKind::Sub, sum, diff);
            map[i] = rb.unary(GateKind::ScaleConst, comb, Rational(1, 2));
            continue;
        }
        if (arity(g.kind) >= 1) g.a = map[g.a];
        if (arity(g.kind) == 2) g.b = map[g.b];
        map[i] = rb.out.add_gate(g);
    }
    for (int idx : c.inputs) rb.out.inputs.push_back(map[idx]);
    for (int idx : c.outputs) rb.out.outputs.push_back(map[idx]);
    return rb.out;
}

Circuit split_signs(const Circuit& c) {
    validate_circuit(c);
    for (const Gate& g : c.gates) {
        if (g.kind == GateKind::Max || g.kind == GateKind::Min)
            throw Error(ErrorCode::InvalidParam, "run min/max elimination before sign splitting");
        if (g.kind == GateKind::Sqrt)
            throw Error(ErrorCode::InvalidParam, "sqrt gates are not part of the source basis");
        if (g.kind == GateKind::Const && g.constant < 0)
            throw Error(ErrorCode::InvalidParam, "strip negative constants before sign splitting");
    }
    Rebuilder rb;
    // every wire becomes a (positive part, negative part) pair
    std::vector<std::pair<int, int>> parts(c.gates.size());
    for (std::size_t i = 0; i < c.gates.size(); ++i) {
        const Gate& g = c.gates[i];
        switch (g.kind) {
            case GateKind::Input: {
                Gate in = g;
                int idx = rb.out.add_gate(in);
                parts[i] = {idx, rb.constant(Rational(0))};
                break;
            }
            case GateKind::Const:
                parts[i] = {rb.constant(g.constant), rb.constant(Rational(0))};
                break;
            case GateKind::Add: {
                auto [ap, an] = parts[g.a];
                auto [bp, bn] = parts[g.b];
                parts[i] = {rb.binary(GateKind::Add, ap, bp), rb.binary(GateKind::Add, an, bn)};
                break;
            }
            case GateKind::Sub: {
                auto [ap, an] = parts[g.a];
                auto [bp, bn] = parts[g.b];
                parts[i] = {rb.binary(GateKind::Add, ap, bn), rb.binary(GateKind::Add, an, bp)};
                break;
            }
            case GateKind::Mul: {
                auto [ap, an] = parts[g.a];
                auto [bp, bn] = parts[g.b];
                int pp = rb.binary(GateKind::Mul, ap, bp);
                int nn = rb.binary(GateKind::Mul, an, bn);
                int pn = rb.binary(GateKind::Mul, ap, bn);
                int np = rb.binary(GateKind::Mul, an, bp);
                parts[i] = {rb.binary(GateKind::Add, pp, nn), rb.binary(GateKind::Add, pn, np)};
                break;
            }
            case GateKind::AbsDiff: {
                auto [ap, an] = parts[g.a];
                auto [bp, bn] = parts[g.b];
                int lhs = rb.binary(GateKind::Add, ap, bn);
                int rhs = rb.binary(GateKind::Add, an, bp);
                parts[i] = {rb.binary(GateKind::AbsDiff, lhs, rhs), rb.constant(Rational(0))};
                break;
            }
            case GateKind::ScaleConst: {
                auto [ap, an] = parts[g.a];
                parts[i] = {rb.unary(GateKind::ScaleConst, ap, g.constant),
                            rb.unary(GateKind::ScaleConst, an, g.constant)};
                break;
            }
            default:
                throw Error(ErrorCode::Internal, "unexpected gate kind in sign splitting");
        }
    }
    for (int idx : c.inputs) rb.out.inputs.push_back(parts[idx].first);
    // output = pos - neg, non-negative for a self-map, so an absolute
    // difference computes it without a subtraction gate
    for (int idx : c.outputs)
        rb.out.outputs.push_back(rb.binary(GateKind::AbsDiff, parts[idx].first, parts[idx].second));
    return rb.out;
}

namespace {

// x * p for integer p >= 1 by binary doubling; every intermediate stays at
// or below the final value.
int times_positive_int(Rebuilder& rb, int x, Int p) {
    std::vector<int> doublings{x};
    Int bit = 1;
    while (bit * 2 <= p) {
        int last = doublings.back();
        doublings.push_back(rb.binary(GateKind::Add, last, last));
        bit <<= 1;
    }
    int acc = -1;
    std::size_t pos = 0;
    for (Int b = 1; b <= p; b <<= 1, ++pos) {
        if ((p & b) == 0) continue;
        acc = acc < 0 ? doublings[pos] : rb.binary(GateKind::Add, acc, doublings[pos]);
    }
    return acc;
}

// x * (p/q) with p/q >= 1, guarded by the caller's range argument.
int times_rational_ge1(Rebuilder& rb, int x, const Rational& factor) {
    Int p = numerator(factor), q = denominator(factor);
    int scaled = x;
    if (q > 1) scaled = rb.unary(GateKind::ScaleConst, x, Rational(1, q));
    if (p == 1) return scaled;
    return times_positive_int(rb, scaled, p);
}

}  // namespace

Circuit normalize_pipeline(const Circuit& input) {
    validate_circuit(input);
    for (const Gate& g : input.gates)
        if (g.kind == GateKind::Sqrt)
            throw Error(ErrorCode::InvalidParam, "sqrt gates are not part of the source basis");
    if (input.inputs.empty() && input.outputs.empty())
        throw Error(ErrorCode::InvalidParam, "circuit has no outputs");

    Circuit flat = split_signs(eliminate_minmax(strip_negative_consts(input)));
    SignalBound base = signal_bound(flat);
    for (int idx : flat.outputs)
        if (base.lo[idx] > 1)
            throw Error(ErrorCode::NotSelfMapping, "an output provably exceeds 1 on [0,1]^n");

    Rational max_const(0);
    for (const Gate& g : flat.gates)
        if (g.kind == GateKind::Const && g.constant > max_const) max_const = g.constant;
    bool scale_consts = max_const > 1;
    Rational c_scale = scale_consts ? Rational(1) / max_const : Rational(1);

    // signals of the constant-scaled circuit are exactly c_scale times the
    // originals, so its interval pass is a rescale of the base pass
    bool range_reduce = false;
    for (const Rational& h : base.hi)
        if (h * c_scale > 1) range_reduce = true;

    if (!scale_consts && !range_reduce) {
        flat.norm = Circuit::NormalizationInfo{};
        validate_circuit(flat);
        return flat;
    }

    unsigned d = 0;
    {
        Rational cap(2);
        auto exceeds = [&](const Rational& cap_) {
            for (const Rational& h : base.hi)
                if (h * c_scale >= cap_) return true;
            return false;
        };
        while (exceeds(cap)) {
            cap = cap * cap;
            ++d;
            if (d > 64) throw Error(ErrorCode::Internal, "unreasonable signal growth");
        }
    }
    Rational t_prime = range_reduce ? Rational(Int(1), Int(1) << (1 + (std::size_t(1) << d))) : Rational(1);

    Rebuilder rb;
    Circuit::NormalizationInfo info;
    info.const_scale = c_scale;
    info.d = range_reduce ? d : 0;
    info.t_prime = t_prime;
    info.range_reduced = range_reduce;

    // auxiliary sub-circuit producing t' by successive squaring of 1/2
    int t_out = -1;
    if (range_reduce) {
        int cur = rb.constant(Rational(1, 2));
        for (unsigned i = 0; i < d; ++i) cur = rb.binary(GateKind::Mul, cur, cur);
        t_out = rb.unary(GateKind::ScaleConst, cur, Rational(1, 2));
    }

    auto append_chain = [&](int gate, bool output_chain) {
        // undo one factor of t': d square roots, double, d squarings, double
        Circuit::Chain chain;
        chain.input_gate = gate;
        chain.output_chain = output_chain;
        int cur = gate;
        for (unsigned i = 0; i < d; ++i) {
            cur = rb.unary(GateKind::Sqrt, cur);
            chain.members.push_back(cur);
        }
        cur = rb.binary(GateKind::Add, cur, cur);
        chain.members.push_back(cur);
        for (unsigned i = 0; i < d; ++i) {
            cur = rb.binary(GateKind::Mul, cur, cur);
            chain.members.push_back(cur);
        }
        cur = rb.binary(GateKind::Add, cur, cur);
        chain.members.push_back(cur);
        chain.out_gate = cur;
        info.chains.push_back(chain);
        return cur;
    };
    // undo the scaling on a wire carrying scale * value
    auto unscale = [&](int gate, bool output_chain) {
        int cur = gate;
        if (scale_consts) cur = times_rational_ge1(rb, cur, max_const);
        if (range_reduce) cur = append_chain(cur, output_chain);
        return cur;
    };

    std::vector<int> map(flat.gates.size(), -1);
    for (std::size_t i = 0; i < flat.gates.size(); ++i) {
        const Gate& g = flat.gates[i];
        switch (g.kind) {
            case GateKind::Input: {
                int idx = rb.out.add_gate(g);
                if (scale_consts) idx = rb.unary(GateKind::ScaleConst, idx, c_scale);
                if (range_reduce) idx = rb.binary(GateKind::Mul, idx, t_out);
                map[i] = idx;
                break;
            }
            case GateKind::Const: {
                int idx = rb.constant(g.constant * c_scale);
                if (range_reduce) idx = rb.binary(GateKind::Mul, idx, t_out);
                map[i] = idx;
                break;
            }
            case GateKind::Add: map[i] = rb.binary(GateKind::Add, map[g.a], map[g.b]); break;
            case GateKind::AbsDiff: map[i] = rb.binary(GateKind::AbsDiff, map[g.a], map[g.b]); break;
            case GateKind::ScaleConst: map[i] = rb.unary(GateKind::ScaleConst, map[g.a], g.constant); break;
            case GateKind::Mul: {
                int prod = rb.binary(GateKind::Mul, map[g.a], map[g.b]);
                map[i] = unscale(prod, false);
                break;
            }
            default:
                throw Error(ErrorCode::Internal, "unexpected gate after sign splitting");
        }
    }
    // inputs of the rebuilt circuit are the raw Input gates, in order
    for (std::size_t i = 0; i < rb.out.gates.size(); ++i)
        if (rb.out.gates[i].kind == GateKind::Input) rb.out.inputs.push_back(static_cast<int>(i));
    std::sort(rb.out.inputs.begin(), rb.out.inputs.end(), [&](int a, int b) {
        return rb.out.gates[a].input_index < rb.out.gates[b].input_index;
    });
    if (rb.out.inputs.size() != flat.inputs.size())
        throw Error(ErrorCode::Internal, "input gates lost during rebuild");

    for (int idx : flat.outputs) rb.out.outputs.push_back(unscale(map[idx], true));

    rb.out.norm = std::move(info);
    validate_circuit(rb.out);
    if (!is_normalized(rb.out)) throw Error(ErrorCode::Internal, "pipeline produced a non-normalized circuit");
    return rb.out;
}

UnitRangeCertificate certify_unit_range(const Circuit& c) {
    UnitRangeCertificate cert;
    SignalBound sb = signal_bound(c);
    cert.hi = sb.hi;
    std::vector<char> chain_member(c.gates.size(), 0);
    if (c.norm && c.norm->range_reduced) {
        const Rational& t = c.norm->t_prime;
        for (const auto& chain : c.norm->chains) {
            // A chain on input t'*x with x in [0,1] stays inside [0,1] and
            // ends exactly at x: certified when the chain input bound is at
            // most t'; output chains additionally lean on the self-mapping
            // promise when the plain interval cannot show it.
            Rational in_hi = sb.hi[chain.input_gate];
            bool ok = in_hi <= t;
            if (!ok && chain.output_chain) {
                cert.needs_self_mapping_promise = true;
                ok = true;
            }
            if (!ok) {
                cert.all_unit = false;
                return cert;
            }
            Rational unscaled = in_hi / t;
            Rational out_hi = std::min(Rational(1), unscaled);
            for (int g : chain.members) {
                chain_member[g] = 1;
                cert.hi[g] = 1;  // analytic bound; interior stages stay below 1
            }
            cert.hi[chain.out_gate] = out_hi;
            chain_member[chain.out_gate] = 1;
        }
        // re-run the plain interval pass with chain outputs pinned, so the
        // bounds behind a chain profit from the exact unscaled value
        for (std::size_t i = 0; i < c.gates.size(); ++i) {
            if (chain_member[i]) continue;
            const Gate& g = c.gates[i];
            switch (g.kind) {
                case GateKind::Add: cert.hi[i] = cert.hi[g.a] + cert.hi[g.b]; break;
                case GateKind::Mul: cert.hi[i] = cert.hi[g.a] * cert.hi[g.b]; break;
                case GateKind::AbsDiff: cert.hi[i] = std::max(cert.hi[g.a], cert.hi[g.b]); break;
                case GateKind::ScaleConst: cert.hi[i] = cert.hi[g.a] * g.constant; break;
                case GateKind::Sqrt: cert.hi[i] = sqrt_upper(cert.hi[g.a]); break;
                default: break;  // inputs/consts keep their bounds
            }
        }
    }
    cert.all_unit = true;
    for (const Rational& h : cert.hi)
        if (h > 1) {
            cert.all_unit = false;
            break;
        }
    return cert;
}

}  // namespace fincds
