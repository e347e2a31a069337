#include "fincds/compiler.hpp"

#include "fincds/clearing.hpp"
#include "fincds/errors.hpp"
#include "fincds/graph.hpp"
#include "fincds/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace fincds {

const char* gadget_kind_name(GadgetKind k) {
    switch (k) {
        case GadgetKind::Add: return "add";
        case GadgetKind::Dup: return "dup";
        case GadgetKind::ScaleConst: return "scale_const";
        case GadgetKind::ScaleRationalGuarded: return "scale_rational";
        case GadgetKind::PosSub: return "pos_sub";
        case GadgetKind::AbsDiff: return "abs_diff";
        case GadgetKind::Inv: return "inv";
        case GadgetKind::Sqrt: return "sqrt";
        case GadgetKind::SqrtConst: return "sqrt_const";
        case GadgetKind::Mul: return "mul";
        case GadgetKind::Max: return "max";
        case GadgetKind::Min: return "min";
        case GadgetKind::ConstSource: return "const_source";
        case GadgetKind::DegenerateMul: return "degenerate_mul";
        case GadgetKind::DegenerateDiv: return "degenerate_div";
    }
    return "?";
}

namespace {

// Local assembler for building templates, including composites that inline
// other templates.
class TemplateBuilder {
  public:
    int bank(const std::string& name, Rational e = Rational(0)) {
        names_.push_back(name);
        externals_.push_back(std::move(e));
        return static_cast<int>(names_.size()) - 1;
    }
    void debt(int debtor, int creditor, Rational notional) {
        contracts_.push_back({debtor, creditor, -1, std::move(notional)});
    }
    void cds(int debtor, int creditor, int reference, Rational notional) {
        contracts_.push_back({debtor, creditor, reference, std::move(notional)});
    }
    void wire(int from, int to) { debt(from, to, Rational(1)); }

    struct Ports {
        std::vector<int> in, out;
    };
    Ports inline_template(const GadgetTemplate& t, const std::string& prefix) {
        int base = static_cast<int>(names_.size());
        for (std::size_t i = 0; i < t.banks.size(); ++i)
            bank(prefix + "." + t.banks[i], t.externals[i]);
        for (const auto& c : t.contracts)
            contracts_.push_back(
                {c.debtor + base, c.creditor + base, c.reference < 0 ? -1 : c.reference + base, c.notional});
        Ports p;
        for (int i : t.input_ports) p.in.push_back(i + base);
        for (int i : t.output_ports) p.out.push_back(i + base);
        return p;
    }
    // unused duplicate outputs still get a unit wire so their rate stays the
    // carried value
    int sink(int from, const std::string& name) {
        int s = bank(name);
        wire(from, s);
        return s;
    }

    GadgetTemplate finish(GadgetKind kind, GadgetParams params, std::vector<int> inputs,
                          std::vector<int> outputs) {
        GadgetTemplate t;
        t.kind = kind;
        t.params = std::move(params);
        t.banks = std::move(names_);
        t.externals = std::move(externals_);
        t.contracts = std::move(contracts_);
        t.input_ports = std::move(inputs);
        t.output_ports = std::move(outputs);
        return t;
    }

  private:
    std::vector<std::string> names_;
    std::vector<Rational> externals_;
    std::vector<GadgetTemplate::TContract> contracts_;
};

GadgetTemplate make_add(int k) {
    TemplateBuilder b;
    std::vector<int> ins;
    int out = b.bank("out");
    for (int i = 0; i < k; ++i) {
        int in = b.bank("in" + std::to_string(i));
        b.wire(in, out);
        ins.push_back(in);
    }
    GadgetParams p;
    p.fan_in = k;
    return b.finish(GadgetKind::Add, p, ins, {out});
}

GadgetTemplate make_dup(GadgetKind kind, const Rational& c) {
    TemplateBuilder b;
    int in = b.bank("in");
    int relay = b.bank("relay");
    int out_a = b.bank("out_a");
    int inv_src = b.bank("inv_src", Rational(1));
    int inv_val = b.bank("inv_val");
    int inv_sink = b.bank("inv_sink");
    int scale_src = b.bank("scale_src", c);
    int scale_val = b.bank("scale_val");
    int out_b = b.bank("out_b");
    b.wire(in, relay);
    b.wire(relay, out_a);
    // inv_src holds 1 against a CDS on relay: pays 1 - r through
    b.cds(inv_src, inv_val, relay, Rational(1));
    b.wire(inv_val, inv_sink);
    // scale_src holds c against a CDS on the inverted value: pays c * r
    if (c != 0) b.cds(scale_src, scale_val, inv_val, c);
    b.wire(scale_val, out_b);
    GadgetParams p;
    p.c = c;
    return b.finish(kind, p, {in}, {out_a, out_b});
}

GadgetTemplate make_const_source(const Rational& c) {
    TemplateBuilder b;
    int src = b.bank("src", c);
    GadgetParams p;
    p.c = c;
    return b.finish(GadgetKind::ConstSource, p, {}, {src});
}

GadgetTemplate make_inv() {
    TemplateBuilder b;
    int in = b.bank("in");
    int relay = b.bank("relay");
    int relay_sink = b.bank("relay_sink");
    int src = b.bank("src", Rational(1));
    int val = b.bank("val");
    int out = b.bank("out");
    b.wire(in, relay);
    b.wire(relay, relay_sink);
    b.cds(src, val, relay, Rational(1));
    b.wire(val, out);
    return b.finish(GadgetKind::Inv, {}, {in}, {out});
}

GadgetTemplate make_pos_sub() {
    TemplateBuilder b;
    int in1 = b.bank("in1");
    int a = b.bank("a");
    int a_sink = b.bank("a_sink");
    int c = b.bank("c", Rational(1));
    int d = b.bank("d");
    int in2 = b.bank("in2");
    int e = b.bank("e");
    int e_sink = b.bank("e_sink");
    int g = b.bank("g", Rational(1));
    int out = b.bank("out");
    b.wire(in1, a);
    b.wire(a, a_sink);
    b.cds(c, d, a, Rational(1));  // d receives 1 - r1
    b.wire(d, e);
    b.wire(in2, e);               // e receives 1 - r1 + r2, capped at 1
    b.wire(e, e_sink);
    b.cds(g, out, e, Rational(1));  // out receives max(0, r1 - r2)
    return b.finish(GadgetKind::PosSub, {}, {in1, in2}, {out});
}

GadgetTemplate make_abs_diff() {
    TemplateBuilder b;
    auto dup1 = b.inline_template(make_dup(GadgetKind::Dup, Rational(1)), "dup1");
    auto dup2 = b.inline_template(make_dup(GadgetKind::Dup, Rational(1)), "dup2");
    auto pos1 = b.inline_template(make_pos_sub(), "pos1");
    auto pos2 = b.inline_template(make_pos_sub(), "pos2");
    auto add = b.inline_template(make_add(2), "add");
    b.wire(dup1.out[0], pos1.in[0]);
    b.wire(dup2.out[0], pos1.in[1]);
    b.wire(dup2.out[1], pos2.in[0]);
    b.wire(dup1.out[1], pos2.in[1]);
    b.wire(pos1.out[0], add.in[0]);
    b.wire(pos2.out[0], add.in[1]);
    return b.finish(GadgetKind::AbsDiff, {}, {dup1.in[0], dup2.in[0]}, {add.out[0]});
}

// Core producing r1(1+r2)/4 from halved inputs; the surrounding composite
// recovers the plain product.
GadgetTemplate make_mul_core() {
    TemplateBuilder b;
    int in_a = b.bank("in_a");  // carries r1/2
    int a = b.bank("a");
    int a_sink = b.bank("a_sink");
    int c = b.bank("c", Rational(1));
    int d = b.bank("d");
    int d_sink = b.bank("d_sink");
    int f = b.bank("f", Rational(1, 2));
    int g = b.bank("g");
    int h = b.bank("h");
    int out = b.bank("out");
    int in_b = b.bank("in_b");  // carries r2/2
    b.wire(in_a, a);
    b.wire(a, a_sink);
    b.cds(c, d, a, Rational(1));
    b.wire(d, d_sink);
    b.cds(f, g, d, Rational(1));
    b.cds(f, h, a, Rational(1));
    b.wire(g, out);
    b.wire(in_b, f);
    return b.finish(GadgetKind::Mul, {}, {in_a, in_b}, {out});
}

GadgetTemplate make_mul() {
    TemplateBuilder b;
    auto dup_r1 = b.inline_template(make_dup(GadgetKind::Dup, Rational(1)), "dup_r1");
    auto quarter = b.inline_template(make_dup(GadgetKind::Dup, Rational(1, 4)), "quarter");
    auto half1 = b.inline_template(make_dup(GadgetKind::Dup, Rational(1, 2)), "half1");
    auto half2 = b.inline_template(make_dup(GadgetKind::Dup, Rational(1, 2)), "half2");
    auto core = b.inline_template(make_mul_core(), "core");
    auto pos = b.inline_template(make_pos_sub(), "pos");
    auto dup_a = b.inline_template(make_dup(GadgetKind::Dup, Rational(1)), "dup_a");
    auto dup_b1 = b.inline_template(make_dup(GadgetKind::Dup, Rational(1)), "dup_b1");
    auto dup_b2 = b.inline_template(make_dup(GadgetKind::Dup, Rational(1)), "dup_b2");
    auto add4 = b.inline_template(make_add(4), "add4");

    b.wire(dup_r1.out[0], quarter.in[0]);
    b.wire(dup_r1.out[1], half1.in[0]);
    b.sink(quarter.out[0], "quarter.unused");
    b.sink(half1.out[0], "half1.unused");
    b.sink(half2.out[0], "half2.unused");
    b.wire(half1.out[1], core.in[0]);   // r1/2
    b.wire(half2.out[1], core.in[1]);   // r2/2
    b.wire(core.out[0], pos.in[0]);     // r1(1+r2)/4
    b.wire(quarter.out[1], pos.in[1]);  // r1/4
    b.wire(pos.out[0], dup_a.in[0]);    // r1 r2 / 4
    b.wire(dup_a.out[0], dup_b1.in[0]);
    b.wire(dup_a.out[1], dup_b2.in[0]);
    b.wire(dup_b1.out[0], add4.in[0]);
    b.wire(dup_b1.out[1], add4.in[1]);
    b.wire(dup_b2.out[0], add4.in[2]);
    b.wire(dup_b2.out[1], add4.in[3]);
    return b.finish(GadgetKind::Mul, {}, {dup_r1.in[0], half2.in[0]}, {add4.out[0]});
}

GadgetTemplate make_sqrt_const(const Rational& c) {
    TemplateBuilder b;
    Rational e = Rational(1) - c;
    int n1 = b.bank("n1", e);
    int n2 = b.bank("n2");
    int n3 = b.bank("n3");
    int n4 = b.bank("n4");
    int n5 = b.bank("n5", e);
    int n6 = b.bank("n6");
    int n7 = b.bank("n7");
    int n8 = b.bank("n8");
    int n9 = b.bank("n9");
    int n10 = b.bank("n10", Rational(1));
    int n11 = b.bank("n11");
    int out = b.bank("out");
    b.wire(n1, n2);
    b.cds(n1, n4, n6, Rational(1));
    b.wire(n2, n3);
    b.cds(n5, n9, n2, Rational(1));
    b.wire(n5, n6);
    b.wire(n6, n7);
    b.wire(n7, n8);
    b.cds(n10, n11, n7, Rational(1));
    b.wire(n11, out);
    GadgetParams p;
    p.c = c;
    return b.finish(GadgetKind::SqrtConst, p, {}, {out});
}

GadgetTemplate make_sqrt() {
    TemplateBuilder b;
    int in = b.bank("in");
    int m1 = b.bank("m1");
    int b2 = b.bank("b2", Rational(1));
    int b3 = b.bank("b3");
    int b4 = b.bank("b4");
    int b5 = b.bank("b5", Rational(1));
    int b6 = b.bank("b6");
    int b7 = b.bank("b7");
    int b8 = b.bank("b8", Rational(1));
    int b9 = b.bank("b9");
    int b10 = b.bank("b10");
    int b11 = b.bank("b11");
    int b12 = b.bank("b12");
    int b13 = b.bank("b13");
    int b14 = b.bank("b14");
    int b15 = b.bank("b15");
    int b16 = b.bank("b16");
    int b17 = b.bank("b17");
    int b18 = b.bank("b18");
    int b19 = b.bank("b19", Rational(1));
    int out = b.bank("out");
    b.wire(in, m1);
    b.cds(b2, b3, in, Rational(1));   // 1 - r
    b.wire(b3, b4);
    b.wire(b4, b14);
    b.cds(b5, b6, b3, Rational(1));   // back to r
    b.wire(b6, b7);
    b.cds(b8, b9, b6, Rational(1));   // 1 - r again, feeding the core pair
    b.wire(b9, b10);
    b.wire(b10, b11);
    b.wire(b11, b12);
    b.cds(b10, b13, b15, Rational(1));
    b.cds(b14, b18, b11, Rational(1));
    b.wire(b14, b15);
    b.wire(b15, b16);
    b.wire(b16, b17);
    b.cds(b19, out, b16, Rational(1));  // 1 - (1 - sqrt r)
    return b.finish(GadgetKind::Sqrt, {}, {in}, {out});
}

GadgetTemplate make_degenerate_mul() {
    TemplateBuilder b;
    int in1 = b.bank("in1");
    int a = b.bank("a");
    int a_sink = b.bank("a_sink");
    int c = b.bank("c", Rational(1));
    int d = b.bank("d");
    int d_sink = b.bank("d_sink");
    int f = b.bank("f");
    int g = b.bank("g");
    int h = b.bank("h", Rational(1));
    int out = b.bank("out");
    int in2 = b.bank("in2");
    b.wire(in1, a);
    b.wire(a, a_sink);
    b.cds(c, d, a, Rational(1));
    b.wire(d, d_sink);
    b.cds(f, g, d, Rational(1));
    b.cds(f, h, a, Rational(1));
    b.wire(g, out);
    b.wire(in2, f);
    GadgetParams p;
    p.allow_degenerate = true;
    return b.finish(GadgetKind::DegenerateMul, p, {in1, in2}, {out});
}

GadgetTemplate make_degenerate_div() {
    TemplateBuilder b;
    int in2 = b.bank("in2");
    int a = b.bank("a");
    int a_sink = b.bank("a_sink");
    int c = b.bank("c", Rational(1));
    int d = b.bank("d");
    int d_sink = b.bank("d_sink");
    int in1 = b.bank("in1");
    int f = b.bank("f");
    int g = b.bank("g");
    int g_sink = b.bank("g_sink");
    int i = b.bank("i", Rational(1));
    int j = b.bank("j");
    int j_sink = b.bank("j_sink");
    int l = b.bank("l", Rational(1));
    int m = b.bank("m");
    int out = b.bank("out");
    b.wire(in2, a);
    b.wire(a, a_sink);
    b.cds(c, d, a, Rational(1));      // 1 - r2
    b.wire(d, d_sink);
    b.wire(in1, f);
    b.cds(f, g, d, Rational(1));      // liability r2 against assets r1
    b.wire(g, g_sink);
    b.cds(i, j, f, Rational(1));      // 1 - min(1, r1/r2)
    b.wire(j, j_sink);
    b.cds(l, m, j, Rational(1));      // min(1, r1/r2)
    b.wire(m, out);
    GadgetParams p;
    p.allow_degenerate = true;
    return b.finish(GadgetKind::DegenerateDiv, p, {in1, in2}, {out});
}

GadgetTemplate make_scale_rational(const Rational& q) {
    if (q <= 1) {
        TemplateBuilder b;
        auto dup = b.inline_template(make_dup(GadgetKind::Dup, q), "scale");
        b.sink(dup.out[0], "scale.unused");
        GadgetParams p;
        p.q = q;
        return b.finish(GadgetKind::ScaleRationalGuarded, p, {dup.in[0]}, {dup.out[1]});
    }
    Int num = numerator(q), den = denominator(q);
    TemplateBuilder b;
    int entry;
    int source;  // bank carrying r/den
    if (den > 1) {
        auto dup = b.inline_template(make_dup(GadgetKind::Dup, Rational(1, den)), "prescale");
        b.sink(dup.out[0], "prescale.unused");
        entry = dup.in[0];
        source = dup.out[1];
    } else {
        auto relay = b.inline_template(make_add(1), "entry");
        entry = relay.in[0];
        source = relay.out[0];
    }
    // duplicate-and-add: num copies of r/den (valid while q*r stays in [0,1])
    std::deque<int> leaves{source};
    int copies = 1;
    int idx = 0;
    long long needed = num.convert_to<long long>();
    while (copies < needed) {
        int leaf = leaves.front();
        leaves.pop_front();
        auto dup = b.inline_template(make_dup(GadgetKind::Dup, Rational(1)), "fan" + std::to_string(idx++));
        b.wire(leaf, dup.in[0]);
        leaves.push_back(dup.out[0]);
        leaves.push_back(dup.out[1]);
        ++copies;
    }
    auto add = b.inline_template(make_add(static_cast<int>(needed)), "sum");
    int slot = 0;
    for (int leaf : leaves) b.wire(leaf, add.in[slot++]);
    GadgetParams p;
    p.q = q;
    return b.finish(GadgetKind::ScaleRationalGuarded, p, {entry}, {add.out[0]});
}

GadgetTemplate make_max_min(bool is_max) {
    TemplateBuilder b;
    auto dup1 = b.inline_template(make_dup(GadgetKind::Dup, Rational(1)), "dup1");
    auto dup2 = b.inline_template(make_dup(GadgetKind::Dup, Rational(1)), "dup2");
    auto abs = b.inline_template(make_abs_diff(), "abs");
    auto habs = b.inline_template(make_dup(GadgetKind::Dup, Rational(1, 2)), "habs");
    auto h1 = b.inline_template(make_dup(GadgetKind::Dup, Rational(1, 2)), "h1");
    auto h2 = b.inline_template(make_dup(GadgetKind::Dup, Rational(1, 2)), "h2");
    b.wire(dup1.out[0], h1.in[0]);
    b.wire(dup1.out[1], abs.in[0]);
    b.wire(dup2.out[0], h2.in[0]);
    b.wire(dup2.out[1], abs.in[1]);
    b.wire(abs.out[0], habs.in[0]);
    b.sink(habs.out[0], "habs.unused");
    b.sink(h1.out[0], "h1.unused");
    b.sink(h2.out[0], "h2.unused");
    int out;
    if (is_max) {
        auto add1 = b.inline_template(make_add(2), "add1");
        auto add2 = b.inline_template(make_add(2), "add2");
        b.wire(habs.out[1], add1.in[0]);  // |r1-r2|/2
        b.wire(h2.out[1], add1.in[1]);    // r2/2
        b.wire(add1.out[0], add2.in[0]);
        b.wire(h1.out[1], add2.in[1]);    // r1/2
        out = add2.out[0];
    } else {
        auto add = b.inline_template(make_add(2), "add");
        auto pos = b.inline_template(make_pos_sub(), "pos");
        b.wire(h1.out[1], add.in[0]);
        b.wire(h2.out[1], add.in[1]);     // (r1+r2)/2
        b.wire(add.out[0], pos.in[0]);
        b.wire(habs.out[1], pos.in[1]);   // minus |r1-r2|/2
        out = pos.out[0];
    }
    return b.finish(is_max ? GadgetKind::Max : GadgetKind::Min, {},
                    {dup1.in[0], dup2.in[0]}, {out});
}

void check_unit_constant(const Rational& c, const char* what) {
    if (c < 0 || c > 1)
        throw Error(ErrorCode::InvalidParam, std::string(what) + " must lie in [0,1], got " +
                                                 format_rational(c));
}

}  // namespace

GadgetTemplate instantiate_gadget(GadgetKind kind, const GadgetParams& params) {
    switch (kind) {
        case GadgetKind::Add:
            if (params.fan_in < 1) throw Error(ErrorCode::InvalidParam, "addition fan-in must be >= 1");
            return make_add(params.fan_in);
        case GadgetKind::Dup:
        case GadgetKind::ScaleConst:
            check_unit_constant(params.c, "scale factor");
            return make_dup(kind, params.c);
        case GadgetKind::ScaleRationalGuarded:
            if (params.q < 0) throw Error(ErrorCode::InvalidParam, "scale factor must be non-negative");
            if (numerator(params.q) > 4096)
                throw Error(ErrorCode::InvalidParam, "guarded scaling numerator too large for a gadget tree");
            return make_scale_rational(params.q);
        case GadgetKind::PosSub: return make_pos_sub();
        case GadgetKind::AbsDiff: return make_abs_diff();
        case GadgetKind::Inv: return make_inv();
        case GadgetKind::Sqrt: return make_sqrt();
        case GadgetKind::SqrtConst:
            check_unit_constant(params.c, "radicand");
            return make_sqrt_const(params.c);
        case GadgetKind::Mul: return make_mul();
        case GadgetKind::Max: return make_max_min(true);
        case GadgetKind::Min: return make_max_min(false);
        case GadgetKind::ConstSource:
            check_unit_constant(params.c, "source constant");
            return make_const_source(params.c);
        case GadgetKind::DegenerateMul:
            if (!params.allow_degenerate)
                throw Error(ErrorCode::DegenerateKindRequiresFlag,
                            "degenerate multiplication must be requested explicitly");
            return make_degenerate_mul();
        case GadgetKind::DegenerateDiv:
            if (!params.allow_degenerate)
                throw Error(ErrorCode::DegenerateKindRequiresFlag,
                            "degenerate division must be requested explicitly");
            return make_degenerate_div();
    }
    throw Error(ErrorCode::Internal, "bad gadget kind");
}

std::vector<double> gadget_semantics_float(GadgetKind kind, const GadgetParams& params,
                                           const std::vector<double>& in) {
    switch (kind) {
        case GadgetKind::Add: {
            double s = 0;
            for (double v : in) s += v;
            return {s};
        }
        case GadgetKind::Dup:
        case GadgetKind::ScaleConst: return {in[0], to_double(params.c) * in[0]};
        case GadgetKind::ScaleRationalGuarded: return {to_double(params.q) * in[0]};
        case GadgetKind::PosSub: return {std::max(0.0, in[0] - in[1])};
        case GadgetKind::AbsDiff: return {std::fabs(in[0] - in[1])};
        case GadgetKind::Inv: return {1.0 - in[0]};
        case GadgetKind::Sqrt: return {std::sqrt(in[0])};
        case GadgetKind::SqrtConst: return {std::sqrt(to_double(params.c))};
        case GadgetKind::Mul:
        case GadgetKind::DegenerateMul: return {in[0] * in[1]};
        case GadgetKind::Max: return {std::max(in[0], in[1])};
        case GadgetKind::Min: return {std::min(in[0], in[1])};
        case GadgetKind::ConstSource: return {to_double(params.c)};
        case GadgetKind::DegenerateDiv:
            return {in[1] == 0.0 ? 1.0 : std::min(1.0, in[0] / in[1])};
    }
    throw Error(ErrorCode::Internal, "bad gadget kind");
}

std::optional<std::vector<Rational>> gadget_semantics_exact(GadgetKind kind, const GadgetParams& params,
                                                            const std::vector<Rational>& in) {
    auto rational_sqrt = [](const Rational& v) -> std::optional<Rational> {
        Int rn = isqrt(numerator(v)), rd = isqrt(denominator(v));
        if (rn * rn != numerator(v) || rd * rd != denominator(v)) return std::nullopt;
        return Rational(rn, rd);
    };
    switch (kind) {
        case GadgetKind::Add: {
            Rational s(0);
            for (const auto& v : in) s += v;
            return std::vector<Rational>{s};
        }
        case GadgetKind::Dup:
        case GadgetKind::ScaleConst: return std::vector<Rational>{in[0], params.c * in[0]};
        case GadgetKind::ScaleRationalGuarded: return std::vector<Rational>{params.q * in[0]};
        case GadgetKind::PosSub: {
            Rational diff = in[0] - in[1];
            return std::vector<Rational>{std::max(Rational(0), diff)};
        }
        case GadgetKind::AbsDiff: {
            Rational diff = in[0] >= in[1] ? Rational(in[0] - in[1]) : Rational(in[1] - in[0]);
            return std::vector<Rational>{diff};
        }
        case GadgetKind::Inv: return std::vector<Rational>{Rational(1) - in[0]};
        case GadgetKind::Sqrt: {
            auto r = rational_sqrt(in[0]);
            if (!r) return std::nullopt;
            return std::vector<Rational>{*r};
        }
        case GadgetKind::SqrtConst: {
            auto r = rational_sqrt(params.c);
            if (!r) return std::nullopt;
            return std::vector<Rational>{*r};
        }
        case GadgetKind::Mul:
        case GadgetKind::DegenerateMul: return std::vector<Rational>{in[0] * in[1]};
        case GadgetKind::Max: return std::vector<Rational>{std::max(in[0], in[1])};
        case GadgetKind::Min: return std::vector<Rational>{std::min(in[0], in[1])};
        case GadgetKind::ConstSource: return std::vector<Rational>{params.c};
        case GadgetKind::DegenerateDiv: {
            if (in[1] == 0) return std::vector<Rational>{Rational(1)};
            Rational ratio = in[0] / in[1];
            return std::vector<Rational>{std::min(Rational(1), ratio)};
        }
    }
    throw Error(ErrorCode::Internal, "bad gadget kind");
}

FinancialSystem gadget_harness(const GadgetTemplate& temp, const std::vector<Rational>& inputs,
                               std::vector<int>* output_banks) {
    if (inputs.size() != temp.input_ports.size())
        throw Error(ErrorCode::InvalidParam, "harness input arity mismatch");
    FinancialSystem sys;
    std::vector<int> local(temp.banks.size());
    for (std::size_t i = 0; i < temp.banks.size(); ++i)
        local[i] = sys.add_bank("g." + temp.banks[i], temp.externals[i]);
    for (const auto& c : temp.contracts)
        if (c.notional != 0)
            sys.add_contract_indexed(local[c.debtor], local[c.creditor],
                                     c.reference < 0 ? -1 : local[c.reference], c.notional);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (inputs[i] < 0 || inputs[i] > 1)
            throw Error(ErrorCode::InvalidParam, "gadget inputs must lie in [0,1]");
        int src = sys.add_bank("src" + std::to_string(i), inputs[i]);
        sys.add_contract_indexed(src, local[temp.input_ports[i]], -1, Rational(1));
    }
    if (output_banks) output_banks->clear();
    for (std::size_t j = 0; j < temp.output_ports.size(); ++j) {
        int sink = sys.add_bank("osink" + std::to_string(j));
        sys.add_contract_indexed(local[temp.output_ports[j]], sink, -1, Rational(1));
        if (output_banks) output_banks->push_back(local[temp.output_ports[j]]);
    }
    return normalize_system(sys);
}

namespace {

// The square-root gadgets close a two-bank cycle whose clearing rate is
// 1 - sqrt(x); near x = 0 that fixed point is non-hyperbolic and iteration
// stalls, so those harnesses are verified against the exact surd clearing
// vector instead.
std::map<std::string, QuadraticSurd> sqrt_witness(GadgetKind kind, const GadgetParams& params,
                                                  const std::vector<Rational>& inputs) {
    std::map<std::string, QuadraticSurd> w;
    QuadraticSurd one{Rational(1)};
    if (kind == GadgetKind::Sqrt) {
        const Rational& r = inputs.at(0);
        QuadraticSurd root = QuadraticSurd::sqrt_of(r);
        QuadraticSurd rho = one - root;
        QuadraticSurd rr{r}, inv{Rational(1) - r};
        w["in"] = rr;
        w["b3"] = inv;
        w["b4"] = inv;
        w["b6"] = rr;
        w["b9"] = inv;
        for (const char* b : {"b10", "b11", "b14", "b15", "b16"}) w[b] = rho;
        w["out"] = root;
    } else {
        const Rational& c = params.c;
        QuadraticSurd root = QuadraticSurd::sqrt_of(c);
        QuadraticSurd rho = one - root;
        for (const char* b : {"n1", "n2", "n5", "n6", "n7"}) w[b] = rho;
        w["n11"] = root;
        w["out"] = root;
    }
    return w;
}

}  // namespace

GadgetCheckResult run_gadget_check(GadgetKind kind, const GadgetParams& params,
                                   const std::vector<Rational>& inputs, double float_tol) {
    GadgetTemplate temp = instantiate_gadget(kind, params);
    std::vector<int> out_banks;
    FinancialSystem sys = gadget_harness(temp, inputs, &out_banks);

    GadgetCheckResult result;
    auto expected_exact = gadget_semantics_exact(kind, params, inputs);
    std::vector<double> in_float;
    for (const auto& q : inputs) in_float.push_back(to_double(q));
    std::vector<double> expected_float = gadget_semantics_float(kind, params, in_float);

    if (kind == GadgetKind::Sqrt || kind == GadgetKind::SqrtConst) {
        auto named = sqrt_witness(kind, params, inputs);
        std::vector<QuadraticSurd> witness(sys.bank_count(), QuadraticSurd(Rational(1)));
        for (auto& [name, value] : named)
            if (sys.has_bank("g." + name)) witness[sys.bank_index("g." + name)] = value;
        for (std::size_t i = 0; i < inputs.size(); ++i)
            witness[sys.bank_index("src" + std::to_string(i))] = QuadraticSurd(inputs[i]);
        QuadraticSurd residual = clearing_residual_t(sys, witness);
        QuadraticSurd expected =
            QuadraticSurd::sqrt_of(kind == GadgetKind::Sqrt ? inputs.at(0) : params.c);
        result.exact = expected.is_rational();
        result.ok = residual.sign() == 0 && witness[out_banks.at(0)] == expected;
        result.float_rates.push_back(witness[out_banks.at(0)].to_double());
        if (result.exact) result.exact_rates.push_back(expected.as_rational());
        return result;
    }

    if (is_acyclic(build_auxiliary_graph(sys))) {
        SolveReport rep = solve_acyclic(sys);
        const auto& sol = rep.solutions[0];
        for (int bank : out_banks) result.exact_rates.push_back(sol[bank]);
        if (expected_exact) {
            result.exact = true;
            result.ok = result.exact_rates == *expected_exact;
            return result;
        }
        for (const auto& q : result.exact_rates)
            result.float_rates.push_back(to_double(q));
    } else {
        IterateOptions opts;
        opts.eps = 1e-13;
        opts.max_iter = 1000000;
        SolveReport rep = iterate_clearing(sys, opts);
        if (!rep.converged) {
            result.ok = false;
            result.max_error = rep.float_residual;
            return result;
        }
        for (int bank : out_banks) result.float_rates.push_back(rep.float_solution[bank]);
    }
    for (std::size_t i = 0; i < result.float_rates.size(); ++i)
        result.max_error = std::max(result.max_error, std::fabs(result.float_rates[i] - expected_float[i]));
    result.ok = result.max_error <= float_tol;
    return result;
}

bool gadget_clearing_check(GadgetKind kind, const GadgetParams& params,
                           const std::vector<Rational>& inputs, double float_tol) {
    GadgetCheckResult r = run_gadget_check(kind, params, inputs, float_tol);
    if (!r.ok)
        throw Error(ErrorCode::SemanticsMismatch,
                    std::string(gadget_kind_name(kind)) + " harness deviates from its semantics by " +
                        std::to_string(r.max_error));
    return true;
}

namespace {

class NetworkAssembler {
  public:
    explicit NetworkAssembler(FinancialSystem& sys) : sys_(sys) {}

    std::vector<int> instantiate(const GadgetTemplate& t, const std::string& prefix,
                                 std::vector<int>& in_ports, std::vector<int>& out_ports,
                                 std::vector<std::string>* bank_log) {
        std::vector<int> local(t.banks.size());
        for (std::size_t i = 0; i < t.banks.size(); ++i) {
            local[i] = sys_.add_bank(prefix + "." + t.banks[i], t.externals[i]);
            if (bank_log) bank_log->push_back(prefix + "." + t.banks[i]);
        }
        for (const auto& c : t.contracts)
            if (c.notional != 0)
                sys_.add_contract_indexed(local[c.debtor], local[c.creditor],
                                          c.reference < 0 ? -1 : local[c.reference], c.notional);
        in_ports.clear();
        out_ports.clear();
        for (int i : t.input_ports) in_ports.push_back(local[i]);
        for (int i : t.output_ports) out_ports.push_back(local[i]);
        return local;
    }

    void wire(int from, int to) { sys_.add_contract_indexed(from, to, -1, Rational(1)); }

  private:
    FinancialSystem& sys_;
};

}  // namespace

CompiledNetwork compile_circuit(const Circuit& c) {
    validate_circuit(c);
    if (!is_normalized(c))
        throw Error(ErrorCode::NotNormalized, "compile requires a normalized circuit");
    for (const Gate& g : c.gates)
        if (g.kind == GateKind::Sub || g.kind == GateKind::Max || g.kind == GateKind::Min)
            throw Error(ErrorCode::NotNormalized, "compile requires a normalized circuit");
    if (c.inputs.empty() || c.outputs.empty())
        throw Error(ErrorCode::NotNormalized, "compiled circuits need inputs and outputs");
    if (c.inputs.size() != c.outputs.size())
        throw Error(ErrorCode::NotNormalized,
                    "fixed-point compilation needs matching input and output counts");

    CompiledNetwork net;
    NetworkAssembler as(net.sys);
    net.gate_banks.resize(c.gates.size());

    // input banks first so they occupy the leading indices
    std::vector<int> input_bank_of_gate(c.gates.size(), -1);
    for (std::size_t pos = 0; pos < c.inputs.size(); ++pos) {
        std::string name = "in" + std::to_string(pos);
        int idx = net.sys.add_bank(name);
        net.input_banks.push_back(name);
        input_bank_of_gate[c.inputs[pos]] = idx;
        net.gate_banks[c.inputs[pos]].push_back(name);
    }

    // fan-out bookkeeping
    std::vector<int> uses(c.gates.size(), 0);
    for (const Gate& g : c.gates) {
        if (g.a >= 0) ++uses[g.a];
        if (g.b >= 0 && (g.kind != GateKind::Sqrt && g.kind != GateKind::ScaleConst)) ++uses[g.b];
    }
    for (int o : c.outputs) ++uses[o];

    std::vector<std::deque<int>> taps(c.gates.size());
    auto distribute = [&](int gate, int port_bank) {
        int need = uses[gate];
        if (need == 0) {
            int sink = net.sys.add_bank("g" + std::to_string(gate) + ".unused");
            as.wire(port_bank, sink);
            net.gate_banks[gate].push_back(net.sys.bank_id(sink));
            return;
        }
        if (need == 1) {
            taps[gate].push_back(port_bank);
            return;
        }
        std::deque<int> leaves{port_bank};
        int fan = 0;
        while (static_cast<int>(leaves.size()) < need) {
            int leaf = leaves.front();
            leaves.pop_front();
            std::vector<int> in_ports, out_ports;
            std::string prefix = "g" + std::to_string(gate) + ".fan" + std::to_string(fan++);
            as.instantiate(make_dup(GadgetKind::Dup, Rational(1)), prefix, in_ports, out_ports,
                           &net.gate_banks[gate]);
            as.wire(leaf, in_ports[0]);
            leaves.push_back(out_ports[0]);
            leaves.push_back(out_ports[1]);
        }
        taps[gate] = leaves;
    };
    auto take_tap = [&](int gate) {
        if (taps[gate].empty()) throw Error(ErrorCode::Internal, "fan-out bookkeeping failed");
        int b = taps[gate].front();
        taps[gate].pop_front();
        return b;
    };

    for (std::size_t i = 0; i < c.gates.size(); ++i) {
        const Gate& g = c.gates[i];
        std::string prefix = "g" + std::to_string(i);
        std::vector<int> in_ports, out_ports;
        int value_port = -1;
        switch (g.kind) {
            case GateKind::Input:
                value_port = input_bank_of_gate[i];
                break;
            case GateKind::Const: {
                as.instantiate(make_const_source(g.constant), prefix, in_ports, out_ports,
                               &net.gate_banks[i]);
                value_port = out_ports[0];
                break;
            }
            case GateKind::Add: {
                as.instantiate(make_add(2), prefix, in_ports, out_ports, &net.gate_banks[i]);
                as.wire(take_tap(g.a), in_ports[0]);
                as.wire(take_tap(g.b), in_ports[1]);
                value_port = out_ports[0];
                break;
            }
            case GateKind::Mul: {
                as.instantiate(make_mul(), prefix, in_ports, out_ports, &net.gate_banks[i]);
                as.wire(take_tap(g.a), in_ports[0]);
                as.wire(take_tap(g.b), in_ports[1]);
                value_port = out_ports[0];
                break;
            }
            case GateKind::AbsDiff: {
                as.instantiate(make_abs_diff(), prefix, in_ports, out_ports, &net.gate_banks[i]);
                as.wire(take_tap(g.a), in_ports[0]);
                as.wire(take_tap(g.b), in_ports[1]);
                value_port = out_ports[0];
                break;
            }
            case GateKind::ScaleConst: {
                as.instantiate(make_dup(GadgetKind::ScaleConst, g.constant), prefix, in_ports, out_ports,
                               &net.gate_banks[i]);
                as.wire(take_tap(g.a), in_ports[0]);
                int sink = net.sys.add_bank(prefix + ".unused");
                as.wire(out_ports[0], sink);
                value_port = out_ports[1];
                break;
            }
            case GateKind::Sqrt: {
                as.instantiate(make_sqrt(), prefix, in_ports, out_ports, &net.gate_banks[i]);
                as.wire(take_tap(g.a), in_ports[0]);
                value_port = out_ports[0];
                break;
            }
            default:
                throw Error(ErrorCode::NotNormalized, "unexpected gate kind in a normalized circuit");
        }
        distribute(static_cast<int>(i), value_port);
    }

    // output banks occupy the trailing indices; each one closes the loop
    // back onto its input bank
    for (std::size_t j = 0; j < c.outputs.size(); ++j) {
        std::string name = "out" + std::to_string(j);
        int ob = net.sys.add_bank(name);
        net.output_banks.push_back(name);
        as.wire(take_tap(c.outputs[j]), ob);
        if (j < c.inputs.size()) as.wire(ob, input_bank_of_gate[c.inputs[j]]);
    }

    net.sys = normalize_system(net.sys);
    auto nondeg = check_nondegenerate(net.sys);
    if (!nondeg.ok)
        throw Error(ErrorCode::DegenerateOutput, "compiled network failed the non-degeneracy check");
    return net;
}

std::vector<double> plant_clearing_vector(const CompiledNetwork& net, const std::vector<double>& x) {
    const FinancialSystem& sys = net.sys;
    if (x.size() != net.input_banks.size())
        throw Error(ErrorCode::InvalidParam, "planted input arity mismatch");

    std::vector<int> in_idx, out_idx;
    for (const auto& b : net.input_banks) in_idx.push_back(sys.bank_index(b));
    for (const auto& b : net.output_banks) out_idx.push_back(sys.bank_index(b));

    // order the banks ignoring the feedback arcs; the equations keep them
    std::set<std::pair<int, int>> feedback;
    for (std::size_t j = 0; j < out_idx.size() && j < in_idx.size(); ++j)
        feedback.insert({out_idx[j], in_idx[j]});
    AuxiliaryGraph aux = build_auxiliary_graph(sys);
    std::vector<std::pair<int, int>> kept;
    for (auto arc : aux.blue)
        if (!feedback.count(arc)) kept.push_back(arc);
    aux.blue = kept;

    Condensation cond = scc_condensation(aux);
    int n = sys.bank_count();
    std::vector<double> r(n, 1.0);
    std::vector<char> is_input(n, 0);
    for (std::size_t pos = 0; pos < in_idx.size(); ++pos) {
        r[in_idx[pos]] = x[pos];
        is_input[in_idx[pos]] = 1;
    }

    struct FloatContract {
        int debtor, creditor, reference;
        double notional;
    };
    std::vector<FloatContract> fc;
    fc.reserve(sys.contracts().size());
    for (const Contract& c : sys.contracts())
        fc.push_back({c.debtor, c.creditor, c.reference, to_double(c.notional)});
    std::vector<double> ext(n);
    for (int i = 0; i < n; ++i) ext[i] = to_double(sys.external_assets(i));
    std::vector<std::vector<int>> out_of(n), into(n);
    for (std::size_t ci = 0; ci < fc.size(); ++ci) {
        out_of[fc[ci].debtor].push_back(static_cast<int>(ci));
        into[fc[ci].creditor].push_back(static_cast<int>(ci));
    }

    auto apply_map_at = [&](int v) {
        double liab = 0.0, asset = ext[v];
        for (int ci : out_of[v]) {
            double amount = fc[ci].notional;
            if (fc[ci].reference >= 0) amount *= (1.0 - r[fc[ci].reference]);
            liab += amount;
        }
        for (int ci : into[v]) {
            double amount = fc[ci].notional;
            if (fc[ci].reference >= 0) amount *= (1.0 - r[fc[ci].reference]);
            asset += r[fc[ci].debtor] * amount;
        }
        if (asset >= liab) return 1.0;
        if (asset <= 0.0) return 0.0;
        return asset / liab;
    };

    for (int comp : cond.topo_order) {
        const auto& members = cond.members[comp];
        if (members.size() == 1 && !is_input[members[0]]) {
            r[members[0]] = apply_map_at(members[0]);
            continue;
        }
        if (members.size() == 1) continue;
        // small cyclic core: relax in place
        for (int iter = 0; iter < 2000; ++iter) {
            double delta = 0.0;
            for (int v : members) {
                if (is_input[v]) continue;
                double nv = 0.5 * r[v] + 0.5 * apply_map_at(v);
                delta = std::max(delta, std::fabs(nv - r[v]));
                r[v] = nv;
            }
            if (delta < 1e-15) break;
        }
    }
    return r;
}

}  // namespace fincds
