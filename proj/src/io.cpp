#include "fincds/io.hpp"

#include "fincds/errors.hpp"
#include "fincds/graph.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <sstream>

namespace fincds {

using nlohmann::json;

namespace {

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

Rational rational_field(const json& j, const char* what) {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(Int(j.get<long long>()));
    throw Error(ErrorCode::ParseError, std::string(what) + " must be an exact string like \"2/3\"");
}

}  // namespace

FinancialSystem parse_instance(const std::string& json_text) {
    json doc = parse_json(json_text);
    if (!doc.is_object() || !doc.contains("banks") || !doc.contains("contracts"))
        throw Error(ErrorCode::ParseError, "instance document needs 'banks' and 'contracts'");
    FinancialSystem sys;
    for (const json& b : doc["banks"]) {
        if (!b.contains("id")) throw Error(ErrorCode::ParseError, "bank entry without id");
        Rational e(0);
        if (b.contains("external_assets")) e = rational_field(b["external_assets"], "external_assets");
        if (sys.has_bank(b["id"].get<std::string>()))
            throw Error(ErrorCode::ParseError, "duplicate bank id '" + b["id"].get<std::string>() + "'");
        sys.add_bank(b["id"].get<std::string>(), e);
    }
    for (const json& c : doc["contracts"]) {
        std::string debtor = c.at("debtor").get<std::string>();
        std::string creditor = c.at("creditor").get<std::string>();
        Rational notional = rational_field(c.at("notional"), "notional");
        if (c.contains("reference") && !c["reference"].is_null())
            sys.add_cds(debtor, creditor, c["reference"].get<std::string>(), notional);
        else
            sys.add_debt(debtor, creditor, notional);
    }
    return sys;
}

std::string serialize_instance(const FinancialSystem& sys) {
    json doc;
    doc["banks"] = json::array();
    for (int i = 0; i < sys.bank_count(); ++i)
        doc["banks"].push_back(
            {{"id", sys.bank_id(i)}, {"external_assets", format_rational(sys.external_assets(i))}});
    doc["contracts"] = json::array();
    for (const Contract& c : sys.contracts()) {
        json entry = {{"debtor", sys.bank_id(c.debtor)},
                      {"creditor", sys.bank_id(c.creditor)},
                      {"notional", format_rational(c.notional)}};
        if (c.is_cds()) entry["reference"] = sys.bank_id(c.reference);
        doc["contracts"].push_back(entry);
    }
    return doc.dump(2) + "\n";
}

RecoveryVector parse_recovery_vector(const std::string& json_text, const FinancialSystem& sys,
                                     NumericMode mode) {
    json doc = parse_json(json_text);
    if (!doc.is_object()) throw Error(ErrorCode::ParseError, "recovery vector must be an object");
    if (mode == NumericMode::Surd)
        throw Error(ErrorCode::ParseError, "surd-mode vectors have no file representation");
    std::vector<Rational> values(sys.bank_count(), Rational(0));
    std::vector<char> seen(sys.bank_count(), 0);
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        int idx = sys.bank_index(it.key());
        values[idx] = rational_field(it.value(), "recovery rate");
        seen[idx] = 1;
    }
    for (int i = 0; i < sys.bank_count(); ++i)
        if (!seen[i])
            throw Error(ErrorCode::ParseError, "missing recovery rate for bank '" + sys.bank_id(i) + "'");
    if (mode == NumericMode::Rational) return RecoveryVector::rational(std::move(values));
    std::vector<double> flt;
    flt.reserve(values.size());
    for (const auto& q : values) flt.push_back(to_double(q));
    return RecoveryVector::floating(std::move(flt));
}

std::string serialize_recovery_vector(const FinancialSystem& sys, const RecoveryVector& r) {
    json doc = json::object();
    for (int i = 0; i < sys.bank_count(); ++i) {
        switch (r.mode) {
            case NumericMode::Rational: doc[sys.bank_id(i)] = format_rational(r.rat[i]); break;
            case NumericMode::Surd: doc[sys.bank_id(i)] = r.srd[i].to_string(); break;
            case NumericMode::Float: {
                std::ostringstream os;
                os.precision(17);
                os << r.flt[i];
                doc[sys.bank_id(i)] = os.str();
                break;
            }
        }
    }
    return doc.dump(2) + "\n";
}

Circuit parse_circuit(const std::string& json_text) {
    json doc = parse_json(json_text);
    if (!doc.is_object() || !doc.contains("gates"))
        throw Error(ErrorCode::ParseError, "circuit document needs 'gates'");
    Circuit c;
    std::map<std::string, int> index;
    for (const json& g : doc["gates"]) {
        Gate gate;
        std::string id = g.at("id").get<std::string>();
        gate.kind = gate_kind_from_name(g.at("kind").get<std::string>());
        if (g.contains("operands")) {
            int pos = 0;
            for (const json& op : g["operands"]) {
                auto it = index.find(op.get<std::string>());
                if (it == index.end())
                    throw Error(ErrorCode::ParseError,
                                "gate '" + id + "' uses undefined operand '" + op.get<std::string>() + "'");
                if (pos == 0)
                    gate.a = it->second;
                else if (pos == 1)
                    gate.b = it->second;
                else
                    throw Error(ErrorCode::ParseError, "gate '" + id + "' has more than two operands");
                ++pos;
            }
        }
        if (g.contains("constant")) gate.constant = rational_field(g["constant"], "constant");
        if (g.contains("index")) gate.input_index = g["index"].get<int>();
        int idx = c.add_gate(gate);
        c.names.resize(c.gates.size());
        c.names[idx] = id;
        index[id] = idx;
    }
    auto lookup_list = [&](const char* key, std::vector<int>& out) {
        if (!doc.contains(key)) return;
        for (const json& name : doc[key]) {
            auto it = index.find(name.get<std::string>());
            if (it == index.end())
                throw Error(ErrorCode::ParseError,
                            std::string(key) + " references undefined gate '" +
                                name.get<std::string>() + "'");
            out.push_back(it->second);
        }
    };
    lookup_list("inputs", c.inputs);
    lookup_list("outputs", c.outputs);
    // default input indices follow the inputs array order
    for (std::size_t pos = 0; pos < c.inputs.size(); ++pos)
        if (c.gates[c.inputs[pos]].input_index < 0)
            c.gates[c.inputs[pos]].input_index = static_cast<int>(pos);
    validate_circuit(c);
    return c;
}

std::string serialize_circuit(const Circuit& c) {
    json doc;
    doc["gates"] = json::array();
    for (std::size_t i = 0; i < c.gates.size(); ++i) {
        const Gate& g = c.gates[i];
        json entry = {{"id", c.gate_name(static_cast<int>(i))}, {"kind", gate_kind_name(g.kind)}};
        json ops = json::array();
        if (g.a >= 0) ops.push_back(c.gate_name(g.a));
        if (g.b >= 0 && g.kind != GateKind::Sqrt && g.kind != GateKind::ScaleConst)
            ops.push_back(c.gate_name(g.b));
        if (!ops.empty()) entry["operands"] = ops;
        if (g.kind == GateKind::Const || g.kind == GateKind::ScaleConst)
            entry["constant"] = format_rational(g.constant);
        if (g.kind == GateKind::Input) entry["index"] = g.input_index;
        doc["gates"].push_back(entry);
    }
    doc["inputs"] = json::array();
    for (int idx : c.inputs) doc["inputs"].push_back(c.gate_name(idx));
    doc["outputs"] = json::array();
    for (int idx : c.outputs) doc["outputs"].push_back(c.gate_name(idx));
    return doc.dump(2) + "\n";
}

std::string serialize_portmap(const Circuit& c, const CompiledNetwork& net) {
    json doc;
    json gates = json::object();
    for (std::size_t i = 0; i < net.gate_banks.size(); ++i)
        gates[c.gate_name(static_cast<int>(i))] = net.gate_banks[i];
    doc["gates"] = gates;
    doc["input_banks"] = net.input_banks;
    doc["output_banks"] = net.output_banks;
    return doc.dump(2) + "\n";
}

std::string export_dot(const FinancialSystem& sys) {
    std::ostringstream os;
    os << "digraph financial_system {\n";
    os << "  rankdir=LR;\n  node [shape=circle];\n";
    for (int i = 0; i < sys.bank_count(); ++i)
        os << "  \"" << sys.bank_id(i) << "\" [label=\"" << sys.bank_id(i) << "\\ne="
           << format_rational(sys.external_assets(i)) << "\"];\n";
    for (const Contract& c : sys.contracts()) {
        if (c.notional == 0) continue;
        if (c.is_cds()) {
            os << "  \"" << sys.bank_id(c.debtor) << "\" -> \"" << sys.bank_id(c.creditor)
               << "\" [color=orange, label=\"" << format_rational(c.notional) << " (ref "
               << sys.bank_id(c.reference) << ")\"];\n";
            os << "  \"" << sys.bank_id(c.reference) << "\" -> \"" << sys.bank_id(c.debtor)
               << "\" [color=red, constraint=false];\n";
            os << "  \"" << sys.bank_id(c.reference) << "\" -> \"" << sys.bank_id(c.creditor)
               << "\" [color=gray, style=dashed, constraint=false, arrowhead=none];\n";
        } else {
            os << "  \"" << sys.bank_id(c.debtor) << "\" -> \"" << sys.bank_id(c.creditor)
               << "\" [color=blue, label=\"" << format_rational(c.notional) << "\"];\n";
        }
    }
    os << "}\n";
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
    out << content;
}

}  // namespace fincds
