#pragma once

#include "fincds/rational.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fincds {

enum class GateKind { Input, Const, Add, Sub, Mul, Max, Min, AbsDiff, Sqrt, ScaleConst };

const char* gate_kind_name(GateKind k);
GateKind gate_kind_from_name(const std::string& name);

struct Gate {
    GateKind kind = GateKind::Const;
    int a = -1, b = -1;        // operand gate indices
    Rational constant;         // Const value / ScaleConst factor
    int input_index = -1;      // Input gates
};

/// DAG of arithmetic gates in topological order (operands always precede
/// their gate). n input gates, n output gates.
struct Circuit {
    std::vector<Gate> gates;
    std::vector<int> inputs;   // gate index per input position
    std::vector<int> outputs;  // gate index per output position
    std::vector<std::string> names;  // optional, parallel to gates

    struct Chain {
        int input_gate = -1;   // gate whose value is t' * x entering the root chain
        int out_gate = -1;
        std::vector<int> members;
        bool output_chain = false;
    };
    /// Written by the normalization pipeline.
    struct NormalizationInfo {
        Rational const_scale = Rational(1);  // multiplier applied to constants (1/M)
        unsigned d = 0;
        Rational t_prime = Rational(1);
        bool range_reduced = false;
        std::vector<Chain> chains;
    };
    std::optional<NormalizationInfo> norm;

    int add_gate(Gate g);
    std::string gate_name(int idx) const;
};

void validate_circuit(const Circuit& c);

/// Exact forward evaluation; nullopt when a Sqrt gate hits an operand that
/// is not a perfect square of a rational.
std::optional<std::vector<Rational>> eval_exact(const Circuit& c, const std::vector<Rational>& x);

std::vector<double> eval_float(const Circuit& c, const std::vector<double>& x);

/// Per-gate interval over inputs in [0,1]^n, with the smallest exponent d
/// such that every upper bound is strictly below 2^(2^d). Sqrt bounds are
/// rounded outward and flagged inexact.
struct SignalBound {
    std::vector<Rational> lo, hi;
    unsigned d = 0;
    bool exact = true;
};

SignalBound signal_bound(const Circuit& c);

/// Unit-interval certificate for a normalized circuit. Internal square-root
/// chains are certified analytically; chains that undo the scaling of final
/// outputs additionally rely on the circuit being a self-map of the cube.
struct UnitRangeCertificate {
    bool all_unit = false;
    bool needs_self_mapping_promise = false;
    std::vector<Rational> hi;
};

UnitRangeCertificate certify_unit_range(const Circuit& c);

bool is_normalized(const Circuit& c);

// Pipeline stages, exposed for tests; normalize_pipeline composes them.
Circuit strip_negative_consts(const Circuit& c);
Circuit eliminate_minmax(const Circuit& c);
Circuit split_signs(const Circuit& c);

/// Full normalization: non-negative constants, min/max elimination,
/// sign splitting with absolute-difference outputs, constant scaling, and
/// range reduction that replaces divisions by the scaling constant with
/// square-root chains. The result computes the same function on [0,1]^n,
/// keeps every internal signal in [0,1], and uses no Sub/Max/Min gates.
Circuit normalize_pipeline(const Circuit& c);

}  // namespace fincds
