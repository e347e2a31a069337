#pragma once

#include "fincds/circuit.hpp"
#include "fincds/system.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fincds {

enum class GadgetKind {
    Add,
    Dup,
    ScaleConst,
    ScaleRationalGuarded,
    PosSub,
    AbsDiff,
    Inv,
    Sqrt,
    SqrtConst,
    Mul,
    Max,
    Min,
    ConstSource,
    DegenerateMul,
    DegenerateDiv,
};

const char* gadget_kind_name(GadgetKind k);

struct GadgetParams {
    Rational c = Rational(1);  // Dup/ScaleConst factor, ConstSource/SqrtConst constant
    Rational q = Rational(1);  // ScaleRationalGuarded factor (a/b, may exceed 1)
    int fan_in = 2;            // Add arity
    bool allow_degenerate = false;
};

/// A small financial network realizing one arithmetic operation on recovery
/// rates. Input-port banks have total liability exactly 1, so their clearing
/// rate equals the inflow on the wire arc; output-port banks expect a single
/// outgoing unit wire.
struct GadgetTemplate {
    GadgetKind kind = GadgetKind::Add;
    GadgetParams params;
    std::vector<std::string> banks;
    std::vector<Rational> externals;
    struct TContract {
        int debtor, creditor, reference;  // local indices, reference -1 for debt
        Rational notional;
    };
    std::vector<TContract> contracts;
    std::vector<int> input_ports;
    std::vector<int> output_ports;
};

GadgetTemplate instantiate_gadget(GadgetKind kind, const GadgetParams& params = {});

/// Arithmetic meaning of a gadget kind on its input rates.
std::vector<double> gadget_semantics_float(GadgetKind kind, const GadgetParams& params,
                                           const std::vector<double>& inputs);
std::optional<std::vector<Rational>> gadget_semantics_exact(GadgetKind kind, const GadgetParams& params,
                                                            const std::vector<Rational>& inputs);

struct GadgetCheckResult {
    bool ok = false;
    bool exact = false;        // solved and compared in exact rationals
    double max_error = 0.0;    // float path
    std::vector<Rational> exact_rates;
    std::vector<double> float_rates;
};

/// Builds an isolated harness (constant sources on the inputs, sinks on the
/// outputs), solves its clearing vector, and compares the output-port rates
/// with the gadget semantics. Acyclic harnesses are solved exactly; the
/// square-root gadgets iterate to 1e-13.
GadgetCheckResult run_gadget_check(GadgetKind kind, const GadgetParams& params,
                                   const std::vector<Rational>& inputs, double float_tol = 1e-12);

/// Throwing wrapper: SemanticsMismatch on failure.
bool gadget_clearing_check(GadgetKind kind, const GadgetParams& params,
                           const std::vector<Rational>& inputs, double float_tol = 1e-12);

/// The isolated harness used by the check, exposed for structural tests.
FinancialSystem gadget_harness(const GadgetTemplate& temp, const std::vector<Rational>& inputs,
                               std::vector<int>* output_banks = nullptr);

struct CompiledNetwork {
    FinancialSystem sys;
    std::vector<std::vector<std::string>> gate_banks;  // per gate index
    std::vector<std::string> input_banks;              // per circuit input
    std::vector<std::string> output_banks;             // per circuit output
};

/// One gadget instance per gate, unit-notional debt wiring along circuit
/// arcs, duplication trees on fan-out, and the final unit arcs from the
/// output banks back to the input banks. Clearing vectors restricted to the
/// input banks are exactly the fixed points of the circuit.
CompiledNetwork compile_circuit(const Circuit& c);

/// Plants the given rates on the input banks and forward-propagates clearing
/// values through the gadget layers (feedback arcs excluded from the order);
/// cyclic gadget cores are relaxed locally to machine precision.
std::vector<double> plant_clearing_vector(const CompiledNetwork& net, const std::vector<double>& x);

}  // namespace fincds
