#pragma once

#include "fincds/circuit.hpp"
#include "fincds/clearing.hpp"
#include "fincds/compiler.hpp"
#include "fincds/system.hpp"

#include <string>

namespace fincds {

// Instance documents: {"banks": [{"id", "external_assets"}], "contracts":
// [{"debtor", "creditor", "reference"?, "notional"}]}. All numbers are exact
// "p/q" or decimal strings.
FinancialSystem parse_instance(const std::string& json_text);
std::string serialize_instance(const FinancialSystem& sys);

// Recovery vectors: flat map bank id -> "p/q" or decimal string.
RecoveryVector parse_recovery_vector(const std::string& json_text, const FinancialSystem& sys,
                                     NumericMode mode);
std::string serialize_recovery_vector(const FinancialSystem& sys, const RecoveryVector& r);

// Circuits: {"gates": [{"id", "kind", "operands", "constant"?, "index"?}],
// "inputs": [...], "outputs": [...]}.
Circuit parse_circuit(const std::string& json_text);
std::string serialize_circuit(const Circuit& c);

std::string serialize_portmap(const Circuit& c, const CompiledNetwork& net);

/// Contract graph as DOT: blue debt arcs, orange CDS arcs, red
/// reference-to-debtor arcs, dashed gray reference links, assets in the node
/// labels. Deterministic ordering.
std::string export_dot(const FinancialSystem& sys);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace fincds
