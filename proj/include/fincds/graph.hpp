#pragma once

#include "fincds/system.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fincds {

enum class ArcColor { Blue, Orange, Red };

const char* arc_color_name(ArcColor c);

/// One arc per contract of a normalized system: blue for debt, orange for
/// CDS (carrying the reference bank).
struct ContractGraph {
    struct Arc {
        int from, to;
        ArcColor color;
        int reference;  // -1 for blue arcs
        Rational notional;
    };
    int n = 0;
    std::vector<Arc> arcs;
};

/// Tricolored simple digraph: blue/orange arcs collapsed from the contract
/// graph, plus one red arc reference -> debtor per (debtor, reference) pair
/// occurring in some CDS.
struct AuxiliaryGraph {
    int n = 0;
    // sorted, deduplicated (from, to) pairs per color
    std::vector<std::pair<int, int>> blue, orange, red;

    bool has_arc(ArcColor c, int from, int to) const;
    // all arcs, each color at most once per ordered pair, sorted
    std::vector<std::tuple<int, int, ArcColor>> all_arcs() const;
    std::vector<std::vector<int>> successors() const;  // color-blind adjacency
};

ContractGraph build_contract_graph(const FinancialSystem& sys);
AuxiliaryGraph build_auxiliary_graph(const FinancialSystem& sys);

enum class SwitchClass { Off, On, Neither };

const char* switch_class_name(SwitchClass s);

/// Off: exactly one incoming red arc and no outgoing blue arc.
/// On: >= 2 incoming red arcs, or exactly one plus an outgoing blue arc.
SwitchClass classify_switch(const AuxiliaryGraph& aux, int vertex);

bool is_acyclic(const AuxiliaryGraph& aux);

struct CycleWitness {
    // arcs in cycle order; head of arcs[i] is the tail of arcs[i+1]
    std::vector<std::tuple<int, int, ArcColor>> arcs;
    bool red = false;
    bool weakly_switched = false;
    bool strongly_switched = false;

    std::vector<int> vertices() const;  // tails, in order
};

/// Searches for a cycle through some red arc whose head is switched on.
std::optional<CycleWitness> find_weakly_switched_cycle(const AuxiliaryGraph& aux);

/// Same search after deleting every red arc whose head is not switched on,
/// so each red arc of the witness has a switched-on head.
std::optional<CycleWitness> find_strongly_switched_cycle(const AuxiliaryGraph& aux);

/// Validates the off-cycle escape conditions: for each red arc (u,v) of the
/// cycle there are non-red arcs (u,u') and (v,v') leaving the cycle, and any
/// orange escape arc has an off-cycle reference bank that itself has a
/// non-red arc leaving the cycle. The reference lookup needs the system.
bool check_simple_strongly_switched(const FinancialSystem& sys, const AuxiliaryGraph& aux,
                                    const CycleWitness& cycle);

enum class SimpleCycleSearch { Found, Absent, Inconclusive };

struct SimpleSwitchedCycleResult {
    SimpleCycleSearch status = SimpleCycleSearch::Absent;
    std::optional<CycleWitness> witness;
};

/// Enumerates simple cycles (up to the cap) looking for a simple strongly
/// switched one; past the cap the search reports Inconclusive rather than
/// pretending completeness.
SimpleSwitchedCycleResult find_simple_strongly_switched_cycle(const FinancialSystem& sys,
                                                              const AuxiliaryGraph& aux,
                                                              std::size_t cycle_cap = 100000);

struct Condensation {
    std::vector<int> component_of;           // vertex -> component id
    std::vector<std::vector<int>> members;   // component id -> sorted vertices
    std::vector<std::pair<int, int>> arcs;   // condensation DAG arcs, deduped
    std::vector<int> topo_order;             // component ids, sources first
};

Condensation scc_condensation(const AuxiliaryGraph& aux);

struct DedicatedCheck {
    bool ok = true;
    std::vector<int> violations;  // offending CDS debtors
};

/// Every CDS debtor writes no positive-notional debt contract and all its
/// CDSes share a single reference bank.
DedicatedCheck check_dedicated_cds_debtor(const FinancialSystem& sys);

/// Re-derives a witness's classification flags from scratch; used by tests
/// and by the finders before returning.
void classify_cycle_witness(const AuxiliaryGraph& aux, CycleWitness& w);

/// All simple cycles, canonicalized; exponential, intended for small graphs
/// and brute-force cross-checks.
std::vector<CycleWitness> enumerate_simple_cycles(const AuxiliaryGraph& aux,
                                                  std::size_t cap = 1000000);

}  // namespace fincds
