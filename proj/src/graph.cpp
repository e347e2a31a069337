#include "fincds/graph.hpp"

#include "fincds/errors.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <tuple>

namespace fincds {

const char* arc_color_name(ArcColor c) {
    switch (c) {
        case ArcColor::Blue: return "blue";
        case ArcColor::Orange: return "orange";
        case ArcColor::Red: return "red";
    }
    return "?";
}

const char* switch_class_name(SwitchClass s) {
    switch (s) {
        case SwitchClass::Off: return "off";
        case SwitchClass::On: return "on";
        case SwitchClass::Neither: return "neither";
    }
    return "?";
}

ContractGraph build_contract_graph(const FinancialSystem& sys) {
    ContractGraph g;
    g.n = sys.bank_count();
    for (const Contract& c : sys.contracts()) {
        if (c.notional == 0) continue;
        g.arcs.push_back({c.debtor, c.creditor, c.is_cds() ? ArcColor::Orange : ArcColor::Blue,
                          c.reference, c.notional});
    }
    return g;
}

AuxiliaryGraph build_auxiliary_graph(const FinancialSystem& sys) {
    AuxiliaryGraph aux;
    aux.n = sys.bank_count();
    std::set<std::pair<int, int>> blue, orange, red;
    for (const Contract& c : sys.contracts()) {
        if (c.notional == 0) continue;
        if (c.is_cds()) {
            orange.insert({c.debtor, c.creditor});
            red.insert({c.reference, c.debtor});
        } else {
            blue.insert({c.debtor, c.creditor});
        }
    }
    aux.blue.assign(blue.begin(), blue.end());
    aux.orange.assign(orange.begin(), orange.end());
    aux.red.assign(red.begin(), red.end());
    return aux;
}

bool AuxiliaryGraph::has_arc(ArcColor c, int from, int to) const {
    const auto& v = c == ArcColor::Blue ? blue : (c == ArcColor::Orange ? orange : red);
    return std::binary_search(v.begin(), v.end(), std::make_pair(from, to));
}

std::vector<std::tuple<int, int, ArcColor>> AuxiliaryGraph::all_arcs() const {
    std::vector<std::tuple<int, int, ArcColor>> out;
    for (auto [a, b] : blue) out.emplace_back(a, b, ArcColor::Blue);
    for (auto [a, b] : orange) out.emplace_back(a, b, ArcColor::Orange);
    for (auto [a, b] : red) out.emplace_back(a, b, ArcColor::Red);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<int>> AuxiliaryGraph::successors() const {
    std::vector<std::set<int>> adj(n);
    for (auto [a, b] : blue) adj[a].insert(b);
    for (auto [a, b] : orange) adj[a].insert(b);
    for (auto [a, b] : red) adj[a].insert(b);
    std::vector<std::vector<int>> out(n);
    for (int i = 0; i < n; ++i) out[i].assign(adj[i].begin(), adj[i].end());
    return out;
}

SwitchClass classify_switch(const AuxiliaryGraph& aux, int vertex) {
    if (vertex < 0 || vertex >= aux.n) throw Error(ErrorCode::UnknownBank, "vertex out of range");
    int red_in = 0;
    for (auto [a, b] : aux.red)
        if (b == vertex) ++red_in;
    bool blue_out = false;
    for (auto [a, b] : aux.blue)
        if (a == vertex) blue_out = true;
    if (red_in >= 2) return SwitchClass::On;
    if (red_in == 1) return blue_out ? SwitchClass::On : SwitchClass::Off;
    return SwitchClass::Neither;
}

bool is_acyclic(const AuxiliaryGraph& aux) {
    auto adj = aux.successors();
    std::vector<int> state(aux.n, 0);  // 0 new, 1 on stack, 2 done
    for (int s = 0; s < aux.n; ++s) {
        if (state[s] != 0) continue;
        std::vector<std::pair<int, std::size_t>> stack{{s, 0}};
        state[s] = 1;
        while (!stack.empty()) {
            auto& [v, idx] = stack.back();
            if (idx < adj[v].size()) {
                int w = adj[v][idx++];
                if (state[w] == 1) return false;
                if (state[w] == 0) {
                    state[w] = 1;
                    stack.push_back({w, 0});
                }
            } else {
                state[v] = 2;
                stack.pop_back();
            }
        }
    }
    return true;
}

std::vector<int> CycleWitness::vertices() const {
    std::vector<int> out;
    out.reserve(arcs.size());
    for (auto& [a, b, c] : arcs) out.push_back(a);
    return out;
}

void classify_cycle_witness(const AuxiliaryGraph& aux, CycleWitness& w) {
    w.red = false;
    bool all_on = true;
    bool any_on = false;
    for (auto& [a, b, c] : w.arcs) {
        if (c != ArcColor::Red) continue;
        w.red = true;
        if (classify_switch(aux, b) == SwitchClass::On)
            any_on = true;
        else
            all_on = false;
    }
    w.weakly_switched = w.red && any_on;
    w.strongly_switched = w.red && all_on;
}

namespace {

// Deterministic color choice per ordered pair when several arcs exist:
// prefer non-red so the witness carries no incidental red arcs.
std::optional<ArcColor> pick_color(const AuxiliaryGraph& aux, int from, int to, bool allow_red,
                                   const std::set<std::pair<int, int>>* banned_red) {
    if (aux.has_arc(ArcColor::Blue, from, to)) return ArcColor::Blue;
    if (aux.has_arc(ArcColor::Orange, from, to)) return ArcColor::Orange;
    if (aux.has_arc(ArcColor::Red, from, to)) {
        if (!allow_red) return std::nullopt;
        if (banned_red && banned_red->count({from, to})) return std::nullopt;
        return ArcColor::Red;
    }
    return std::nullopt;
}

// BFS path from -> to (may be equal, then the empty path is returned).
std::optional<std::vector<int>> bfs_path(const AuxiliaryGraph& aux, int from, int to,
                                         const std::set<std::pair<int, int>>* banned_red) {
    auto adj = aux.successors();
    std::vector<int> parent(aux.n, -2);
    std::queue<int> q;
    q.push(from);
    parent[from] = -1;
    if (from == to) return std::vector<int>{from};
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int w : adj[v]) {
            if (!pick_color(aux, v, w, true, banned_red)) continue;
            if (parent[w] != -2) continue;
            parent[w] = v;
            if (w == to) {
                std::vector<int> path{w};
                int cur = v;
                while (cur != -1) {
                    path.push_back(cur);
                    cur = parent[cur];
                }
                std::reverse(path.begin(), path.end());
                return path;
            }
            q.push(w);
        }
    }
    return std::nullopt;
}

std::optional<CycleWitness> switched_cycle_search(const AuxiliaryGraph& aux, bool strong) {
    // For the strong variant, delete red arcs whose head is not switched on;
    // any cycle found then has switched-on heads at every red arc.
    std::set<std::pair<int, int>> banned_red;
    if (strong)
        for (auto [a, b] : aux.red)
            if (classify_switch(aux, b) != SwitchClass::On) banned_red.insert({a, b});

    for (auto [u, v] : aux.red) {
        if (classify_switch(aux, v) != SwitchClass::On) continue;
        auto path = bfs_path(aux, v, u, strong ? &banned_red : nullptr);
        if (!path) continue;
        CycleWitness w;
        // path v .. u, then the seed red arc (u, v) closes the cycle
        for (std::size_t i = 0; i + 1 < path->size(); ++i) {
            int a = (*path)[i], b = (*path)[i + 1];
            auto col = pick_color(aux, a, b, true, strong ? &banned_red : nullptr);
            w.arcs.emplace_back(a, b, *col);
        }
        w.arcs.emplace_back(u, v, ArcColor::Red);
        classify_cycle_witness(aux, w);
        return w;
    }
    return std::nullopt;
}

}  // namespace

std::optional<CycleWitness> find_weakly_switched_cycle(const AuxiliaryGraph& aux) {
    return switched_cycle_search(aux, false);
}

std::optional<CycleWitness> find_strongly_switched_cycle(const AuxiliaryGraph& aux) {
    return switched_cycle_search(aux, true);
}

namespace {

void require_cycle_of(const AuxiliaryGraph& aux, const CycleWitness& w) {
    if (w.arcs.empty()) throw Error(ErrorCode::NotACycle, "empty arc list");
    std::set<int> seen;
    for (std::size_t i = 0; i < w.arcs.size(); ++i) {
        auto [a, b, c] = w.arcs[i];
        if (!aux.has_arc(c, a, b)) throw Error(ErrorCode::NotACycle, "arc not present in auxiliary graph");
        auto [na, nb, nc] = w.arcs[(i + 1) % w.arcs.size()];
        if (b != na) throw Error(ErrorCode::NotACycle, "arcs do not chain into a cycle");
        if (!seen.insert(a).second) throw Error(ErrorCode::NotACycle, "vertex repeated; cycle not simple");
    }
}

}  // namespace

bool check_simple_strongly_switched(const FinancialSystem& sys, const AuxiliaryGraph& aux,
                                    const CycleWitness& cycle) {
    require_cycle_of(aux, cycle);
    CycleWitness copy = cycle;
    classify_cycle_witness(aux, copy);
    if (!copy.strongly_switched)
        throw Error(ErrorCode::NotStronglySwitched, "witness is not a strongly switched cycle");

    std::vector<int> cycle_vertices = copy.vertices();
    std::set<int> on_cycle(cycle_vertices.begin(), cycle_vertices.end());

    // An escape from vertex x: a debt contract to an off-cycle creditor, or a
    // CDS to an off-cycle creditor whose off-cycle reference bank has its own
    // non-red arc leaving the cycle.
    auto reference_escapes = [&](int ref) {
        for (const Contract& c : sys.contracts()) {
            if (c.debtor != ref || c.notional == 0) continue;
            if (!on_cycle.count(c.creditor)) return true;
        }
        return false;
    };
    auto has_escape = [&](int x) {
        for (const Contract& c : sys.contracts()) {
            if (c.debtor != x || c.notional == 0) continue;
            if (on_cycle.count(c.creditor)) continue;
            if (!c.is_cds()) return true;
            if (!on_cycle.count(c.reference) && reference_escapes(c.reference)) return true;
        }
        return false;
    };

    for (auto& [u, v, col] : copy.arcs) {
        if (col != ArcColor::Red) continue;
        if (!has_escape(u) || !has_escape(v)) return false;
    }
    return true;
}

std::vector<CycleWitness> enumerate_simple_cycles(const AuxiliaryGraph& aux, std::size_t cap) {
    // DFS rooted at the smallest vertex of each cycle; only vertices >= root
    // are explored, so every simple vertex cycle appears exactly once.
    std::vector<CycleWitness> out;
    auto adj = aux.successors();
    for (int root = 0; root < aux.n && out.size() < cap; ++root) {
        std::vector<int> path{root};
        std::vector<char> on_path(aux.n, 0);
        on_path[root] = 1;
        std::vector<std::size_t> iter{0};
        while (!iter.empty() && out.size() < cap) {
            int v = path.back();
            if (iter.back() < adj[v].size()) {
                int w = adj[v][iter.back()++];
                if (w == root) {
                    CycleWitness cyc;
                    for (std::size_t i = 0; i < path.size(); ++i) {
                        int a = path[i];
                        int b = (i + 1 < path.size()) ? path[i + 1] : root;
                        auto col = pick_color(aux, a, b, true, nullptr);
                        cyc.arcs.emplace_back(a, b, *col);
                    }
                    classify_cycle_witness(aux, cyc);
                    out.push_back(std::move(cyc));
                } else if (w > root && !on_path[w]) {
                    path.push_back(w);
                    on_path[w] = 1;
                    iter.push_back(0);
                }
            } else {
                on_path[v] = 0;
                path.pop_back();
                iter.pop_back();
            }
        }
    }
    return out;
}

SimpleSwitchedCycleResult find_simple_strongly_switched_cycle(const FinancialSystem& sys,
                                                              const AuxiliaryGraph& aux,
                                                              std::size_t cycle_cap) {
    SimpleSwitchedCycleResult result;
    auto adj = aux.successors();
    std::size_t seen = 0;
    bool truncated = false;

    // Re-run the rooted DFS here so the cap applies to cycles visited, and
    // each vertex cycle is tested for a strongly switched arc choice with as
    // few red arcs as possible (fewer red arcs, weaker simplicity demands).
    auto try_vertex_cycle = [&](const std::vector<int>& vs) -> std::optional<CycleWitness> {
        std::size_t k = vs.size();
        std::vector<bool> forced_red(k, false), red_ok(k, false), nonred_ok(k, false);
        for (std::size_t i = 0; i < k; ++i) {
            int a = vs[i], b = vs[(i + 1) % k];
            bool nonred = aux.has_arc(ArcColor::Blue, a, b) || aux.has_arc(ArcColor::Orange, a, b);
            bool red = aux.has_arc(ArcColor::Red, a, b);
            bool red_on = red && classify_switch(aux, b) == SwitchClass::On;
            nonred_ok[i] = nonred;
            red_ok[i] = red_on;
            if (!nonred) {
                if (!red_on) return std::nullopt;  // forced through a bad red arc
                forced_red[i] = true;
            }
        }
        auto build = [&](const std::vector<bool>& use_red) {
            CycleWitness w;
            for (std::size_t i = 0; i < k; ++i) {
                int a = vs[i], b = vs[(i + 1) % k];
                ArcColor col;
                if (use_red[i])
                    col = ArcColor::Red;
                else
                    col = aux.has_arc(ArcColor::Blue, a, b) ? ArcColor::Blue : ArcColor::Orange;
                w.arcs.emplace_back(a, b, col);
            }
            classify_cycle_witness(aux, w);
            return w;
        };
        bool any_forced = std::any_of(forced_red.begin(), forced_red.end(), [](bool b) { return b; });
        if (any_forced) {
            CycleWitness w = build(forced_red);
            if (w.strongly_switched && check_simple_strongly_switched(sys, aux, w)) return w;
            return std::nullopt;
        }
        // no forced red arc: a strongly switched choice needs one voluntary red
        for (std::size_t i = 0; i < k; ++i) {
            if (!red_ok[i]) continue;
            std::vector<bool> use = forced_red;
            use[i] = true;
            CycleWitness w = build(use);
            if (w.strongly_switched && check_simple_strongly_switched(sys, aux, w)) return w;
        }
        return std::nullopt;
    };

    for (int root = 0; root < aux.n; ++root) {
        std::vector<int> path{root};
        std::vector<char> on_path(aux.n, 0);
        on_path[root] = 1;
        std::vector<std::size_t> iter{0};
        while (!iter.empty()) {
            if (seen >= cycle_cap) {
                truncated = true;
                break;
            }
            int v = path.back();
            if (iter.back() < adj[v].size()) {
                int w = adj[v][iter.back()++];
                if (w == root) {
                    ++seen;
                    if (auto found = try_vertex_cycle(path)) {
                        result.status = SimpleCycleSearch::Found;
                        result.witness = std::move(found);
                        return result;
                    }
                } else if (w > root && !on_path[w]) {
                    path.push_back(w);
                    on_path[w] = 1;
                    iter.push_back(0);
                }
            } else {
                on_path[v] = 0;
                path.pop_back();
                iter.pop_back();
            }
        }
        if (truncated) break;
    }
    result.status = truncated ? SimpleCycleSearch::Inconclusive : SimpleCycleSearch::Absent;
    return result;
}

Condensation scc_condensation(const AuxiliaryGraph& aux) {
    // Iterative Tarjan. Components complete after all their successors, so
    // the pop order reversed is a topological order of the condensation.
    int n = aux.n;
    auto adj = aux.successors();
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> comps;
    int next_index = 0;

    struct Frame {
        int v;
        std::size_t child;
    };
    for (int s = 0; s < n; ++s) {
        if (index[s] != -1) continue;
        std::vector<Frame> frames{{s, 0}};
        index[s] = low[s] = next_index++;
        stack.push_back(s);
        on_stack[s] = 1;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.child < adj[f.v].size()) {
                int w = adj[f.v][f.child++];
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                if (low[f.v] == index[f.v]) {
                    std::vector<int> members;
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp[w] = static_cast<int>(comps.size());
                        members.push_back(w);
                        if (w == f.v) break;
                    }
                    std::sort(members.begin(), members.end());
                    comps.push_back(std::move(members));
                }
                int v = f.v;
                frames.pop_back();
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
            }
        }
    }

    Condensation c;
    c.component_of = comp;
    c.members = comps;
    std::set<std::pair<int, int>> arcs;
    for (auto [a, b, col] : aux.all_arcs()) {
        (void)col;
        if (comp[a] != comp[b]) arcs.insert({comp[a], comp[b]});
    }
    c.arcs.assign(arcs.begin(), arcs.end());
    c.topo_order.resize(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i)
        c.topo_order[comps.size() - 1 - i] = static_cast<int>(i);
    return c;
}

DedicatedCheck check_dedicated_cds_debtor(const FinancialSystem& sys) {
    DedicatedCheck out;
    std::set<int> bad;
    std::map<int, std::set<int>> refs_of;
    std::set<int> debt_writers;
    for (const Contract& c : sys.contracts()) {
        if (c.notional == 0) continue;
        if (c.is_cds())
            refs_of[c.debtor].insert(c.reference);
        else
            debt_writers.insert(c.debtor);
    }
    for (auto& [debtor, refs] : refs_of) {
        if (debt_writers.count(debtor) || refs.size() > 1) bad.insert(debtor);
    }
    out.violations.assign(bad.begin(), bad.end());
    out.ok = out.violations.empty();
    return out;
}

}  // namespace fincds
