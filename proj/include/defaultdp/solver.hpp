#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "defaultdp/decomposition.hpp"
#include "defaultdp/dp.hpp"
#include "defaultdp/theory.hpp"

namespace defaultdp {

struct SolveConfig {
    Heuristic heuristic = Heuristic::MinFill;
    std::uint64_t seed = 0;
    int jobs = 1;
    bool counterWitnesses = true;
};

struct Pipeline {
    Graph graph;
    TreeDecomposition td;
    LabeledTreeDecomposition ltd;
    TableMap tables;

    const Table& rootTable() const { return tables.at(ltd.tree.root); }
};

inline Pipeline runPipeline(const DefaultTheory& theory, const SolveConfig& config = {}) {
    Pipeline p;
    p.graph = semiPrimalGraph(theory);
    p.td = buildTd(p.graph, eliminationOrder(p.graph, config.heuristic, config.seed));
    p.ltd = makePrettyLtd(p.td, theory);
    p.tables = dpTraverse(p.ltd, theory, DpOptions{config.counterWitnesses, config.jobs});
    return p;
}

inline bool decideExt(const DefaultTheory& theory, const SolveConfig& config = {}) {
    return rootAccepts(runPipeline(theory, config).rootTable());
}

// One tuple selected per node, consistent with origin pointers: the tuples
// selected at a node's children form the origin chosen at that node.
// choice[t] indexes the origin list of the tuple selected at t.
struct SolutionCursor {
    int rootTuple = -1;
    std::vector<int> selected;
    std::vector<int> choice;
};

struct EnumerationStats {
    std::size_t calls = 0;
    std::size_t tuplesTouched = 0;
    std::size_t maxTouchedPerCall = 0;

    void record(std::size_t touched) {
        ++calls;
        tuplesTouched += touched;
        if (touched > maxTouchedPerCall) maxTouchedPerCall = touched;
    }
};

namespace detail {

inline const std::vector<Origin>& originsOf(const TableMap& tables, int node, int tupleIdx) {
    return tables.at(node).tuples[static_cast<std::size_t>(tupleIdx)].origins;
}

// Propagate child selections from the choices, walking down from `from`.
inline void deriveDown(const LabeledTreeDecomposition& ltd, const TableMap& tables,
                       SolutionCursor& cur, int from, std::size_t& touched) {
    std::vector<int> stack{from};
    while (!stack.empty()) {
        int t = stack.back();
        stack.pop_back();
        const auto& children = ltd.tree.nodes[static_cast<std::size_t>(t)].children;
        if (children.empty()) continue;
        const auto& origins = originsOf(tables, t, cur.selected[static_cast<std::size_t>(t)]);
        const Origin& o = origins[static_cast<std::size_t>(cur.choice[static_cast<std::size_t>(t)])];
        ++touched;
        cur.selected[static_cast<std::size_t>(children[0])] = o.left;
        stack.push_back(children[0]);
        if (children.size() == 2) {
            cur.selected[static_cast<std::size_t>(children[1])] = o.right;
            stack.push_back(children[1]);
        }
    }
}

inline SolutionCursor firstCursorFor(const LabeledTreeDecomposition& ltd, const TableMap& tables,
                                     int rootTupleIdx, std::size_t& touched) {
    SolutionCursor cur;
    cur.rootTuple = rootTupleIdx;
    cur.selected.assign(static_cast<std::size_t>(ltd.nodeCount()), -1);
    cur.choice.assign(static_cast<std::size_t>(ltd.nodeCount()), 0);
    cur.selected[static_cast<std::size_t>(ltd.tree.root)] = rootTupleIdx;
    ++touched;
    deriveDown(ltd, tables, cur, ltd.tree.root, touched);
    return cur;
}

}  // namespace detail

// Cursor for the canonically smallest accepting root tuple, descending to
// the smallest origin everywhere; nothing when the root rejects.
inline std::optional<SolutionCursor> firstSolution(const LabeledTreeDecomposition& ltd,
                                                   const TableMap& tables,
                                                   EnumerationStats* stats = nullptr) {
    const std::vector<int> accepting = acceptingRootTuples(tables.at(ltd.tree.root));
    if (accepting.empty()) {
        if (stats) stats->record(tables.at(ltd.tree.root).tuples.size());
        return std::nullopt;
    }
    std::size_t touched = tables.at(ltd.tree.root).tuples.size();
    SolutionCursor cur = detail::firstCursorFor(ltd, tables, accepting.front(), touched);
    if (stats) stats->record(touched);
    return cur;
}

// Post-order odometer over origin choices: advance the first node with an
// unused successor, reset every exhausted position before it, re-derive
// selections, and fall over to the next accepting root tuple when this
// root tuple's choice space is exhausted.
inline std::optional<SolutionCursor> nextSolution(const LabeledTreeDecomposition& ltd,
                                                  const TableMap& tables,
                                                  const SolutionCursor& prev,
                                                  EnumerationStats* stats = nullptr) {
    if (prev.rootTuple < 0 || prev.selected.size() != static_cast<std::size_t>(ltd.nodeCount()))
        throw std::invalid_argument("cursor does not belong to these tables");

    std::size_t touched = 0;
    const std::vector<int> order = postOrder(ltd.tree, ltd.tree.root);
    SolutionCursor cur = prev;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const int t = order[k];
        if (ltd.tree.nodes[static_cast<std::size_t>(t)].children.empty()) continue;
        const auto& origins =
            detail::originsOf(tables, t, cur.selected[static_cast<std::size_t>(t)]);
        ++touched;
        if (cur.choice[static_cast<std::size_t>(t)] + 1 <
            static_cast<int>(origins.size())) {
            ++cur.choice[static_cast<std::size_t>(t)];
            for (std::size_t j = 0; j < k; ++j) cur.choice[static_cast<std::size_t>(order[j])] = 0;
            detail::deriveDown(ltd, tables, cur, ltd.tree.root, touched);
            if (stats) stats->record(touched);
            return cur;
        }
    }

    const std::vector<int> accepting = acceptingRootTuples(tables.at(ltd.tree.root));
    touched += tables.at(ltd.tree.root).tuples.size();
    for (std::size_t a = 0; a + 1 < accepting.size(); ++a) {
        if (accepting[a] == prev.rootTuple) {
            SolutionCursor first = detail::firstCursorFor(ltd, tables, accepting[a + 1], touched);
            if (stats) stats->record(touched);
            return first;
        }
    }
    if (stats) stats->record(touched);
    return std::nullopt;
}

// The stable default set a cursor denotes: each default's membership is
// read off at its removal node, the last point where it is visible.
inline std::vector<int> cursorDefaults(const LabeledTreeDecomposition& ltd,
                                       const TableMap& tables, const DefaultTheory& theory,
                                       const SolutionCursor& cur) {
    const auto plan = detail::planNodes(ltd, theory);
    std::vector<int> out;
    for (int t = 0; t < ltd.nodeCount(); ++t) {
        const auto& p = plan[static_cast<std::size_t>(t)];
        if (p.type != NodeType::Rem || !p.isDefault) continue;
        const int child = ltd.tree.nodes[static_cast<std::size_t>(t)].children[0];
        const DpTuple& sel =
            tables.at(child).tuples[static_cast<std::size_t>(cur.selected[static_cast<std::size_t>(child)])];
        if (std::binary_search(sel.witnessSet.begin(), sel.witnessSet.end(), p.element))
            out.push_back(p.element);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<std::vector<int>> enumerateStableSets(
    const Pipeline& p, const DefaultTheory& theory,
    std::optional<std::size_t> limit = std::nullopt, EnumerationStats* stats = nullptr) {
    std::vector<std::vector<int>> out;
    const std::size_t cap = limit.value_or(std::numeric_limits<std::size_t>::max());
    if (cap == 0) return out;
    std::optional<SolutionCursor> cur = firstSolution(p.ltd, p.tables, stats);
    while (cur) {
        out.push_back(cursorDefaults(p.ltd, p.tables, theory, *cur));
        if (out.size() >= cap) break;
        cur = nextSolution(p.ltd, p.tables, *cur, stats);
    }
    return out;
}

inline std::vector<std::vector<int>> enumerateStableSets(
    const DefaultTheory& theory, const SolveConfig& config = {},
    std::optional<std::size_t> limit = std::nullopt, EnumerationStats* stats = nullptr) {
    Pipeline p = runPipeline(theory, config);
    return enumerateStableSets(p, theory, limit, stats);
}

inline std::size_t countStableSets(const DefaultTheory& theory, const SolveConfig& config = {}) {
    return enumerateStableSets(theory, config).size();
}

}  // namespace defaultdp
