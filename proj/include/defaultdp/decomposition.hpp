#pragma once

#include <algorithm>
#include <cassert>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "defaultdp/graph.hpp"
#include "defaultdp/theory.hpp"

namespace defaultdp {

enum class Heuristic { MinFill, MinDegree };

inline Heuristic heuristicFromName(const std::string& name) {
    if (name == "min-fill") return Heuristic::MinFill;
    if (name == "min-degree") return Heuristic::MinDegree;
    throw std::invalid_argument("unknown heuristic '" + name + "'");
}

// Greedy elimination order. Ties on the score are broken by a rank that is
// a seed-shuffled permutation of the vertex order, so runs are reproducible
// per seed.
inline std::vector<int> eliminationOrder(const Graph& g, Heuristic heuristic,
                                         std::uint64_t seed) {
    const int n = g.vertexCount();
    std::vector<std::set<int>> work(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v)
        work[v] = std::set<int>(g.adj[static_cast<std::size_t>(v)].begin(),
                                g.adj[static_cast<std::size_t>(v)].end());

    std::vector<int> rank(static_cast<std::size_t>(n));
    std::iota(rank.begin(), rank.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(rank.begin(), rank.end(), rng);

    auto fillCount = [&](int v) {
        long missing = 0;
        const auto& nb = work[static_cast<std::size_t>(v)];
        for (auto i = nb.begin(); i != nb.end(); ++i)
            for (auto j = std::next(i); j != nb.end(); ++j)
                if (!work[static_cast<std::size_t>(*i)].count(*j)) ++missing;
        return missing;
    };

    std::vector<bool> alive(static_cast<std::size_t>(n), true);
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    for (int step = 0; step < n; ++step) {
        int best = -1;
        long bestScore = 0;
        for (int v = 0; v < n; ++v) {
            if (!alive[static_cast<std::size_t>(v)]) continue;
            long score = heuristic == Heuristic::MinDegree
                             ? static_cast<long>(work[static_cast<std::size_t>(v)].size())
                             : fillCount(v);
            if (best < 0 || score < bestScore ||
                (score == bestScore && rank[static_cast<std::size_t>(v)] < rank[static_cast<std::size_t>(best)])) {
                best = v;
                bestScore = score;
            }
        }
        order.push_back(best);
        alive[static_cast<std::size_t>(best)] = false;
        const auto nb = work[static_cast<std::size_t>(best)];
        for (int u : nb) {
            work[static_cast<std::size_t>(u)].erase(best);
            for (int w : nb)
                if (u < w) {
                    work[static_cast<std::size_t>(u)].insert(w);
                    work[static_cast<std::size_t>(w)].insert(u);
                }
        }
        work[static_cast<std::size_t>(best)].clear();
    }
    return order;
}

struct TreeDecomposition {
    struct Node {
        int parent = -1;
        std::vector<int> children;
        std::vector<int> bag;  // sorted vertex ids
    };
    std::vector<Node> nodes;
    int root = -1;

    int addNode(std::vector<int> bag, int parent) {
        int id = static_cast<int>(nodes.size());
        nodes.push_back(Node{parent, {}, std::move(bag)});
        if (parent >= 0) nodes[static_cast<std::size_t>(parent)].children.push_back(id);
        return id;
    }
};

// Width = size of the largest bag minus one; -1 for the empty
// decomposition and for a single empty bag.
inline int width(const TreeDecomposition& td) {
    int w = -1;
    for (const auto& node : td.nodes) w = std::max(w, static_cast<int>(node.bag.size()) - 1);
    return w;
}

// Bucket elimination: the bag of each order position is the eliminated
// vertex plus its remaining neighborhood in the fill graph.
inline TreeDecomposition buildTd(const Graph& g, const std::vector<int>& order) {
    const int n = g.vertexCount();
    if (static_cast<int>(order.size()) != n)
        throw std::invalid_argument("elimination order must cover every vertex");

    std::vector<int> position(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) position[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;

    std::vector<std::set<int>> work(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v)
        work[static_cast<std::size_t>(v)] = std::set<int>(g.adj[static_cast<std::size_t>(v)].begin(),
                                                          g.adj[static_cast<std::size_t>(v)].end());

    TreeDecomposition td;
    td.nodes.resize(static_cast<std::size_t>(n));
    std::vector<int> pendingRoots;
    for (int i = 0; i < n; ++i) {
        const int v = order[static_cast<std::size_t>(i)];
        const auto nb = work[static_cast<std::size_t>(v)];
        std::vector<int> bag;
        bag.reserve(nb.size() + 1);
        bag.push_back(v);
        for (int u : nb) bag.push_back(u);
        std::sort(bag.begin(), bag.end());
        td.nodes[static_cast<std::size_t>(i)].bag = std::move(bag);

        if (nb.empty()) {
            pendingRoots.push_back(i);
        } else {
            int next = -1;
            for (int u : nb)
                if (next == -1 || position[static_cast<std::size_t>(u)] < position[static_cast<std::size_t>(next)])
                    next = u;
            td.nodes[static_cast<std::size_t>(i)].parent = position[static_cast<std::size_t>(next)];
        }

        for (int u : nb) {
            work[static_cast<std::size_t>(u)].erase(v);
            for (int w : nb)
                if (u < w) {
                    work[static_cast<std::size_t>(u)].insert(w);
                    work[static_cast<std::size_t>(w)].insert(u);
                }
        }
        work[static_cast<std::size_t>(v)].clear();
    }

    // Components yield several elimination roots; chain them so the result
    // is a single tree.
    for (std::size_t k = 0; k + 1 < pendingRoots.size(); ++k)
        td.nodes[static_cast<std::size_t>(pendingRoots[k])].parent = pendingRoots[k + 1];
    td.root = pendingRoots.empty() ? -1 : pendingRoots.back();

    for (int i = 0; i < n; ++i) {
        int p = td.nodes[static_cast<std::size_t>(i)].parent;
        if (p >= 0) td.nodes[static_cast<std::size_t>(p)].children.push_back(i);
    }
    return td;
}

struct TdValidation {
    bool ok = true;
    std::string violation;
};

// Checks the three decomposition conditions: vertex coverage, edge
// coverage, and connectedness of each vertex's bag set.
inline TdValidation validateTd(const Graph& g, const TreeDecomposition& td) {
    auto fail = [](std::string msg) { return TdValidation{false, std::move(msg)}; };

    const int m = static_cast<int>(td.nodes.size());
    if (g.vertexCount() == 0 && m == 0) return {};
    if (td.root < 0 || td.root >= m) return fail("missing root");

    std::vector<int> seen(static_cast<std::size_t>(m), 0);
    std::vector<int> stack{td.root};
    int visited = 0;
    while (!stack.empty()) {
        int t = stack.back();
        stack.pop_back();
        if (seen[static_cast<std::size_t>(t)]++) return fail("node visited twice; not a tree");
        ++visited;
        for (int c : td.nodes[static_cast<std::size_t>(t)].children) {
            if (td.nodes[static_cast<std::size_t>(c)].parent != t) return fail("parent/child mismatch");
            stack.push_back(c);
        }
    }
    if (visited != m) return fail("tree not connected");

    std::vector<std::vector<int>> holding(static_cast<std::size_t>(g.vertexCount()));
    for (int t = 0; t < m; ++t)
        for (int v : td.nodes[static_cast<std::size_t>(t)].bag) {
            if (v < 0 || v >= g.vertexCount()) return fail("bag contains unknown vertex");
            holding[static_cast<std::size_t>(v)].push_back(t);
        }

    for (int v = 0; v < g.vertexCount(); ++v)
        if (holding[static_cast<std::size_t>(v)].empty())
            return fail("vertex " + std::to_string(v) + " not covered by any bag");

    for (auto [a, b] : g.edges()) {
        bool covered = false;
        for (int t : holding[static_cast<std::size_t>(a)]) {
            const auto& bag = td.nodes[static_cast<std::size_t>(t)].bag;
            if (std::binary_search(bag.begin(), bag.end(), b)) {
                covered = true;
                break;
            }
        }
        if (!covered)
            return fail("edge {" + std::to_string(a) + "," + std::to_string(b) +
                        "} not covered by any bag");
    }

    // Connectedness: walk the subgraph of nodes holding v from one of them.
    for (int v = 0; v < g.vertexCount(); ++v) {
        const auto& hold = holding[static_cast<std::size_t>(v)];
        std::vector<char> inHold(static_cast<std::size_t>(m), 0);
        for (int t : hold) inHold[static_cast<std::size_t>(t)] = 1;
        std::vector<int> frontier{hold.front()};
        std::vector<char> reached(static_cast<std::size_t>(m), 0);
        reached[static_cast<std::size_t>(hold.front())] = 1;
        std::size_t count = 1;
        while (!frontier.empty()) {
            int t = frontier.back();
            frontier.pop_back();
            std::vector<int> around = td.nodes[static_cast<std::size_t>(t)].children;
            if (td.nodes[static_cast<std::size_t>(t)].parent >= 0)
                around.push_back(td.nodes[static_cast<std::size_t>(t)].parent);
            for (int u : around)
                if (inHold[static_cast<std::size_t>(u)] && !reached[static_cast<std::size_t>(u)]) {
                    reached[static_cast<std::size_t>(u)] = 1;
                    ++count;
                    frontier.push_back(u);
                }
        }
        if (count != hold.size())
            return fail("bags holding vertex " + std::to_string(v) + " are not connected");
    }
    return {};
}

enum class NodeType : std::uint8_t { Leaf, Int, Rem, Join, Label };

inline const char* nodeTypeName(NodeType t) {
    switch (t) {
    case NodeType::Leaf: return "leaf";
    case NodeType::Int: return "int";
    case NodeType::Rem: return "rem";
    case NodeType::Join: return "join";
    default: return "label";
    }
}

enum class Part : std::uint8_t { Alpha = 0, Beta = 1, Gamma = 2 };

inline const char* partName(Part p) {
    switch (p) {
    case Part::Alpha: return "alpha";
    case Part::Beta: return "beta";
    default: return "gamma";
    }
}

struct LabelRef {
    Part part;
    int defaultIndex;
    bool operator==(const LabelRef& o) const {
        return part == o.part && defaultIndex == o.defaultIndex;
    }
    bool operator<(const LabelRef& o) const {
        if (defaultIndex != o.defaultIndex) return defaultIndex < o.defaultIndex;
        return part < o.part;
    }
};

struct LabeledTreeDecomposition {
    TreeDecomposition tree;
    std::vector<NodeType> types;
    std::vector<std::optional<LabelRef>> delta;

    int nodeCount() const { return static_cast<int>(tree.nodes.size()); }
    const std::vector<int>& bag(int t) const { return tree.nodes[static_cast<std::size_t>(t)].bag; }
};

// Post-order node sequence of the subtree rooted at t, children visited in
// stored order.
inline std::vector<int> postOrder(const TreeDecomposition& td, int t) {
    std::vector<int> out;
    if (t < 0) return out;
    // (node, child cursor) stack
    std::vector<std::pair<int, std::size_t>> stack{{t, 0}};
    while (!stack.empty()) {
        auto& [node, cursor] = stack.back();
        const auto& children = td.nodes[static_cast<std::size_t>(node)].children;
        if (cursor < children.size()) {
            int next = children[cursor++];
            stack.emplace_back(next, 0);
        } else {
            out.push_back(node);
            stack.pop_back();
        }
    }
    return out;
}

inline std::vector<int> postOrder(const LabeledTreeDecomposition& ltd, int t) {
    return postOrder(ltd.tree, t);
}

namespace detail {

// Variable vertex set of {d} together with one rule part, as graph ids.
inline std::vector<int> labelClique(const DefaultTheory& theory, const Graph& g, Part part,
                                    int defaultIndex) {
    const Default& d = theory.defaultAt(defaultIndex);
    const Formula& f = part == Part::Alpha ? d.prerequisite
                       : part == Part::Beta ? d.justification
                                            : d.conclusion;
    std::set<std::string> names;
    f.collectVariables(names);
    std::vector<int> ids;
    ids.push_back(g.vertexOfDefault(defaultIndex));
    for (const auto& n : names) ids.push_back(theory.variables().indexOf(n));
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace detail

// Rebuilds a valid decomposition of the semi-primal graph into a pretty
// labeled one: at most binary, empty leaf and root bags, bag transitions of
// one vertex per node, and one label node per (part, default) pair placed
// at the first covering node in post-order.
inline LabeledTreeDecomposition makePrettyLtd(const TreeDecomposition& td,
                                              const DefaultTheory& theory) {
    Graph g = semiPrimalGraph(theory);
    if (!td.nodes.empty()) {
        TdValidation v = validateTd(g, td);
        if (!v.ok) throw std::invalid_argument("input decomposition invalid: " + v.violation);
    }

    LabeledTreeDecomposition out;
    auto emit = [&](std::vector<int> bag, NodeType type, int child) {
        int id = out.tree.addNode(std::move(bag), -1);
        out.types.push_back(type);
        out.delta.emplace_back();
        if (child >= 0) {
            out.tree.nodes[static_cast<std::size_t>(child)].parent = id;
            out.tree.nodes[static_cast<std::size_t>(id)].children.push_back(child);
        }
        return id;
    };

    // Chain of one-vertex transitions from the bag of `from` to `target`.
    auto lift = [&](int from, const std::vector<int>& target) {
        int cur = from;
        std::vector<int> bag = out.tree.nodes[static_cast<std::size_t>(cur)].bag;
        std::vector<int> drop, add;
        std::set_difference(bag.begin(), bag.end(), target.begin(), target.end(),
                            std::back_inserter(drop));
        std::set_difference(target.begin(), target.end(), bag.begin(), bag.end(),
                            std::back_inserter(add));
        for (int v : drop) {
            bag.erase(std::find(bag.begin(), bag.end(), v));
            cur = emit(bag, NodeType::Rem, cur);
        }
        for (int v : add) {
            bag.insert(std::lower_bound(bag.begin(), bag.end(), v), v);
            cur = emit(bag, NodeType::Int, cur);
        }
        return cur;
    };

    auto leafGadget = [&](const std::vector<int>& bag) {
        int cur = emit({}, NodeType::Leaf, -1);
        return lift(cur, bag);
    };

    int top;
    if (td.nodes.empty()) {
        top = emit({}, NodeType::Leaf, -1);
    } else {
        // Emit gadgets for the original nodes in post-order.
        std::vector<int> emitted(td.nodes.size(), -1);
        for (int t : postOrder(td, td.root)) {
            const auto& node = td.nodes[static_cast<std::size_t>(t)];
            if (node.children.empty()) {
                emitted[static_cast<std::size_t>(t)] = leafGadget(node.bag);
                continue;
            }
            int acc = lift(emitted[static_cast<std::size_t>(node.children.front())], node.bag);
            for (std::size_t k = 1; k < node.children.size(); ++k) {
                int rhs = lift(emitted[static_cast<std::size_t>(node.children[k])], node.bag);
                int join = emit(node.bag, NodeType::Join, acc);
                out.tree.nodes[static_cast<std::size_t>(rhs)].parent = join;
                out.tree.nodes[static_cast<std::size_t>(join)].children.push_back(rhs);
                acc = join;
            }
            emitted[static_cast<std::size_t>(t)] = acc;
        }
        top = lift(emitted[static_cast<std::size_t>(td.root)], {});
    }
    out.tree.root = top;

    // Assign each (part, default) pair to the first covering node in
    // post-order, then insert one label node (duplicated bag) above it per
    // pair, in canonical pair order. Candidate nodes are only those whose
    // bag holds the default vertex.
    std::vector<std::vector<std::pair<LabelRef, std::vector<int>>>> pendingByDefault(
        static_cast<std::size_t>(theory.size()));
    std::size_t pendingCount = 0;
    for (const Default& d : theory.defaults())
        for (Part part : {Part::Alpha, Part::Beta, Part::Gamma}) {
            pendingByDefault[static_cast<std::size_t>(d.index)].push_back(
                {LabelRef{part, d.index}, detail::labelClique(theory, g, part, d.index)});
            ++pendingCount;
        }

    std::vector<std::vector<LabelRef>> assigned(out.tree.nodes.size());
    for (int t : postOrder(out.tree, out.tree.root)) {
        if (pendingCount == 0) break;
        const auto& bag = out.tree.nodes[static_cast<std::size_t>(t)].bag;
        for (int v : bag) {
            if (!g.isDefaultVertex(v)) continue;
            auto& pending = pendingByDefault[static_cast<std::size_t>(g.defaultIndexOf(v))];
            for (auto it = pending.begin(); it != pending.end();) {
                if (std::includes(bag.begin(), bag.end(), it->second.begin(), it->second.end())) {
                    assigned[static_cast<std::size_t>(t)].push_back(it->first);
                    it = pending.erase(it);
                    --pendingCount;
                } else {
                    ++it;
                }
            }
        }
    }
    if (pendingCount != 0)
        throw std::logic_error("no bag covers a label clique; decomposition invalid");

    const std::size_t original = out.tree.nodes.size();
    for (std::size_t t = 0; t < original; ++t) {
        auto labels = assigned[t];
        if (labels.empty()) continue;
        std::sort(labels.begin(), labels.end());
        int below = static_cast<int>(t);
        const int oldParent = out.tree.nodes[t].parent;
        for (const LabelRef& ref : labels) {
            int id = out.tree.addNode(out.tree.nodes[t].bag, -1);
            out.types.push_back(NodeType::Label);
            out.delta.emplace_back(ref);
            out.tree.nodes[static_cast<std::size_t>(below)].parent = id;
            out.tree.nodes[static_cast<std::size_t>(id)].children.push_back(below);
            below = id;
        }
        out.tree.nodes[static_cast<std::size_t>(below)].parent = oldParent;
        if (oldParent >= 0) {
            auto& pc = out.tree.nodes[static_cast<std::size_t>(oldParent)].children;
            *std::find(pc.begin(), pc.end(), static_cast<int>(t)) = below;
        } else {
            out.tree.root = below;
        }
    }

    return out;
}

// Structural check of the pretty-LTD invariants.
inline TdValidation validatePrettyLtd(const LabeledTreeDecomposition& ltd,
                                      const DefaultTheory& theory) {
    auto fail = [](std::string msg) { return TdValidation{false, std::move(msg)}; };
    Graph g = semiPrimalGraph(theory);
    if (g.vertexCount() > 0) {
        TdValidation v = validateTd(g, ltd.tree);
        if (!v.ok) return v;
    }
    if (ltd.tree.root < 0) return fail("missing root");
    if (!ltd.tree.nodes[static_cast<std::size_t>(ltd.tree.root)].bag.empty())
        return fail("root bag not empty");

    std::vector<int> labelSeen(static_cast<std::size_t>(theory.size()) * 3, 0);
    for (int t = 0; t < ltd.nodeCount(); ++t) {
        const auto& node = ltd.tree.nodes[static_cast<std::size_t>(t)];
        const NodeType type = ltd.types[static_cast<std::size_t>(t)];
        if (node.children.size() > 2) return fail("node with more than two children");
        if (ltd.delta[static_cast<std::size_t>(t)].has_value() != (type == NodeType::Label))
            return fail("delta populated iff label node");
        switch (type) {
        case NodeType::Leaf:
            if (!node.children.empty() || !node.bag.empty()) return fail("bad leaf");
            break;
        case NodeType::Int: {
            if (node.children.size() != 1) return fail("int node needs one child");
            const auto& cb = ltd.bag(node.children[0]);
            if (node.bag.size() != cb.size() + 1 ||
                !std::includes(node.bag.begin(), node.bag.end(), cb.begin(), cb.end()))
                return fail("int node must add exactly one vertex");
            break;
        }
        case NodeType::Rem: {
            if (node.children.size() != 1) return fail("rem node needs one child");
            const auto& cb = ltd.bag(node.children[0]);
            if (cb.size() != node.bag.size() + 1 ||
                !std::includes(cb.begin(), cb.end(), node.bag.begin(), node.bag.end()))
                return fail("rem node must drop exactly one vertex");
            break;
        }
        case NodeType::Join:
            if (node.children.size() != 2) return fail("join node needs two children");
            if (ltd.bag(node.children[0]) != node.bag || ltd.bag(node.children[1]) != node.bag)
                return fail("join children bags must equal the join bag");
            break;
        case NodeType::Label: {
            if (node.children.size() != 1) return fail("label node needs one child");
            if (ltd.bag(node.children[0]) != node.bag) return fail("label bag must equal child bag");
            const LabelRef ref = *ltd.delta[static_cast<std::size_t>(t)];
            ++labelSeen[static_cast<std::size_t>(ref.defaultIndex) * 3 +
                        static_cast<std::size_t>(ref.part)];
            std::vector<int> need = detail::labelClique(theory, g, ref.part, ref.defaultIndex);
            if (!std::includes(node.bag.begin(), node.bag.end(), need.begin(), need.end()))
                return fail("label clique not inside bag");
            break;
        }
        }
    }
    for (int d = 0; d < theory.size(); ++d)
        for (int p = 0; p < 3; ++p)
            if (labelSeen[static_cast<std::size_t>(d) * 3 + static_cast<std::size_t>(p)] != 1)
                return fail("pair (part, default) not labeled exactly once");
    return {};
}

inline std::string vertexName(const Graph& g, const DefaultTheory& theory, int v) {
    if (g.isDefaultVertex(v)) return "d" + std::to_string(g.defaultIndexOf(v) + 1);
    return theory.variables().nameOf(v);
}

inline std::string toDot(const LabeledTreeDecomposition& ltd, const DefaultTheory& theory) {
    Graph g = semiPrimalGraph(theory);
    std::ostringstream os;
    os << "digraph ltd {\n  node [shape=box];\n";
    for (int t = 0; t < ltd.nodeCount(); ++t) {
        os << "  n" << t << " [label=\"{";
        const auto& bag = ltd.bag(t);
        for (std::size_t i = 0; i < bag.size(); ++i)
            os << (i ? ", " : "") << vertexName(g, theory, bag[i]);
        os << "} " << nodeTypeName(ltd.types[static_cast<std::size_t>(t)]);
        if (ltd.delta[static_cast<std::size_t>(t)]) {
            const auto& ref = *ltd.delta[static_cast<std::size_t>(t)];
            const char* sym = ref.part == Part::Alpha ? "alpha" : ref.part == Part::Beta ? "beta" : "gamma";
            os << " delta=(" << sym << ",d" << ref.defaultIndex + 1 << ")";
        }
        os << "\"];\n";
    }
    for (int t = 0; t < ltd.nodeCount(); ++t) {
        int p = ltd.tree.nodes[static_cast<std::size_t>(t)].parent;
        if (p >= 0) os << "  n" << t << " -> n" << p << ";\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace defaultdp
