#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "defaultdp/dp.hpp"
#include "defaultdp/json_io.hpp"
#include "defaultdp/solver.hpp"
#include "support/generators.hpp"

using namespace defaultdp;

namespace {

VarSet vs(std::initializer_list<int> bits) {
    VarSet s;
    for (int b : bits) s.set(b);
    return s;
}

VarSet mo(std::initializer_list<int> bits) { return vs(bits).markedCopy(); }

DefaultTheory theoryD1() { return parseTheory("T : a / a | b.\nT : ~a / ~b."); }
DefaultTheory theoryD2() {
    return parseTheory("c : a / a | b.\nc : ~a / ~b.\nT : c / c.\nT : ~c / ~c.");
}

StateFn st(std::initializer_list<std::pair<int, DState>> entries) {
    StateFn f;
    for (auto& e : entries) f.entries.push_back(e);
    return f;
}

// Chain mirroring the walkthrough for the first rule of the running
// example: leaf, introduce a, introduce d1, justification label,
// prerequisite label, introduce b, conclusion label.
struct Chain {
    LabeledTreeDecomposition ltd;
    int last = -1;

    int add(std::vector<int> bag, NodeType type, std::optional<LabelRef> ref = std::nullopt) {
        int id = ltd.tree.addNode(std::move(bag), -1);
        ltd.types.push_back(type);
        ltd.delta.push_back(ref);
        if (last >= 0) {
            ltd.tree.nodes[static_cast<std::size_t>(last)].parent = id;
            ltd.tree.nodes[static_cast<std::size_t>(id)].children.push_back(last);
        }
        last = id;
        ltd.tree.root = id;
        return id;
    }
};

Chain exampleChain() {
    Chain c;
    const int a = 0, b = 1, d1 = 2;
    c.add({}, NodeType::Leaf);
    c.add({a}, NodeType::Int);
    c.add({a, d1}, NodeType::Int);
    c.add({a, d1}, NodeType::Label, LabelRef{Part::Beta, 0});
    c.add({a, d1}, NodeType::Label, LabelRef{Part::Alpha, 0});
    c.add({a, b, d1}, NodeType::Int);
    c.add({a, b, d1}, NodeType::Label, LabelRef{Part::Gamma, 0});
    return c;
}

const DpTuple* findTuple(const Table& t, const std::vector<int>& witnessSet) {
    for (const DpTuple& u : t.tuples)
        if (u.witnessSet == witnessSet) return &u;
    return nullptr;
}

}  // namespace

TEST_CASE("leaf table is the fixed seed tuple") {
    Table t = leafTable();
    REQUIRE(t.tuples.size() == 1);
    const DpTuple& u = t.tuples[0];
    CHECK(u.witnessSet.empty());
    CHECK(u.models == std::vector<VarSet>{VarSet{}});
    REQUIRE(u.proofs.size() == 1);
    CHECK(u.proofs[0].states.entries.empty());
    CHECK(u.proofs[0].required.empty());
    CHECK(u.proofs[0].refuting.empty());
    CHECK(u.counters.empty());
    CHECK(u.origins.empty());

    // pure: repeated invocation yields the identical value
    Table again = leafTable();
    CHECK(cmpTupleKey(again.tuples[0], u) == 0);
}

TEST_CASE("walkthrough chain reproduces the published tables") {
    DefaultTheory d1 = theoryD1();
    Chain chain = exampleChain();
    TableMap tables = dpTraverse(chain.ltd, d1);

    // after introducing variable a the witness models guess its value
    const Table& afterA = tables.at(1);
    REQUIRE(afterA.tuples.size() == 1);
    CHECK(afterA.tuples[0].models == std::vector<VarSet>{vs({}), vs({0})});
    REQUIRE(afterA.tuples[0].proofs.size() == 1);
    CHECK(afterA.tuples[0].proofs[0].refuting.empty());

    // introducing d1 guesses its state
    const Table& afterD1 = tables.at(2);
    REQUIRE(afterD1.tuples.size() == 2);
    const DpTuple* plain = findTuple(afterD1, {});
    const DpTuple* concl = findTuple(afterD1, {0});
    REQUIRE(plain);
    REQUIRE(concl);
    REQUIRE(plain->proofs.size() == 2);
    CHECK(plain->proofs[0].states == st({{0, DState::Alpha}}));
    CHECK(plain->proofs[1].states == st({{0, DState::Beta}}));
    CHECK(plain->counters.empty());
    REQUIRE(concl->proofs.size() == 1);
    CHECK(concl->proofs[0].states == st({{0, DState::Gamma}}));
    REQUIRE(concl->counters.size() == 2);
    CHECK(concl->counters[0].states == st({{0, DState::Alpha}}));
    CHECK(concl->counters[0].refuting == std::vector<VarSet>{mo({0}), mo({})});
    CHECK(concl->counters[1].states == st({{0, DState::Beta}}));

    // justification label: the beta-state proof records the refuting
    // assignment {a}
    const Table& afterBeta = tables.at(3);
    const DpTuple* plainBeta = findTuple(afterBeta, {});
    REQUIRE(plainBeta);
    REQUIRE(plainBeta->proofs.size() == 2);
    CHECK(plainBeta->proofs[0].states == st({{0, DState::Alpha}}));
    CHECK(plainBeta->proofs[0].refuting.empty());
    CHECK(plainBeta->proofs[1].states == st({{0, DState::Beta}}));
    CHECK(plainBeta->proofs[1].refuting == std::vector<VarSet>{vs({0})});
    const DpTuple* conclBeta = findTuple(afterBeta, {0});
    REQUIRE(conclBeta);
    REQUIRE(conclBeta->counters.size() == 2);
    CHECK(conclBeta->counters[1].refuting ==
          std::vector<VarSet>{vs({0}), mo({0}), mo({})});

    // prerequisite label with prerequisite T: the alpha-state proof has no
    // candidate model of F and vanishes
    const Table& afterAlpha = tables.at(4);
    const DpTuple* plainAlpha = findTuple(afterAlpha, {});
    REQUIRE(plainAlpha);
    REQUIRE(plainAlpha->proofs.size() == 1);
    CHECK(plainAlpha->proofs[0].states == st({{0, DState::Beta}}));
    const DpTuple* conclAlpha = findTuple(afterAlpha, {0});
    REQUIRE(conclAlpha);
    REQUIRE(conclAlpha->counters.size() == 1);  // the alpha counter-witness died too
    CHECK(conclAlpha->counters[0].states == st({{0, DState::Beta}}));

    // conclusion label: witness models must satisfy a | b when d1 concludes
    const Table& afterGamma = tables.at(6);
    const DpTuple* conclGamma = findTuple(afterGamma, {0});
    REQUIRE(conclGamma);
    CHECK(conclGamma->models == std::vector<VarSet>{vs({0}), vs({0, 1}), vs({1})});
    const DpTuple* plainGamma = findTuple(afterGamma, {});
    REQUIRE(plainGamma);
    CHECK(plainGamma->models == std::vector<VarSet>{vs({}), vs({0}), vs({0, 1}), vs({1})});
}

TEST_CASE("introduceDefault branch cardinalities") {
    CHECK(introduceDefault(0, Table{}).tuples.empty());

    // child tuple with two proofs: the concluding branch keeps one proof
    // per child proof, the other branch two states per proof
    Table child = leafTable();
    child = introduceVariable(0, child);
    child = introduceDefault(1, child);
    const DpTuple* plain = findTuple(child, {});
    REQUIRE(plain);
    const std::size_t k = plain->proofs.size();  // 2: alpha and beta state for d2
    Table next = introduceDefault(2, child);
    const DpTuple* both = findTuple(next, {2});
    const DpTuple* none = findTuple(next, {});
    REQUIRE(both);
    REQUIRE(none);
    auto countWith = [&](const DpTuple& u, DState s) {
        std::size_t n = 0;
        for (const auto& p : u.proofs)
            if (p.states.at(2) == s) ++n;
        return n;
    };
    CHECK(countWith(*both, DState::Gamma) == k);
    CHECK(none->proofs.size() == 2 * k);
}

TEST_CASE("introduceVariable expands chosen assignments over both polarities") {
    // |A| = 0: exactly one variant
    Table base = leafTable();
    Table withVar = introduceVariable(0, base);
    REQUIRE(withVar.tuples.size() == 1);
    CHECK(withVar.tuples[0].proofs.size() == 1);
    CHECK(withVar.tuples[0].proofs[0].required.empty());

    // |A| = 2: four combinations
    DpTuple synthetic;
    synthetic.models = {vs({0}), vs({1}), vs({0, 1})};
    WitnessProof p;
    p.states = st({});
    p.required = {vs({0}), vs({1})};
    synthetic.proofs = {p};
    Table t;
    t.tuples = {synthetic};
    Table expanded = introduceVariable(2, t);
    REQUIRE(expanded.tuples.size() == 1);
    CHECK(expanded.tuples[0].proofs.size() == 4);

    // refuting assignments keep both polarities within one proof
    DpTuple withRefuting;
    withRefuting.models = {vs({0})};
    WitnessProof q;
    q.refuting = {vs({0})};
    withRefuting.proofs = {q};
    Table t2;
    t2.tuples = {withRefuting};
    Table expanded2 = introduceVariable(2, t2);
    CHECK(expanded2.tuples[0].proofs[0].refuting == std::vector<VarSet>{vs({0}), vs({0, 2})});
}

TEST_CASE("removeDefault merges state-only distinctions") {
    Table child;
    {
        DpTuple a;
        a.witnessSet = {0};
        a.models = {vs({})};
        WitnessProof p;
        p.states = st({{0, DState::Gamma}});
        a.proofs = {p};
        child.tuples.push_back(a);

        DpTuple b;
        b.models = {vs({})};
        WitnessProof q;
        q.states = st({{0, DState::Alpha}});
        b.proofs = {q};
        child.tuples.push_back(b);
    }
    Table merged = removeDefault(0, child);
    REQUIRE(merged.tuples.size() == 1);
    CHECK(merged.tuples[0].witnessSet.empty());
    CHECK(merged.tuples[0].proofs.size() == 1);
    CHECK(merged.tuples[0].proofs[0].states.entries.empty());
    CHECK(merged.tuples[0].origins.size() == 2);

    CHECK(removeDefault(0, Table{}).tuples.empty());
}

TEST_CASE("removeVariable projects assignments and keeps markers") {
    DpTuple u;
    u.models = {vs({}), vs({0})};
    CounterWitness c;
    c.states = st({});
    c.refuting = {vs({0}), mo({0})};
    u.counters = {c};
    WitnessProof p;
    p.states = st({});
    u.proofs = {p};
    Table t;
    t.tuples = {u};

    Table projected = removeVariable(0, t);
    REQUIRE(projected.tuples.size() == 1);
    CHECK(projected.tuples[0].models == std::vector<VarSet>{vs({})});
    CHECK(projected.tuples[0].counters[0].refuting == std::vector<VarSet>{vs({}), mo({})});
}

TEST_CASE("removeVariable merges tuples that collapse under projection") {
    Table child;
    for (VarSet m : {vs({}), vs({0})}) {
        DpTuple u;
        u.models = {m};
        WitnessProof p;
        p.states = st({});
        u.proofs = {p};
        child.tuples.push_back(u);
    }
    Table projected = removeVariable(0, child);
    REQUIRE(projected.tuples.size() == 1);
    CHECK(projected.tuples[0].models == std::vector<VarSet>{vs({})});
    CHECK(projected.tuples[0].origins.size() == 2);
}

TEST_CASE("conclusion label leaves non-concluding tuples alone") {
    DefaultTheory t = parseTheory("T : T / T.");
    CompiledFormula top(Formula::top(), t.variables());

    Table child = introduceDefault(0, leafTable());
    Table labeled = labelConclusion(0, top, child);
    REQUIRE(labeled.tuples.size() == child.tuples.size());
    // conclusion T: witness models unchanged
    const DpTuple* concl = findTuple(labeled, {0});
    REQUIRE(concl);
    CHECK(concl->models == std::vector<VarSet>{vs({})});
}

TEST_CASE("prerequisite label copies non-alpha proofs and branches over the pool") {
    DefaultTheory t = parseTheory("F : T / a.");
    Table child = introduceVariable(0, leafTable());
    child = introduceDefault(1, child);

    // prerequisite F: every pooled assignment models the negation, so
    // alpha-state proofs multiply by the pool size
    CompiledFormula bottom(Formula::bottom(), t.variables());
    Table labeled = labelPrerequisite(1, bottom, child);
    const DpTuple* plain = findTuple(labeled, {});
    REQUIRE(plain);
    std::size_t alphaProofs = 0, betaProofs = 0;
    for (const auto& p : plain->proofs) {
        if (p.states.at(1) == DState::Alpha) {
            ++alphaProofs;
            CHECK(p.required.size() == 1);
        } else {
            ++betaProofs;
            CHECK(p.required.empty());  // beta proofs copied untouched
        }
    }
    CHECK(alphaProofs == 2);  // pool {∅, {a}}
    CHECK(betaProofs == 1);
}

TEST_CASE("justification label with unsatisfiable justification changes nothing") {
    DefaultTheory t = parseTheory("T : F / a.");
    Table child = introduceVariable(0, leafTable());
    child = introduceDefault(1, child);
    CompiledFormula bottom(Formula::bottom(), t.variables());
    Table labeled = labelJustification(1, bottom, child);
    const DpTuple* plain = findTuple(labeled, {});
    REQUIRE(plain);
    for (const auto& p : plain->proofs) CHECK(p.refuting.empty());
    // gamma proofs of the concluding tuple are copied untouched
    const DpTuple* concl = findTuple(labeled, {1});
    REQUIRE(concl);
    CHECK(concl->proofs[0].refuting.empty());
}

TEST_CASE("join pairs equal witness sets only") {
    Table left = introduceDefault(0, leafTable());
    Table onlyConcl;
    onlyConcl.tuples = {*findTuple(left, {0})};
    Table onlyPlain;
    onlyPlain.tuples = {*findTuple(left, {})};
    CHECK(joinTables(onlyConcl, onlyPlain).tuples.empty());
}

TEST_CASE("joining with the leaf table at an empty bag is the identity") {
    DefaultTheory d2 = theoryD2();
    Pipeline p = runPipeline(d2);
    const Table& root = p.rootTable();
    Table joined = joinTables(root, leafTable());
    REQUIRE(joined.tuples.size() == root.tuples.size());
    for (std::size_t i = 0; i < root.tuples.size(); ++i)
        CHECK(cmpTupleKey(joined.tuples[i], root.tuples[i]) == 0);
}

TEST_CASE("root acceptance on the running examples") {
    CHECK_FALSE(rootAccepts(runPipeline(theoryD1()).rootTable()));
    CHECK(rootAccepts(runPipeline(theoryD2()).rootTable()));
    CHECK(rootAccepts(runPipeline(DefaultTheory{}).rootTable()));
}

TEST_CASE("hand-built decomposition with a join rejects the first example") {
    // bags {a,b,d1} and {a,b,d2} joined over {a,b}: each branch evaluates
    // one rule, the join combines witnesses agreeing on a and b
    DefaultTheory d1 = theoryD1();
    Graph g = semiPrimalGraph(d1);
    TreeDecomposition td;
    td.root = td.addNode({0, 1}, -1);
    td.addNode({0, 1, g.vertexOfDefault(0)}, td.root);
    td.addNode({0, 1, g.vertexOfDefault(1)}, td.root);

    LabeledTreeDecomposition ltd = makePrettyLtd(td, d1);
    REQUIRE(validatePrettyLtd(ltd, d1).ok);
    bool sawJoin = false;
    for (NodeType t : ltd.types) sawJoin |= t == NodeType::Join;
    CHECK(sawJoin);

    TableMap tables = dpTraverse(ltd, d1);
    CHECK_FALSE(rootAccepts(tables.at(ltd.tree.root)));
}

TEST_CASE("the empty theory only ever sees the leaf table") {
    Pipeline p = runPipeline(DefaultTheory{});
    const Table leaf = leafTable();
    for (int t = 0; t < p.ltd.nodeCount(); ++t) {
        REQUIRE(p.tables.at(t).tuples.size() == 1);
        CHECK(cmpTupleKey(p.tables.at(t).tuples[0], leaf.tuples[0]) == 0);
    }
}

TEST_CASE("table dump lists the documented fields") {
    DefaultTheory d1 = theoryD1();
    Chain chain = exampleChain();
    TableMap tables = dpTraverse(chain.ltd, d1);
    json dump = tableToJson(tables.at(3), d1);
    REQUIRE(dump.is_array());
    for (const auto& tuple : dump) {
        CHECK(tuple.contains("Z"));
        CHECK(tuple.contains("M"));
        CHECK(tuple.contains("P"));
        CHECK(tuple.contains("C"));
        CHECK(tuple.contains("origins"));
    }
}

TEST_CASE("tables are canonically ordered, deduplicated, and within the size bound") {
    testgen::Rng rng(111);
    for (int i = 0; i < 40; ++i) {
        DefaultTheory theory = testgen::randomTheory(rng, 4, 4, 3);
        Pipeline p = runPipeline(theory, SolveConfig{Heuristic::MinFill, (std::uint64_t)i});
        const int k = width(p.ltd.tree);
        const long double bound = tableSizeBoundLog2(k);
        for (int t = 0; t < p.ltd.nodeCount(); ++t) {
            const Table& table = p.tables.at(t);
            if (!table.tuples.empty())
                CHECK(std::log2l(static_cast<long double>(table.tuples.size())) <= bound);
            for (std::size_t n = 0; n + 1 < table.tuples.size(); ++n)
                CHECK(cmpTupleKey(table.tuples[n], table.tuples[n + 1]) < 0);
            for (const DpTuple& u : table.tuples) {
                if (p.ltd.types[static_cast<std::size_t>(t)] != NodeType::Leaf)
                    CHECK_FALSE(u.origins.empty());
                for (const VarSet& m : u.models) CHECK_FALSE(m.marked());
                for (const WitnessProof& proof : u.proofs) {
                    std::vector<int> concluded;
                    for (auto& [d, s] : proof.states.entries)
                        if (s == DState::Gamma) concluded.push_back(d);
                    CHECK(concluded == u.witnessSet);
                    for (const VarSet& a : proof.required) {
                        CHECK_FALSE(a.marked());
                        CHECK(defaultdp::detail::contains(u.models, a));
                    }
                    for (const VarSet& r : proof.refuting) {
                        CHECK_FALSE(r.marked());
                        CHECK(defaultdp::detail::contains(u.models, r));
                    }
                }
                for (const CounterWitness& c : u.counters) {
                    std::vector<int> concluded;
                    for (auto& [d, s] : c.states.entries)
                        if (s == DState::Gamma) concluded.push_back(d);
                    CHECK(std::includes(u.witnessSet.begin(), u.witnessSet.end(),
                                        concluded.begin(), concluded.end()));
                    for (const VarSet& a : c.required) CHECK_FALSE(a.marked());
                }
            }
        }
    }
}

TEST_CASE("identical runs produce identical tables") {
    DefaultTheory d2 = theoryD2();
    SolveConfig cfg;
    cfg.seed = 3;
    Pipeline a = runPipeline(d2, cfg);
    Pipeline b = runPipeline(d2, cfg);
    CHECK(tablesToJson(a.tables, a.ltd, d2).dump() == tablesToJson(b.tables, b.ltd, d2).dump());

    SolveConfig parallel = cfg;
    parallel.jobs = 3;
    Pipeline c = runPipeline(d2, parallel);
    CHECK(tablesToJson(c.tables, c.ltd, d2).dump() == tablesToJson(a.tables, a.ltd, d2).dump());
}

TEST_CASE("malformed structures are rejected") {
    // non-empty leaf bag
    LabeledTreeDecomposition bad;
    bad.tree.root = bad.tree.addNode({0}, -1);
    bad.types.push_back(NodeType::Leaf);
    bad.delta.emplace_back();
    CHECK_THROWS_AS(dpTraverse(bad, parseTheory("T : T / a.")), std::logic_error);

    // bag transition of two vertices at once
    LabeledTreeDecomposition bad2;
    int leaf = bad2.tree.addNode({}, -1);
    bad2.types.push_back(NodeType::Leaf);
    bad2.delta.emplace_back();
    bad2.tree.root = bad2.tree.addNode({0, 1}, -1);
    bad2.tree.nodes[static_cast<std::size_t>(leaf)].parent = bad2.tree.root;
    bad2.tree.nodes[static_cast<std::size_t>(bad2.tree.root)].children.push_back(leaf);
    bad2.types.push_back(NodeType::Int);
    bad2.delta.emplace_back();
    CHECK_THROWS_AS(dpTraverse(bad2, parseTheory("T : T / a & b.")), std::logic_error);
}
