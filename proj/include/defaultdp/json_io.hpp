#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "defaultdp/decomposition.hpp"
#include "defaultdp/dp.hpp"
#include "defaultdp/oracle.hpp"
#include "defaultdp/theory.hpp"

namespace defaultdp {

using json = nlohmann::ordered_json;

// Decomposition export: one object per node with fields id, parent, bag,
// type, delta.
inline json ltdToJson(const LabeledTreeDecomposition& ltd, const DefaultTheory& theory) {
    Graph g = semiPrimalGraph(theory);
    json nodes = json::array();
    for (int t = 0; t < ltd.nodeCount(); ++t) {
        const auto& node = ltd.tree.nodes[static_cast<std::size_t>(t)];
        json entry;
        entry["id"] = t;
        if (node.parent >= 0)
            entry["parent"] = node.parent;
        else
            entry["parent"] = nullptr;
        json bag = json::array();
        for (int v : node.bag) bag.push_back(vertexName(g, theory, v));
        entry["bag"] = std::move(bag);
        entry["type"] = nodeTypeName(ltd.types[static_cast<std::size_t>(t)]);
        if (ltd.delta[static_cast<std::size_t>(t)]) {
            const auto& ref = *ltd.delta[static_cast<std::size_t>(t)];
            entry["delta"] = json::array({partName(ref.part), "d" + std::to_string(ref.defaultIndex + 1)});
        } else {
            entry["delta"] = json::array();
        }
        nodes.push_back(std::move(entry));
    }
    return nodes;
}

namespace detail {

inline json assignmentToJson(const VarSet& a, const Universe& vars) {
    json out = json::array();
    a.forEach([&](int b) {
        if (b == VarSet::kModelOnlyBit)
            out.push_back("mo");
        else
            out.push_back(vars.nameOf(b));
    });
    return out;
}

inline json assignmentSetToJson(const std::vector<VarSet>& s, const Universe& vars) {
    json out = json::array();
    for (const VarSet& a : s) out.push_back(assignmentToJson(a, vars));
    return out;
}

template <class Tag>
json stateTupleToJson(const StateTuple<Tag>& p, const Universe& vars, const char* stateKey,
                      const char* requiredKey, const char* refutingKey) {
    json out;
    json states = json::object();
    for (const auto& [d, s] : p.states.entries) states["d" + std::to_string(d + 1)] = stateName(s);
    out[stateKey] = std::move(states);
    out[requiredKey] = assignmentSetToJson(p.required, vars);
    out[refutingKey] = assignmentSetToJson(p.refuting, vars);
    return out;
}

}  // namespace detail

inline json tupleToJson(const DpTuple& t, const DefaultTheory& theory) {
    const Universe& vars = theory.variables();
    json out;
    json z = json::array();
    for (int d : t.witnessSet) z.push_back(d + 1);
    out["Z"] = std::move(z);
    out["M"] = detail::assignmentSetToJson(t.models, vars);
    json proofs = json::array();
    for (const WitnessProof& p : t.proofs)
        proofs.push_back(detail::stateTupleToJson(p, vars, "sigma", "A", "B"));
    out["P"] = std::move(proofs);
    json counters = json::array();
    for (const CounterWitness& c : t.counters)
        counters.push_back(detail::stateTupleToJson(c, vars, "rho", "AC", "BC"));
    out["C"] = std::move(counters);
    json origins = json::array();
    for (const Origin& o : t.origins) {
        json entry = json::array({o.left});
        if (o.right >= 0) entry.push_back(o.right);
        origins.push_back(std::move(entry));
    }
    out["origins"] = std::move(origins);
    return out;
}

inline json tableToJson(const Table& table, const DefaultTheory& theory) {
    json out = json::array();
    for (const DpTuple& t : table.tuples) out.push_back(tupleToJson(t, theory));
    return out;
}

inline json tablesToJson(const TableMap& tables, const LabeledTreeDecomposition& ltd,
                         const DefaultTheory& theory) {
    json nodes = json::array();
    for (int t = 0; t < ltd.nodeCount(); ++t) {
        json entry;
        entry["id"] = t;
        entry["type"] = nodeTypeName(ltd.types[static_cast<std::size_t>(t)]);
        entry["tuples"] = tableToJson(tables.at(t), theory);
        nodes.push_back(std::move(entry));
    }
    json out;
    out["nodes"] = std::move(nodes);
    return out;
}

inline json setListToJson(const std::vector<std::vector<int>>& sets) {
    json out = json::array();
    for (const auto& s : sets) {
        json entry = json::array();
        for (int d : s) entry.push_back(d + 1);
        out.push_back(std::move(entry));
    }
    return out;
}

inline json oracleReportToJson(const OracleReport& report) {
    json out;
    out["satisfying_sets"] = setListToJson(report.satisfyingSets);
    out["stable_sets"] = setListToJson(report.stableSets);
    out["reiter_confirmed"] = report.reiterConfirmed;
    out["agree"] = report.agree;
    if (!report.firstCounterexample.empty()) out["first_counterexample"] = report.firstCounterexample;
    return out;
}

// One enumerated solution as emitted on the output stream.
inline json solutionToJson(const DefaultTheory& theory, const std::vector<int>& defaults) {
    json out;
    json idx = json::array();
    json conclusions = json::array();
    for (int d : defaults) {
        idx.push_back(d + 1);
        conclusions.push_back(gamma(theory.defaultAt(d)).str());
    }
    out["defaults"] = std::move(idx);
    out["conclusions"] = std::move(conclusions);
    return out;
}

}  // namespace defaultdp
