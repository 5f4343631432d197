#pragma once

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <functional>
#include <future>
#include <initializer_list>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "defaultdp/decomposition.hpp"
#include "defaultdp/formula.hpp"
#include "defaultdp/theory.hpp"

namespace defaultdp {

// Decision state of a bag default: why it is claimed satisfied.
enum class DState : std::uint8_t { Alpha = 0, Beta = 1, Gamma = 2 };

inline const char* stateName(DState s) {
    switch (s) {
    case DState::Alpha: return "alpha";
    case DState::Beta: return "beta";
    default: return "gamma";
    }
}

// Mapping from bag defaults to decision states, sorted by default id.
struct StateFn {
    std::vector<std::pair<int, DState>> entries;

    bool has(int d) const {
        return std::binary_search(entries.begin(), entries.end(), std::make_pair(d, DState::Alpha),
                                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    DState at(int d) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), d,
                                   [](const auto& e, int key) { return e.first < key; });
        assert(it != entries.end() && it->first == d);
        return it->second;
    }
    StateFn withState(int d, DState s) const {
        StateFn r = *this;
        auto it = std::lower_bound(r.entries.begin(), r.entries.end(), d,
                                   [](const auto& e, int key) { return e.first < key; });
        assert(it == r.entries.end() || it->first != d);
        r.entries.insert(it, {d, s});
        return r;
    }
    StateFn without(int d) const {
        StateFn r = *this;
        auto it = std::lower_bound(r.entries.begin(), r.entries.end(), d,
                                   [](const auto& e, int key) { return e.first < key; });
        if (it != r.entries.end() && it->first == d) r.entries.erase(it);
        return r;
    }

    auto operator<=>(const StateFn&) const = default;
};

namespace detail {

inline int cmp(const VarSet& a, const VarSet& b) {
    if (a == b) return 0;
    return lexLess(a, b) ? -1 : 1;
}

inline int cmp(const std::vector<VarSet>& a, const std::vector<VarSet>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i)
        if (int c = cmp(a[i], b[i])) return c;
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    return 0;
}

inline void sortUnique(std::vector<VarSet>& v) {
    std::sort(v.begin(), v.end(), VarSetLess{});
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

inline bool contains(const std::vector<VarSet>& sorted, const VarSet& x) {
    return std::binary_search(sorted.begin(), sorted.end(), x, VarSetLess{});
}

inline void insert(std::vector<VarSet>& sorted, const VarSet& x) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), x, VarSetLess{});
    if (it == sorted.end() || !(*it == x)) sorted.insert(it, x);
}

inline std::vector<VarSet> setUnion(const std::vector<VarSet>& a, const std::vector<VarSet>& b) {
    std::vector<VarSet> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out), VarSetLess{});
    return out;
}

inline std::vector<VarSet> setIntersection(const std::vector<VarSet>& a,
                                           const std::vector<VarSet>& b) {
    std::vector<VarSet> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out),
                          VarSetLess{});
    return out;
}

inline bool subsetOf(const std::vector<VarSet>& a, const std::vector<VarSet>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end(), VarSetLess{});
}

inline std::vector<VarSet> withoutMarks(const std::vector<VarSet>& a) {
    std::vector<VarSet> out;
    out.reserve(a.size());
    for (const VarSet& e : a) out.push_back(e.unmarkedCopy());
    sortUnique(out);
    return out;
}

}  // namespace detail

// Shared shape of witness proofs and counter-witnesses: a state function,
// the chosen prerequisite-refuting assignments (one per alpha claim so
// far), and the justification-refuting assignments. Counter-witness
// refuting sets may carry model-only marked entries.
template <class Tag>
struct StateTuple {
    StateFn states;
    std::vector<VarSet> required;
    std::vector<VarSet> refuting;

    bool operator==(const StateTuple& o) const {
        return states == o.states && required == o.required && refuting == o.refuting;
    }
};

template <class Tag>
inline int cmp(const StateTuple<Tag>& a, const StateTuple<Tag>& b) {
    if (a.states != b.states) return a.states < b.states ? -1 : 1;
    if (int c = detail::cmp(a.required, b.required)) return c;
    return detail::cmp(a.refuting, b.refuting);
}

template <class Tag>
inline bool operator<(const StateTuple<Tag>& a, const StateTuple<Tag>& b) {
    return cmp(a, b) < 0;
}

using WitnessProof = StateTuple<struct WitnessTag>;
using CounterWitness = StateTuple<struct CounterTag>;

// Predecessor reference: index into the child table, or a pair of indices
// for join nodes.
struct Origin {
    std::int32_t left = -1;
    std::int32_t right = -1;
    auto operator<=>(const Origin&) const = default;
};

struct DpTuple {
    std::vector<int> witnessSet;          // bag defaults claimed concluding
    std::vector<VarSet> models;           // witness models over bag variables
    std::vector<WitnessProof> proofs;
    std::vector<CounterWitness> counters;
    std::vector<Origin> origins;
};

inline int cmpTupleKey(const DpTuple& a, const DpTuple& b) {
    if (a.witnessSet != b.witnessSet) return a.witnessSet < b.witnessSet ? -1 : 1;
    if (int c = detail::cmp(a.models, b.models)) return c;
    {
        const std::size_t n = std::min(a.proofs.size(), b.proofs.size());
        for (std::size_t i = 0; i < n; ++i)
            if (int c = cmp(a.proofs[i], b.proofs[i])) return c;
        if (a.proofs.size() != b.proofs.size()) return a.proofs.size() < b.proofs.size() ? -1 : 1;
    }
    {
        const std::size_t n = std::min(a.counters.size(), b.counters.size());
        for (std::size_t i = 0; i < n; ++i)
            if (int c = cmp(a.counters[i], b.counters[i])) return c;
        if (a.counters.size() != b.counters.size())
            return a.counters.size() < b.counters.size() ? -1 : 1;
    }
    return 0;
}

struct Table {
    std::vector<DpTuple> tuples;
};

namespace detail {

template <class T>
inline void sortUniqueTuples(std::vector<T>& v) {
    std::sort(v.begin(), v.end(), [](const T& a, const T& b) { return cmp(a, b) < 0; });
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Collects tuples, merges duplicates (by everything except origins), and
// unions their origin sets. The finished table is sorted in the canonical
// order used for enumeration.
class TableBuilder {
public:
    void add(DpTuple&& t) {
        sortUniqueTuples(t.proofs);
        sortUniqueTuples(t.counters);
        std::sort(t.origins.begin(), t.origins.end());
        pending_.push_back(std::move(t));
    }

    Table finish() {
        std::sort(pending_.begin(), pending_.end(), [](const DpTuple& a, const DpTuple& b) {
            if (int c = cmpTupleKey(a, b)) return c < 0;
            return a.origins < b.origins;
        });
        Table out;
        for (DpTuple& t : pending_) {
            if (!out.tuples.empty() && cmpTupleKey(out.tuples.back(), t) == 0) {
                auto& dst = out.tuples.back().origins;
                dst.insert(dst.end(), t.origins.begin(), t.origins.end());
            } else {
                out.tuples.push_back(std::move(t));
            }
        }
        for (DpTuple& t : out.tuples) {
            std::sort(t.origins.begin(), t.origins.end());
            t.origins.erase(std::unique(t.origins.begin(), t.origins.end()), t.origins.end());
        }
        return out;
    }

private:
    std::vector<DpTuple> pending_;
};

// Every way of extending the chosen assignments over a fresh variable:
// each entry independently keeps the variable false or sets it true.
inline std::vector<std::vector<VarSet>> polarityCombinations(const std::vector<VarSet>& entries,
                                                             int bit) {
    std::vector<std::vector<VarSet>> variants{{}};
    for (const VarSet& e : entries) {
        std::vector<std::vector<VarSet>> next;
        next.reserve(variants.size() * 2);
        for (const auto& v : variants) {
            for (const VarSet& cand : {e, e.with(bit)}) {
                auto copy = v;
                insert(copy, cand);
                next.push_back(std::move(copy));
            }
        }
        variants = std::move(next);
    }
    std::sort(variants.begin(), variants.end(),
              [](const auto& a, const auto& b) { return cmp(a, b) < 0; });
    variants.erase(std::unique(variants.begin(), variants.end()), variants.end());
    return variants;
}

template <class Out, class In>
inline std::vector<Out> extendStates(const std::vector<In>& in, int d,
                                     std::initializer_list<DState> states,
                                     const std::vector<VarSet>* modelSeed) {
    std::vector<Out> out;
    out.reserve(in.size() * states.size());
    for (const In& p : in)
        for (DState s : states) {
            Out q;
            q.states = p.states.withState(d, s);
            q.required = p.required;
            q.refuting = p.refuting;
            if (modelSeed)
                for (const VarSet& m : *modelSeed) insert(q.refuting, m.markedCopy());
            out.push_back(std::move(q));
        }
    sortUniqueTuples(out);
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Node handlers. Each is a pure function from child table(s) to the node's
// table; origins index the child table(s).
// ---------------------------------------------------------------------------

inline Table leafTable() {
    DpTuple t;
    t.models = {VarSet{}};
    t.proofs = {WitnessProof{}};
    return Table{{std::move(t)}};
}

// Guess the state of a freshly introduced default. The concluding branch
// spawns counter-witness candidates from the child's witness proofs,
// seeding their refuting sets with model-only marked copies of the witness
// models.
inline Table introduceDefault(int d, const Table& child, bool counterWitnesses = true) {
    detail::TableBuilder b;
    for (std::size_t i = 0; i < child.tuples.size(); ++i) {
        const DpTuple& u = child.tuples[i];
        assert(!std::binary_search(u.witnessSet.begin(), u.witnessSet.end(), d));

        DpTuple concl;
        concl.witnessSet = u.witnessSet;
        concl.witnessSet.insert(
            std::lower_bound(concl.witnessSet.begin(), concl.witnessSet.end(), d), d);
        concl.models = u.models;
        concl.proofs = detail::extendStates<WitnessProof>(u.proofs, d, {DState::Gamma}, nullptr);
        if (counterWitnesses) {
            concl.counters = detail::extendStates<CounterWitness>(
                u.counters, d, {DState::Alpha, DState::Beta, DState::Gamma}, nullptr);
            auto born = detail::extendStates<CounterWitness>(u.proofs, d,
                                                             {DState::Alpha, DState::Beta},
                                                             &u.models);
            for (auto& c : born) concl.counters.push_back(std::move(c));
            detail::sortUniqueTuples(concl.counters);
        }
        concl.origins = {{static_cast<std::int32_t>(i), -1}};
        b.add(std::move(concl));

        DpTuple other;
        other.witnessSet = u.witnessSet;
        other.models = u.models;
        other.proofs =
            detail::extendStates<WitnessProof>(u.proofs, d, {DState::Alpha, DState::Beta}, nullptr);
        if (counterWitnesses)
            other.counters = detail::extendStates<CounterWitness>(
                u.counters, d, {DState::Alpha, DState::Beta}, nullptr);
        other.origins = {{static_cast<std::int32_t>(i), -1}};
        b.add(std::move(other));
    }
    return b.finish();
}

// Conclusion label: tuples concluding d keep only assignments compatible
// with the conclusion. Proofs whose chosen prerequisite witnesses violate
// it are dropped; counter-witnesses not concluding d keep their model-only
// entries untouched.
inline Table labelConclusion(int d, const CompiledFormula& conclusion, const Table& child) {
    detail::TableBuilder b;
    for (std::size_t i = 0; i < child.tuples.size(); ++i) {
        const DpTuple& u = child.tuples[i];
        DpTuple t;
        t.origins = {{static_cast<std::int32_t>(i), -1}};
        t.witnessSet = u.witnessSet;
        if (!std::binary_search(u.witnessSet.begin(), u.witnessSet.end(), d)) {
            t.models = u.models;
            t.proofs = u.proofs;
            t.counters = u.counters;
            b.add(std::move(t));
            continue;
        }
        for (const VarSet& m : u.models)
            if (conclusion.eval(m)) t.models.push_back(m);
        for (const WitnessProof& p : u.proofs) {
            assert(p.states.at(d) == DState::Gamma);
            bool keep = true;
            for (const VarSet& a : p.required)
                if (!conclusion.eval(a)) {
                    keep = false;
                    break;
                }
            if (!keep) continue;
            WitnessProof q;
            q.states = p.states;
            q.required = p.required;
            for (const VarSet& e : p.refuting)
                if (conclusion.eval(e)) q.refuting.push_back(e);
            t.proofs.push_back(std::move(q));
        }
        for (const CounterWitness& c : u.counters) {
            CounterWitness q;
            q.states = c.states;
            q.required = c.required;
            if (c.states.at(d) == DState::Gamma) {
                bool keep = true;
                for (const VarSet& a : c.required)
                    if (!conclusion.eval(a)) {
                        keep = false;
                        break;
                    }
                if (!keep) continue;
                for (const VarSet& e : c.refuting)
                    if (conclusion.eval(e)) q.refuting.push_back(e);
            } else {
                for (const VarSet& e : c.refuting)
                    if (e.marked() || conclusion.eval(e)) q.refuting.push_back(e);
            }
            t.counters.push_back(std::move(q));
        }
        b.add(std::move(t));
    }
    return b.finish();
}

namespace detail {

// Prerequisite label applied to one family of state tuples: tuples not
// claiming d via alpha pass through; the others branch over every pooled
// assignment falsifying the prerequisite. Claims without any candidate
// vanish.
template <class T>
std::vector<T> prerequisiteBranches(const std::vector<T>& in, int d,
                                    const CompiledFormula& prerequisite,
                                    const std::vector<VarSet>* witnessModels) {
    std::vector<T> out;
    for (const T& p : in) {
        if (p.states.at(d) != DState::Alpha) {
            out.push_back(p);
            continue;
        }
        std::vector<VarSet> pool = withoutMarks(p.refuting);
        if (witnessModels) pool = setUnion(pool, *witnessModels);
        for (const VarSet& cand : pool) {
            if (prerequisite.eval(cand)) continue;
            T q;
            q.states = p.states;
            q.required = p.required;
            insert(q.required, cand);
            q.refuting = p.refuting;
            out.push_back(std::move(q));
        }
    }
    sortUniqueTuples(out);
    return out;
}

}  // namespace detail

inline Table labelPrerequisite(int d, const CompiledFormula& prerequisite, const Table& child) {
    detail::TableBuilder b;
    for (std::size_t i = 0; i < child.tuples.size(); ++i) {
        const DpTuple& u = child.tuples[i];
        DpTuple t;
        t.witnessSet = u.witnessSet;
        t.models = u.models;
        t.proofs = detail::prerequisiteBranches(u.proofs, d, prerequisite, &u.models);
        t.counters = detail::prerequisiteBranches(u.counters, d, prerequisite, nullptr);
        t.origins = {{static_cast<std::int32_t>(i), -1}};
        b.add(std::move(t));
    }
    return b.finish();
}

namespace detail {

template <class T>
std::vector<T> justificationRecords(const std::vector<T>& in, int d,
                                    const CompiledFormula& justification,
                                    const std::vector<VarSet>& witnessModels) {
    std::vector<T> out;
    out.reserve(in.size());
    for (const T& p : in) {
        T q = p;
        if (p.states.at(d) == DState::Beta)
            for (const VarSet& m : witnessModels)
                if (justification.eval(m)) insert(q.refuting, m);
        out.push_back(std::move(q));
    }
    sortUniqueTuples(out);
    return out;
}

}  // namespace detail

// Justification label: witness models compatible with the justification
// become refuting assignments for every tuple claiming d via beta. The
// counter-witness side draws from the same witness model pool.
inline Table labelJustification(int d, const CompiledFormula& justification, const Table& child) {
    detail::TableBuilder b;
    for (std::size_t i = 0; i < child.tuples.size(); ++i) {
        const DpTuple& u = child.tuples[i];
        DpTuple t;
        t.witnessSet = u.witnessSet;
        t.models = u.models;
        t.proofs = detail::justificationRecords(u.proofs, d, justification, u.models);
        t.counters = detail::justificationRecords(u.counters, d, justification, u.models);
        t.origins = {{static_cast<std::int32_t>(i), -1}};
        b.add(std::move(t));
    }
    return b.finish();
}

inline Table introduceVariable(int bit, const Table& child) {
    detail::TableBuilder b;
    for (std::size_t i = 0; i < child.tuples.size(); ++i) {
        const DpTuple& u = child.tuples[i];

        std::vector<VarSet> models = u.models;
        for (const VarSet& m : u.models) detail::insert(models, m.with(bit));

        auto expand = [&](const auto& tuples) {
            using T = std::decay_t<decltype(tuples[0])>;
            std::vector<T> out;
            for (const T& p : tuples) {
                assert(!std::any_of(p.required.begin(), p.required.end(),
                                    [&](const VarSet& e) { return e.test(bit); }));
                std::vector<VarSet> refuting = p.refuting;
                for (const VarSet& e : p.refuting) detail::insert(refuting, e.with(bit));
                for (auto& variant : detail::polarityCombinations(p.required, bit)) {
                    T q;
                    q.states = p.states;
                    q.required = std::move(variant);
                    q.refuting = refuting;
                    out.push_back(std::move(q));
                }
            }
            detail::sortUniqueTuples(out);
            return out;
        };

        DpTuple t;
        t.witnessSet = u.witnessSet;
        t.models = std::move(models);
        t.proofs = expand(u.proofs);
        t.counters = expand(u.counters);
        t.origins = {{static_cast<std::int32_t>(i), -1}};
        b.add(std::move(t));
    }
    return b.finish();
}

inline Table removeDefault(int d, const Table& child) {
    detail::TableBuilder b;
    for (std::size_t i = 0; i < child.tuples.size(); ++i) {
        const DpTuple& u = child.tuples[i];
        DpTuple t;
        t.witnessSet = u.witnessSet;
        auto it = std::lower_bound(t.witnessSet.begin(), t.witnessSet.end(), d);
        if (it != t.witnessSet.end() && *it == d) t.witnessSet.erase(it);
        t.models = u.models;
        t.proofs.reserve(u.proofs.size());
        for (const WitnessProof& p : u.proofs)
            t.proofs.push_back(WitnessProof{p.states.without(d), p.required, p.refuting});
        t.counters.reserve(u.counters.size());
        for (const CounterWitness& c : u.counters)
            t.counters.push_back(CounterWitness{c.states.without(d), c.required, c.refuting});
        t.origins = {{static_cast<std::int32_t>(i), -1}};
        b.add(std::move(t));
    }
    return b.finish();
}

inline Table removeVariable(int bit, const Table& child) {
    detail::TableBuilder b;
    auto project = [&](const std::vector<VarSet>& v) {
        std::vector<VarSet> out;
        out.reserve(v.size());
        for (const VarSet& e : v) out.push_back(e.without(bit));
        detail::sortUnique(out);
        return out;
    };
    for (std::size_t i = 0; i < child.tuples.size(); ++i) {
        const DpTuple& u = child.tuples[i];
        DpTuple t;
        t.witnessSet = u.witnessSet;
        t.models = project(u.models);
        t.proofs.reserve(u.proofs.size());
        for (const WitnessProof& p : u.proofs)
            t.proofs.push_back(WitnessProof{p.states, project(p.required), project(p.refuting)});
        t.counters.reserve(u.counters.size());
        for (const CounterWitness& c : u.counters)
            t.counters.push_back(CounterWitness{c.states, project(c.required), project(c.refuting)});
        t.origins = {{static_cast<std::int32_t>(i), -1}};
        b.add(std::move(t));
    }
    return b.finish();
}

namespace detail {

// Pairs state tuples with equal state functions. A combined tuple exists
// when each side's chosen prerequisite witnesses extend to models of the
// other side's conclusions, i.e. appear in the other side's pool; refuting
// assignments survive when the opposite side shows the same assignment as
// a model or refutation. Marked and unmarked entries never match each
// other. Both inputs are sorted by states first, so only state-equal
// ranges are paired.
template <class T>
std::vector<T> pairwiseJoin(const std::vector<T>& lhs, const std::vector<VarSet>& lhsModels,
                            const std::vector<T>& rhs, const std::vector<VarSet>& rhsModels) {
    std::vector<T> out;
    std::size_t i = 0, j = 0;
    std::vector<VarSet> pool;
    while (i < lhs.size() && j < rhs.size()) {
        if (lhs[i].states < rhs[j].states) {
            ++i;
            continue;
        }
        if (rhs[j].states < lhs[i].states) {
            ++j;
            continue;
        }
        std::size_t iEnd = i, jEnd = j;
        while (iEnd < lhs.size() && lhs[iEnd].states == lhs[i].states) ++iEnd;
        while (jEnd < rhs.size() && rhs[jEnd].states == rhs[j].states) ++jEnd;
        std::vector<std::vector<VarSet>> rhsPools(jEnd - j);
        for (std::size_t q = j; q < jEnd; ++q)
            rhsPools[q - j] =
                setUnion(setUnion(rhs[q].required, rhsModels), withoutMarks(rhs[q].refuting));
        for (std::size_t p = i; p < iEnd; ++p) {
            const std::vector<VarSet> lhsPool = setUnion(setUnion(lhs[p].required, lhsModels),
                                                         withoutMarks(lhs[p].refuting));
            for (std::size_t q = j; q < jEnd; ++q) {
                if (!subsetOf(lhs[p].required, rhsPools[q - j]) ||
                    !subsetOf(rhs[q].required, lhsPool))
                    continue;
                T r;
                r.states = lhs[p].states;
                r.required = setUnion(lhs[p].required, rhs[q].required);
                r.refuting =
                    setUnion(setIntersection(lhs[p].refuting, setUnion(rhs[q].refuting, rhsModels)),
                             setIntersection(setUnion(lhs[p].refuting, lhsModels), rhs[q].refuting));
                out.push_back(std::move(r));
            }
        }
        i = iEnd;
        j = jEnd;
    }
    sortUniqueTuples(out);
    return out;
}

// A witness proof viewed as the equal-on-this-side component of a
// counter-witness: its model pool rides along as marked entries, exactly
// as at the birth of counter-witnesses under introduceDefault.
inline std::vector<CounterWitness> counterForms(const std::vector<WitnessProof>& proofs,
                                                const std::vector<VarSet>& models) {
    std::vector<CounterWitness> out;
    out.reserve(proofs.size());
    for (const WitnessProof& p : proofs) {
        CounterWitness c;
        c.states = p.states;
        c.required = p.required;
        c.refuting = p.refuting;
        for (const VarSet& m : models) insert(c.refuting, m.markedCopy());
        out.push_back(std::move(c));
    }
    sortUniqueTuples(out);
    return out;
}

}  // namespace detail

inline Table joinTables(const Table& left, const Table& right, bool counterWitnesses = true) {
    detail::TableBuilder b;
    for (std::size_t i = 0; i < left.tuples.size(); ++i) {
        const DpTuple& u = left.tuples[i];
        for (std::size_t j = 0; j < right.tuples.size(); ++j) {
            const DpTuple& v = right.tuples[j];
            if (u.witnessSet != v.witnessSet) continue;
            DpTuple t;
            t.witnessSet = u.witnessSet;
            t.models = detail::setIntersection(u.models, v.models);
            t.proofs = detail::pairwiseJoin(u.proofs, u.models, v.proofs, v.models);
            if (counterWitnesses) {
                t.counters = detail::pairwiseJoin(u.counters, u.models, v.counters, v.models);
                auto mixed = detail::pairwiseJoin(detail::counterForms(u.proofs, u.models),
                                                  u.models, v.counters, v.models);
                for (auto& c : mixed) t.counters.push_back(std::move(c));
                mixed = detail::pairwiseJoin(u.counters, u.models,
                                             detail::counterForms(v.proofs, v.models), v.models);
                for (auto& c : mixed) t.counters.push_back(std::move(c));
                detail::sortUniqueTuples(t.counters);
            }
            t.origins = {{static_cast<std::int32_t>(i), static_cast<std::int32_t>(j)}};
            b.add(std::move(t));
        }
    }
    return b.finish();
}

// A root tuple is accepting when some proof kept an empty refuting set and
// every counter-witness retained a true (unmarked) refutation.
inline bool tupleAccepts(const DpTuple& t) {
    if (!t.witnessSet.empty()) return false;
    if (t.models.size() != 1 || !t.models.front().empty()) return false;
    bool proved = false;
    for (const WitnessProof& p : t.proofs)
        if (p.refuting.empty()) {
            proved = true;
            break;
        }
    if (!proved) return false;
    for (const CounterWitness& c : t.counters)
        if (!detail::contains(c.refuting, VarSet{})) return false;
    return true;
}

inline std::vector<int> acceptingRootTuples(const Table& root) {
    std::vector<int> out;
    for (std::size_t i = 0; i < root.tuples.size(); ++i)
        if (tupleAccepts(root.tuples[i])) out.push_back(static_cast<int>(i));
    return out;
}

inline bool rootAccepts(const Table& root) { return !acceptingRootTuples(root).empty(); }

struct DpOptions {
    bool counterWitnesses = true;  // disabled: satisfiability-only tables
    int jobs = 1;
};

struct TableMap {
    std::vector<Table> tables;  // indexed by node id

    const Table& at(int node) const { return tables.at(static_cast<std::size_t>(node)); }
};

// log2 of the worst-case tuple count per table for a decomposition of the
// given width; loose by construction.
inline long double tableSizeBoundLog2(int width) {
    const long double k = width;
    return (k + 1) + std::pow(2.0L, k + 1) +
           2.0L * std::pow(3.0L, k + 1) * std::pow(2.0L, std::pow(2.0L, k + 2));
}

namespace detail {

struct NodePlan {
    NodeType type;
    int element = -1;      // introduced/removed vertex for int/rem
    bool isDefault = false;
    int labelDefault = -1;
    Part labelPart = Part::Alpha;
};

inline std::vector<NodePlan> planNodes(const LabeledTreeDecomposition& ltd,
                                       const DefaultTheory& theory) {
    const int variableCount = theory.variables().size();
    std::vector<NodePlan> plan(static_cast<std::size_t>(ltd.nodeCount()));
    for (int t = 0; t < ltd.nodeCount(); ++t) {
        NodePlan& p = plan[static_cast<std::size_t>(t)];
        p.type = ltd.types[static_cast<std::size_t>(t)];
        const auto& node = ltd.tree.nodes[static_cast<std::size_t>(t)];
        switch (p.type) {
        case NodeType::Leaf:
            if (!node.bag.empty() || !node.children.empty())
                throw std::logic_error("malformed leaf node");
            break;
        case NodeType::Int:
        case NodeType::Rem: {
            if (node.children.size() != 1) throw std::logic_error("unary node arity mismatch");
            const auto& cb = ltd.bag(node.children[0]);
            std::vector<int> diff;
            if (p.type == NodeType::Int)
                std::set_difference(node.bag.begin(), node.bag.end(), cb.begin(), cb.end(),
                                    std::back_inserter(diff));
            else
                std::set_difference(cb.begin(), cb.end(), node.bag.begin(), node.bag.end(),
                                    std::back_inserter(diff));
            if (diff.size() != 1) throw std::logic_error("bag transition must change one vertex");
            p.element = diff.front();
            p.isDefault = p.element >= variableCount;
            if (p.isDefault) p.element -= variableCount;
            break;
        }
        case NodeType::Join:
            if (node.children.size() != 2) throw std::logic_error("join node arity mismatch");
            break;
        case NodeType::Label: {
            if (node.children.size() != 1 || !ltd.delta[static_cast<std::size_t>(t)])
                throw std::logic_error("malformed label node");
            p.labelDefault = ltd.delta[static_cast<std::size_t>(t)]->defaultIndex;
            p.labelPart = ltd.delta[static_cast<std::size_t>(t)]->part;
            const Default& d = theory.defaultAt(p.labelDefault);
            const Formula& f = p.labelPart == Part::Alpha  ? d.prerequisite
                               : p.labelPart == Part::Beta ? d.justification
                                                           : d.conclusion;
            if (!std::binary_search(node.bag.begin(), node.bag.end(),
                                    variableCount + p.labelDefault))
                throw std::logic_error("label not evaluable in bag");
            for (const auto& name : f.variables())
                if (!std::binary_search(node.bag.begin(), node.bag.end(),
                                        theory.variables().indexOf(name)))
                    throw std::logic_error("label not evaluable in bag");
            break;
        }
        }
    }
    return plan;
}

}  // namespace detail

inline TableMap dpTraverse(const LabeledTreeDecomposition& ltd, const DefaultTheory& theory,
                           const DpOptions& opt = {}) {
    const auto plan = detail::planNodes(ltd, theory);

    std::vector<CompiledFormula> labelFormulas(static_cast<std::size_t>(ltd.nodeCount()));
    for (int t = 0; t < ltd.nodeCount(); ++t) {
        if (plan[static_cast<std::size_t>(t)].type != NodeType::Label) continue;
        const auto& p = plan[static_cast<std::size_t>(t)];
        const Default& d = theory.defaultAt(p.labelDefault);
        const Formula& f = p.labelPart == Part::Alpha  ? d.prerequisite
                           : p.labelPart == Part::Beta ? d.justification
                                                       : d.conclusion;
        labelFormulas[static_cast<std::size_t>(t)] = CompiledFormula(f, theory.variables());
    }

    TableMap out;
    out.tables.resize(static_cast<std::size_t>(ltd.nodeCount()));

    auto compute = [&](int t) {
        const auto& node = ltd.tree.nodes[static_cast<std::size_t>(t)];
        const detail::NodePlan& p = plan[static_cast<std::size_t>(t)];
        switch (p.type) {
        case NodeType::Leaf: out.tables[static_cast<std::size_t>(t)] = leafTable(); break;
        case NodeType::Int: {
            const Table& child = out.tables[static_cast<std::size_t>(node.children[0])];
            out.tables[static_cast<std::size_t>(t)] =
                p.isDefault ? introduceDefault(p.element, child, opt.counterWitnesses)
                            : introduceVariable(p.element, child);
            break;
        }
        case NodeType::Rem: {
            const Table& child = out.tables[static_cast<std::size_t>(node.children[0])];
            out.tables[static_cast<std::size_t>(t)] =
                p.isDefault ? removeDefault(p.element, child) : removeVariable(p.element, child);
            break;
        }
        case NodeType::Join:
            out.tables[static_cast<std::size_t>(t)] =
                joinTables(out.tables[static_cast<std::size_t>(node.children[0])],
                           out.tables[static_cast<std::size_t>(node.children[1])],
                           opt.counterWitnesses);
            break;
        case NodeType::Label: {
            const Table& child = out.tables[static_cast<std::size_t>(node.children[0])];
            const CompiledFormula& f = labelFormulas[static_cast<std::size_t>(t)];
            out.tables[static_cast<std::size_t>(t)] =
                p.labelPart == Part::Alpha  ? labelPrerequisite(p.labelDefault, f, child)
                : p.labelPart == Part::Beta ? labelJustification(p.labelDefault, f, child)
                                            : labelConclusion(p.labelDefault, f, child);
            break;
        }
        }
    };

    if (opt.jobs <= 1) {
        for (int t : postOrder(ltd.tree, ltd.tree.root)) compute(t);
        return out;
    }

    // Sibling subtrees are independent; spend the extra jobs on join
    // branches. Handlers are pure, so the result does not depend on the
    // schedule.
    std::atomic<int> budget{opt.jobs - 1};
    std::function<void(int)> run = [&](int t) {
        const auto& children = ltd.tree.nodes[static_cast<std::size_t>(t)].children;
        if (children.size() == 2 && budget.fetch_sub(1) > 0) {
            auto fut = std::async(std::launch::async, [&, c = children[0]] { run(c); });
            run(children[1]);
            fut.wait();
            budget.fetch_add(1);
        } else {
            if (children.size() == 2) budget.fetch_add(1);
            for (int c : children) run(c);
        }
        compute(t);
    };
    run(ltd.tree.root);
    return out;
}

}  // namespace defaultdp
