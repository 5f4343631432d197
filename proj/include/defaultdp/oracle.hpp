#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "defaultdp/formula.hpp"
#include "defaultdp/theory.hpp"

namespace defaultdp {

// Brute-force ground truth, independent of the decomposition pipeline.
// Exponential in both defaults and variables; refuses beyond the caps.
struct OracleLimits {
    int maxDefaults = 16;
    int maxVariables = 16;
};

namespace oracle_detail {

class Context {
public:
    Context(const DefaultTheory& theory, const OracleLimits& limits) : theory_(&theory) {
        if (theory.size() > limits.maxDefaults)
            throw ResourceLimitError("oracle refuses " + std::to_string(theory.size()) +
                                     " defaults (cap " + std::to_string(limits.maxDefaults) + ")");
        if (theory.variables().size() > limits.maxVariables)
            throw ResourceLimitError("oracle refuses " + std::to_string(theory.variables().size()) +
                                     " variables (cap " + std::to_string(limits.maxVariables) + ")");
        nv_ = theory.variables().size();
        for (const Default& d : theory.defaults()) {
            pre_.emplace_back(d.prerequisite, theory.variables());
            just_.emplace_back(d.justification, theory.variables());
            concl_.emplace_back(d.conclusion, theory.variables());
        }
    }

    int defaults() const { return theory_->size(); }

    // Satisfiability of { conclusions of S } plus an optional extra
    // constraint (the extra formula itself, or its negation).
    bool conclusionsSat(std::uint32_t s, const CompiledFormula* extra, bool negateExtra) const {
        bool found = false;
        forEachAssignment(nv_, [&](VarSet a) {
            for (int d = 0; d < defaults(); ++d)
                if ((s >> d) & 1u)
                    if (!concl_[static_cast<std::size_t>(d)].eval(a)) return true;
            if (extra) {
                bool v = extra->eval(a);
                if (negateExtra) v = !v;
                if (!v) return true;
            }
            found = true;
            return false;
        });
        return found;
    }

    // Every model of the conclusions of `base` satisfies f.
    bool conclusionsEntail(std::uint32_t base, const CompiledFormula& f) const {
        bool holds = true;
        forEachAssignment(nv_, [&](VarSet a) {
            for (int d = 0; d < defaults(); ++d)
                if ((base >> d) & 1u)
                    if (!concl_[static_cast<std::size_t>(d)].eval(a)) return true;
            if (!f.eval(a)) {
                holds = false;
                return false;
            }
            return true;
        });
        return holds;
    }

    bool conclusionsEntailAll(std::uint32_t base, std::uint32_t goals) const {
        for (int d = 0; d < defaults(); ++d)
            if ((goals >> d) & 1u)
                if (!conclusionsEntail(base, concl_[static_cast<std::size_t>(d)])) return false;
        return true;
    }

    bool alphaSat(int d, std::uint32_t s) const {
        return conclusionsSat(s, &pre_[static_cast<std::size_t>(d)], /*negateExtra=*/true);
    }
    bool betaSat(int d, std::uint32_t s) const {
        return !conclusionsSat(s, &just_[static_cast<std::size_t>(d)], false);
    }
    bool consistent(std::uint32_t s) const { return conclusionsSat(s, nullptr, false); }

    bool satisfying(std::uint32_t s) const {
        for (int d = 0; d < defaults(); ++d) {
            if ((s >> d) & 1u) continue;
            if (!alphaSat(d, s) && !betaSat(d, s)) return false;
        }
        return true;
    }

    // The subset-minimality breaker: every default is alpha-satisfiable in
    // the subset, beta-satisfiable in the outer set, or a member of the
    // subset.
    bool invalidates(std::uint32_t sub, std::uint32_t outer) const {
        for (int d = 0; d < defaults(); ++d) {
            if ((sub >> d) & 1u) continue;
            if (!alphaSat(d, sub) && !betaSat(d, outer)) return false;
        }
        return true;
    }

    bool stable(std::uint32_t s) const {
        if (!satisfying(s) || !consistent(s)) return false;
        if (s == 0) return true;
        std::uint32_t sub = (s - 1) & s;
        while (true) {
            if (invalidates(sub, s)) return false;
            if (sub == 0) break;
            sub = (sub - 1) & s;
        }
        return true;
    }

    bool justificationCompatible(int d, std::uint32_t s) const {
        return conclusionsSat(s, &just_[static_cast<std::size_t>(d)], false);
    }

    bool prerequisiteDerivable(int d, std::uint32_t base) const {
        return conclusionsEntail(base, pre_[static_cast<std::size_t>(d)]);
    }

private:
    const DefaultTheory* theory_;
    int nv_ = 0;
    std::vector<CompiledFormula> pre_, just_, concl_;
};

inline std::vector<int> maskToSet(std::uint32_t mask, int n) {
    std::vector<int> out;
    for (int d = 0; d < n; ++d)
        if ((mask >> d) & 1u) out.push_back(d);
    return out;
}

inline std::uint32_t setToMask(const std::vector<int>& s) {
    std::uint32_t mask = 0;
    for (int d : s) mask |= std::uint32_t{1} << d;
    return mask;
}

}  // namespace oracle_detail

inline bool isAlphaSat(const DefaultTheory& theory, int d, const std::vector<int>& s,
                       const OracleLimits& limits = {}) {
    return oracle_detail::Context(theory, limits).alphaSat(d, oracle_detail::setToMask(s));
}

inline bool isBetaSat(const DefaultTheory& theory, int d, const std::vector<int>& s,
                      const OracleLimits& limits = {}) {
    return oracle_detail::Context(theory, limits).betaSat(d, oracle_detail::setToMask(s));
}

inline bool isSatisfyingDefaultSet(const DefaultTheory& theory, const std::vector<int>& s,
                                   const OracleLimits& limits = {}) {
    return oracle_detail::Context(theory, limits).satisfying(oracle_detail::setToMask(s));
}

inline std::vector<std::vector<int>> satisfyingDefaultSets(const DefaultTheory& theory,
                                                           const OracleLimits& limits = {}) {
    oracle_detail::Context ctx(theory, limits);
    std::vector<std::vector<int>> out;
    const std::uint32_t total = std::uint32_t{1} << theory.size();
    for (std::uint32_t s = 0; s < total; ++s)
        if (ctx.satisfying(s)) out.push_back(oracle_detail::maskToSet(s, theory.size()));
    return out;
}

inline std::vector<std::vector<int>> stableDefaultSets(const DefaultTheory& theory,
                                                       const OracleLimits& limits = {}) {
    oracle_detail::Context ctx(theory, limits);
    std::vector<std::vector<int>> out;
    const std::uint32_t total = std::uint32_t{1} << theory.size();
    for (std::uint32_t s = 0; s < total; ++s)
        if (ctx.stable(s)) out.push_back(oracle_detail::maskToSet(s, theory.size()));
    return out;
}

struct ReiterResult {
    bool accepted = false;
    std::vector<int> generatingDefaults;
};

// Fixed-point check: iterate the consequence operator with justifications
// read against the candidate extension Th(conclusions of S), then compare
// deductive closures by mutual entailment. Inconsistent conclusion sets
// are rejected outright.
inline ReiterResult reiterCheck(const DefaultTheory& theory, const std::vector<int>& s,
                                const OracleLimits& limits = {}) {
    oracle_detail::Context ctx(theory, limits);
    const std::uint32_t sMask = oracle_detail::setToMask(s);
    if (!ctx.consistent(sMask)) return {};

    std::uint32_t fixed = 0;
    while (true) {
        std::uint32_t next = fixed;
        for (int d = 0; d < theory.size(); ++d) {
            if ((next >> d) & 1u) continue;
            if (ctx.prerequisiteDerivable(d, fixed) && ctx.justificationCompatible(d, sMask))
                next |= std::uint32_t{1} << d;
        }
        if (next == fixed) break;
        fixed = next;
    }

    ReiterResult r;
    r.accepted = ctx.conclusionsEntailAll(fixed, sMask) && ctx.conclusionsEntailAll(sMask, fixed);
    for (int d = 0; d < theory.size(); ++d)
        if (ctx.prerequisiteDerivable(d, sMask) && ctx.justificationCompatible(d, sMask))
            r.generatingDefaults.push_back(d);
    return r;
}

struct OracleReport {
    std::vector<std::vector<int>> satisfyingSets;
    std::vector<std::vector<int>> stableSets;
    std::vector<bool> reiterConfirmed;  // per stable set
    bool agree = true;
    std::string firstCounterexample;
};

namespace oracle_detail {

inline std::string describeSet(const std::vector<int>& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += "d" + std::to_string(s[i] + 1);
    }
    return out + "}";
}

}  // namespace oracle_detail

// Both characterizations side by side: subset-minimal satisfying default
// sets versus subsets whose conclusions reproduce themselves under the
// fixed-point operator and that equal their own generating-default set.
inline OracleReport crossValidate(const DefaultTheory& theory, const OracleLimits& limits = {}) {
    oracle_detail::Context ctx(theory, limits);
    OracleReport report;
    const std::uint32_t total = std::uint32_t{1} << theory.size();
    std::vector<std::vector<int>> reiterSide;
    for (std::uint32_t s = 0; s < total; ++s) {
        const auto set = oracle_detail::maskToSet(s, theory.size());
        if (ctx.satisfying(s)) report.satisfyingSets.push_back(set);
        ReiterResult r = reiterCheck(theory, set, limits);
        if (r.accepted && r.generatingDefaults == set) reiterSide.push_back(set);
        if (ctx.stable(s)) {
            report.stableSets.push_back(set);
            report.reiterConfirmed.push_back(r.accepted);
            if (!r.accepted && report.agree) {
                report.agree = false;
                report.firstCounterexample = "stable default set " +
                                             oracle_detail::describeSet(set) +
                                             " fails the fixed-point check";
            }
        }
    }
    if (report.agree && reiterSide != report.stableSets) {
        report.agree = false;
        const auto& a = reiterSide;
        const auto& b = report.stableSets;
        std::vector<int> witness;
        for (const auto& s : a)
            if (std::find(b.begin(), b.end(), s) == b.end()) {
                witness = s;
                break;
            }
        if (witness.empty())
            for (const auto& s : b)
                if (std::find(a.begin(), a.end(), s) == a.end()) {
                    witness = s;
                    break;
                }
        report.firstCounterexample =
            "characterizations disagree on " + oracle_detail::describeSet(witness);
    }
    return report;
}

}  // namespace defaultdp
