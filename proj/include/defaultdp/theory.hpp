#pragma once

#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "defaultdp/formula.hpp"
#include "defaultdp/graph.hpp"

namespace defaultdp {

class TheoryParseError : public std::runtime_error {
public:
    TheoryParseError(const std::string& msg, int line)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// Default rule (prerequisite : justification / conclusion). The index is
// the rule's position in its theory.
struct Default {
    Formula prerequisite;
    Formula justification;
    Formula conclusion;
    int index = -1;
};

inline const Formula& alpha(const Default& d) { return d.prerequisite; }
inline const Formula& beta(const Default& d) { return d.justification; }
inline const Formula& gamma(const Default& d) { return d.conclusion; }

// Render as "P : J / C".
inline std::string renderDefault(const Default& d) {
    return d.prerequisite.str() + " : " + d.justification.str() + " / " + d.conclusion.str();
}

// Ordered set of default rules with an empty knowledge base; facts are
// normalized into rules up front. Immutable after construction.
class DefaultTheory {
public:
    DefaultTheory() = default;

    explicit DefaultTheory(std::vector<Default> defaults) : defaults_(std::move(defaults)) {
        std::set<std::string> names;
        for (std::size_t i = 0; i < defaults_.size(); ++i) {
            defaults_[i].index = static_cast<int>(i);
            defaults_[i].prerequisite.collectVariables(names);
            defaults_[i].justification.collectVariables(names);
            defaults_[i].conclusion.collectVariables(names);
        }
        variables_ = Universe(names);
    }

    const std::vector<Default>& defaults() const { return defaults_; }
    const Default& defaultAt(int index) const { return defaults_.at(static_cast<std::size_t>(index)); }
    int size() const { return static_cast<int>(defaults_.size()); }
    bool empty() const { return defaults_.empty(); }

    const Universe& variables() const { return variables_; }

private:
    std::vector<Default> defaults_;
    Universe variables_;
};

// Turns knowledge-base formulas into rules (T : T / w) prepended, in fact
// order, to the given rules; the result has an empty knowledge base.
inline DefaultTheory normalizeKnowledgeBase(const std::vector<Formula>& facts,
                                            const DefaultTheory& theory) {
    std::vector<Default> rules;
    rules.reserve(facts.size() + theory.defaults().size());
    for (const Formula& w : facts)
        rules.push_back(Default{Formula::top(), Formula::top(), w});
    for (const Default& d : theory.defaults()) rules.push_back(d);
    return DefaultTheory(std::move(rules));
}

// Line-oriented theory files: '%' starts a comment, statements end with
// '.'. Statements are either
//   [default[:]] P : J / C .
//   fact[:] F .
// where P, J, C, F use the formula grammar.
inline DefaultTheory parseTheory(std::string_view text) {
    std::vector<Formula> facts;
    std::vector<Default> rules;

    int lineNo = 0;
    std::size_t cursor = 0;
    while (cursor <= text.size()) {
        std::size_t eol = text.find('\n', cursor);
        std::string_view line = text.substr(cursor, eol == std::string_view::npos ? std::string_view::npos
                                                                                  : eol - cursor);
        cursor = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++lineNo;

        if (auto hash = line.find('%'); hash != std::string_view::npos) line = line.substr(0, hash);
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string_view::npos) continue;
        std::size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);

        if (line.back() != '.')
            throw TheoryParseError("statement must end with '.'", lineNo);
        line.remove_suffix(1);

        auto word = [&](std::string_view kw) {
            if (line.substr(0, kw.size()) != kw) return false;
            std::string_view rest = line.substr(kw.size());
            if (!rest.empty() && (std::isalnum(static_cast<unsigned char>(rest.front())) || rest.front() == '_'))
                return false;  // identifier merely starting with the keyword
            line = rest;
            if (auto p = line.find_first_not_of(" \t"); p != std::string_view::npos)
                line = line.substr(p);
            else
                line = {};
            if (!line.empty() && line.front() == ':') {
                line.remove_prefix(1);
            }
            return true;
        };

        try {
            if (word("fact")) {
                facts.push_back(parseFormula(line));
                continue;
            }
            word("default");
            // split "P : J / C" at the top-level ':' and '/'
            int depth = 0;
            std::size_t colon = std::string_view::npos, slash = std::string_view::npos;
            for (std::size_t i = 0; i < line.size(); ++i) {
                char c = line[i];
                if (c == '(') ++depth;
                else if (c == ')') --depth;
                else if (depth == 0 && c == ':' && colon == std::string_view::npos) colon = i;
                else if (depth == 0 && c == '/' && colon != std::string_view::npos &&
                         slash == std::string_view::npos)
                    slash = i;
            }
            if (colon == std::string_view::npos || slash == std::string_view::npos)
                throw TheoryParseError("expected 'P : J / C'", lineNo);
            Default d;
            d.prerequisite = parseFormula(line.substr(0, colon));
            d.justification = parseFormula(line.substr(colon + 1, slash - colon - 1));
            d.conclusion = parseFormula(line.substr(slash + 1));
            rules.push_back(std::move(d));
        } catch (const FormulaParseError& err) {
            throw TheoryParseError(err.what(), lineNo);
        }
    }

    return normalizeKnowledgeBase(facts, DefaultTheory(std::move(rules)));
}

// Semi-primal graph: vertices are the theory's variables and defaults;
// each rule part's variables form a clique together with the rule vertex.
inline Graph semiPrimalGraph(const DefaultTheory& theory) {
    Graph g(theory.variables().size(), theory.size());
    for (const Default& d : theory.defaults()) {
        const int dv = g.vertexOfDefault(d.index);
        for (const Formula* part : {&d.prerequisite, &d.justification, &d.conclusion}) {
            std::set<std::string> names;
            part->collectVariables(names);
            std::vector<int> ids;
            ids.reserve(names.size());
            for (const auto& n : names) ids.push_back(theory.variables().indexOf(n));
            for (std::size_t i = 0; i < ids.size(); ++i) {
                g.addEdge(dv, ids[i]);
                for (std::size_t j = i + 1; j < ids.size(); ++j) g.addEdge(ids[i], ids[j]);
            }
        }
    }
    return g;
}

}  // namespace defaultdp
