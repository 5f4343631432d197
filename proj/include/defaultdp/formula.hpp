#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "defaultdp/varset.hpp"

namespace defaultdp {

class FormulaParseError : public std::runtime_error {
public:
    FormulaParseError(const std::string& msg, std::size_t position)
        : std::runtime_error(msg + " (at position " + std::to_string(position) + ")"),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

class UnboundVariableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when a truth-table operation would exceed its variable budget.
class ResourceLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Immutable propositional formula over named variables, with native 0-ary
// top/bottom connectives. Copies share structure.
class Formula {
public:
    enum class Kind : std::uint8_t { Top, Bottom, Var, Not, And, Or, Implies, Iff };

    Formula() : Formula(top()) {}

    static Formula top() { return Formula(std::make_shared<Node>(Node{Kind::Top, {}, nullptr, nullptr})); }
    static Formula bottom() { return Formula(std::make_shared<Node>(Node{Kind::Bottom, {}, nullptr, nullptr})); }
    static Formula var(std::string name) {
        assert(!name.empty());
        return Formula(std::make_shared<Node>(Node{Kind::Var, std::move(name), nullptr, nullptr}));
    }
    static Formula neg(Formula f) {
        return Formula(std::make_shared<Node>(Node{Kind::Not, {}, std::move(f.node_), nullptr}));
    }
    static Formula conj(Formula a, Formula b) { return binary(Kind::And, std::move(a), std::move(b)); }
    static Formula disj(Formula a, Formula b) { return binary(Kind::Or, std::move(a), std::move(b)); }
    static Formula implies(Formula a, Formula b) { return binary(Kind::Implies, std::move(a), std::move(b)); }
    static Formula iff(Formula a, Formula b) { return binary(Kind::Iff, std::move(a), std::move(b)); }

    Kind kind() const { return node_->kind; }
    const std::string& name() const {
        assert(kind() == Kind::Var);
        return node_->name;
    }
    Formula child() const {
        assert(kind() == Kind::Not);
        return Formula(node_->a);
    }
    Formula left() const {
        assert(isBinary(kind()));
        return Formula(node_->a);
    }
    Formula right() const {
        assert(isBinary(kind()));
        return Formula(node_->b);
    }

    void collectVariables(std::set<std::string>& out) const {
        switch (kind()) {
        case Kind::Var: out.insert(node_->name); break;
        case Kind::Not: child().collectVariables(out); break;
        case Kind::And:
        case Kind::Or:
        case Kind::Implies:
        case Kind::Iff:
            left().collectVariables(out);
            right().collectVariables(out);
            break;
        default: break;
        }
    }
    std::set<std::string> variables() const {
        std::set<std::string> out;
        collectVariables(out);
        return out;
    }

    bool operator==(const Formula& o) const { return equal(node_.get(), o.node_.get()); }
    bool operator!=(const Formula& o) const { return !(*this == o); }

    // Canonical ASCII rendering; parseFormula(str()) reproduces the AST.
    std::string str() const {
        std::string out;
        print(out, *this, 0);
        return out;
    }

private:
    struct Node {
        Kind kind;
        std::string name;
        std::shared_ptr<const Node> a, b;
    };

    explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) { assert(node_); }

    static Formula binary(Kind k, Formula a, Formula b) {
        return Formula(std::make_shared<Node>(Node{k, {}, std::move(a.node_), std::move(b.node_)}));
    }

    static bool isBinary(Kind k) {
        return k == Kind::And || k == Kind::Or || k == Kind::Implies || k == Kind::Iff;
    }

    static bool equal(const Node* x, const Node* y) {
        if (x == y) return true;
        if (x->kind != y->kind) return false;
        switch (x->kind) {
        case Kind::Top:
        case Kind::Bottom: return true;
        case Kind::Var: return x->name == y->name;
        case Kind::Not: return equal(x->a.get(), y->a.get());
        default: return equal(x->a.get(), y->a.get()) && equal(x->b.get(), y->b.get());
        }
    }

    // Binding strength: higher binds tighter. '->' is right-associative,
    // the other binary connectives associate to the left.
    static int precedence(Kind k) {
        switch (k) {
        case Kind::Iff: return 1;
        case Kind::Implies: return 2;
        case Kind::Or: return 3;
        case Kind::And: return 4;
        case Kind::Not: return 5;
        default: return 6;
        }
    }

    static void print(std::string& out, const Formula& f, int parentPrec) {
        const int prec = precedence(f.kind());
        switch (f.kind()) {
        case Kind::Top: out += 'T'; return;
        case Kind::Bottom: out += 'F'; return;
        case Kind::Var: out += f.name(); return;
        case Kind::Not: {
            const bool parens = prec < parentPrec;
            if (parens) out += '(';
            out += '~';
            print(out, f.child(), prec);
            if (parens) out += ')';
            return;
        }
        default: {
            const bool rightAssoc = f.kind() == Kind::Implies;
            const bool parens = prec < parentPrec;
            if (parens) out += '(';
            print(out, f.left(), rightAssoc ? prec + 1 : prec);
            out += ' ';
            out += opToken(f.kind());
            out += ' ';
            print(out, f.right(), rightAssoc ? prec : prec + 1);
            if (parens) out += ')';
            return;
        }
        }
    }

    static const char* opToken(Kind k) {
        switch (k) {
        case Kind::And: return "&";
        case Kind::Or: return "|";
        case Kind::Implies: return "->";
        default: return "<->";
        }
    }

    std::shared_ptr<const Node> node_;
};

// Recursive-descent parser for the ASCII grammar
//   formula := iff ; iff := imp ("<->" imp)* ; imp := or ("->" or)*  (right-assoc)
//   or := and ("|" and)* ; and := unary ("&" unary)* ; unary := "~" unary | atom
//   atom := IDENT | "T" | "F" | "(" formula ")"
// IDENT = [A-Za-z_][A-Za-z0-9_]*, excluding the constants T and F.
class FormulaParser {
public:
    explicit FormulaParser(std::string_view text) : text_(text) {}

    Formula parse() {
        Formula f = parseIff();
        skipSpace();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return f;
    }

private:
    Formula parseIff() {
        Formula f = parseImp();
        while (tryToken("<->")) f = Formula::iff(f, parseImp());
        return f;
    }
    Formula parseImp() {
        Formula f = parseOr();
        if (tryToken("->")) return Formula::implies(f, parseImp());
        return f;
    }
    Formula parseOr() {
        Formula f = parseAnd();
        while (tryToken("|")) f = Formula::disj(f, parseAnd());
        return f;
    }
    Formula parseAnd() {
        Formula f = parseUnary();
        while (tryToken("&")) f = Formula::conj(f, parseUnary());
        return f;
    }
    Formula parseUnary() {
        skipSpace();
        if (tryToken("~")) return Formula::neg(parseUnary());
        return parseAtom();
    }
    Formula parseAtom() {
        skipSpace();
        if (pos_ >= text_.size()) fail("expected formula");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Formula f = parseIff();
            skipSpace();
            if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
            ++pos_;
            return f;
        }
        if (isIdentStart(c)) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && isIdentChar(text_[pos_])) ++pos_;
            std::string word(text_.substr(start, pos_ - start));
            if (word == "T") return Formula::top();
            if (word == "F") return Formula::bottom();
            return Formula::var(std::move(word));
        }
        fail("expected identifier, constant, or '('");
    }

    static bool isIdentStart(char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
    }
    static bool isIdentChar(char c) { return isIdentStart(c) || (c >= '0' && c <= '9'); }

    void skipSpace() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r' ||
                                       text_[pos_] == '\n'))
            ++pos_;
    }

    bool tryToken(std::string_view tok) {
        skipSpace();
        if (text_.substr(pos_).rfind(tok, 0) != 0) return false;
        // '-' alone is not a token; make sure "->" is not half of "<->".
        pos_ += tok.size();
        return true;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw FormulaParseError(msg, pos_); }

    std::string_view text_;
    std::size_t pos_ = 0;
};

inline Formula parseFormula(std::string_view text) { return FormulaParser(text).parse(); }

// Ordered registry of variable names; index order is lexicographic.
class Universe {
public:
    Universe() = default;
    explicit Universe(const std::set<std::string>& names) : names_(names.begin(), names.end()) {
        if (static_cast<int>(names_.size()) > VarSet::kCapacity)
            throw ResourceLimitError("universe exceeds " + std::to_string(VarSet::kCapacity) +
                                     " variables");
    }

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& nameOf(int idx) const { return names_.at(static_cast<std::size_t>(idx)); }
    const std::vector<std::string>& names() const { return names_; }

    int indexOf(const std::string& name) const {
        auto it = std::lower_bound(names_.begin(), names_.end(), name);
        if (it == names_.end() || *it != name) return -1;
        return static_cast<int>(it - names_.begin());
    }
    bool contains(const std::string& name) const { return indexOf(name) >= 0; }

    bool operator==(const Universe& o) const { return names_ == o.names_; }

private:
    std::vector<std::string> names_;
};

// Truth assignment as the set of variables made true, over an explicit
// universe; everything in the universe outside the set is false.
class Assignment {
public:
    Assignment(const Universe* universe, VarSet trueVars)
        : universe_(universe), trueVars_(trueVars) {
        assert(universe_ != nullptr);
    }

    static Assignment empty(const Universe& u) { return Assignment(&u, {}); }

    static Assignment of(const Universe& u, const std::set<std::string>& trueVars) {
        VarSet bits;
        for (const auto& name : trueVars) {
            int idx = u.indexOf(name);
            if (idx < 0) throw UnboundVariableError("variable '" + name + "' not in universe");
            bits.set(idx);
        }
        return Assignment(&u, bits);
    }

    const Universe& universe() const { return *universe_; }
    VarSet bits() const { return trueVars_; }
    bool isTrue(int idx) const { return trueVars_.test(idx); }

    std::set<std::string> trueNames() const {
        std::set<std::string> out;
        trueVars_.forEach([&](int b) { out.insert(universe_->nameOf(b)); });
        return out;
    }

    bool operator==(const Assignment& o) const {
        return *universe_ == *o.universe_ && trueVars_ == o.trueVars_;
    }

private:
    const Universe* universe_;
    VarSet trueVars_;
};

inline bool evaluate(const Formula& f, const Assignment& theta) {
    switch (f.kind()) {
    case Formula::Kind::Top: return true;
    case Formula::Kind::Bottom: return false;
    case Formula::Kind::Var: {
        int idx = theta.universe().indexOf(f.name());
        if (idx < 0) throw UnboundVariableError("variable '" + f.name() + "' not in universe");
        return theta.isTrue(idx);
    }
    case Formula::Kind::Not: return !evaluate(f.child(), theta);
    case Formula::Kind::And: return evaluate(f.left(), theta) && evaluate(f.right(), theta);
    case Formula::Kind::Or: return evaluate(f.left(), theta) || evaluate(f.right(), theta);
    case Formula::Kind::Implies: return !evaluate(f.left(), theta) || evaluate(f.right(), theta);
    default: return evaluate(f.left(), theta) == evaluate(f.right(), theta);
    }
}

// Formula with variables resolved to universe indices, evaluated directly
// against VarSet bit patterns. Postfix program, no allocation per call.
class CompiledFormula {
public:
    CompiledFormula() { prog_.push_back({Op::Const1, 0}); }

    CompiledFormula(const Formula& f, const Universe& u) { compile(f, u); }

    bool eval(const VarSet& bits) const {
        bool fixed[kMaxDepth];
        bool* stack = fixed;
        std::vector<char> heap;
        if (prog_.size() > kMaxDepth) {
            heap.resize(prog_.size());
            stack = reinterpret_cast<bool*>(heap.data());
        }
        int top = 0;
        for (const Ins& ins : prog_) {
            switch (ins.op) {
            case Op::Const0: stack[top++] = false; break;
            case Op::Const1: stack[top++] = true; break;
            case Op::Var: stack[top++] = bits.test(ins.var); break;
            case Op::Not: stack[top - 1] = !stack[top - 1]; break;
            case Op::And:
                --top;
                stack[top - 1] = stack[top - 1] && stack[top];
                break;
            case Op::Or:
                --top;
                stack[top - 1] = stack[top - 1] || stack[top];
                break;
            case Op::Implies:
                --top;
                stack[top - 1] = !stack[top - 1] || stack[top];
                break;
            case Op::Iff:
                --top;
                stack[top - 1] = stack[top - 1] == stack[top];
                break;
            }
        }
        assert(top == 1);
        return stack[0];
    }

private:
    enum class Op : std::uint8_t { Const0, Const1, Var, Not, And, Or, Implies, Iff };
    struct Ins {
        Op op;
        int var;
    };
    static constexpr int kMaxDepth = 512;

    void compile(const Formula& f, const Universe& u) {
        switch (f.kind()) {
        case Formula::Kind::Top: prog_.push_back({Op::Const1, 0}); break;
        case Formula::Kind::Bottom: prog_.push_back({Op::Const0, 0}); break;
        case Formula::Kind::Var: {
            int idx = u.indexOf(f.name());
            if (idx < 0) throw UnboundVariableError("variable '" + f.name() + "' not in universe");
            prog_.push_back({Op::Var, idx});
            break;
        }
        case Formula::Kind::Not:
            compile(f.child(), u);
            prog_.push_back({Op::Not, 0});
            break;
        default:
            compile(f.left(), u);
            compile(f.right(), u);
            Op op = f.kind() == Formula::Kind::And       ? Op::And
                    : f.kind() == Formula::Kind::Or      ? Op::Or
                    : f.kind() == Formula::Kind::Implies ? Op::Implies
                                                         : Op::Iff;
            prog_.push_back({op, 0});
            break;
        }
    }

    std::vector<Ins> prog_;
};

struct TruthTableLimits {
    int maxVariables = 24;
};

// Enumerates all assignments over the first n universe indices, calling
// fn(VarSet) until fn returns false. Returns true when enumeration ran to
// completion.
template <class Fn>
bool forEachAssignment(int n, Fn&& fn) {
    assert(n >= 0 && n < 63);
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        if (!fn(VarSet{mask, 0})) return false;
    }
    return true;
}

inline void checkBudget(int n, const TruthTableLimits& limits) {
    if (n > limits.maxVariables)
        throw ResourceLimitError("truth-table enumeration over " + std::to_string(n) +
                                 " variables exceeds cap " + std::to_string(limits.maxVariables));
}

inline std::vector<Assignment> allAssignments(const Universe& u,
                                              const TruthTableLimits& limits = {}) {
    checkBudget(u.size(), limits);
    std::vector<Assignment> out;
    out.reserve(std::size_t{1} << u.size());
    forEachAssignment(u.size(), [&](VarSet bits) {
        out.emplace_back(&u, bits);
        return true;
    });
    return out;
}

// The Mod filter: candidates satisfying f, in candidate order.
inline std::vector<Assignment> models(const Formula& f, const std::vector<Assignment>& candidates) {
    std::vector<Assignment> out;
    for (const auto& theta : candidates)
        if (evaluate(f, theta)) out.push_back(theta);
    return out;
}

inline Universe unionUniverse(const std::vector<Formula>& fs) {
    std::set<std::string> names;
    for (const auto& f : fs) f.collectVariables(names);
    return Universe(names);
}

inline bool isSatisfiable(const std::vector<Formula>& fs, const TruthTableLimits& limits = {}) {
    Universe u = unionUniverse(fs);
    checkBudget(u.size(), limits);
    std::vector<CompiledFormula> compiled;
    compiled.reserve(fs.size());
    for (const auto& f : fs) compiled.emplace_back(f, u);
    bool found = false;
    forEachAssignment(u.size(), [&](VarSet bits) {
        for (const auto& c : compiled)
            if (!c.eval(bits)) return true;
        found = true;
        return false;
    });
    return found;
}

inline bool entails(const std::vector<Formula>& premises, const Formula& conclusion,
                    const TruthTableLimits& limits = {}) {
    std::vector<Formula> all = premises;
    all.push_back(conclusion);
    Universe u = unionUniverse(all);
    checkBudget(u.size(), limits);
    std::vector<CompiledFormula> compiled;
    compiled.reserve(premises.size());
    for (const auto& f : premises) compiled.emplace_back(f, u);
    CompiledFormula goal(conclusion, u);
    bool holds = true;
    forEachAssignment(u.size(), [&](VarSet bits) {
        for (const auto& c : compiled)
            if (!c.eval(bits)) return true;
        if (!goal.eval(bits)) {
            holds = false;
            return false;
        }
        return true;
    });
    return holds;
}

}  // namespace defaultdp
