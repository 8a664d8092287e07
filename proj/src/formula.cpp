#include "mink/formula.hpp"

#include <cctype>
#include <functional>
#include <sstream>

namespace mink {

FormulaPtr mk_var(std::string name) {
    return std::make_shared<Formula>(Formula{Kind::Var, std::move(name), nullptr, nullptr});
}
FormulaPtr mk_true() {
    static FormulaPtr t = std::make_shared<Formula>(Formula{Kind::True, "", nullptr, nullptr});
    return t;
}
FormulaPtr mk_not(FormulaPtr f) {
    return std::make_shared<Formula>(Formula{Kind::Not, "", std::move(f), nullptr});
}
FormulaPtr mk_or(FormulaPtr a, FormulaPtr b) {
    return std::make_shared<Formula>(Formula{Kind::Or, "", std::move(a), std::move(b)});
}
FormulaPtr mk_f(FormulaPtr f) {
    return std::make_shared<Formula>(Formula{Kind::F, "", std::move(f), nullptr});
}
FormulaPtr mk_p(FormulaPtr f) {
    return std::make_shared<Formula>(Formula{Kind::P, "", std::move(f), nullptr});
}

bool equal(const Formula& a, const Formula& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Kind::Var: return a.name == b.name;
        case Kind::True: return true;
        case Kind::Not:
        case Kind::F:
        case Kind::P: return equal(*a.lhs, *b.lhs);
        case Kind::Or: return equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
    }
    return false;
}

std::size_t hash_value(const Formula& f) {
    std::size_t h = static_cast<std::size_t>(f.kind) * 0x9e3779b97f4a7c15ull;
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2); };
    switch (f.kind) {
        case Kind::Var: mix(std::hash<std::string>{}(f.name)); break;
        case Kind::True: break;
        case Kind::Not:
        case Kind::F:
        case Kind::P: mix(hash_value(*f.lhs)); break;
        case Kind::Or:
            mix(hash_value(*f.lhs));
            mix(hash_value(*f.rhs));
            break;
    }
    return h;
}

int node_count(const Formula& f) {
    switch (f.kind) {
        case Kind::Var:
        case Kind::True: return 1;
        case Kind::Not:
        case Kind::F:
        case Kind::P: return 1 + node_count(*f.lhs);
        case Kind::Or: return 1 + node_count(*f.lhs) + node_count(*f.rhs);
    }
    return 1;
}

std::string pretty(const Formula& f) {
    switch (f.kind) {
        case Kind::Var: return f.name;
        case Kind::True: return "true";
        case Kind::Not: return "~" + pretty(*f.lhs);
        case Kind::F: return "F " + pretty(*f.lhs);
        case Kind::P: return "P " + pretty(*f.lhs);
        case Kind::Or: return "(" + pretty(*f.lhs) + " | " + pretty(*f.rhs) + ")";
    }
    return "?";
}

namespace {

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    FormulaPtr run() {
        FormulaPtr f = formula();
        skip_ws();
        if (pos_ != text_.size()) fail("expected end of input");
        return f;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& expected) {
        throw ParseError(pos_, "syntax error at offset " + std::to_string(pos_) +
                                   ": " + expected);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool eat_arrow() {
        skip_ws();
        if (pos_ + 1 < text_.size() && text_[pos_] == '-' && text_[pos_ + 1] == '>') {
            pos_ += 2;
            return true;
        }
        return false;
    }

    // formula := impl
    FormulaPtr formula() { return impl(); }

    // impl := or ("->" impl)?   desugars to ~a | b
    FormulaPtr impl() {
        FormulaPtr a = disj();
        if (eat_arrow()) {
            FormulaPtr b = impl();
            return mk_or(mk_not(a), b);
        }
        return a;
    }

    FormulaPtr disj() {
        FormulaPtr a = conj();
        while (eat('|')) a = mk_or(a, conj());
        return a;
    }

    // a & b desugars to ~(~a | ~b)
    FormulaPtr conj() {
        FormulaPtr a = unary();
        while (eat('&')) {
            FormulaPtr b = unary();
            a = mk_not(mk_or(mk_not(a), mk_not(b)));
        }
        return a;
    }

    FormulaPtr unary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("expected formula");
        char c = text_[pos_];
        if (c == '~') {
            ++pos_;
            return mk_not(unary());
        }
        // F/G/P/H are operators only when not the start of an identifier
        // (identifiers are lowercase, so uppercase letters are always operators).
        if (c == 'F') {
            ++pos_;
            return mk_f(unary());
        }
        if (c == 'P') {
            ++pos_;
            return mk_p(unary());
        }
        if (c == 'G') {  // G a == ~F~a
            ++pos_;
            return mk_not(mk_f(mk_not(unary())));
        }
        if (c == 'H') {  // H a == ~P~a
            ++pos_;
            return mk_not(mk_p(mk_not(unary())));
        }
        return atom();
    }

    FormulaPtr atom() {
        skip_ws();
        if (eat('(')) {
            FormulaPtr f = formula();
            if (!eat(')')) fail("expected ')'");
            return f;
        }
        if (pos_ >= text_.size()) fail("expected atom");
        char c = text_[pos_];
        if (c >= 'a' && c <= 'z') {
            std::size_t start = pos_;
            ++pos_;
            while (pos_ < text_.size()) {
                char d = text_[pos_];
                if ((d >= 'a' && d <= 'z') || (d >= '0' && d <= '9') || d == '_')
                    ++pos_;
                else
                    break;
            }
            std::string id = text_.substr(start, pos_ - start);
            if (id == "true") return mk_true();
            if (id == "false") return mk_not(mk_true());
            return mk_var(std::move(id));
        }
        fail("expected 'true', 'false', identifier, or '('");
    }
};

}  // namespace

FormulaPtr parse(const std::string& text) { return Parser(text).run(); }

FormulaPtr reflexive_rewrite(const FormulaPtr& f) {
    switch (f->kind) {
        case Kind::Var:
        case Kind::True: return f;
        case Kind::Not: return mk_not(reflexive_rewrite(f->lhs));
        case Kind::Or: return mk_or(reflexive_rewrite(f->lhs), reflexive_rewrite(f->rhs));
        case Kind::F: {
            FormulaPtr c = reflexive_rewrite(f->lhs);
            return mk_or(c, mk_f(c));
        }
        case Kind::P: {
            FormulaPtr c = reflexive_rewrite(f->lhs);
            return mk_or(c, mk_p(c));
        }
    }
    return f;
}

FormulaPtr temporal_mirror(const FormulaPtr& f) {
    switch (f->kind) {
        case Kind::Var:
        case Kind::True: return f;
        case Kind::Not: return mk_not(temporal_mirror(f->lhs));
        case Kind::Or: return mk_or(temporal_mirror(f->lhs), temporal_mirror(f->rhs));
        case Kind::F: return mk_p(temporal_mirror(f->lhs));
        case Kind::P: return mk_f(temporal_mirror(f->lhs));
    }
    return f;
}

ClosureTable::ClosureTable(const FormulaPtr& root) {
    std::function<int(const FormulaPtr&)> visit = [&](const FormulaPtr& f) -> int {
        switch (f->kind) {
            case Kind::Var:
            case Kind::True: break;
            case Kind::Not:
            case Kind::F:
            case Kind::P: visit(f->lhs); break;
            case Kind::Or:
                visit(f->lhs);
                visit(f->rhs);
                break;
        }
        auto it = index_.find(f);
        if (it != index_.end()) return it->second;
        int idx = static_cast<int>(subs_.size());
        subs_.push_back(f);
        index_.emplace(f, idx);
        return idx;
    };
    root_sub_ = visit(root);
}

int ClosureTable::index_of(const FormulaPtr& f) const {
    auto it = index_.find(f);
    return it == index_.end() ? -1 : it->second;
}

std::string ClosureTable::entry_name(int e) const {
    std::string s = pretty(sub(entry_sub(e)));
    return entry_positive(e) ? s : "~" + s;
}

}  // namespace mink
