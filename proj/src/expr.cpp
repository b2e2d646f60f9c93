#include "finsler/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace finsler::expr {

namespace {

struct Parser {
    std::string_view src;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        int line = 1, col = 1;
        for (std::size_t i = 0; i < at && i < src.size(); ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), " at line %d column %d", line, col);
        throw ParseError(msg + buf, at, line, col);
    }

    void skip_ws() {
        while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t' || src[pos] == '\n' ||
                                    src[pos] == '\r'))
            ++pos;
    }

    bool peek(char c) {
        skip_ws();
        return pos < src.size() && src[pos] == c;
    }

    bool accept(char c) {
        if (peek(c)) {
            ++pos;
            return true;
        }
        return false;
    }

    NodePtr expression() {
        NodePtr lhs = term();
        for (;;) {
            skip_ws();
            if (pos >= src.size()) break;
            char c = src[pos];
            if (c != '+' && c != '-') break;
            ++pos;
            NodePtr rhs = term();
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::Binary;
            n->op = c;
            n->kids = {lhs, rhs};
            lhs = n;
        }
        return lhs;
    }

    NodePtr term() {
        NodePtr lhs = factor();
        for (;;) {
            skip_ws();
            if (pos >= src.size()) break;
            char c = src[pos];
            if (c != '*' && c != '/') break;
            ++pos;
            NodePtr rhs = factor();
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::Binary;
            n->op = c;
            n->kids = {lhs, rhs};
            lhs = n;
        }
        return lhs;
    }

    NodePtr factor() {
        skip_ws();
        if (accept('-')) {
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::Unary;
            n->op = '-';
            n->kids = {factor()};
            return n;
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        skip_ws();
        if (pos < src.size() && src[pos] == '^') {
            ++pos;
            NodePtr ex = factor();  // right-associative, unary minus allowed in exponents
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::Binary;
            n->op = '^';
            n->kids = {base, ex};
            return n;
        }
        return base;
    }

    NodePtr atom() {
        skip_ws();
        if (pos >= src.size()) fail("unexpected end of expression", pos);
        char c = src[pos];
        if (c == '(') {
            std::size_t open = pos;
            ++pos;
            NodePtr inner = expression();
            if (!accept(')')) fail("missing closing parenthesis for the one opened", open);
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(std::string("unexpected character '") + c + "'", pos);
    }

    NodePtr number() {
        std::size_t start = pos;
        while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
        if (pos < src.size() && src[pos] == '.') {
            ++pos;
            while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
        }
        if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
            std::size_t mark = pos;
            ++pos;
            if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
            if (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
                while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
            } else {
                pos = mark;  // 'e' belongs to something else
            }
        }
        std::string text(src.substr(start, pos - start));
        if (text == ".") fail("malformed number", start);
        char* end = nullptr;
        double v = std::strtod(text.c_str(), &end);
        if (end != text.c_str() + text.size()) fail("malformed number", start);
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Number;
        n->number = v;
        return n;
    }

    NodePtr identifier() {
        std::size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
            ++pos;
        std::string name(src.substr(start, pos - start));

        if (name == "sqrt" || name == "exp" || name == "log" || name == "sin" || name == "cos") {
            if (!accept('(')) fail("function '" + name + "' requires parentheses", pos);
            NodePtr arg = expression();
            if (!accept(')')) fail("missing closing parenthesis in call to '" + name + "'", pos);
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::Call;
            n->func = name;
            n->kids = {arg};
            return n;
        }

        if ((name[0] == 'x' || name[0] == 'y') && name.size() > 1) {
            bool digits = true;
            for (std::size_t i = 1; i < name.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
            if (digits) {
                long idx = std::strtol(name.c_str() + 1, nullptr, 10);
                if (idx >= 1 && idx <= 64) {
                    auto n = std::make_shared<Node>();
                    n->kind = NodeKind::Var;
                    n->is_fiber = (name[0] == 'y');
                    n->index = static_cast<int>(idx) - 1;
                    return n;
                }
            }
        }
        fail("unknown identifier '" + name + "'", start);
    }
};

void unparse_rec(const Node& n, std::string& out) {
    switch (n.kind) {
        case NodeKind::Number: {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", n.number);
            out += buf;
            return;
        }
        case NodeKind::Var: {
            out += n.is_fiber ? 'y' : 'x';
            out += std::to_string(n.index + 1);
            return;
        }
        case NodeKind::Unary:
            out += "(-";
            unparse_rec(*n.kids[0], out);
            out += ')';
            return;
        case NodeKind::Binary:
            out += '(';
            unparse_rec(*n.kids[0], out);
            out += n.op;
            unparse_rec(*n.kids[1], out);
            out += ')';
            return;
        case NodeKind::Call:
            out += n.func;
            out += '(';
            unparse_rec(*n.kids[0], out);
            out += ')';
            return;
    }
}

}  // namespace

NodePtr parse(std::string_view src) {
    Parser p{src};
    p.skip_ws();
    if (p.pos >= src.size()) p.fail("empty expression", 0);
    NodePtr root = p.expression();
    p.skip_ws();
    if (p.pos < src.size()) p.fail("trailing input after expression", p.pos);
    return root;
}

std::string unparse(const Node& node) {
    std::string out;
    unparse_rec(node, out);
    return out;
}

bool equal(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::Number:
            return a.number == b.number;
        case NodeKind::Var:
            return a.is_fiber == b.is_fiber && a.index == b.index;
        case NodeKind::Unary:
            return equal(*a.kids[0], *b.kids[0]);
        case NodeKind::Binary:
            return a.op == b.op && equal(*a.kids[0], *b.kids[0]) && equal(*a.kids[1], *b.kids[1]);
        case NodeKind::Call:
            return a.func == b.func && equal(*a.kids[0], *b.kids[0]);
    }
    return false;
}

int max_x_index(const Node& node) {
    int m = 0;
    if (node.kind == NodeKind::Var && !node.is_fiber) m = node.index + 1;
    for (const auto& k : node.kids) m = std::max(m, max_x_index(*k));
    return m;
}

int max_y_index(const Node& node) {
    int m = 0;
    if (node.kind == NodeKind::Var && node.is_fiber) m = node.index + 1;
    for (const auto& k : node.kids) m = std::max(m, max_y_index(*k));
    return m;
}

jets::Jet eval(const Node& node, std::span<const jets::Jet> xs, std::span<const jets::Jet> ys) {
    using jets::Jet;
    switch (node.kind) {
        case NodeKind::Number:
            return Jet::constant(xs[0].tables(), xs[0].order(), node.number);
        case NodeKind::Var: {
            const auto& pool = node.is_fiber ? ys : xs;
            if (node.index >= static_cast<int>(pool.size()))
                throw std::invalid_argument("expression variable index exceeds dimension");
            return pool[static_cast<std::size_t>(node.index)];
        }
        case NodeKind::Unary:
            return -eval(*node.kids[0], xs, ys);
        case NodeKind::Binary: {
            if (node.op == '^') {
                if (max_x_index(*node.kids[1]) > 0 || max_y_index(*node.kids[1]) > 0)
                    throw std::invalid_argument("exponent must be a constant expression");
                Jet base = eval(*node.kids[0], xs, ys);
                std::vector<double> none;
                double p = eval_value(*node.kids[1], none, none);
                return pow(base, p);
            }
            Jet a = eval(*node.kids[0], xs, ys);
            Jet b = eval(*node.kids[1], xs, ys);
            switch (node.op) {
                case '+': return a + b;
                case '-': return a - b;
                case '*': return a * b;
                case '/': return a / b;
            }
            throw std::logic_error("unreachable operator");
        }
        case NodeKind::Call: {
            Jet a = eval(*node.kids[0], xs, ys);
            if (node.func == "sqrt") return sqrt(a);
            if (node.func == "exp") return exp(a);
            if (node.func == "log") return log(a);
            if (node.func == "sin") return sin(a);
            return cos(a);
        }
    }
    throw std::logic_error("unreachable node kind");
}

double eval_value(const Node& node, std::span<const double> x, std::span<const double> y) {
    switch (node.kind) {
        case NodeKind::Number:
            return node.number;
        case NodeKind::Var: {
            const auto& pool = node.is_fiber ? y : x;
            if (node.index >= static_cast<int>(pool.size()))
                throw std::invalid_argument("expression variable index exceeds dimension");
            return pool[static_cast<std::size_t>(node.index)];
        }
        case NodeKind::Unary:
            return -eval_value(*node.kids[0], x, y);
        case NodeKind::Binary: {
            double a = eval_value(*node.kids[0], x, y);
            double b = eval_value(*node.kids[1], x, y);
            switch (node.op) {
                case '+': return a + b;
                case '-': return a - b;
                case '*': return a * b;
                case '/': return a / b;
                case '^': return std::pow(a, b);
            }
            throw std::logic_error("unreachable operator");
        }
        case NodeKind::Call: {
            double a = eval_value(*node.kids[0], x, y);
            if (node.func == "sqrt") return std::sqrt(a);
            if (node.func == "exp") return std::exp(a);
            if (node.func == "log") return std::log(a);
            if (node.func == "sin") return std::sin(a);
            return std::cos(a);
        }
    }
    throw std::logic_error("unreachable node kind");
}

}  // namespace finsler::expr
