#include "lvnd/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

#include "lvnd/error.hpp"

namespace lvnd {

struct Expression::Node {
    enum class Op { Number, VarT, VarX, VarY, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt, Abs };
    Op op = Op::Number;
    double value = 0.0;
    std::unique_ptr<Node> lhs;
    std::unique_ptr<Node> rhs;
};

namespace {

using Node = Expression::Node;
using Op = Node::Op;

double eval(const Node& n, double t, double x, double y) {
    switch (n.op) {
        case Op::Number: return n.value;
        case Op::VarT: return t;
        case Op::VarX: return x;
        case Op::VarY: return y;
        case Op::Add: return eval(*n.lhs, t, x, y) + eval(*n.rhs, t, x, y);
        case Op::Sub: return eval(*n.lhs, t, x, y) - eval(*n.rhs, t, x, y);
        case Op::Mul: return eval(*n.lhs, t, x, y) * eval(*n.rhs, t, x, y);
        case Op::Div: return eval(*n.lhs, t, x, y) / eval(*n.rhs, t, x, y);
        case Op::Pow: return std::pow(eval(*n.lhs, t, x, y), eval(*n.rhs, t, x, y));
        case Op::Neg: return -eval(*n.lhs, t, x, y);
        case Op::Sin: return std::sin(eval(*n.lhs, t, x, y));
        case Op::Cos: return std::cos(eval(*n.lhs, t, x, y));
        case Op::Exp: return std::exp(eval(*n.lhs, t, x, y));
        case Op::Sqrt: return std::sqrt(eval(*n.lhs, t, x, y));
        case Op::Abs: return std::abs(eval(*n.lhs, t, x, y));
    }
    return 0.0;
}

class Parser {
public:
    Parser(const std::string& text, const std::map<std::string, double>& constants)
        : text_(text), constants_(constants) {}

    std::unique_ptr<Node> parse() {
        auto n = expr();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return n;
    }

    bool uses_t = false;
    bool uses_x = false;

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw ValidationError("expression \"" + text_ + "\": " + why + " at column " + std::to_string(pos_ + 1));
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static std::unique_ptr<Node> make(Op op, std::unique_ptr<Node> lhs = nullptr, std::unique_ptr<Node> rhs = nullptr) {
        auto n = std::make_unique<Node>();
        n->op = op;
        n->lhs = std::move(lhs);
        n->rhs = std::move(rhs);
        return n;
    }

    static std::unique_ptr<Node> number(double v) {
        auto n = make(Op::Number);
        n->value = v;
        return n;
    }

    std::unique_ptr<Node> expr() {
        auto n = term();
        for (;;) {
            if (accept('+')) {
                n = make(Op::Add, std::move(n), term());
            } else if (accept('-')) {
                n = make(Op::Sub, std::move(n), term());
            } else {
                return n;
            }
        }
    }

    std::unique_ptr<Node> term() {
        auto n = unary();
        for (;;) {
            if (accept('*')) {
                n = make(Op::Mul, std::move(n), unary());
            } else if (accept('/')) {
                n = make(Op::Div, std::move(n), unary());
            } else {
                return n;
            }
        }
    }

    std::unique_ptr<Node> unary() {
        if (accept('-')) return make(Op::Neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    std::unique_ptr<Node> power() {
        auto base = primary();
        if (accept('^')) return make(Op::Pow, std::move(base), unary());
        return base;
    }

    std::unique_ptr<Node> primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (accept('(')) {
            auto n = expr();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = text_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("malformed number");
            pos_ += static_cast<std::size_t>(end - begin);
            return number(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            const std::string name = text_.substr(start, pos_ - start);
            skip_space();
            if (pos_ < text_.size() && text_[pos_] == '(') {
                Op op;
                if (name == "sin") op = Op::Sin;
                else if (name == "cos") op = Op::Cos;
                else if (name == "exp") op = Op::Exp;
                else if (name == "sqrt") op = Op::Sqrt;
                else if (name == "abs") op = Op::Abs;
                else fail("unknown function '" + name + "'");
                ++pos_;
                auto arg = expr();
                if (!accept(')')) fail("expected ')'");
                return make(op, std::move(arg));
            }
            if (name == "t") {
                uses_t = true;
                return make(Op::VarT);
            }
            if (name == "x") {
                uses_x = true;
                return make(Op::VarX);
            }
            if (name == "y") {
                uses_x = true;
                return make(Op::VarY);
            }
            if (name == "pi") return number(std::numbers::pi);
            if (auto it = constants_.find(name); it != constants_.end()) return number(it->second);
            fail("unknown name '" + name + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& text_;
    const std::map<std::string, double>& constants_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text, const std::map<std::string, double>& constants) {
    Parser p(text, constants);
    Expression e;
    e.text_ = text;
    e.root_ = std::shared_ptr<const Node>(p.parse().release());
    e.depends_t_ = p.uses_t;
    e.depends_x_ = p.uses_x;
    return e;
}

double Expression::operator()(double t, double x, double y) const {
    return eval(*root_, t, x, y);
}

}  // namespace lvnd
