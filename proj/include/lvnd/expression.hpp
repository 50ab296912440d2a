#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace lvnd {

/// Closed-form coefficient expression over t, x, y.
///
/// Grammar (usual precedence, ^ is right associative):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := ('-' | '+') unary | power
///     power   := primary ('^' unary)?
///     primary := number | name | name '(' expr ')' | '(' expr ')'
///
/// Names are the variables t, x, y, the built-in constant pi, and any named
/// constant supplied at parse time (the CLI binds T, Lx, Ly). Functions: sin,
/// cos, exp, sqrt, abs. Example: "1 + 0.2*sin(2*pi*t/T) + 0.1*cos(pi*x)".
class Expression {
public:
    static Expression parse(const std::string& text, const std::map<std::string, double>& constants = {});

    double operator()(double t, double x, double y = 0.0) const;

    bool depends_on_time() const { return depends_t_; }
    bool depends_on_space() const { return depends_x_; }
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
    bool depends_t_ = false;
    bool depends_x_ = false;
};

}  // namespace lvnd
