#ifndef WGSPEC_EXPRESSION_HPP
#define WGSPEC_EXPRESSION_HPP

#include <array>
#include <memory>
#include <string>

namespace wgspec {

/// Variables an expression may reference. Arc length s, cross-section
/// coordinates x1,x2, cell coordinates y1,y2, and a generic t.
struct VarBindings {
    double s = 0.0;
    double x1 = 0.0, x2 = 0.0;
    double y1 = 0.0, y2 = 0.0;
    double t = 0.0;

    double get(int slot) const {
        const std::array<double, 6> v{s, x1, x2, y1, y2, t};
        return v[static_cast<size_t>(slot)];
    }
};

namespace detail {
struct ExprNode;
}

/// A parsed closed-form expression over {s, x1, x2, y1, y2, t}, constants and
/// pi, with operators + - * / ^ and functions sin, cos, exp, sqrt, abs,
/// min, max. Evaluation is total on finite inputs; parsing is deterministic
/// with the usual precedence and left associativity (^ binds right).
class Expression {
public:
    Expression() = default;

    double eval(const VarBindings& vars) const;

    /// Symbolic derivative with respect to one variable ("s", "t", ...).
    /// abs/min/max differentiate by branch (subgradient at ties); a
    /// non-constant exponent in ^ is rejected.
    Expression derivative(const std::string& var) const;

    /// True when the expression references the given variable.
    bool depends_on(const std::string& var) const;

    const std::string& text() const { return text_; }
    bool valid() const { return static_cast<bool>(root_); }

private:
    friend Expression parse_expression(const std::string&);
    std::shared_ptr<const detail::ExprNode> root_;
    std::string text_;
};

/// Parses `text` into an Expression. Throws ConfigError with a 1-based
/// character position on malformed input.
Expression parse_expression(const std::string& text);

} // namespace wgspec

#endif
