#include "wgspec/expression.hpp"
#include "wgspec/errors.hpp"

#include <cctype>
#include <cmath>
#include <vector>

namespace wgspec {
namespace detail {

enum class Op {
    Const,
    Var,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
    Min,
    Max,
};

struct ExprNode {
    Op op = Op::Const;
    double value = 0.0; // Op::Const
    int var_slot = 0;   // Op::Var, index into VarBindings order
    std::shared_ptr<const ExprNode> a, b;
};

using NodePtr = std::shared_ptr<const ExprNode>;

static NodePtr make_const(double v) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Const;
    n->value = v;
    return n;
}

static NodePtr make_var(int slot) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Var;
    n->var_slot = slot;
    return n;
}

static NodePtr make_node(Op op, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

static double eval_node(const ExprNode& n, const VarBindings& vars) {
    switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return vars.get(n.var_slot);
    case Op::Add: return eval_node(*n.a, vars) + eval_node(*n.b, vars);
    case Op::Sub: return eval_node(*n.a, vars) - eval_node(*n.b, vars);
    case Op::Mul: return eval_node(*n.a, vars) * eval_node(*n.b, vars);
    case Op::Div: return eval_node(*n.a, vars) / eval_node(*n.b, vars);
    case Op::Pow: return std::pow(eval_node(*n.a, vars), eval_node(*n.b, vars));
    case Op::Neg: return -eval_node(*n.a, vars);
    case Op::Sin: return std::sin(eval_node(*n.a, vars));
    case Op::Cos: return std::cos(eval_node(*n.a, vars));
    case Op::Exp: return std::exp(eval_node(*n.a, vars));
    case Op::Sqrt: return std::sqrt(eval_node(*n.a, vars));
    case Op::Abs: return std::abs(eval_node(*n.a, vars));
    case Op::Min: return std::min(eval_node(*n.a, vars), eval_node(*n.b, vars));
    case Op::Max: return std::max(eval_node(*n.a, vars), eval_node(*n.b, vars));
    }
    return 0.0;
}

static bool node_depends(const ExprNode& n, int slot) {
    switch (n.op) {
    case Op::Const: return false;
    case Op::Var: return n.var_slot == slot;
    default:
        if (n.a && node_depends(*n.a, slot)) return true;
        if (n.b && node_depends(*n.b, slot)) return true;
        return false;
    }
}

// d/dvar. min/max/abs use the branch taken; Pow requires a var-free exponent.
static NodePtr diff_node(const NodePtr& n, int slot) {
    switch (n->op) {
    case Op::Const: return make_const(0.0);
    case Op::Var: return make_const(n->var_slot == slot ? 1.0 : 0.0);
    case Op::Add: return make_node(Op::Add, diff_node(n->a, slot), diff_node(n->b, slot));
    case Op::Sub: return make_node(Op::Sub, diff_node(n->a, slot), diff_node(n->b, slot));
    case Op::Mul:
        return make_node(Op::Add, make_node(Op::Mul, diff_node(n->a, slot), n->b),
                         make_node(Op::Mul, n->a, diff_node(n->b, slot)));
    case Op::Div:
        // (u/v)' = (u'v - uv')/v^2
        return make_node(
            Op::Div,
            make_node(Op::Sub, make_node(Op::Mul, diff_node(n->a, slot), n->b),
                      make_node(Op::Mul, n->a, diff_node(n->b, slot))),
            make_node(Op::Mul, n->b, n->b));
    case Op::Pow: {
        if (node_depends(*n->b, slot))
            throw ConfigError("cli", "cannot differentiate u^v with variable exponent: use exp(v*...)");
        // (u^c)' = c*u^(c-1)*u'
        auto cm1 = make_node(Op::Sub, n->b, make_const(1.0));
        return make_node(Op::Mul, n->b,
                         make_node(Op::Mul, make_node(Op::Pow, n->a, cm1), diff_node(n->a, slot)));
    }
    case Op::Neg: return make_node(Op::Neg, diff_node(n->a, slot));
    case Op::Sin: return make_node(Op::Mul, make_node(Op::Cos, n->a), diff_node(n->a, slot));
    case Op::Cos:
        return make_node(Op::Neg, make_node(Op::Mul, make_node(Op::Sin, n->a), diff_node(n->a, slot)));
    case Op::Exp: return make_node(Op::Mul, make_node(Op::Exp, n->a), diff_node(n->a, slot));
    case Op::Sqrt:
        return make_node(Op::Div, diff_node(n->a, slot),
                         make_node(Op::Mul, make_const(2.0), make_node(Op::Sqrt, n->a)));
    case Op::Abs: {
        // sign(u) * u', via u/|u|
        auto sgn = make_node(Op::Div, n->a, make_node(Op::Abs, n->a));
        return make_node(Op::Mul, sgn, diff_node(n->a, slot));
    }
    case Op::Min:
    case Op::Max: {
        // branch selection: min(a,b)' = a<=b ? a' : b'. Encoded by keeping
        // the selector: d(min) = min'(a,b) is not expressible without a
        // conditional, so build  (a<=b)a' + (a>b)b'  through min/max of
        // 0/1 indicator is awkward; delegate to a dedicated node pair:
        // 0.5*(a'+b') - 0.5*sign(a-b)*(a'-b') gives the min branch,
        // 0.5*(a'+b') + 0.5*sign(a-b)*(a'-b') the max branch.
        auto da = diff_node(n->a, slot);
        auto db = diff_node(n->b, slot);
        auto half_sum = make_node(Op::Mul, make_const(0.5), make_node(Op::Add, da, db));
        auto amb = make_node(Op::Sub, n->a, n->b);
        auto sgn = make_node(Op::Div, amb, make_node(Op::Abs, amb));
        auto half_dif =
            make_node(Op::Mul, make_const(0.5), make_node(Op::Mul, sgn, make_node(Op::Sub, da, db)));
        return make_node(n->op == Op::Min ? Op::Sub : Op::Add, half_sum, half_dif);
    }
    }
    return make_const(0.0);
}

// --- recursive-descent parser -------------------------------------------

struct Parser {
    const std::string& src;
    size_t pos = 0;

    explicit Parser(const std::string& s) : src(s) {}

    [[noreturn]] void fail(const std::string& msg, size_t at) const {
        throw ConfigError("cli",
                          "expression parse error at position " + std::to_string(at + 1) + ": " + msg);
    }

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos < src.size() ? src[pos] : '\0';
    }

    NodePtr parse_sum() {
        auto lhs = parse_product();
        for (;;) {
            if (eat('+'))
                lhs = make_node(Op::Add, lhs, parse_product());
            else if (eat('-'))
                lhs = make_node(Op::Sub, lhs, parse_product());
            else
                return lhs;
        }
    }

    NodePtr parse_product() {
        auto lhs = parse_unary();
        for (;;) {
            if (eat('*'))
                lhs = make_node(Op::Mul, lhs, parse_unary());
            else if (eat('/'))
                lhs = make_node(Op::Div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    NodePtr parse_unary() {
        if (eat('-')) return make_node(Op::Neg, parse_unary());
        if (eat('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        auto base = parse_atom();
        if (eat('^')) {
            // right associative, and -x^2 parses as -(x^2) by the call chain
            auto expo = parse_unary();
            return make_node(Op::Pow, base, expo);
        }
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= src.size()) fail("unexpected end of expression", pos);
        const char c = src[pos];

        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();

        if (c == '(') {
            ++pos;
            auto inner = parse_sum();
            if (!eat(')')) fail("expected ')'", pos);
            return inner;
        }
        fail(std::string("unexpected character '") + c + "'", pos);
    }

    NodePtr parse_number() {
        size_t start = pos;
        size_t idx = 0;
        double v = 0.0;
        try {
            v = std::stod(src.substr(start), &idx);
        } catch (const std::exception&) {
            fail("malformed number", start);
        }
        pos = start + idx;
        return make_const(v);
    }

    NodePtr parse_ident() {
        size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
            ++pos;
        const std::string name = src.substr(start, pos - start);

        static const std::vector<std::string> var_names{"s", "x1", "x2", "y1", "y2", "t"};
        for (size_t i = 0; i < var_names.size(); ++i)
            if (name == var_names[i]) return make_var(static_cast<int>(i));

        if (name == "pi") return make_const(M_PI);

        Op fop;
        if (name == "sin")
            fop = Op::Sin;
        else if (name == "cos")
            fop = Op::Cos;
        else if (name == "exp")
            fop = Op::Exp;
        else if (name == "sqrt")
            fop = Op::Sqrt;
        else if (name == "abs")
            fop = Op::Abs;
        else if (name == "min")
            fop = Op::Min;
        else if (name == "max")
            fop = Op::Max;
        else
            fail("unknown identifier '" + name + "'", start);

        if (!eat('(')) fail("expected '(' after function name", pos);
        auto a = parse_sum();
        if (fop == Op::Min || fop == Op::Max) {
            if (!eat(',')) fail("expected ',' in two-argument function", pos);
            auto b = parse_sum();
            if (!eat(')')) fail("expected ')'", pos);
            return make_node(fop, a, b);
        }
        if (!eat(')')) fail("expected ')'", pos);
        return make_node(fop, a);
    }
};

static int var_slot_of(const std::string& var) {
    static const std::vector<std::string> var_names{"s", "x1", "x2", "y1", "y2", "t"};
    for (size_t i = 0; i < var_names.size(); ++i)
        if (var == var_names[i]) return static_cast<int>(i);
    throw ConfigError("cli", "unknown variable '" + var + "'");
}

} // namespace detail

double Expression::eval(const VarBindings& vars) const {
    if (!root_) throw ConfigError("cli", "evaluating an empty expression");
    return detail::eval_node(*root_, vars);
}

Expression Expression::derivative(const std::string& var) const {
    if (!root_) throw ConfigError("cli", "differentiating an empty expression");
    Expression d;
    d.root_ = detail::diff_node(root_, detail::var_slot_of(var));
    d.text_ = "d/d" + var + "(" + text_ + ")";
    return d;
}

bool Expression::depends_on(const std::string& var) const {
    return root_ && detail::node_depends(*root_, detail::var_slot_of(var));
}

Expression parse_expression(const std::string& text) {
    detail::Parser p(text);
    Expression e;
    e.root_ = p.parse_sum();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input", p.pos);
    e.text_ = text;
    return e;
}

} // namespace wgspec
