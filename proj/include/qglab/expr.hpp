#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace qg {

/// Small arithmetic expression grammar for coefficient fields:
/// +, -, *, /, ^, sin, cos, exp, abs, variables x and y, parentheses,
/// numeric literals. Parsed once into an AST, evaluated per node.
class Expr {
public:
    static Expr parse(const std::string& text) {
        Parser p(text);
        Expr e;
        e.root_ = p.parse_expr();
        p.skip_ws();
        if (!p.done()) throw std::invalid_argument("expression: trailing input at '" +
                                                   text.substr(p.pos()) + "'");
        return e;
    }

    double eval(double x, double y) const { return root_->eval(x, y); }

private:
    struct Node {
        virtual ~Node() = default;
        virtual double eval(double x, double y) const = 0;
    };
    using NodePtr = std::unique_ptr<Node>;

    struct Constant : Node {
        double v;
        explicit Constant(double v) : v(v) {}
        double eval(double, double) const override { return v; }
    };
    struct Var : Node {
        bool is_x;
        explicit Var(bool is_x) : is_x(is_x) {}
        double eval(double x, double y) const override { return is_x ? x : y; }
    };
    struct Unary : Node {
        char op; // '-', 's'(sin), 'c'(cos), 'e'(exp), 'a'(abs)
        NodePtr a;
        Unary(char op, NodePtr a) : op(op), a(std::move(a)) {}
        double eval(double x, double y) const override {
            const double v = a->eval(x, y);
            switch (op) {
                case '-': return -v;
                case 's': return std::sin(v);
                case 'c': return std::cos(v);
                case 'e': return std::exp(v);
                default: return std::abs(v);
            }
        }
    };
    struct Binary : Node {
        char op;
        NodePtr a, b;
        Binary(char op, NodePtr a, NodePtr b) : op(op), a(std::move(a)), b(std::move(b)) {}
        double eval(double x, double y) const override {
            const double l = a->eval(x, y), r = b->eval(x, y);
            switch (op) {
                case '+': return l + r;
                case '-': return l - r;
                case '*': return l * r;
                case '/': return l / r;
                default: return std::pow(l, r);
            }
        }
    };

    class Parser {
    public:
        explicit Parser(const std::string& s) : s_(s) {}

        NodePtr parse_expr() {
            NodePtr left = parse_term();
            while (true) {
                skip_ws();
                if (peek() == '+' || peek() == '-') {
                    const char op = take();
                    left = std::make_unique<Binary>(op, std::move(left), parse_term());
                } else {
                    return left;
                }
            }
        }

        void skip_ws() {
            while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
        }
        bool done() const { return i_ >= s_.size(); }
        size_t pos() const { return i_; }

    private:
        NodePtr parse_term() {
            NodePtr left = parse_factor();
            while (true) {
                skip_ws();
                if (peek() == '*' || peek() == '/') {
                    const char op = take();
                    left = std::make_unique<Binary>(op, std::move(left), parse_factor());
                } else {
                    return left;
                }
            }
        }

        NodePtr parse_factor() {
            // unary minus binds looser than '^': -x^2 is -(x^2)
            skip_ws();
            if (peek() == '-') {
                take();
                return std::make_unique<Unary>('-', parse_factor());
            }
            if (peek() == '+') {
                take();
                return parse_factor();
            }
            NodePtr base = parse_primary();
            skip_ws();
            if (peek() == '^') {
                take();
                return std::make_unique<Binary>('^', std::move(base), parse_factor());
            }
            return base;
        }

        NodePtr parse_primary() {
            skip_ws();
            const char c = peek();
            if (c == '(') {
                take();
                NodePtr e = parse_expr();
                expect(')');
                return e;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
            throw std::invalid_argument("expression: unexpected character '" +
                                        std::string(1, c) + "'");
        }

        NodePtr parse_number() {
            size_t end = 0;
            double v;
            try {
                v = std::stod(s_.substr(i_), &end);
            } catch (const std::exception&) {
                throw std::invalid_argument("expression: bad numeric literal");
            }
            i_ += end;
            return std::make_unique<Constant>(v);
        }

        NodePtr parse_name() {
            std::string name;
            while (i_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[i_])))
                name += s_[i_++];
            if (name == "x") return std::make_unique<Var>(true);
            if (name == "y") return std::make_unique<Var>(false);
            if (name == "pi") return std::make_unique<Constant>(3.14159265358979323846);
            char op = 0;
            if (name == "sin") op = 's';
            else if (name == "cos") op = 'c';
            else if (name == "exp") op = 'e';
            else if (name == "abs") op = 'a';
            if (op == 0)
                throw std::invalid_argument("expression: unknown name '" + name + "'");
            expect('(');
            NodePtr arg = parse_expr();
            expect(')');
            return std::make_unique<Unary>(op, std::move(arg));
        }

        char peek() {
            skip_ws();
            return i_ < s_.size() ? s_[i_] : '\0';
        }
        char take() { return s_[i_++]; }
        void expect(char c) {
            skip_ws();
            if (peek() != c)
                throw std::invalid_argument("expression: expected '" + std::string(1, c) + "'");
            take();
        }

        const std::string& s_;
        size_t i_ = 0;
    };

    std::shared_ptr<const Node> root_;

    // shared_ptr so Expr is copyable; the AST is immutable after parse
    friend class Parser;
};

} // namespace qg
