#include "tnodal/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

#include "tnodal/errors.hpp"

namespace tnodal {

struct Expression::Node {
    enum class Op { Constant, Theta, Phi, Add, Sub, Mul, Div, Neg, Sin, Cos };
    Op op = Op::Constant;
    double value = 0.0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;

    double eval(double theta, double phi) const {
        switch (op) {
            case Op::Constant: return value;
            case Op::Theta: return theta;
            case Op::Phi: return phi;
            case Op::Add: return lhs->eval(theta, phi) + rhs->eval(theta, phi);
            case Op::Sub: return lhs->eval(theta, phi) - rhs->eval(theta, phi);
            case Op::Mul: return lhs->eval(theta, phi) * rhs->eval(theta, phi);
            case Op::Div: return lhs->eval(theta, phi) / rhs->eval(theta, phi);
            case Op::Neg: return -lhs->eval(theta, phi);
            case Op::Sin: return std::sin(lhs->eval(theta, phi));
            case Op::Cos: return std::cos(lhs->eval(theta, phi));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double value = 0.0) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    n->value = value;
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse() {
        NodePtr root = sum();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ArgumentError("field formula '" + std::string(text_) + "': " + what + " at offset " +
                            std::to_string(pos_));
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

    NodePtr sum() {
        NodePtr lhs = product();
        for (;;) {
            if (accept('+')) {
                lhs = make(Op::Add, lhs, product());
            } else if (accept('-')) {
                lhs = make(Op::Sub, lhs, product());
            } else {
                return lhs;
            }
        }
    }

    NodePtr product() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) {
                lhs = make(Op::Mul, lhs, unary());
            } else if (accept('/')) {
                lhs = make(Op::Div, lhs, unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Op::Neg, unary());
        if (accept('+')) return unary();
        return primary();
    }

    NodePtr primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        if (accept('(')) {
            NodePtr inner = sum();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
            if (ec != std::errc()) fail("malformed number");
            pos_ = static_cast<std::size_t>(ptr - text_.data());
            return make(Op::Constant, nullptr, nullptr, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            const std::string_view word = text_.substr(start, pos_ - start);
            if (word == "theta") return make(Op::Theta);
            if (word == "phi") return make(Op::Phi);
            if (word == "pi") return make(Op::Constant, nullptr, nullptr, std::numbers::pi);
            if (word == "sin" || word == "cos") {
                if (!accept('(')) fail("expected '(' after " + std::string(word));
                NodePtr arg = sum();
                if (!accept(')')) fail("expected ')'");
                return make(word == "sin" ? Op::Sin : Op::Cos, arg);
            }
            pos_ = start;
            fail("unknown identifier '" + std::string(word) + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text) {
    Expression e;
    e.root_ = Parser(text).parse();
    e.source_ = std::string(text);
    return e;
}

double Expression::operator()(double theta, double phi) const {
    const double v = root_->eval(theta, phi);
    if (!std::isfinite(v)) {
        throw FieldEvaluationError("field formula '" + source_ + "' is not finite at theta=" +
                                   std::to_string(theta) + " phi=" + std::to_string(phi));
    }
    return v;
}

}  // namespace tnodal
