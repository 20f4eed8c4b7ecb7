#include "calderon/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numbers>
#include <cmath>
#include <sstream>

#include "calderon/error.hpp"

namespace calderon::expr {

enum class Op { constant, x, y, param, add, sub, mul, div, pow, neg, exp, sin, cos, sqrt, log, bump };

struct Node {
  Op op = Op::constant;
  double value = 0.0;
  int order = 0;  // derivative order, bump only
  std::string name;
  std::shared_ptr<const Node> a, b;
};

using NodePtr = std::shared_ptr<const Node>;

namespace {

double bump_profile(int order, double s) {
  if (s >= 1.0) return 0.0;
  const double w = 1.0 / (1.0 - s);
  const double base = std::exp(1.0 - w);
  if (base == 0.0) return 0.0;
  switch (order) {
    case 0: return base;
    case 1: return -base * w * w;
    case 2: return base * (std::pow(w, 4) - 2.0 * std::pow(w, 3));
    case 3: return base * (-std::pow(w, 6) + 6.0 * std::pow(w, 5) - 6.0 * std::pow(w, 4));
    default: fail(ErrorKind::capability, "bump profile derivatives above order 3 are not available");
  }
}

bool is_const(const NodePtr& n) { return n->op == Op::constant; }
bool is_value(const NodePtr& n, double v) { return is_const(n) && n->value == v; }

NodePtr leaf(double v) {
  auto n = std::make_shared<Node>();
  n->value = v;
  return n;
}

NodePtr unary(Op op, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  return n;
}

NodePtr binary(Op op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

double apply(Op op, double a, double b, int order) {
  switch (op) {
    case Op::add: return a + b;
    case Op::sub: return a - b;
    case Op::mul: return a * b;
    case Op::div: return a / b;
    case Op::pow: return std::pow(a, b);
    case Op::neg: return -a;
    case Op::exp: return std::exp(a);
    case Op::sin: return std::sin(a);
    case Op::cos: return std::cos(a);
    case Op::sqrt: return std::sqrt(a);
    case Op::log: return std::log(a);
    case Op::bump: return bump_profile(order, a);
    default: return 0.0;
  }
}

// Constructors with constant folding and the usual identities; derivative
// trees stay small enough to evaluate per quadrature point.
NodePtr add(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return leaf(a->value + b->value);
  if (is_value(a, 0.0)) return b;
  if (is_value(b, 0.0)) return a;
  return binary(Op::add, std::move(a), std::move(b));
}

NodePtr neg(NodePtr a) {
  if (is_const(a)) return leaf(-a->value);
  if (a->op == Op::neg) return a->a;
  return unary(Op::neg, std::move(a));
}

NodePtr sub(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return leaf(a->value - b->value);
  if (is_value(b, 0.0)) return a;
  if (is_value(a, 0.0)) return neg(std::move(b));
  return binary(Op::sub, std::move(a), std::move(b));
}

NodePtr mul(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return leaf(a->value * b->value);
  if (is_value(a, 0.0) || is_value(b, 0.0)) return leaf(0.0);
  if (is_value(a, 1.0)) return b;
  if (is_value(b, 1.0)) return a;
  return binary(Op::mul, std::move(a), std::move(b));
}

NodePtr div(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return leaf(a->value / b->value);
  if (is_value(a, 0.0)) return leaf(0.0);
  if (is_value(b, 1.0)) return a;
  return binary(Op::div, std::move(a), std::move(b));
}

NodePtr power(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return leaf(std::pow(a->value, b->value));
  if (is_value(b, 1.0)) return a;
  if (is_value(b, 0.0)) return leaf(1.0);
  return binary(Op::pow, std::move(a), std::move(b));
}

NodePtr func(Op op, NodePtr a, int order = 0) {
  if (is_const(a)) return leaf(apply(op, a->value, 0.0, order));
  auto n = std::make_shared<Node>();
  n->op = op;
  n->order = order;
  n->a = std::move(a);
  return n;
}

bool depends_on(const NodePtr& n, bool position, bool params) {
  switch (n->op) {
    case Op::constant: return false;
    case Op::x:
    case Op::y: return position;
    case Op::param: return params;
    default:
      return (n->a && depends_on(n->a, position, params)) || (n->b && depends_on(n->b, position, params));
  }
}

NodePtr differentiate(const NodePtr& n, Var v) {
  switch (n->op) {
    case Op::constant:
    case Op::param: return leaf(0.0);
    case Op::x: return leaf(v == Var::x ? 1.0 : 0.0);
    case Op::y: return leaf(v == Var::y ? 1.0 : 0.0);
    case Op::add: return add(differentiate(n->a, v), differentiate(n->b, v));
    case Op::sub: return sub(differentiate(n->a, v), differentiate(n->b, v));
    case Op::neg: return neg(differentiate(n->a, v));
    case Op::mul:
      return add(mul(differentiate(n->a, v), n->b), mul(n->a, differentiate(n->b, v)));
    case Op::div: {
      auto num = sub(mul(differentiate(n->a, v), n->b), mul(n->a, differentiate(n->b, v)));
      return div(num, power(n->b, leaf(2.0)));
    }
    case Op::pow: {
      if (!depends_on(n->b, true, false)) {
        // d(a^c) = c a^(c-1) a'
        return mul(mul(n->b, power(n->a, sub(n->b, leaf(1.0)))), differentiate(n->a, v));
      }
      // d(a^b) = a^b (b' log a + b a'/a)
      auto inner = add(mul(differentiate(n->b, v), func(Op::log, n->a)),
                       div(mul(n->b, differentiate(n->a, v)), n->a));
      return mul(n, inner);
    }
    case Op::exp: return mul(n, differentiate(n->a, v));
    case Op::sin: return mul(func(Op::cos, n->a), differentiate(n->a, v));
    case Op::cos: return neg(mul(func(Op::sin, n->a), differentiate(n->a, v)));
    case Op::sqrt: return div(differentiate(n->a, v), mul(leaf(2.0), n));
    case Op::log: return div(differentiate(n->a, v), n->a);
    case Op::bump:
      if (n->order >= 3) fail(ErrorKind::capability, "bump(s) is differentiable symbolically up to order 3");
      return mul(func(Op::bump, n->a, n->order + 1), differentiate(n->a, v));
  }
  return leaf(0.0);
}

NodePtr substitute(const NodePtr& n, std::string_view name, double value) {
  if (n->op == Op::param) return n->name == name ? leaf(value) : n;
  if (!n->a) return n;
  auto a = substitute(n->a, name, value);
  auto b = n->b ? substitute(n->b, name, value) : nullptr;
  switch (n->op) {
    case Op::add: return add(a, b);
    case Op::sub: return sub(a, b);
    case Op::mul: return mul(a, b);
    case Op::div: return div(a, b);
    case Op::pow: return power(a, b);
    case Op::neg: return neg(a);
    default: return func(n->op, a, n->order);
  }
}

double evaluate(const Node& n, double x, double y) {
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::x: return x;
    case Op::y: return y;
    case Op::param: fail(ErrorKind::config, "parameter '" + n.name + "' is not bound");
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
    case Op::pow: return apply(n.op, evaluate(*n.a, x, y), evaluate(*n.b, x, y), 0);
    default: return apply(n.op, evaluate(*n.a, x, y), 0.0, n.order);
  }
}

void print(const Node& n, std::ostream& os) {
  auto bin = [&](const char* sym) {
    os << '(';
    print(*n.a, os);
    os << sym;
    print(*n.b, os);
    os << ')';
  };
  auto call = [&](const char* fn) {
    os << fn << '(';
    print(*n.a, os);
    os << ')';
  };
  switch (n.op) {
    case Op::constant: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << n.value;
      os << (n.value < 0 ? "(" + tmp.str() + ")" : tmp.str());
      break;
    }
    case Op::x: os << 'x'; break;
    case Op::y: os << 'y'; break;
    case Op::param: os << n.name; break;
    case Op::add: bin("+"); break;
    case Op::sub: bin("-"); break;
    case Op::mul: bin("*"); break;
    case Op::div: bin("/"); break;
    case Op::pow: bin("^"); break;
    case Op::neg: call("-"); break;
    case Op::exp: call("exp"); break;
    case Op::sin: call("sin"); break;
    case Op::cos: call("cos"); break;
    case Op::sqrt: call("sqrt"); break;
    case Op::log: call("log"); break;
    case Op::bump:
      if (n.order == 0) {
        call("bump");
      } else {
        os << "bump_d" << n.order << '(';
        print(*n.a, os);
        os << ')';
      }
      break;
  }
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& params) : text_(text), params_(params) {}

  NodePtr parse() {
    auto n = expression();
    skip();
    if (pos_ != text_.size()) error("unexpected '" + std::string(1, text_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void error(const std::string& msg) const {
    fail(ErrorKind::parse, msg + " at offset " + std::to_string(pos_) + " in \"" + std::string(text_) + "\"");
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expression() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = add(lhs, term());
      } else if (accept('-')) {
        lhs = sub(lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = unary_expr();
    for (;;) {
      if (accept('*')) {
        lhs = mul(lhs, unary_expr());
      } else if (accept('/')) {
        lhs = div(lhs, unary_expr());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary_expr() {
    if (accept('-')) return neg(unary_expr());
    if (accept('+')) return unary_expr();
    return power_expr();
  }

  NodePtr power_expr() {
    auto base = atom();
    if (accept('^')) return power(base, unary_expr());
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= text_.size()) error("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = expression();
      if (!accept(')')) error("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    error("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    double value = 0.0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc()) error("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return leaf(value);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (name == "x") return unary(Op::x, nullptr);
    if (name == "y") return unary(Op::y, nullptr);
    if (name == "pi") return leaf(std::numbers::pi);
    static const std::pair<const char*, Op> functions[] = {
        {"exp", Op::exp}, {"sin", Op::sin}, {"cos", Op::cos},
        {"sqrt", Op::sqrt}, {"log", Op::log}, {"bump", Op::bump}};
    for (const auto& [fn, op] : functions) {
      if (name == fn) {
        if (!accept('(')) error("expected '(' after " + name);
        auto arg = expression();
        if (!accept(')')) error("expected ')' closing " + name);
        return func(op, arg);
      }
    }
    if (std::find(params_.begin(), params_.end(), name) != params_.end()) {
      auto n = std::make_shared<Node>();
      n->op = Op::param;
      n->name = name;
      return n;
    }
    pos_ = start;
    error("unknown identifier '" + name + "'");
  }

  std::string_view text_;
  const std::vector<std::string>& params_;
  std::size_t pos_ = 0;
};

}  // namespace

struct Builder {
  static Expression wrap(NodePtr n) { return Expression(std::move(n)); }
  static const NodePtr& root(const Expression& e) { return e.root_; }
};

Expression::Expression() : root_(leaf(0.0)) {}

Expression Expression::parse(std::string_view text, const std::vector<std::string>& parameters) {
  return Expression(Parser(text, parameters).parse());
}

Expression Expression::constant(double value) { return Expression(leaf(value)); }

Expression Expression::variable(Var v) {
  return Expression(unary(v == Var::x ? Op::x : Op::y, nullptr));
}

double Expression::operator()(double x, double y) const { return evaluate(*root_, x, y); }

Expression Expression::derivative(Var v) const { return Expression(differentiate(root_, v)); }

Expression Expression::laplacian() const {
  return derivative(Var::x).derivative(Var::x) + derivative(Var::y).derivative(Var::y);
}

Expression Expression::bind(std::string_view name, double value) const {
  return Expression(substitute(root_, name, value));
}

bool Expression::depends_on_position() const { return depends_on(root_, true, false); }
bool Expression::has_free_parameters() const { return depends_on(root_, false, true); }

std::string Expression::to_string() const {
  std::ostringstream os;
  print(*root_, os);
  return os.str();
}

Expression operator+(const Expression& a, const Expression& b) { return Builder::wrap(add(a.root_, b.root_)); }
Expression operator-(const Expression& a, const Expression& b) { return Builder::wrap(sub(a.root_, b.root_)); }
Expression operator*(const Expression& a, const Expression& b) { return Builder::wrap(mul(a.root_, b.root_)); }
Expression operator/(const Expression& a, const Expression& b) { return Builder::wrap(div(a.root_, b.root_)); }
Expression operator-(const Expression& a) { return Builder::wrap(neg(a.root_)); }
Expression pow(const Expression& a, const Expression& b) { return Builder::wrap(power(a.root_, b.root_)); }
Expression exp(const Expression& a) { return Builder::wrap(func(Op::exp, a.root_)); }
Expression sin(const Expression& a) { return Builder::wrap(func(Op::sin, a.root_)); }
Expression cos(const Expression& a) { return Builder::wrap(func(Op::cos, a.root_)); }
Expression sqrt(const Expression& a) { return Builder::wrap(func(Op::sqrt, a.root_)); }
Expression log(const Expression& a) { return Builder::wrap(func(Op::log, a.root_)); }

}  // namespace calderon::expr
