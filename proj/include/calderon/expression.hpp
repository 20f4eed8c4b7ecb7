#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace calderon::expr {

enum class Var { x, y };

struct Node;

/// Immutable scalar field f(x, y) built from a small arithmetic grammar:
///
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | power
///   power  := atom ('^' unary)?
///   atom   := number | x | y | <parameter> | func '(' expr ')' | '(' expr ')'
///   func   := exp | sin | cos | sqrt | log | bump
///
/// `bump(s)` is the smooth compactly supported profile exp(1 - 1/(1-s)) for
/// s < 1 and 0 otherwise; it makes collar conductivities expressible.
/// Named parameters (e.g. `t`) must be bound before evaluation.
///
/// Expressions can be differentiated symbolically, which is how gradients
/// and Laplacians of configured conductivities are obtained.
class Expression {
 public:
  Expression();  // the constant 0

  static Expression parse(std::string_view text, const std::vector<std::string>& parameters = {});
  static Expression constant(double value);
  static Expression variable(Var v);

  double operator()(double x, double y) const;

  Expression derivative(Var v) const;
  Expression laplacian() const;

  /// Replaces a named parameter by a constant.
  Expression bind(std::string_view name, double value) const;

  bool depends_on_position() const;
  bool has_free_parameters() const;
  std::string to_string() const;

  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator/(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a);
  friend Expression pow(const Expression& a, const Expression& b);
  friend Expression exp(const Expression& a);
  friend Expression sin(const Expression& a);
  friend Expression cos(const Expression& a);
  friend Expression sqrt(const Expression& a);
  friend Expression log(const Expression& a);

 private:
  explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  friend struct Builder;

  std::shared_ptr<const Node> root_;
};

}  // namespace calderon::expr
