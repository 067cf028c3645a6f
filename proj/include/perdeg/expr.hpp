#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "perdeg/common.hpp"

namespace perdeg {

/// Arithmetic expression over named variables.
///
/// Grammar: + - * / ^ (right associative), unary minus, parentheses, numeric
/// literals, the constants pi and e, and the functions sin cos tan exp log sqrt.
/// Parse errors throw ConfigError with the offending column.
class Expr {
 public:
  struct Node;

  Expr() = default;

  static Expr parse(const std::string& source, const std::vector<std::string>& variables);
  static Expr constant(double value);

  /// values[i] binds variables[i] of the parse call.
  [[nodiscard]] double eval(std::span<const double> values) const;
  /// Symbolic partial derivative with respect to variable index `var`.
  [[nodiscard]] Expr derivative(std::size_t var) const;
  [[nodiscard]] std::string str() const;
  /// True when no variable occurs in the expression.
  [[nodiscard]] bool is_constant() const;
  [[nodiscard]] bool depends_on(std::size_t var) const;

 private:
  explicit Expr(std::shared_ptr<const Node> root, std::vector<std::string> names)
      : root_(std::move(root)), names_(std::move(names)) {}

  std::shared_ptr<const Node> root_;
  std::vector<std::string> names_;
};

/// A vector field given component-wise by expressions in t, x1..xn, eps, mu.
class ExprField {
 public:
  ExprField(const std::vector<std::string>& components, int n);

  [[nodiscard]] int dim() const { return static_cast<int>(components_.size()); }
  [[nodiscard]] Vector eval(double t, const Vector& x, double eps = 0.0, double mu = 0.0) const;
  [[nodiscard]] Matrix jacobian(double t, const Vector& x, double eps = 0.0, double mu = 0.0) const;
  [[nodiscard]] const std::vector<std::string>& sources() const { return sources_; }

  /// Variable order used for binding: t, x1..xn, eps, mu.
  static std::vector<std::string> variable_names(int n);

 private:
  int n_;
  std::vector<std::string> sources_;
  std::vector<Expr> components_;
  std::vector<std::vector<Expr>> partials_;  // partials_[i][j] = d comp_i / d x_j
};

}  // namespace perdeg
