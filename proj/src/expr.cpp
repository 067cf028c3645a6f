#include "perdeg/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace perdeg {

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Tan, Exp, Log, Sqrt };

struct Expr::Node {
  Op op = Op::Const;
  double value = 0.0;
  std::size_t var = 0;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_const(double v) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

NodePtr make_var(std::size_t i) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Op::Var;
  n->var = i;
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

NodePtr make(Op op, NodePtr a, NodePtr b = nullptr) {
  // Light constant folding keeps derivative trees small.
  if (op == Op::Add) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
  } else if (op == Op::Sub) {
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return make(Op::Neg, b);
  } else if (op == Op::Mul) {
    if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
  } else if (op == Op::Div) {
    if (is_const(a, 0.0)) return make_const(0.0);
    if (is_const(b, 1.0)) return a;
  } else if (op == Op::Neg) {
    if (a->op == Op::Const) return make_const(-a->value);
    if (a->op == Op::Neg) return a->a;
  } else if (op == Op::Pow) {
    if (is_const(b, 0.0)) return make_const(1.0);
    if (is_const(b, 1.0)) return a;
  }
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

double eval_node(const Expr::Node& n, std::span<const double> v) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return v[n.var];
    case Op::Neg: return -eval_node(*n.a, v);
    case Op::Add: return eval_node(*n.a, v) + eval_node(*n.b, v);
    case Op::Sub: return eval_node(*n.a, v) - eval_node(*n.b, v);
    case Op::Mul: return eval_node(*n.a, v) * eval_node(*n.b, v);
    case Op::Div: return eval_node(*n.a, v) / eval_node(*n.b, v);
    case Op::Pow: {
      const double base = eval_node(*n.a, v);
      if (n.b->op == Op::Const && n.b->value == 2.0) {
        return base * base;
      }
      return std::pow(base, eval_node(*n.b, v));
    }
    case Op::Sin: return std::sin(eval_node(*n.a, v));
    case Op::Cos: return std::cos(eval_node(*n.a, v));
    case Op::Tan: return std::tan(eval_node(*n.a, v));
    case Op::Exp: return std::exp(eval_node(*n.a, v));
    case Op::Log: return std::log(eval_node(*n.a, v));
    case Op::Sqrt: return std::sqrt(eval_node(*n.a, v));
  }
  return 0.0;
}

bool depends(const NodePtr& n, std::size_t var) {
  if (!n) return false;
  if (n->op == Op::Var) return n->var == var;
  return depends(n->a, var) || depends(n->b, var);
}

NodePtr diff(const NodePtr& n, std::size_t var) {
  if (!depends(n, var)) {
    return make_const(0.0);
  }
  const NodePtr& a = n->a;
  const NodePtr& b = n->b;
  switch (n->op) {
    case Op::Const: return make_const(0.0);
    case Op::Var: return make_const(1.0);
    case Op::Neg: return make(Op::Neg, diff(a, var));
    case Op::Add: return make(Op::Add, diff(a, var), diff(b, var));
    case Op::Sub: return make(Op::Sub, diff(a, var), diff(b, var));
    case Op::Mul: return make(Op::Add, make(Op::Mul, diff(a, var), b), make(Op::Mul, a, diff(b, var)));
    case Op::Div:
      return make(Op::Div, make(Op::Sub, make(Op::Mul, diff(a, var), b), make(Op::Mul, a, diff(b, var))),
                  make(Op::Mul, b, b));
    case Op::Pow:
      if (!depends(b, var)) {
        // d(a^c) = c a^(c-1) a'
        NodePtr lowered = b->op == Op::Const ? make_const(b->value - 1.0) : make(Op::Sub, b, make_const(1.0));
        return make(Op::Mul, make(Op::Mul, b, make(Op::Pow, a, lowered)), diff(a, var));
      }
      // d(a^b) = a^b (b' log a + b a' / a)
      return make(Op::Mul, n,
                  make(Op::Add, make(Op::Mul, diff(b, var), make(Op::Log, a)),
                       make(Op::Div, make(Op::Mul, b, diff(a, var)), a)));
    case Op::Sin: return make(Op::Mul, make(Op::Cos, a), diff(a, var));
    case Op::Cos: return make(Op::Neg, make(Op::Mul, make(Op::Sin, a), diff(a, var)));
    case Op::Tan:
      return make(Op::Div, diff(a, var), make(Op::Mul, make(Op::Cos, a), make(Op::Cos, a)));
    case Op::Exp: return make(Op::Mul, n, diff(a, var));
    case Op::Log: return make(Op::Div, diff(a, var), a);
    case Op::Sqrt: return make(Op::Div, diff(a, var), make(Op::Mul, make_const(2.0), n));
  }
  return make_const(0.0);
}

void print(const NodePtr& n, const std::vector<std::string>& names, std::ostringstream& out) {
  switch (n->op) {
    case Op::Const: {
      std::ostringstream num;
      num.precision(17);
      num << n->value;
      out << num.str();
      return;
    }
    case Op::Var: out << names[n->var]; return;
    case Op::Neg: out << "(-"; print(n->a, names, out); out << ')'; return;
    case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow: {
      const char sym = n->op == Op::Add ? '+' : n->op == Op::Sub ? '-' : n->op == Op::Mul ? '*' : n->op == Op::Div ? '/' : '^';
      out << '(';
      print(n->a, names, out);
      out << sym;
      print(n->b, names, out);
      out << ')';
      return;
    }
    default: {
      static const char* fn[] = {"sin", "cos", "tan", "exp", "log", "sqrt"};
      out << fn[static_cast<int>(n->op) - static_cast<int>(Op::Sin)] << '(';
      print(n->a, names, out);
      out << ')';
    }
  }
}

class Parser {
 public:
  Parser(const std::string& src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

  NodePtr parse() {
    NodePtr n = expression();
    skip();
    if (pos_ != src_.size()) {
      fail("unexpected trailing input");
    }
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream msg;
    msg << "expression '" << src_ << "': " << what << " at column " << pos_ + 1;
    throw ConfigError(msg.str());
  }

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expression() {
    NodePtr n = term();
    for (;;) {
      if (accept('+')) {
        n = make(Op::Add, n, term());
      } else if (accept('-')) {
        n = make(Op::Sub, n, term());
      } else {
        return n;
      }
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) {
        n = make(Op::Mul, n, unary());
      } else if (accept('/')) {
        n = make(Op::Div, n, unary());
      } else {
        return n;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      return make(Op::Neg, unary());
    }
    if (accept('+')) {
      return unary();
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) {
      return make(Op::Pow, base, unary());
    }
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= src_.size()) {
      fail("unexpected end of input");
    }
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expression();
      if (!accept(')')) {
        fail("expected ')'");
      }
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) {
        fail("malformed number");
      }
      pos_ += static_cast<std::size_t>(end - begin);
      return make_const(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      const std::string name = src_.substr(start, pos_ - start);
      skip();
      if (pos_ < src_.size() && src_[pos_] == '(') {
        ++pos_;
        NodePtr arg = expression();
        if (!accept(')')) {
          fail("expected ')' after function argument");
        }
        return call(name, arg);
      }
      for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i] == name) {
          return make_var(i);
        }
      }
      if (name == "pi") return make_const(kPi);
      if (name == "e") return make_const(std::exp(1.0));
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr call(const std::string& name, NodePtr arg) {
    if (name == "sin") return make(Op::Sin, arg);
    if (name == "cos") return make(Op::Cos, arg);
    if (name == "tan") return make(Op::Tan, arg);
    if (name == "exp") return make(Op::Exp, arg);
    if (name == "log") return make(Op::Log, arg);
    if (name == "sqrt") return make(Op::Sqrt, arg);
    fail("unknown function '" + name + "'");
  }

  const std::string& src_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr Expr::parse(const std::string& source, const std::vector<std::string>& variables) {
  Parser p(source, variables);
  return Expr(p.parse(), variables);
}

Expr Expr::constant(double value) { return Expr(make_const(value), {}); }

double Expr::eval(std::span<const double> values) const {
  if (!root_) {
    throw std::logic_error("evaluating an empty expression");
  }
  return eval_node(*root_, values);
}

Expr Expr::derivative(std::size_t var) const { return Expr(diff(root_, var), names_); }

std::string Expr::str() const {
  std::ostringstream out;
  print(root_, names_, out);
  return out.str();
}

bool Expr::is_constant() const {
  if (!root_) {
    return false;
  }
  for (std::size_t v = 0; v < names_.size(); ++v) {
    if (depends(root_, v)) {
      return false;
    }
  }
  return true;
}

bool Expr::depends_on(std::size_t var) const { return depends(root_, var); }

std::vector<std::string> ExprField::variable_names(int n) {
  std::vector<std::string> names{"t"};
  for (int i = 1; i <= n; ++i) {
    names.push_back("x" + std::to_string(i));
  }
  names.emplace_back("eps");
  names.emplace_back("mu");
  return names;
}

ExprField::ExprField(const std::vector<std::string>& components, int n) : n_(n), sources_(components) {
  if (static_cast<int>(components.size()) != n) {
    throw ConfigError("field has " + std::to_string(components.size()) + " components, expected " +
                      std::to_string(n));
  }
  const auto names = variable_names(n);
  for (const auto& src : components) {
    components_.push_back(Expr::parse(src, names));
  }
  for (const auto& c : components_) {
    std::vector<Expr> row;
    for (int j = 0; j < n; ++j) {
      row.push_back(c.derivative(static_cast<std::size_t>(j) + 1));
    }
    partials_.push_back(std::move(row));
  }
}

Vector ExprField::eval(double t, const Vector& x, double eps, double mu) const {
  std::vector<double> vals(static_cast<std::size_t>(n_) + 3);
  vals[0] = t;
  for (int i = 0; i < n_; ++i) {
    vals[static_cast<std::size_t>(i) + 1] = x[i];
  }
  vals[static_cast<std::size_t>(n_) + 1] = eps;
  vals[static_cast<std::size_t>(n_) + 2] = mu;
  Vector out(n_);
  for (int i = 0; i < n_; ++i) {
    out[i] = components_[static_cast<std::size_t>(i)].eval(vals);
  }
  return out;
}

Matrix ExprField::jacobian(double t, const Vector& x, double eps, double mu) const {
  std::vector<double> vals(static_cast<std::size_t>(n_) + 3);
  vals[0] = t;
  for (int i = 0; i < n_; ++i) {
    vals[static_cast<std::size_t>(i) + 1] = x[i];
  }
  vals[static_cast<std::size_t>(n_) + 1] = eps;
  vals[static_cast<std::size_t>(n_) + 2] = mu;
  Matrix out(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      out(i, j) = partials_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(vals);
    }
  }
  return out;
}

}  // namespace perdeg
