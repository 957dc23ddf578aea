#include "finsler/expression.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <system_error>

#include "finsler/errors.hpp"
#include "finsler/format.hpp"

namespace finsler::expr {

struct Expression::Node {
  Op op = Op::Constant;
  double value = 0.0;
  int variable = -1;
  Expression lhs_expr;
  Expression rhs_expr;
};

namespace {

bool is_binary(Op op) {
  return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div || op == Op::Pow;
}

const char* function_name(Op op) {
  switch (op) {
    case Op::Sqrt: return "sqrt";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Ln: return "ln";
    default: return nullptr;
  }
}

[[noreturn]] void eval_error(const std::string& what) {
  throw FinslerError(ErrorCode::EvalError, what);
}

double apply_unary(Op op, double a) {
  switch (op) {
    case Op::Neg: return -a;
    case Op::Sqrt:
      if (a < 0.0) eval_error("sqrt of negative value " + std::to_string(a));
      return std::sqrt(a);
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Exp: return std::exp(a);
    case Op::Ln:
      if (a <= 0.0) eval_error("ln of non-positive value " + std::to_string(a));
      return std::log(a);
    default: eval_error("bad unary op");
  }
}

double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div:
      if (b == 0.0) eval_error("division by zero");
      return a / b;
    case Op::Pow:
      if (a < 0.0 && b != std::floor(b)) eval_error("negative base with fractional exponent");
      if (a == 0.0 && b < 0.0) eval_error("zero raised to a negative power");
      return std::pow(a, b);
    default: eval_error("bad binary op");
  }
}

// Folding must never throw; returns false when the operation is outside its domain.
bool try_fold_unary(Op op, double a, double& out) {
  try {
    out = apply_unary(op, a);
    return std::isfinite(out);
  } catch (const FinslerError&) {
    return false;
  }
}

bool try_fold_binary(Op op, double a, double b, double& out) {
  try {
    out = apply_binary(op, a, b);
    return std::isfinite(out);
  } catch (const FinslerError&) {
    return false;
  }
}

int precedence(const Expression& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Constant: return e.value() < 0.0 || std::signbit(e.value()) ? 3 : 5;
    default: return 5;
  }
}

std::string format_number(double v) { return format_double(v); }

void print(const Expression& e, std::string& out) {
  static constexpr std::array<const char*, 3> kNames = {"x", "y", "z"};
  auto child = [&out](const Expression& c, bool parens) {
    if (parens) out += '(';
    print(c, out);
    if (parens) out += ')';
  };
  switch (e.op()) {
    case Op::Constant: out += format_number(e.value()); return;
    case Op::Variable: out += kNames[static_cast<std::size_t>(e.variable_index())]; return;
    case Op::Neg:
      out += '-';
      child(e.lhs(), precedence(e.lhs()) < 3);
      return;
    case Op::Pow:
      child(e.lhs(), precedence(e.lhs()) <= 4);
      out += '^';
      child(e.rhs(), precedence(e.rhs()) < 3);
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(e);
      child(e.lhs(), precedence(e.lhs()) < p);
      switch (e.op()) {
        case Op::Add: out += " + "; break;
        case Op::Sub: out += " - "; break;
        case Op::Mul: out += " * "; break;
        default: out += " / "; break;
      }
      child(e.rhs(), precedence(e.rhs()) <= p);
      return;
    }
    default:
      out += function_name(e.op());
      child(e.lhs(), true);
      return;
  }
}

class Parser {
 public:
  Parser(std::string_view text, int line, int column) : text_(text), line_(line), column_(column) {}

  Expression parse_all() {
    skip_space();
    if (pos_ >= text_.size()) fail("empty expression");
    Expression e = parse_expr();
    skip_space();
    if (pos_ < text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, line_, column_ + static_cast<int>(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expression parse_expr() {
    Expression lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + operand(&Parser::parse_term);
      } else if (accept('-')) {
        lhs = lhs - operand(&Parser::parse_term);
      } else {
        return lhs;
      }
    }
  }

  Expression parse_term() {
    Expression lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * operand(&Parser::parse_unary);
      } else if (accept('/')) {
        lhs = lhs / operand(&Parser::parse_unary);
      } else {
        return lhs;
      }
    }
  }

  // A binary operator must be followed by an operand.
  Expression operand(Expression (Parser::*rule)()) {
    skip_space();
    if (pos_ >= text_.size()) fail("missing operand after operator");
    return (this->*rule)();
  }

  Expression parse_unary() {
    if (accept('-')) return -operand(&Parser::parse_unary);
    return parse_power();
  }

  Expression parse_power() {
    Expression base = parse_atom();
    if (accept('^')) return pow(base, operand(&Parser::parse_unary));
    return base;
  }

  Expression parse_atom() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expression inner = operand(&Parser::parse_expr);
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    fail(std::string("unexpected '") + c + "'");
  }

  Expression parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      pos_ = start;
      fail("malformed number");
    }
    return Expression::constant(value);
  }

  Expression parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "x") return Expression::variable(0);
    if (name == "y") return Expression::variable(1);
    if (name == "z") return Expression::variable(2);
    if (name == "pi") return Expression::constant(std::numbers::pi);
    static constexpr std::array<std::pair<std::string_view, Op>, 5> kFunctions = {{
        {"sqrt", Op::Sqrt}, {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"ln", Op::Ln}}};
    for (const auto& [fname, op] : kFunctions) {
      if (name == fname) {
        if (!accept('(')) fail("expected '(' after " + std::string(name));
        Expression arg = operand(&Parser::parse_expr);
        if (!accept(')')) fail("expected ')'");
        return Expression::unary(op, arg);
      }
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
  int column_;
};

}  // namespace

// A null node stands for the constant 0 so that nodes can hold empty children.
Expression::Expression() = default;

Expression Expression::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::Constant;
  n->value = value;
  return Expression(std::move(n));
}

Expression Expression::variable(int index) {
  auto n = std::make_shared<Node>();
  n->op = Op::Variable;
  n->variable = index;
  return Expression(std::move(n));
}

Expression Expression::unary(Op op, Expression operand) {
  if (operand.is_constant()) {
    double folded = 0.0;
    if (try_fold_unary(op, operand.value(), folded)) return constant(folded);
  }
  if (op == Op::Neg && operand.op() == Op::Neg) return operand.lhs();
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs_expr = std::move(operand);
  return Expression(std::move(n));
}

Expression Expression::binary(Op op, Expression lhs, Expression rhs) {
  if (lhs.is_constant() && rhs.is_constant()) {
    double folded = 0.0;
    if (try_fold_binary(op, lhs.value(), rhs.value(), folded)) return constant(folded);
  }
  switch (op) {
    case Op::Add:
      if (lhs.is_constant(0.0)) return rhs;
      if (rhs.is_constant(0.0)) return lhs;
      break;
    case Op::Sub:
      if (rhs.is_constant(0.0)) return lhs;
      if (lhs.is_constant(0.0)) return unary(Op::Neg, rhs);
      break;
    case Op::Mul:
      if (lhs.is_constant(0.0) || rhs.is_constant(0.0)) return constant(0.0);
      if (lhs.is_constant(1.0)) return rhs;
      if (rhs.is_constant(1.0)) return lhs;
      if (lhs.is_constant(-1.0)) return unary(Op::Neg, rhs);
      break;
    case Op::Div:
      if (rhs.is_constant(1.0)) return lhs;
      if (lhs.is_constant(0.0) && !rhs.is_constant(0.0)) return constant(0.0);
      break;
    case Op::Pow:
      if (rhs.is_constant(1.0)) return lhs;
      if (rhs.is_constant(0.0)) return constant(1.0);
      break;
    default: break;
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs_expr = std::move(lhs);
  n->rhs_expr = std::move(rhs);
  return Expression(std::move(n));
}

Op Expression::op() const { return node_ ? node_->op : Op::Constant; }
double Expression::value() const { return node_ ? node_->value : 0.0; }
int Expression::variable_index() const { return node_ ? node_->variable : -1; }
const Expression& Expression::lhs() const {
  static const Expression empty;
  return node_ ? node_->lhs_expr : empty;
}
const Expression& Expression::rhs() const {
  static const Expression empty;
  return node_ ? node_->rhs_expr : empty;
}

int Expression::max_variable() const {
  switch (op()) {
    case Op::Constant: return -1;
    case Op::Variable: return variable_index();
    default:
      if (is_binary(op())) return std::max(lhs().max_variable(), rhs().max_variable());
      return lhs().max_variable();
  }
}

double Expression::evaluate(std::span<const double> vars) const {
  switch (op()) {
    case Op::Constant: return value();
    case Op::Variable:
      if (static_cast<std::size_t>(variable_index()) >= vars.size()) eval_error("variable out of range");
      return vars[static_cast<std::size_t>(variable_index())];
    default: break;
  }
  double result = is_binary(op()) ? apply_binary(op(), lhs().evaluate(vars), rhs().evaluate(vars))
                                  : apply_unary(op(), lhs().evaluate(vars));
  if (!std::isfinite(result)) eval_error("non-finite result");
  return result;
}

Expression Expression::derivative(int var) const {
  const Expression& a = lhs();
  const Expression& b = rhs();
  switch (op()) {
    case Op::Constant: return constant(0.0);
    case Op::Variable: return constant(variable_index() == var ? 1.0 : 0.0);
    case Op::Add: return a.derivative(var) + b.derivative(var);
    case Op::Sub: return a.derivative(var) - b.derivative(var);
    case Op::Mul: return a.derivative(var) * b + a * b.derivative(var);
    case Op::Div: return (a.derivative(var) * b - a * b.derivative(var)) / pow(b, constant(2.0));
    case Op::Pow: {
      if (b.is_constant()) {
        return b * pow(a, constant(b.value() - 1.0)) * a.derivative(var);
      }
      const Expression db = b.derivative(var);
      const Expression da = a.derivative(var);
      return *this * (db * unary(Op::Ln, a) + b * da / a);
    }
    case Op::Neg: return -a.derivative(var);
    case Op::Sqrt: return a.derivative(var) / (constant(2.0) * *this);
    case Op::Sin: return cos(a) * a.derivative(var);
    case Op::Cos: return -(sin(a) * a.derivative(var));
    case Op::Exp: return *this * a.derivative(var);
    case Op::Ln: return a.derivative(var) / a;
  }
  return constant(0.0);
}

Expression Expression::substitute(std::span<const Expression> replacements) const {
  switch (op()) {
    case Op::Constant: return *this;
    case Op::Variable:
      if (static_cast<std::size_t>(variable_index()) < replacements.size()) {
        return replacements[static_cast<std::size_t>(variable_index())];
      }
      return *this;
    default:
      if (is_binary(op())) return binary(op(), lhs().substitute(replacements), rhs().substitute(replacements));
      return unary(op(), lhs().substitute(replacements));
  }
}

std::string Expression::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

bool Expression::structurally_equal(const Expression& other) const {
  if (op() != other.op()) return false;
  switch (op()) {
    case Op::Constant: return value() == other.value();
    case Op::Variable: return variable_index() == other.variable_index();
    default:
      if (is_binary(op())) return lhs().structurally_equal(other.lhs()) && rhs().structurally_equal(other.rhs());
      return lhs().structurally_equal(other.lhs());
  }
}

Expression operator+(const Expression& a, const Expression& b) { return Expression::binary(Op::Add, a, b); }
Expression operator-(const Expression& a, const Expression& b) { return Expression::binary(Op::Sub, a, b); }
Expression operator*(const Expression& a, const Expression& b) { return Expression::binary(Op::Mul, a, b); }
Expression operator/(const Expression& a, const Expression& b) { return Expression::binary(Op::Div, a, b); }
Expression operator-(const Expression& a) { return Expression::unary(Op::Neg, a); }
Expression pow(const Expression& a, const Expression& b) { return Expression::binary(Op::Pow, a, b); }
Expression sqrt(const Expression& a) { return Expression::unary(Op::Sqrt, a); }
Expression sin(const Expression& a) { return Expression::unary(Op::Sin, a); }
Expression cos(const Expression& a) { return Expression::unary(Op::Cos, a); }

Expression parse(std::string_view text, int line, int column) { return Parser(text, line, column).parse_all(); }

Program::Program(const Expression& e) {
  int depth = 0;
  auto emit = [&](auto&& self, const Expression& node) -> void {
    switch (node.op()) {
      case Op::Constant:
        code_.push_back({Op::Constant, node.value(), -1});
        max_depth_ = std::max(max_depth_, ++depth);
        return;
      case Op::Variable:
        code_.push_back({Op::Variable, 0.0, node.variable_index()});
        max_depth_ = std::max(max_depth_, ++depth);
        return;
      default:
        self(self, node.lhs());
        if (is_binary(node.op())) {
          self(self, node.rhs());
          --depth;
        }
        code_.push_back({node.op(), 0.0, -1});
        return;
    }
  };
  emit(emit, e);
}

double Program::operator()(const double* vars) const {
  constexpr int kInline = 64;
  std::array<double, kInline> inline_stack{};
  std::vector<double> heap_stack;
  double* stack = inline_stack.data();
  if (max_depth_ > kInline) {
    heap_stack.resize(static_cast<std::size_t>(max_depth_));
    stack = heap_stack.data();
  }
  int top = -1;
  for (const Instruction& ins : code_) {
    switch (ins.op) {
      case Op::Constant: stack[++top] = ins.value; break;
      case Op::Variable: stack[++top] = vars[ins.variable]; break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
      case Op::Pow: {
        const double b = stack[top--];
        stack[top] = apply_binary(ins.op, stack[top], b);
        break;
      }
      default: stack[top] = apply_unary(ins.op, stack[top]); break;
    }
  }
  const double result = stack[0];
  if (!std::isfinite(result)) eval_error("non-finite result");
  return result;
}

}  // namespace finsler::expr
