#include "jeq/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <utility>

namespace jeq {

// ---------------------------------------------------------------------------
// Tree representation. Nodes are immutable and shared, so differentiation can
// reuse subtrees freely; the constructors below fold constants to keep
// derivative trees small.

struct Expression::Node {
  enum Kind { num, var, add, sub, mul, pow, sinf, cosf, neg };

  Kind kind = num;
  double value = 0.0;  // num
  int axis = 0;        // var
  int exponent = 0;    // pow
  std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_num(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::num;
  n->value = v;
  return n;
}

NodePtr make_var(int axis) {
  auto n = std::make_shared<Node>();
  n->kind = Node::var;
  n->axis = axis;
  return n;
}

bool is_num(const NodePtr& n, double v) { return n->kind == Node::num && n->value == v; }

NodePtr make_add(NodePtr a, NodePtr b) {
  if (a->kind == Node::num && b->kind == Node::num) return make_num(a->value + b->value);
  if (is_num(a, 0.0)) return b;
  if (is_num(b, 0.0)) return a;
  auto n = std::make_shared<Node>();
  n->kind = Node::add;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_neg(NodePtr a) {
  if (a->kind == Node::num) return make_num(-a->value);
  if (a->kind == Node::neg) return a->a;
  auto n = std::make_shared<Node>();
  n->kind = Node::neg;
  n->a = std::move(a);
  return n;
}

NodePtr make_sub(NodePtr a, NodePtr b) {
  if (a->kind == Node::num && b->kind == Node::num) return make_num(a->value - b->value);
  if (is_num(b, 0.0)) return a;
  if (is_num(a, 0.0)) return make_neg(std::move(b));
  auto n = std::make_shared<Node>();
  n->kind = Node::sub;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_mul(NodePtr a, NodePtr b) {
  if (a->kind == Node::num && b->kind == Node::num) return make_num(a->value * b->value);
  if (is_num(a, 0.0) || is_num(b, 0.0)) return make_num(0.0);
  if (is_num(a, 1.0)) return b;
  if (is_num(b, 1.0)) return a;
  auto n = std::make_shared<Node>();
  n->kind = Node::mul;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_pow(NodePtr a, int k) {
  if (k == 0) return make_num(1.0);
  if (k == 1) return a;
  if (a->kind == Node::num) return make_num(std::pow(a->value, double(k)));
  auto n = std::make_shared<Node>();
  n->kind = Node::pow;
  n->exponent = k;
  n->a = std::move(a);
  return n;
}

NodePtr make_fn(Node::Kind kind, NodePtr a) {
  if (a->kind == Node::num)
    return make_num(kind == Node::sinf ? std::sin(a->value) : std::cos(a->value));
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->a = std::move(a);
  return n;
}

double eval_node(const Node& n, std::span<const double> xy) {
  switch (n.kind) {
    case Node::num: return n.value;
    case Node::var: return xy[std::size_t(n.axis)];
    case Node::add: return eval_node(*n.a, xy) + eval_node(*n.b, xy);
    case Node::sub: return eval_node(*n.a, xy) - eval_node(*n.b, xy);
    case Node::mul: return eval_node(*n.a, xy) * eval_node(*n.b, xy);
    case Node::pow: {
      double base = eval_node(*n.a, xy);
      double r = 1.0;
      for (int i = 0; i < n.exponent; ++i) r *= base;
      return r;
    }
    case Node::sinf: return std::sin(eval_node(*n.a, xy));
    case Node::cosf: return std::cos(eval_node(*n.a, xy));
    case Node::neg: return -eval_node(*n.a, xy);
  }
  return 0.0;
}

NodePtr diff_node(const NodePtr& n, int axis) {
  switch (n->kind) {
    case Node::num: return make_num(0.0);
    case Node::var: return make_num(n->axis == axis ? 1.0 : 0.0);
    case Node::add: return make_add(diff_node(n->a, axis), diff_node(n->b, axis));
    case Node::sub: return make_sub(diff_node(n->a, axis), diff_node(n->b, axis));
    case Node::mul:
      return make_add(make_mul(diff_node(n->a, axis), n->b),
                      make_mul(n->a, diff_node(n->b, axis)));
    case Node::pow:
      return make_mul(make_num(double(n->exponent)),
                      make_mul(make_pow(n->a, n->exponent - 1), diff_node(n->a, axis)));
    case Node::sinf: return make_mul(make_fn(Node::cosf, n->a), diff_node(n->a, axis));
    case Node::cosf:
      return make_neg(make_mul(make_fn(Node::sinf, n->a), diff_node(n->a, axis)));
    case Node::neg: return make_neg(diff_node(n->a, axis));
  }
  return make_num(0.0);
}

// Precedence levels for parenthesized rendering: 0 sum, 1 product, 2 power,
// 3 atom. Variables are named against the parse-time width nvars.
void render_named(const Node& n, int parent_level, int nvars, std::string& out) {
  switch (n.kind) {
    case Node::var: {
      int a = n.axis;
      if (nvars > 0 && a >= nvars)
        out += "y" + std::to_string(a - nvars + 1);
      else
        out += "x" + std::to_string(a + 1);
      return;
    }
    case Node::add:
    case Node::sub: {
      bool parens = parent_level > 0;
      if (parens) out += '(';
      render_named(*n.a, 0, nvars, out);
      out += n.kind == Node::add ? " + " : " - ";
      render_named(*n.b, 1, nvars, out);
      if (parens) out += ')';
      return;
    }
    case Node::mul: {
      bool parens = parent_level > 1;
      if (parens) out += '(';
      render_named(*n.a, 1, nvars, out);
      out += '*';
      render_named(*n.b, 2, nvars, out);
      if (parens) out += ')';
      return;
    }
    case Node::pow: {
      bool parens = parent_level > 2;
      if (parens) out += '(';
      render_named(*n.a, 3, nvars, out);
      out += '^';
      out += std::to_string(n.exponent);
      if (parens) out += ')';
      return;
    }
    case Node::sinf:
    case Node::cosf:
      out += n.kind == Node::sinf ? "sin(" : "cos(";
      render_named(*n.a, 0, nvars, out);
      out += ')';
      return;
    case Node::neg: {
      bool parens = parent_level > 1;
      if (parens) out += '(';
      out += '-';
      render_named(*n.a, 2, nvars, out);
      if (parens) out += ')';
      return;
    }
    case Node::num: {
      char buf[32];
      auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), n.value);
      (void)ec;
      if (n.value < 0 && parent_level > 0) {
        out += '(';
        out.append(buf, p);
        out += ')';
      } else {
        out.append(buf, p);
      }
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Tokenizer / recursive-descent parser.

struct Token {
  enum Type { number, ident, plus, minus, star, caret, lparen, rparen, end };
  Type type = end;
  double value = 0.0;
  std::string text;
  int col = 0;  // 1-based column of the first character
};

class Parser {
 public:
  Parser(const std::string& text, int n) : text_(text), n_(n) { advance(); }

  NodePtr parse() {
    if (cur_.type == Token::end) fail_at(1, "empty expression");
    NodePtr e = expr();
    if (cur_.type != Token::end)
      fail_at(cur_.col, "unexpected '" + token_text() + "'");
    return e;
  }

 private:
  [[noreturn]] void fail_at(int col, const std::string& what) const {
    fail(errc::parse_error, "expression '" + text_ + "': " + what + " at column " +
                                std::to_string(col));
  }

  std::string token_text() const {
    return cur_.type == Token::end ? std::string("end of input") : cur_.text;
  }

  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    cur_ = Token{};
    cur_.col = int(pos_) + 1;
    if (pos_ >= text_.size()) {
      cur_.type = Token::end;
      return;
    }
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* first = text_.data() + pos_;
      const char* last = text_.data() + text_.size();
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::general);
      if (ec != std::errc() || ptr == first) fail_at(cur_.col, "malformed number");
      cur_.type = Token::number;
      cur_.value = v;
      cur_.text.assign(first, ptr);
      pos_ += std::size_t(ptr - first);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             std::isalnum(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
      cur_.type = Token::ident;
      cur_.text = text_.substr(start, pos_ - start);
      return;
    }
    cur_.text.assign(1, c);
    ++pos_;
    switch (c) {
      case '+': cur_.type = Token::plus; return;
      case '-': cur_.type = Token::minus; return;
      case '*': cur_.type = Token::star; return;
      case '^': cur_.type = Token::caret; return;
      case '(': cur_.type = Token::lparen; return;
      case ')': cur_.type = Token::rparen; return;
      default: fail_at(cur_.col, std::string("unexpected character '") + c + "'");
    }
  }

  NodePtr expr() {
    NodePtr e = term();
    while (cur_.type == Token::plus || cur_.type == Token::minus) {
      bool sub = cur_.type == Token::minus;
      advance();
      NodePtr rhs = term();
      e = sub ? make_sub(std::move(e), std::move(rhs))
              : make_add(std::move(e), std::move(rhs));
    }
    return e;
  }

  NodePtr term() {
    NodePtr e = factor();
    while (cur_.type == Token::star) {
      advance();
      e = make_mul(std::move(e), factor());
    }
    return e;
  }

  NodePtr factor() {
    NodePtr base = atom();
    if (cur_.type == Token::caret) {
      int col = cur_.col;
      advance();
      if (cur_.type != Token::number)
        fail_at(cur_.col, "exponent must be a non-negative integer");
      double v = cur_.value;
      int k = int(v);
      if (double(k) != v || k < 0 || k > 64)
        fail_at(cur_.col, "exponent must be a non-negative integer (got '" +
                              cur_.text + "')");
      (void)col;
      advance();
      base = make_pow(std::move(base), k);
    }
    return base;
  }

  NodePtr atom() {
    switch (cur_.type) {
      case Token::number: {
        double v = cur_.value;
        advance();
        return make_num(v);
      }
      case Token::plus:
        advance();
        return factor();
      case Token::minus:
        advance();
        return make_neg(factor());
      case Token::lparen: {
        int col = cur_.col;
        advance();
        NodePtr e = expr();
        if (cur_.type != Token::rparen)
          fail_at(cur_.col, "expected ')' for '(' at column " + std::to_string(col));
        advance();
        return e;
      }
      case Token::ident: return identifier();
      default: fail_at(cur_.col, "unexpected '" + token_text() + "'");
    }
  }

  NodePtr identifier() {
    std::string name = cur_.text;
    int col = cur_.col;
    advance();
    if (name == "pi") return make_num(3.14159265358979323846);
    if (name == "sin" || name == "cos") {
      if (cur_.type != Token::lparen)
        fail_at(cur_.col, "expected '(' after '" + name + "'");
      advance();
      NodePtr arg = expr();
      if (cur_.type != Token::rparen)
        fail_at(cur_.col, "expected ')' closing '" + name + "'");
      advance();
      return make_fn(name == "sin" ? Node::sinf : Node::cosf, std::move(arg));
    }
    if ((name[0] == 'x' || name[0] == 'y') && name.size() > 1) {
      int k = 0;
      auto [ptr, ec] =
          std::from_chars(name.data() + 1, name.data() + name.size(), k);
      if (ec == std::errc() && ptr == name.data() + name.size()) {
        if (k < 1 || k > n_)
          fail_at(col, "variable '" + name + "' out of range (n = " +
                           std::to_string(n_) + " gives x1..x" + std::to_string(n_) +
                           ", y1..y" + std::to_string(n_) + ")");
        return make_var(name[0] == 'x' ? k - 1 : n_ + k - 1);
      }
    }
    fail_at(col, "unknown identifier '" + name + "'");
  }

  const std::string& text_;
  int n_ = 0;
  std::size_t pos_ = 0;
  Token cur_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Expression surface.

Expression::Expression() : root_(make_num(0.0)), n_(0) {}

Expression Expression::parse(const std::string& text, int n) {
  if (n < 1 || n > 8)
    fail(errc::config_error, "expression variables need n in [1, 8], got " +
                                 std::to_string(n));
  Expression e;
  e.root_ = Parser(text, n).parse();
  e.n_ = n;
  return e;
}

Expression Expression::constant(double v) {
  Expression e;
  e.root_ = make_num(v);
  e.n_ = 0;
  return e;
}

double Expression::eval(std::span<const double> xy) const {
  return eval_node(*root_, xy);
}

Expression Expression::derivative(int axis) const {
  Expression e;
  e.root_ = diff_node(root_, axis);
  e.n_ = n_;
  return e;
}

namespace {

int combined_vars(const Expression& a, const Expression& b) {
  if (a.vars() == 0) return b.vars();
  if (b.vars() == 0 || a.vars() == b.vars()) return a.vars();
  fail(errc::config_error, "cannot combine expressions parsed against n = " +
                               std::to_string(a.vars()) + " and n = " +
                               std::to_string(b.vars()));
}

}  // namespace

Expression Expression::sum(const Expression& a, const Expression& b) {
  Expression e;
  e.n_ = combined_vars(a, b);
  e.root_ = make_add(a.root_, b.root_);
  return e;
}

Expression Expression::difference(const Expression& a, const Expression& b) {
  Expression e;
  e.n_ = combined_vars(a, b);
  e.root_ = make_sub(a.root_, b.root_);
  return e;
}

Expression Expression::product(const Expression& a, const Expression& b) {
  Expression e;
  e.n_ = combined_vars(a, b);
  e.root_ = make_mul(a.root_, b.root_);
  return e;
}

std::string Expression::str() const {
  std::string out;
  render_named(*root_, 0, n_, out);
  return out;
}

ComplexHessianExpr complex_hessian_expr(const Expression& f, int n) {
  if (f.vars() != 0 && f.vars() != n)
    fail(errc::config_error, "potential expression uses n = " +
                                 std::to_string(f.vars()) + " but the problem has n = " +
                                 std::to_string(n));
  ComplexHessianExpr h;
  h.n = n;
  h.re.resize(std::size_t(n) * n);
  h.im.resize(std::size_t(n) * n);
  const Expression quarter = Expression::constant(0.25);
  std::vector<Expression> d1(std::size_t(2) * n);
  for (int a = 0; a < 2 * n; ++a) d1[std::size_t(a)] = f.derivative(a);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const Expression& fxk = d1[std::size_t(k)];
      const Expression& fyk = d1[std::size_t(n + k)];
      Expression fxjxk = fxk.derivative(j);
      Expression fyjyk = fyk.derivative(n + j);
      Expression fxjyk = fyk.derivative(j);
      Expression fyjxk = fxk.derivative(n + j);
      h.re[std::size_t(j) * n + k] =
          Expression::product(quarter, Expression::sum(fxjxk, fyjyk));
      h.im[std::size_t(j) * n + k] =
          Expression::product(quarter, Expression::difference(fxjyk, fyjxk));
    }
  return h;
}

HermitianMatrix eval_hessian(const ComplexHessianExpr& h, std::span<const double> xy) {
  HermitianMatrix m(h.n);
  for (int j = 0; j < h.n; ++j)
    for (int k = j; k < h.n; ++k) {
      double re = h.re_at(j, k).eval(xy);
      double im = h.im_at(j, k).eval(xy);
      m.set(j, k, cxd(re, j == k ? 0.0 : im));
    }
  return m;
}

}  // namespace jeq
