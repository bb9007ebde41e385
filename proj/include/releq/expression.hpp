#pragma once

// Scalar expression language for system documents.
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := primary ('^' unary)?
//   primary:= number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// '^' binds tighter than unary minus (-x^2 == -(x^2)) and is right associative.
// Evaluation goes through a compiled postfix program with variables resolved to
// slots; parameters are folded in as constants at compile time.

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "releq/errors.hpp"

namespace releq {

enum class Func { sin, cos, tan, exp, log, sqrt, abs, pow };

inline const char* func_name(Func f) {
  switch (f) {
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::tan: return "tan";
    case Func::exp: return "exp";
    case Func::log: return "log";
    case Func::sqrt: return "sqrt";
    case Func::abs: return "abs";
    case Func::pow: return "pow";
  }
  return "?";
}

inline int func_arity(Func f) { return f == Func::pow ? 2 : 1; }

struct ExprNode {
  enum class Kind { number, variable, neg, add, sub, mul, div, pow, call };
  Kind kind = Kind::number;
  double value = 0.0;
  std::string name;
  Func func = Func::sin;
  std::vector<std::shared_ptr<const ExprNode>> args;
};

namespace detail {

[[noreturn]] inline void domain_fail(const char* what, double x) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s of %.17g", what, x);
  throw DomainError(buf);
}

inline double apply_func(Func f, double a, double b = 0.0) {
  switch (f) {
    case Func::sin: return std::sin(a);
    case Func::cos: return std::cos(a);
    case Func::tan: return std::tan(a);
    case Func::exp: return std::exp(a);
    case Func::log:
      if (!(a > 0.0)) domain_fail("log", a);
      return std::log(a);
    case Func::sqrt:
      if (!(a >= 0.0)) domain_fail("sqrt", a);
      return std::sqrt(a);
    case Func::abs: return std::abs(a);
    case Func::pow: return std::pow(a, b);
  }
  return 0.0;
}

class Parser {
 public:
  explicit Parser(const std::string& src) : s_(src) {}

  std::shared_ptr<const ExprNode> parse() {
    auto e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  using NodePtr = std::shared_ptr<const ExprNode>;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr binary(ExprNode::Kind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->args = {std::move(a), std::move(b)};
    return n;
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = binary(ExprNode::Kind::add, lhs, term());
      else if (accept('-'))
        lhs = binary(ExprNode::Kind::sub, lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = binary(ExprNode::Kind::mul, lhs, unary());
      else if (accept('/'))
        lhs = binary(ExprNode::Kind::div, lhs, unary());
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::neg;
      n->args = {unary()};
      return n;
    }
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return binary(ExprNode::Kind::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || at_xi()) return name();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        pos_ = p;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    const std::string tok = s_.substr(start, pos_ - start);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(v)) {
      pos_ = start;
      fail("malformed number '" + tok + "'");
    }
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::number;
    n->value = v;
    return n;
  }

  // UTF-8 xi, spelled "xi" in identifiers so that l can use either form.
  bool at_xi() const { return s_.compare(pos_, 2, "\xCE\xBE") == 0; }

  NodePtr name() {
    const std::size_t start = pos_;
    std::string id;
    while (pos_ < s_.size()) {
      if (at_xi()) {
        id += "xi";
        pos_ += 2;
      } else if (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_') {
        id += s_[pos_++];
      } else {
        break;
      }
    }
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      static const std::map<std::string, Func> funcs = {
          {"sin", Func::sin}, {"cos", Func::cos},   {"tan", Func::tan}, {"exp", Func::exp},
          {"log", Func::log}, {"sqrt", Func::sqrt}, {"abs", Func::abs}, {"pow", Func::pow}};
      auto it = funcs.find(id);
      if (it == funcs.end()) {
        pos_ = start;
        fail("unknown function '" + id + "'");
      }
      ++pos_;
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::call;
      n->func = it->second;
      n->name = id;
      n->args.push_back(expr());
      while (accept(',')) n->args.push_back(expr());
      if (!accept(')')) fail("expected ')'");
      if (static_cast<int>(n->args.size()) != func_arity(n->func)) {
        pos_ = start;
        fail("function '" + id + "' takes " + std::to_string(func_arity(n->func)) + " argument(s)");
      }
      return n;
    }
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::variable;
    n->name = std::move(id);
    return n;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Expression bound to an ordered list of variable slots.
class CompiledExpression {
 public:
  /// Evaluates with vars[i] bound to slot i. Raises DomainError on any
  /// non-finite intermediate or on log/sqrt outside their domain.
  double operator()(std::span<const double> vars) const {
    if (static_cast<int>(vars.size()) < nslots_) throw DimensionError("expression: too few variables bound");
    constexpr std::size_t kInline = 32;
    std::array<double, kInline> small{};
    std::vector<double> big;
    double* st = small.data();
    if (static_cast<std::size_t>(depth_) > kInline) {
      big.resize(static_cast<std::size_t>(depth_));
      st = big.data();
    }
    int sp = 0;
    for (const auto& in : code_) {
      switch (in.op) {
        case Op::constant: st[sp++] = in.value; break;
        case Op::var: st[sp++] = vars[static_cast<std::size_t>(in.slot)]; break;
        case Op::neg: st[sp - 1] = -st[sp - 1]; break;
        case Op::add: --sp; st[sp - 1] += st[sp]; break;
        case Op::sub: --sp; st[sp - 1] -= st[sp]; break;
        case Op::mul: --sp; st[sp - 1] *= st[sp]; break;
        case Op::div: --sp; st[sp - 1] /= st[sp]; break;
        case Op::pow: --sp; st[sp - 1] = std::pow(st[sp - 1], st[sp]); break;
        case Op::call1: st[sp - 1] = detail::apply_func(in.func, st[sp - 1]); break;
        case Op::call2:
          --sp;
          st[sp - 1] = detail::apply_func(in.func, st[sp - 1], st[sp]);
          break;
      }
      if (!std::isfinite(st[sp - 1])) throw DomainError("expression evaluated to a non-finite value");
    }
    return st[0];
  }

  double operator()(std::initializer_list<double> vars) const {
    return (*this)(std::span<const double>(vars.begin(), vars.size()));
  }

 private:
  friend class Expression;
  enum class Op { constant, var, neg, add, sub, mul, div, pow, call1, call2 };
  struct Instr {
    Op op;
    double value = 0.0;
    int slot = 0;
    Func func = Func::sin;
  };
  std::vector<Instr> code_;
  int depth_ = 0;
  int nslots_ = 0;
};

class Expression {
 public:
  Expression() = default;
  explicit Expression(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) {}

  const ExprNode& root() const { return *root_; }

  /// Every variable name referenced.
  std::set<std::string> variables() const {
    std::set<std::string> out;
    collect(*root_, out);
    return out;
  }

  /// Tree-walking evaluation against named bindings.
  double evaluate(const std::unordered_map<std::string, double>& env) const { return eval(*root_, env); }

  /// Resolves slots[i] to variable slot i and folds `constants` in as literals.
  /// Unknown names raise SchemaError.
  CompiledExpression compile(const std::vector<std::string>& slots,
                             const std::map<std::string, double>& constants = {}) const {
    CompiledExpression out;
    out.nslots_ = static_cast<int>(slots.size());
    int sp = 0;
    emit(*root_, slots, constants, out, sp);
    return out;
  }

  /// Fully parenthesized rendering; literals use 17 significant digits so the
  /// output re-parses to an identical tree.
  std::string to_string() const { return print(*root_); }

 private:
  static void collect(const ExprNode& n, std::set<std::string>& out) {
    if (n.kind == ExprNode::Kind::variable) out.insert(n.name);
    for (const auto& a : n.args) collect(*a, out);
  }

  static double checked(double v) {
    if (!std::isfinite(v)) throw DomainError("expression evaluated to a non-finite value");
    return v;
  }

  static double eval(const ExprNode& n, const std::unordered_map<std::string, double>& env) {
    using K = ExprNode::Kind;
    switch (n.kind) {
      case K::number: return n.value;
      case K::variable: {
        auto it = env.find(n.name);
        if (it == env.end()) throw SchemaError("unbound variable '" + n.name + "'");
        return it->second;
      }
      case K::neg: return -eval(*n.args[0], env);
      case K::add: return checked(eval(*n.args[0], env) + eval(*n.args[1], env));
      case K::sub: return checked(eval(*n.args[0], env) - eval(*n.args[1], env));
      case K::mul: return checked(eval(*n.args[0], env) * eval(*n.args[1], env));
      case K::div: return checked(eval(*n.args[0], env) / eval(*n.args[1], env));
      case K::pow: return checked(std::pow(eval(*n.args[0], env), eval(*n.args[1], env)));
      case K::call:
        if (n.args.size() == 2)
          return checked(detail::apply_func(n.func, eval(*n.args[0], env), eval(*n.args[1], env)));
        return checked(detail::apply_func(n.func, eval(*n.args[0], env)));
    }
    return 0.0;
  }

  static void push(CompiledExpression& out, CompiledExpression::Instr in, int& sp, int delta) {
    out.code_.push_back(in);
    sp += delta;
    out.depth_ = std::max(out.depth_, sp);
  }

  static void emit(const ExprNode& n, const std::vector<std::string>& slots,
                   const std::map<std::string, double>& constants, CompiledExpression& out, int& sp) {
    using K = ExprNode::Kind;
    using Op = CompiledExpression::Op;
    switch (n.kind) {
      case K::number: push(out, {Op::constant, n.value}, sp, 1); return;
      case K::variable: {
        for (std::size_t i = 0; i < slots.size(); ++i)
          if (slots[i] == n.name) {
            push(out, {Op::var, 0.0, static_cast<int>(i)}, sp, 1);
            return;
          }
        auto it = constants.find(n.name);
        if (it == constants.end()) throw SchemaError("unbound variable '" + n.name + "'");
        push(out, {Op::constant, it->second}, sp, 1);
        return;
      }
      case K::neg:
        emit(*n.args[0], slots, constants, out, sp);
        push(out, {Op::neg}, sp, 0);
        return;
      case K::call:
        for (const auto& a : n.args) emit(*a, slots, constants, out, sp);
        if (n.args.size() == 2)
          push(out, {Op::call2, 0.0, 0, n.func}, sp, -1);
        else
          push(out, {Op::call1, 0.0, 0, n.func}, sp, 0);
        return;
      default: break;
    }
    emit(*n.args[0], slots, constants, out, sp);
    emit(*n.args[1], slots, constants, out, sp);
    Op op = Op::add;
    switch (n.kind) {
      case K::add: op = Op::add; break;
      case K::sub: op = Op::sub; break;
      case K::mul: op = Op::mul; break;
      case K::div: op = Op::div; break;
      case K::pow: op = Op::pow; break;
      default: break;
    }
    push(out, {op}, sp, -1);
  }

  static std::string print(const ExprNode& n) {
    using K = ExprNode::Kind;
    switch (n.kind) {
      case K::number: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        return buf;
      }
      case K::variable: return n.name;
      case K::neg: return "(-" + print(*n.args[0]) + ")";
      case K::call: {
        std::string s = std::string(func_name(n.func)) + "(";
        for (std::size_t i = 0; i < n.args.size(); ++i) s += (i ? "," : "") + print(*n.args[i]);
        return s + ")";
      }
      default: break;
    }
    const char* op = "+";
    switch (n.kind) {
      case K::sub: op = "-"; break;
      case K::mul: op = "*"; break;
      case K::div: op = "/"; break;
      case K::pow: op = "^"; break;
      default: break;
    }
    return "(" + print(*n.args[0]) + op + print(*n.args[1]) + ")";
  }

  std::shared_ptr<const ExprNode> root_;
};

inline Expression parse_expression(const std::string& src) { return Expression(detail::Parser(src).parse()); }

}  // namespace releq
