#include "cfa/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace cfa {

namespace {

struct PrimInfo {
  Prim op;
  std::string_view name;
  bool binary;
};

constexpr PrimInfo kPrims[] = {
    {Prim::Not, "not", false},   {Prim::Add1, "add1", false},
    {Prim::Sub1, "sub1", false}, {Prim::IsZero, "zero?", false},
    {Prim::Add, "+", true},      {Prim::Sub, "-", true},
    {Prim::Mul, "*", true},
};

}  // namespace

bool prim_is_binary(Prim p) {
  for (const auto& info : kPrims)
    if (info.op == p) return info.binary;
  return false;
}

std::string_view prim_name(Prim p) {
  for (const auto& info : kPrims)
    if (info.op == p) return info.name;
  return "?";
}

std::optional<Prim> prim_from_name(std::string_view name) {
  for (const auto& info : kPrims)
    if (info.name == name) return info.op;
  return std::nullopt;
}

ParseError::ParseError(int line_, int col_, const std::string& message)
    : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                         std::to_string(col_) + ": " + message),
      line(line_),
      col(col_) {}

ScopeError::ScopeError(const Var& name_)
    : std::runtime_error("unbound variable: " + name_), name(name_) {}

// ---------------------------------------------------------------------------
// S-expression reader

namespace {

struct Sexp {
  bool is_atom = false;
  std::string atom;
  std::vector<Sexp> items;
  int line = 1;
  int col = 1;
};

class Reader {
 public:
  explicit Reader(std::string_view src) : src_(src) {}

  Sexp read_single() {
    skip_ws();
    if (eof()) fail("empty input");
    Sexp s = read();
    skip_ws();
    if (!eof()) fail("trailing content after program expression");
    return s;
  }

 private:
  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  bool eof() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }

  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(line_, col_, msg);
  }

  void skip_ws() {
    while (!eof()) {
      char c = peek();
      if (c == ';') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  static bool is_delim(char c) {
    return c == '(' || c == ')' || c == '[' || c == ']' || c == ';' ||
           std::isspace(static_cast<unsigned char>(c));
  }

  Sexp read() {
    skip_ws();
    if (eof()) fail("unexpected end of input");
    Sexp s;
    s.line = line_;
    s.col = col_;
    char c = peek();
    if (c == '(' || c == '[') {
      char open = advance();
      char close = open == '(' ? ')' : ']';
      while (true) {
        skip_ws();
        if (eof()) fail("unterminated list");
        if (peek() == ')' || peek() == ']') {
          if (peek() != close) fail("mismatched bracket");
          advance();
          break;
        }
        s.items.push_back(read());
      }
      return s;
    }
    if (c == ')' || c == ']') fail("unexpected closing bracket");
    s.is_atom = true;
    while (!eof() && !is_delim(peek())) s.atom.push_back(advance());
    return s;
  }
};

bool is_integer_atom(const std::string& a) {
  size_t i = (a[0] == '-' || a[0] == '+') ? 1 : 0;
  if (i >= a.size()) return false;
  return std::all_of(a.begin() + i, a.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool is_identifier(const std::string& a) {
  if (a.empty() || a == "lambda" || a == "let" || a == "let*" || a == "if")
    return false;
  if (a[0] == '#' || std::isdigit(static_cast<unsigned char>(a[0]))) return false;
  if (is_integer_atom(a)) return false;
  return std::all_of(a.begin(), a.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) ||
           std::string_view("+-*/<>=?!_%.~").find(c) != std::string_view::npos;
  });
}

// ---------------------------------------------------------------------------
// Grammar / ANF checking over the raw tree. Collects violations so callers
// see every problem at once.

class Checker {
 public:
  explicit Checker(ValidationReport& report) : report_(report) {}

  void check_program(const Sexp& s) {
    std::set<Var> scope;
    check_exp(s, scope);
  }

 private:
  ValidationReport& report_;

  void violate(const Sexp& s, std::string msg) {
    report_.violations.push_back({s.line, s.col, std::move(msg)});
  }

  bool is_atomic(const Sexp& s) const {
    if (s.is_atom) return true;
    return s.items.size() == 3 && s.items[0].is_atom &&
           s.items[0].atom == "lambda";
  }

  void check_atomic(const Sexp& s, const std::set<Var>& scope) {
    if (s.is_atom) {
      const std::string& a = s.atom;
      if (a == "#t" || a == "#f") return;
      if (is_integer_atom(a)) return;
      if (prim_from_name(a)) return;
      if (!is_identifier(a)) {
        violate(s, "malformed atom '" + a + "'");
        return;
      }
      if (!scope.count(a)) violate(s, "unbound variable: " + a);
      return;
    }
    if (s.items.size() == 3 && s.items[0].is_atom && s.items[0].atom == "lambda") {
      const Sexp& params = s.items[1];
      if (params.is_atom || params.items.size() != 1 || !params.items[0].is_atom ||
          !is_identifier(params.items[0].atom)) {
        violate(s, "lambda takes exactly one parameter");
        return;
      }
      const std::string& p = params.items[0].atom;
      if (prim_from_name(p)) {
        violate(s, "primitive name '" + p + "' cannot be a binder");
        return;
      }
      std::set<Var> inner = scope;
      inner.insert(p);
      check_exp(s.items[2], inner);
      return;
    }
    violate(s, "operand is not atomic");
  }

  void check_call(const Sexp& s, const std::set<Var>& scope) {
    if (s.is_atom || s.items.size() != 2) {
      violate(s, "calls are binary: expected (fn arg)");
      return;
    }
    check_atomic(s.items[0], scope);
    check_atomic(s.items[1], scope);
  }

  void check_exp(const Sexp& s, const std::set<Var>& scope) {
    if (is_atomic(s)) {
      check_atomic(s, scope);
      return;
    }
    if (s.items.empty()) {
      violate(s, "empty form");
      return;
    }
    const Sexp& head = s.items[0];
    if (head.is_atom && (head.atom == "let" || head.atom == "let*")) {
      bool star = head.atom == "let*";
      if (s.items.size() != 3) {
        violate(s, head.atom + " expects a binding list and a body");
        return;
      }
      const Sexp& bindings = s.items[1];
      if (bindings.is_atom || bindings.items.empty()) {
        violate(s, head.atom + " expects a non-empty binding list");
        return;
      }
      if (!star && bindings.items.size() != 1) {
        violate(s, "let binds exactly one variable; use let* for more");
        return;
      }
      std::set<Var> scope2 = scope;
      for (const Sexp& b : bindings.items) {
        if (b.is_atom || b.items.size() != 2 || !b.items[0].is_atom ||
            !is_identifier(b.items[0].atom)) {
          violate(b, "binding must be [identifier rhs]");
          continue;
        }
        const std::string& x = b.items[0].atom;
        if (prim_from_name(x)) {
          violate(b, "primitive name '" + x + "' cannot be a binder");
          continue;
        }
        const Sexp& rhs = b.items[1];
        if (is_atomic(rhs))
          check_atomic(rhs, scope2);  // atomic-let sugar
        else
          check_call(rhs, scope2);
        scope2.insert(x);
      }
      check_exp(s.items[2], scope2);
      return;
    }
    if (head.is_atom && head.atom == "if") {
      if (s.items.size() != 4) {
        violate(s, "if expects (if cond then else)");
        return;
      }
      if (!is_atomic(s.items[1])) {
        violate(s.items[1], "if condition must be atomic");
      } else {
        check_atomic(s.items[1], scope);
      }
      check_exp(s.items[2], scope);
      check_exp(s.items[3], scope);
      return;
    }
    check_call(s, scope);  // tail call position
  }
};

// ---------------------------------------------------------------------------
// Builder: assumes the checker passed; desugars, alpha-renames, labels.

class Builder {
 public:
  Builder() = default;

  const Exp* build_program(const Sexp& s) {
    std::map<Var, Var> scope;
    return build_exp(s, scope);
  }

  std::vector<std::unique_ptr<Exp>> take_exps() { return std::move(exps_); }
  std::vector<std::unique_ptr<Lam>> take_lams() { return std::move(lams_); }

 private:
  std::vector<std::unique_ptr<Exp>> exps_;
  std::vector<std::unique_ptr<Lam>> lams_;
  std::set<Var> used_names_;

  Exp* make(std::variant<LetCall, Return, If, TailCall> node) {
    exps_.push_back(std::make_unique<Exp>(Exp{Label{0}, std::move(node)}));
    return exps_.back().get();
  }

  Var fresh_binder(const Var& x) {
    if (!used_names_.count(x)) {
      used_names_.insert(x);
      return x;
    }
    for (int n = 2;; ++n) {
      Var candidate = x + "%" + std::to_string(n);
      if (!used_names_.count(candidate)) {
        used_names_.insert(candidate);
        return candidate;
      }
    }
  }

  static bool is_lambda(const Sexp& s) {
    return !s.is_atom && s.items.size() == 3 && s.items[0].is_atom &&
           s.items[0].atom == "lambda";
  }

  static bool is_atomic(const Sexp& s) { return s.is_atom || is_lambda(s); }

  AtomicExp build_atomic(const Sexp& s, const std::map<Var, Var>& scope) {
    if (is_lambda(s)) {
      const Var& p = s.items[1].items[0].atom;
      Var renamed = fresh_binder(p);
      std::map<Var, Var> inner = scope;
      inner[p] = renamed;
      const Exp* body = build_exp(s.items[2], inner);
      lams_.push_back(std::make_unique<Lam>(
          Lam{static_cast<uint32_t>(lams_.size()), renamed, body}));
      return lams_.back().get();
    }
    const std::string& a = s.atom;
    if (a == "#t") return BoolLit{true};
    if (a == "#f") return BoolLit{false};
    if (is_integer_atom(a)) return NumLit{std::stoll(a)};
    if (auto it = scope.find(a); it != scope.end()) return VarRef{it->second};
    if (auto p = prim_from_name(a)) return PrimRef{*p};
    throw ScopeError(a);
  }

  const Exp* build_exp(const Sexp& s, const std::map<Var, Var>& scope) {
    if (is_atomic(s)) return make(Return{build_atomic(s, scope)});
    const Sexp& head = s.items[0];
    if (head.is_atom && (head.atom == "let" || head.atom == "let*"))
      return build_let(s.items[1].items, 0, s.items[2], scope);
    if (head.is_atom && head.atom == "if") {
      AtomicExp cond = build_atomic(s.items[1], scope);
      const Exp* t = build_exp(s.items[2], scope);
      const Exp* f = build_exp(s.items[3], scope);
      return make(If{std::move(cond), t, f});
    }
    AtomicExp fn = build_atomic(s.items[0], scope);
    AtomicExp arg = build_atomic(s.items[1], scope);
    return make(TailCall{std::move(fn), std::move(arg)});
  }

  const Exp* build_let(const std::vector<Sexp>& bindings, size_t i,
                       const Sexp& body, const std::map<Var, Var>& scope) {
    if (i == bindings.size()) return build_exp(body, scope);
    const Var& x = bindings[i].items[0].atom;
    const Sexp& rhs = bindings[i].items[1];
    if (is_atomic(rhs)) {
      // (let ([x ae]) e)  =>  ((lambda (x) e) ae)
      AtomicExp ae = build_atomic(rhs, scope);
      Var renamed = fresh_binder(x);
      std::map<Var, Var> inner = scope;
      inner[x] = renamed;
      const Exp* rest = build_let(bindings, i + 1, body, inner);
      lams_.push_back(std::make_unique<Lam>(
          Lam{static_cast<uint32_t>(lams_.size()), renamed, rest}));
      return make(TailCall{lams_.back().get(), std::move(ae)});
    }
    AtomicExp fn = build_atomic(rhs.items[0], scope);
    AtomicExp arg = build_atomic(rhs.items[1], scope);
    Var renamed = fresh_binder(x);
    std::map<Var, Var> inner = scope;
    inner[x] = renamed;
    const Exp* rest = build_let(bindings, i + 1, body, inner);
    return make(LetCall{renamed, std::move(fn), std::move(arg), rest});
  }
};

// ---------------------------------------------------------------------------
// Labeling and free-variable tables

void preorder_walk_atomic(const AtomicExp& ae, std::vector<const Exp*>& order);

void preorder_walk(const Exp* e, std::vector<const Exp*>& order) {
  order.push_back(e);
  if (const auto* let = e->as_let()) {
    preorder_walk_atomic(let->fn, order);
    preorder_walk_atomic(let->arg, order);
    preorder_walk(let->body, order);
  } else if (const auto* r = e->as_return()) {
    preorder_walk_atomic(r->ae, order);
  } else if (const auto* i = e->as_if()) {
    preorder_walk_atomic(i->cond, order);
    preorder_walk(i->then_branch, order);
    preorder_walk(i->else_branch, order);
  } else if (const auto* t = e->as_tail()) {
    preorder_walk_atomic(t->fn, order);
    preorder_walk_atomic(t->arg, order);
  }
}

void preorder_walk_atomic(const AtomicExp& ae, std::vector<const Exp*>& order) {
  if (const auto* lam = std::get_if<const Lam*>(&ae))
    preorder_walk((*lam)->body, order);
}

}  // namespace

struct ProgramInternals {
  static Program assemble(const Exp* root, std::vector<std::unique_ptr<Exp>> exps,
                          std::vector<std::unique_ptr<Lam>> lams);
};

namespace {

Program assemble(const Exp* root, std::vector<std::unique_ptr<Exp>> exps,
                 std::vector<std::unique_ptr<Lam>> lams) {
  return ProgramInternals::assemble(root, std::move(exps), std::move(lams));
}

}  // namespace

Program ProgramInternals::assemble(const Exp* root,
                                   std::vector<std::unique_ptr<Exp>> exps,
                                   std::vector<std::unique_ptr<Lam>> lams) {
  std::vector<const Exp*> order;
  preorder_walk(root, order);

  std::map<const Exp*, uint32_t> position;
  for (uint32_t i = 0; i < order.size(); ++i)
    position[order[i]] = i;

  Program p;
  p.root_ = root;
  p.exps_.resize(order.size());
  for (auto& owned : exps) {
    auto it = position.find(owned.get());
    if (it == position.end()) continue;  // orphan from a hand-built tree
    owned->label = Label{it->second};
    p.exps_[it->second] = std::move(owned);
  }
  // Orphans stay alive but unlabeled past the root tree; keep them owned so
  // pointers held by callers do not dangle.
  for (auto& owned : exps)
    if (owned) p.exps_.push_back(std::move(owned));
  p.lams_ = std::move(lams);

  // Binder table and free-variable caches.
  p.exp_fv_.resize(order.size());
  p.lam_fv_.resize(p.lams_.size());
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    p.exp_fv_[position[*it]] = free_vars(*it);
  for (const auto& lam : p.lams_)
    p.lam_fv_[lam->id] = free_vars(AtomicExp{lam.get()});
  for (const auto& lam : p.lams_)
    p.binders_.emplace(lam->param, lam->body->label);
  for (const Exp* e : order)
    if (const auto* let = e->as_let()) p.binders_.emplace(let->bind, e->label);
  return p;
}

const Exp* Program::exp_at(Label l) const {
  return l.id < exps_.size() ? exps_[l.id].get() : nullptr;
}

const Lam* Program::lam_at(uint32_t id) const {
  return id < lams_.size() ? lams_[id].get() : nullptr;
}

const std::set<Var>& Program::free_vars(const Exp* e) const {
  return exp_fv_.at(e->label.id);
}

const std::set<Var>& Program::lam_free_vars(const Lam* lam) const {
  return lam_fv_.at(lam->id);
}

std::set<Var> free_vars(const AtomicExp& ae) {
  if (const auto* v = std::get_if<VarRef>(&ae)) return {v->name};
  if (const auto* lam = std::get_if<const Lam*>(&ae)) {
    std::set<Var> fv = free_vars((*lam)->body);
    fv.erase((*lam)->param);
    return fv;
  }
  return {};
}

std::set<Var> free_vars(const Exp* e) {
  std::set<Var> fv;
  auto merge = [&fv](std::set<Var> more) {
    fv.insert(more.begin(), more.end());
  };
  if (const auto* let = e->as_let()) {
    merge(free_vars(let->fn));
    merge(free_vars(let->arg));
    std::set<Var> body = free_vars(let->body);
    body.erase(let->bind);
    merge(std::move(body));
  } else if (const auto* r = e->as_return()) {
    merge(free_vars(r->ae));
  } else if (const auto* i = e->as_if()) {
    merge(free_vars(i->cond));
    merge(free_vars(i->then_branch));
    merge(free_vars(i->else_branch));
  } else if (const auto* t = e->as_tail()) {
    merge(free_vars(t->fn));
    merge(free_vars(t->arg));
  }
  return fv;
}

ValidationReport validate_anf(std::string_view source) {
  ValidationReport report;
  try {
    Reader reader(source);
    Sexp s = reader.read_single();
    Checker checker(report);
    checker.check_program(s);
  } catch (const ParseError& e) {
    report.violations.push_back({e.line, e.col, e.what()});
  }
  return report;
}

Program parse_program(std::string_view source) {
  Reader reader(source);
  Sexp s = reader.read_single();

  ValidationReport report;
  Checker checker(report);
  checker.check_program(s);
  for (const Violation& v : report.violations) {
    if (v.message.rfind("unbound variable", 0) == 0)
      throw ScopeError(v.message.substr(std::string("unbound variable: ").size()));
    throw ParseError(v.line, v.col, v.message);
  }

  Builder builder;
  const Exp* root = builder.build_program(s);
  return assemble(root, builder.take_exps(), builder.take_lams());
}

ValidationReport validate_anf(const Program& p) {
  ValidationReport report;
  auto violate = [&report](const Exp* e, std::string msg) {
    report.violations.push_back(
        {0, static_cast<int>(e ? e->label.id : 0), std::move(msg)});
  };

  std::vector<const Exp*> order;
  preorder_walk(p.root(), order);
  std::set<const Exp*> seen;
  for (uint32_t i = 0; i < order.size(); ++i) {
    const Exp* e = order[i];
    if (!seen.insert(e).second) violate(e, "expression node shared in tree");
    if (e->label.id != i) violate(e, "label out of preorder position");
    if (p.exp_at(e->label) != e) violate(e, "label table mismatch");
  }
  if (order.size() != p.exp_count())
    violate(p.root(), "label table is not a bijection onto the root tree");

  // Binder uniqueness across the whole program.
  std::map<Var, int> binder_counts;
  for (const Exp* e : order)
    if (const auto* let = e->as_let()) ++binder_counts[let->bind];
  std::set<const Lam*> lam_seen;
  std::vector<const Lam*> lams;
  for (const Exp* e : order) {
    auto scan = [&](const AtomicExp& ae) {
      if (const auto* l = std::get_if<const Lam*>(&ae))
        if (lam_seen.insert(*l).second) lams.push_back(*l);
    };
    if (const auto* let = e->as_let()) {
      scan(let->fn);
      scan(let->arg);
    } else if (const auto* r = e->as_return()) {
      scan(r->ae);
    } else if (const auto* i = e->as_if()) {
      scan(i->cond);
    } else if (const auto* t = e->as_tail()) {
      scan(t->fn);
      scan(t->arg);
    }
  }
  for (const Lam* l : lams) ++binder_counts[l->param];
  for (const auto& [name, count] : binder_counts)
    if (count > 1)
      violate(p.root(), "binder '" + name + "' bound at " +
                            std::to_string(count) + " sites");

  // Scope closure: free variables of every node resolve to an enclosing
  // binder; the root must be closed.
  if (!free_vars(p.root()).empty())
    violate(p.root(), "program has free variables");
  return report;
}

// ---------------------------------------------------------------------------
// Printer

namespace {

void print_exp_rec(const Exp* e, std::ostringstream& out);

void print_atomic_rec(const AtomicExp& ae, std::ostringstream& out) {
  if (const auto* v = std::get_if<VarRef>(&ae)) {
    out << v->name;
  } else if (const auto* lam = std::get_if<const Lam*>(&ae)) {
    out << "(lambda (" << (*lam)->param << ") ";
    print_exp_rec((*lam)->body, out);
    out << ")";
  } else if (const auto* b = std::get_if<BoolLit>(&ae)) {
    out << (b->value ? "#t" : "#f");
  } else if (const auto* n = std::get_if<NumLit>(&ae)) {
    out << n->value;
  } else if (const auto* pr = std::get_if<PrimRef>(&ae)) {
    out << prim_name(pr->op);
  }
}

void print_exp_rec(const Exp* e, std::ostringstream& out) {
  if (const auto* let = e->as_let()) {
    out << "(let ([" << let->bind << " (";
    print_atomic_rec(let->fn, out);
    out << " ";
    print_atomic_rec(let->arg, out);
    out << ")]) ";
    print_exp_rec(let->body, out);
    out << ")";
  } else if (const auto* r = e->as_return()) {
    print_atomic_rec(r->ae, out);
  } else if (const auto* i = e->as_if()) {
    out << "(if ";
    print_atomic_rec(i->cond, out);
    out << " ";
    print_exp_rec(i->then_branch, out);
    out << " ";
    print_exp_rec(i->else_branch, out);
    out << ")";
  } else if (const auto* t = e->as_tail()) {
    out << "(";
    print_atomic_rec(t->fn, out);
    out << " ";
    print_atomic_rec(t->arg, out);
    out << ")";
  }
}

}  // namespace

std::string print_exp(const Exp* e) {
  std::ostringstream out;
  print_exp_rec(e, out);
  return out.str();
}

std::string print_atomic(const AtomicExp& ae) {
  std::ostringstream out;
  print_atomic_rec(ae, out);
  return out.str();
}

std::string print_program(const Program& p) { return print_exp(p.root()); }

// ---------------------------------------------------------------------------
// AstBuilder

const Exp* AstBuilder::let_call(Var bind, AtomicExp fn, AtomicExp arg,
                                const Exp* body) {
  exps_.push_back(std::make_unique<Exp>(
      Exp{Label{0}, LetCall{std::move(bind), std::move(fn), std::move(arg), body}}));
  return exps_.back().get();
}

const Exp* AstBuilder::ret(AtomicExp ae) {
  exps_.push_back(std::make_unique<Exp>(Exp{Label{0}, Return{std::move(ae)}}));
  return exps_.back().get();
}

const Exp* AstBuilder::if_exp(AtomicExp cond, const Exp* t, const Exp* f) {
  exps_.push_back(
      std::make_unique<Exp>(Exp{Label{0}, If{std::move(cond), t, f}}));
  return exps_.back().get();
}

const Exp* AstBuilder::tail_call(AtomicExp fn, AtomicExp arg) {
  exps_.push_back(
      std::make_unique<Exp>(Exp{Label{0}, TailCall{std::move(fn), std::move(arg)}}));
  return exps_.back().get();
}

const Lam* AstBuilder::lam(Var param, const Exp* body) {
  lams_.push_back(std::make_unique<Lam>(
      Lam{static_cast<uint32_t>(lams_.size()), std::move(param), body}));
  return lams_.back().get();
}

Program AstBuilder::finish(const Exp* root) {
  return assemble(root, std::move(exps_), std::move(lams_));
}

}  // namespace cfa
