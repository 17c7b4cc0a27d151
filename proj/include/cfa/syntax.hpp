#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Labeled ANF abstract syntax: parsing, alpha-renaming, preorder labeling,
// free-variable tables and structural validation.

namespace cfa {

using Var = std::string;

// Expression labels are preorder naturals, dense in [0, exp_count).
struct Label {
  uint32_t id = 0;
  auto operator<=>(const Label&) const = default;
};

enum class Prim {
  Not,
  Add1,
  Sub1,
  IsZero,
  Add,
  Sub,
  Mul,
};

bool prim_is_binary(Prim p);
std::string_view prim_name(Prim p);
std::optional<Prim> prim_from_name(std::string_view name);

struct Exp;

// Lambdas live in the Program arena beside Exp nodes; they carry their own
// id sequence (creation order) since they are atoms, not Exp nodes.
struct Lam {
  uint32_t id = 0;
  Var param;
  const Exp* body = nullptr;
};

struct VarRef {
  Var name;
  auto operator<=>(const VarRef&) const = default;
};
struct BoolLit {
  bool value = false;
  auto operator<=>(const BoolLit&) const = default;
};
struct NumLit {
  int64_t value = 0;
  auto operator<=>(const NumLit&) const = default;
};
struct PrimRef {
  Prim op;
  auto operator<=>(const PrimRef&) const = default;
};

using AtomicExp = std::variant<VarRef, const Lam*, BoolLit, NumLit, PrimRef>;

struct LetCall {
  Var bind;
  AtomicExp fn;
  AtomicExp arg;
  const Exp* body = nullptr;
};
struct Return {
  AtomicExp ae;
};
struct If {
  AtomicExp cond;
  const Exp* then_branch = nullptr;
  const Exp* else_branch = nullptr;
};
struct TailCall {
  AtomicExp fn;
  AtomicExp arg;
};

struct Exp {
  Label label;
  std::variant<LetCall, Return, If, TailCall> node;

  const LetCall* as_let() const { return std::get_if<LetCall>(&node); }
  const Return* as_return() const { return std::get_if<Return>(&node); }
  const If* as_if() const { return std::get_if<If>(&node); }
  const TailCall* as_tail() const { return std::get_if<TailCall>(&node); }
};

struct ParseError : std::runtime_error {
  int line;
  int col;
  ParseError(int line_, int col_, const std::string& message);
};

struct ScopeError : std::runtime_error {
  Var name;
  explicit ScopeError(const Var& name_);
};

struct Violation {
  int line = 0;
  int col = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

class Program {
 public:
  const Exp* root() const { return root_; }
  uint32_t exp_count() const { return static_cast<uint32_t>(exps_.size()); }
  uint32_t lam_count() const { return static_cast<uint32_t>(lams_.size()); }

  const Exp* exp_at(Label l) const;
  const Lam* lam_at(uint32_t id) const;

  // Binder table: every (unique) binder name to the label of the node that
  // introduces it; lambda params map to the label of the lambda's body.
  const std::map<Var, Label>& binder_table() const { return binders_; }
  bool binds(const Var& x) const { return binders_.count(x) != 0; }

  const std::set<Var>& free_vars(const Exp* e) const;
  const std::set<Var>& lam_free_vars(const Lam* lam) const;

 private:
  friend struct ProgramInternals;

  const Exp* root_ = nullptr;
  std::vector<std::unique_ptr<Exp>> exps_;   // indexed by label id
  std::vector<std::unique_ptr<Lam>> lams_;   // indexed by lam id
  std::map<Var, Label> binders_;
  std::vector<std::set<Var>> exp_fv_;
  std::vector<std::set<Var>> lam_fv_;
};

// Parses, desugars (let* and atomic-let), alpha-renames shadowed binders and
// assigns preorder labels. Throws ParseError / ScopeError.
Program parse_program(std::string_view source);

// Grammar/ANF checker over the raw s-expression text; collects every
// violation instead of stopping at the first. parse_program accepts a source
// iff this report is empty.
ValidationReport validate_anf(std::string_view source);

// Structural re-validation of a built Program: label bijection, binder
// uniqueness, scope closure. Trivially clean for parser output; guards
// hand-built trees.
ValidationReport validate_anf(const Program& p);

std::set<Var> free_vars(const Exp* e);
std::set<Var> free_vars(const AtomicExp& ae);

// Canonical printer; parse(print(parse(s))) == parse(s) node for node.
std::string print_program(const Program& p);
std::string print_exp(const Exp* e);
std::string print_atomic(const AtomicExp& ae);

// Test-facing escape hatch: assembles a Program from hand-built nodes without
// the parser's grammar guarantees (validate_anf(Program) still applies).
class AstBuilder {
 public:
  const Exp* let_call(Var bind, AtomicExp fn, AtomicExp arg, const Exp* body);
  const Exp* ret(AtomicExp ae);
  const Exp* if_exp(AtomicExp cond, const Exp* t, const Exp* f);
  const Exp* tail_call(AtomicExp fn, AtomicExp arg);
  const Lam* lam(Var param, const Exp* body);
  Program finish(const Exp* root);

 private:
  std::vector<std::unique_ptr<Exp>> exps_;
  std::vector<std::unique_ptr<Lam>> lams_;
};

}  // namespace cfa
