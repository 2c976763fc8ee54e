#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccv/syntax.hpp"

namespace ccv {

// Bracket-sensitive term for the evaluator. Let/let and μ/let nesting is kept
// exactly as built; a let around a jump is always read as [k](<M>x:=N).
struct RawTerm {
  Expr e;
};

// Pushes lets around jumps inside their jumpers; bracketing is otherwise untouched.
RawTerm raw_from(const Expr& e);
// Quotient term → raw term with right-hand-side bracketing.
RawTerm embed(const Expr& t);
Expr project(const RawTerm& r);

enum class FrameKind { ValueFn, ArgPending, LetBound };  // V□, □M, <M>x:=□
struct Frame {
  FrameKind kind;
  Expr other;        // V, M, or the let body M
  std::string name;  // let binder
};
// Outermost frame first.
using EvalContext = std::vector<Frame>;
Expr plug(const EvalContext& ctx, const Expr& focus);

struct Decomposition {
  EvalContext ctx;
  Expr focus;  // a value or a μ-term
};
Decomposition decompose(const RawTerm& t);

struct MachineStep {
  std::string rule;
  RawTerm term;
};

std::optional<MachineStep> e0_step(const RawTerm& t, Fresh& fresh);
std::optional<MachineStep> e0_step(const RawTerm& t);
std::optional<MachineStep> e_step(const RawTerm& t, Fresh& fresh);
std::optional<MachineStep> e_step(const RawTerm& t);

struct EvalOutcome {
  enum class Kind { Finished, Stalled, FuelExhausted } kind;
  RawTerm term;
  std::size_t steps = 0;
  std::vector<MachineStep> trace;  // filled only when recording
};
const char* outcome_name(EvalOutcome::Kind k);

EvalOutcome evaluate(const RawTerm& t, std::size_t fuel, bool record = false);
// {"step","rule","term"} with the term projected to S-expression form.
std::string machine_trace_line(std::size_t step, const MachineStep& s);
bool terminates(const EvalOutcome& o);
bool is_e_normal(const RawTerm& t);

}  // namespace ccv
