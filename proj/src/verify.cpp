/* Copyright 2026 The refactor-kit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "refactor/verify.hpp"

#include <algorithm>

#include "refactor/parallel.hpp"

namespace refactor {

const char* to_string(VerifyError e) {
  switch (e) {
    case VerifyError::None: return "ok";
    case VerifyError::UnknownLabel: return "unknown_label";
    case VerifyError::HypothesisNotInContext: return "hypothesis_not_in_context";
    case VerifyError::ForwardReference: return "forward_reference";
    case VerifyError::StackUnderflow: return "stack_underflow";
    case VerifyError::TypecodeMismatch: return "typecode_mismatch";
    case VerifyError::UnificationMismatch: return "unification_mismatch";
    case VerifyError::DisjointViolation: return "disjoint_violation";
    case VerifyError::FinalMismatch: return "final_mismatch";
    case VerifyError::ResidualStack: return "residual_stack";
    case VerifyError::EmptyProof: return "empty_proof";
    case VerifyError::IncompleteProof: return "incomplete_proof";
  }
  return "unknown";
}

ProofContext statement_context(const Database& db, Label provable) {
  const Statement& s = db[provable];
  ProofContext ctx;
  ctx.hypotheses = s.context_hypotheses;
  ctx.disjoint = s.context_disjoint;
  ctx.assertion_limit = provable;
  return ctx;
}

Expr substitute(const Expr& expr,
                const std::vector<std::pair<SymbolId, std::span<const SymbolId>>>& sigma) {
  Expr out;
  out.reserve(expr.size());
  for (SymbolId s : expr) {
    auto it = std::find_if(sigma.begin(), sigma.end(),
                           [s](const auto& p) { return p.first == s; });
    if (it == sigma.end()) {
      out.push_back(s);
    } else {
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  return out;
}

namespace {

// RPN stack machine. Step results are kept so that trace entries and
// compressed-proof backreferences can point at them.
class Replayer {
 public:
  Replayer(const Database& db, const ProofContext& ctx, VerifyResult& out)
      : db_(db), ctx_(ctx), out_(out) {}

  bool push_ref(std::size_t step, std::uint32_t target) {
    if (target >= results_.size()) {
      return fail(VerifyError::StackUnderflow, step, "bad backreference");
    }
    stack_.push_back(target);
    return true;
  }

  bool apply(std::size_t step, Label label) {
    if (is_local(label)) {
      std::uint32_t i = local_index(label);
      if (i >= ctx_.locals.size()) {
        return fail(VerifyError::UnknownLabel, step, "unknown local hypothesis");
      }
      return push(label, ctx_.locals[i], {});
    }
    if (label >= db_.size()) return fail(VerifyError::UnknownLabel, step, "unknown label");
    const Statement& s = db_[label];
    if (is_hypothesis(s.kind)) {
      if (!std::binary_search(ctx_.hypotheses.begin(), ctx_.hypotheses.end(), label)) {
        return fail(VerifyError::HypothesisNotInContext, step,
                    "hypothesis '" + s.label + "' is not in scope");
      }
      return push(label, s.expr, {});
    }
    if (label >= ctx_.assertion_limit) {
      return fail(VerifyError::ForwardReference, step,
                  "'" + s.label + "' is not available here");
    }
    const auto& hyps = s.frame.hypotheses;
    if (stack_.size() < hyps.size()) {
      return fail(VerifyError::StackUnderflow, step,
                  "'" + s.label + "' needs " + std::to_string(hyps.size()) + " arguments");
    }
    const std::size_t base = stack_.size() - hyps.size();
    sigma_.clear();
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      const Statement& h = db_[hyps[i]];
      if (h.kind != StatementKind::Floating) continue;
      const Expr& arg = results_[stack_[base + i]];
      if (arg.empty() || arg[0] != h.expr[0]) {
        return fail(VerifyError::TypecodeMismatch, step,
                    "argument " + std::to_string(i + 1) + " of '" + s.label +
                        "' has the wrong typecode");
      }
      sigma_.emplace_back(h.expr[1], std::span<const SymbolId>(arg).subspan(1));
    }
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      const Statement& h = db_[hyps[i]];
      if (h.kind != StatementKind::Essential) continue;
      if (substitute(h.expr, sigma_) != results_[stack_[base + i]]) {
        return fail(VerifyError::UnificationMismatch, step,
                    "hypothesis '" + h.label + "' of '" + s.label + "' does not match");
      }
    }
    for (const DisjointPair& d : s.frame.disjoint) {
      if (!check_disjoint(step, s, d)) return false;
    }
    std::vector<std::uint32_t> parents(stack_.begin() + static_cast<std::ptrdiff_t>(base),
                                       stack_.end());
    stack_.resize(base);
    return push(label, substitute(s.expr, sigma_), std::move(parents));
  }

  bool finish(const Expr& conclusion, std::size_t steps) {
    if (stack_.empty()) return fail(VerifyError::EmptyProof, steps, "empty proof");
    if (stack_.size() > 1) {
      return fail(VerifyError::ResidualStack, steps,
                  std::to_string(stack_.size()) + " entries left on the stack");
    }
    if (results_[stack_.back()] != conclusion) {
      return fail(VerifyError::FinalMismatch, steps,
                  "proved '" + db_.render(results_[stack_.back()]) + "', expected '" +
                      db_.render(conclusion) + "'");
    }
    return true;
  }

  std::vector<Expr>& results() { return results_; }
  std::vector<std::vector<std::uint32_t>>& parents() { return parents_; }
  std::vector<Label>& labels() { return labels_; }
  std::vector<DisjointPair>& required() { return required_; }

 private:
  bool push(Label label, Expr e, std::vector<std::uint32_t> parents) {
    stack_.push_back(static_cast<std::uint32_t>(results_.size()));
    results_.push_back(std::move(e));
    labels_.push_back(label);
    parents_.push_back(std::move(parents));
    return true;
  }

  bool check_disjoint(std::size_t step, const Statement& s, const DisjointPair& d) {
    auto find = [&](SymbolId v) -> std::span<const SymbolId> {
      for (const auto& [var, repl] : sigma_) {
        if (var == v) return repl;
      }
      return {};
    };
    auto a = find(d.first);
    auto b = find(d.second);
    for (SymbolId x : a) {
      if (!db_.is_variable(x)) continue;
      for (SymbolId y : b) {
        if (!db_.is_variable(y)) continue;
        if (x == y) {
          return fail(VerifyError::DisjointViolation, step,
                      "'" + s.label + "' substitutes variable '" +
                          std::string(db_.symbol(x)) + "' into a disjoint pair");
        }
        DisjointPair p = DisjointPair::make(x, y);
        if (ctx_.collect_disjoint) {
          required_.push_back(p);
        } else if (!std::binary_search(ctx_.disjoint.begin(), ctx_.disjoint.end(), p)) {
          return fail(VerifyError::DisjointViolation, step,
                      "missing $d " + std::string(db_.symbol(p.first)) + " " +
                          std::string(db_.symbol(p.second)) + " for '" + s.label + "'");
        }
      }
    }
    return true;
  }

  bool fail(VerifyError e, std::size_t step, std::string msg) {
    out_.error = e;
    out_.step = step;
    out_.message = std::move(msg);
    return false;
  }

  const Database& db_;
  const ProofContext& ctx_;
  VerifyResult& out_;
  std::vector<std::uint32_t> stack_;
  std::vector<Expr> results_;
  std::vector<Label> labels_;
  std::vector<std::vector<std::uint32_t>> parents_;
  std::vector<std::pair<SymbolId, std::span<const SymbolId>>> sigma_;
  std::vector<DisjointPair> required_;
};

}  // namespace

VerifyResult verify_labels(const Database& db, const Expr& conclusion,
                           std::span<const Label> labels, const ProofContext& ctx,
                           bool want_trace) {
  VerifyResult out;
  Replayer r(db, ctx, out);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!r.apply(i, labels[i])) return out;
  }
  if (!r.finish(conclusion, labels.size())) return out;
  if (ctx.collect_disjoint) {
    auto& req = r.required();
    std::sort(req.begin(), req.end());
    req.erase(std::unique(req.begin(), req.end()), req.end());
    out.required_disjoint = std::move(req);
  }
  if (want_trace) {
    out.trace.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      out.trace[i].label = r.labels()[i];
      out.trace[i].prop = std::move(r.results()[i]);
      out.trace[i].parents = std::move(r.parents()[i]);
    }
  }
  return out;
}

VerifyResult verify_proof(const Database& db, const Expr& conclusion,
                          std::span<const std::string> labels, const ProofContext& ctx) {
  std::vector<Label> resolved;
  resolved.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto l = db.find(labels[i]);
    if (!l) {
      VerifyResult out;
      out.error = VerifyError::UnknownLabel;
      out.step = i;
      out.message = "unknown label '" + labels[i] + "'";
      return out;
    }
    resolved.push_back(*l);
  }
  return verify_labels(db, conclusion, resolved, ctx);
}

VerifyResult verify_statement(const Database& db, Label provable) {
  VerifyResult out;
  const Statement& s = db[provable];
  if (s.incomplete) {
    out.error = VerifyError::IncompleteProof;
    out.message = "proof of '" + s.label + "' is incomplete";
    return out;
  }
  ProofContext ctx = statement_context(db, provable);
  Replayer r(db, ctx, out);
  // Map proof step index -> result slot; backrefs reuse the target's slot.
  std::vector<std::uint32_t> slot(s.proof.size(), 0);
  std::uint32_t produced = 0;
  for (std::size_t i = 0; i < s.proof.size(); ++i) {
    const ProofStep& step = s.proof[i];
    if (step.backref) {
      if (step.value >= i || s.proof[step.value].backref) {
        out.error = VerifyError::StackUnderflow;
        out.step = i;
        out.message = "bad backreference";
        return out;
      }
      if (!r.push_ref(i, slot[step.value])) return out;
      continue;
    }
    slot[i] = produced++;
    if (!r.apply(i, step.value)) return out;
  }
  r.finish(s.expr, s.proof.size());
  return out;
}

std::vector<VerifyFailure> verify_database(const Database& db, std::span<const Label> only,
                                           unsigned threads) {
  std::vector<Label> targets(only.begin(), only.end());
  if (targets.empty()) targets = db.provables();
  std::vector<VerifyResult> results(targets.size());
  parallel_for(targets.size(), threads, [&](std::size_t i) {
    results[i] = verify_statement(db, targets[i]);
  });
  std::vector<VerifyFailure> failures;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!results[i].ok()) failures.push_back({targets[i], std::move(results[i])});
  }
  return failures;
}

}  // namespace refactor
