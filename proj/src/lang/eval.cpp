#include "dope/lang/eval.h"

#include "dope/errors.h"
#include "dope/lang/parser.h"

namespace dope::lang {

namespace {

struct Config
{
  Valuation state;
  std::vector<const Stmt *> stack;  // continuation, top at the back
  size_t steps = 0;
};

std::string where(const Stmt & s)
{
  std::string text = to_string(s);
  if (auto nl = text.find('\n'); nl != std::string::npos) text = text.substr(0, nl) + " ...";
  return "'" + text + "' at line " + std::to_string(s.pos.line);
}

}  // namespace

Valuation initial_state(const Program & p, const Valuation & params,
                        const Valuation & inputs)
{
  auto ps = p.of_role(Role::Param);
  auto is = p.of_role(Role::Input);
  if (ps.size() != params.size() || is.size() != inputs.size())
    throw DataError("expected " + std::to_string(ps.size()) + " parameter and "
                    + std::to_string(is.size()) + " input values");
  Valuation st(p.decls.size());
  for (size_t k = 0; k < p.decls.size(); ++k)
    if (p.decls[k].role == Role::Output || p.decls[k].role == Role::Local)
      st[k] = p.initial(k);
  auto place = [&](const std::vector<size_t> & slots, const Valuation & vals) {
    for (size_t k = 0; k < slots.size(); ++k) {
      const Decl & d = p.decls[slots[k]];
      if (!d.domain.exact() && !d.domain.contains(vals[k]))
        throw DataError(std::string(role_name(d.role)) + " '" + d.name + "' = "
                        + vals[k].str() + " is not on its grid "
                        + d.domain.str());
      st[slots[k]] = vals[k];
    }
  };
  place(ps, params);
  place(is, inputs);
  return st;
}

Outcome eval(const Program & p, const Valuation & params,
             const Valuation & inputs, size_t budget)
{
  Outcome out;
  std::set<std::string> warned;
  auto outs = p.of_role(Role::Output);
  std::vector<Config> work;
  work.push_back({initial_state(p, params, inputs), {p.body.get()}, 0});

  while (!work.empty()) {
    Config c = std::move(work.back());
    work.pop_back();
    while (!c.stack.empty()) {
      const Stmt & s = *c.stack.back();
      c.stack.pop_back();
      if (s.kind == StmtKind::Seq) {
        for (auto it = s.items.rbegin(); it != s.items.rend(); ++it)
          c.stack.push_back(it->get());
        continue;
      }
      if (++c.steps > budget) break;
      Env env{c.state.data(), nullptr};
      try {
        switch (s.kind) {
          case StmtKind::Skip: break;
          case StmtKind::Assign: {
            const Decl & d = p.decls[s.slot];
            Value v = eval_num(*s.e, env);
            Value w = d.domain.snap(v);
            if (w != v && warned.insert(d.name).second)
              out.warnings.push_back("value " + v.str() + " of '" + d.name
                                     + "' snapped to " + w.str());
            c.state[s.slot] = w;
            break;
          }
          case StmtKind::Nondet: {
            Value lo = eval_num(*s.lo, env), hi = eval_num(*s.hi, env);
            if (hi < lo)
              throw EvalError("empty range [" + lo.str() + ", " + hi.str() + "]");
            auto pts = p.decls[s.slot].domain.points_in(lo, hi);
            if (pts.empty())
              throw EvalError("range [" + lo.str() + ", " + hi.str()
                              + "] has no grid point");
            for (size_t k = 1; k < pts.size(); ++k) {
              Config fork = c;
              fork.state[s.slot] = pts[k];
              work.push_back(std::move(fork));
            }
            c.state[s.slot] = pts[0];
            break;
          }
          case StmtKind::If:
            c.stack.push_back(eval_bool(*s.e, env) ? s.then_s.get() : s.else_s.get());
            break;
          case StmtKind::While:
            if (eval_bool(*s.e, env)) {
              c.stack.push_back(&s);
              c.stack.push_back(s.body.get());
            }
            break;
          case StmtKind::Seq: break;
        }
      } catch (const DopeError & e) {
        throw EvalError(std::string(e.what()) + " in " + where(s));
      }
    }
    if (c.steps > budget) {
      out.diverged = true;
      continue;
    }
    Valuation o;
    o.reserve(outs.size());
    for (size_t k : outs) o.push_back(c.state[k]);
    out.outputs.insert(std::move(o));
  }
  return out;
}

}  // namespace dope::lang
