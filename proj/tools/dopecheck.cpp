// dopecheck: command line front end. Every command builds a JSON report;
// the text output is rendered from that report.

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dope/casestudy.h"
#include "dope/errors.h"
#include "dope/hypercheck.h"
#include "dope/lang/parser.h"
#include "dope/parallel.h"
#include "dope/reactive.h"
#include "dope/seqcheck.h"
#include "dope/wpengine.h"

using namespace dope;
using json = nlohmann::ordered_json;

namespace {

constexpr int kUsage = 64;
constexpr int kData = 65;
constexpr int kInternal = 70;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string read_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256(const std::string & bytes)
{
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &n, EVP_sha256(), nullptr))
    throw DopeError("sha256 failed");
  std::ostringstream os;
  for (unsigned k = 0; k < n; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
  return os.str();
}

json valuation(const std::vector<std::string> & names, const Valuation & v)
{
  json j = json::object();
  for (size_t k = 0; k < names.size() && k < v.size(); ++k) j[names[k]] = v[k].str();
  return j;
}

std::vector<Value> parse_values(const std::string & s)
{
  std::vector<Value> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(Value::parse(item));
  return out;
}

// ---- text rendering

std::string flat(const json & j)
{
  if (j.is_string()) return j.get<std::string>();
  if (j.is_object()) {
    std::string s;
    for (auto & [k, v] : j.items()) s += (s.empty() ? "" : " ") + k + "=" + flat(v);
    return s;
  }
  if (j.is_array()) {
    std::string s = "[";
    for (size_t k = 0; k < j.size(); ++k) s += (k ? ", " : "") + flat(j[k]);
    return s + "]";
  }
  return j.dump();
}

bool structured(const json & v)
{
  if (v.is_object())
    for (auto & [k, e] : v.items())
      if (!e.is_primitive() && !(e.is_array() && (e.empty() || e[0].is_primitive()))) return true;
  return v.is_array() && !v.empty() && v[0].is_object();
}

void print_fields(std::ostream & os, const json & j, const std::string & indent)
{
  for (auto & [k, v] : j.items()) {
    if (v.is_object() && structured(v)) {
      os << indent << k << ":\n";
      print_fields(os, v, indent + "  ");
    } else if (v.is_array() && structured(v)) {
      os << indent << k << ":\n";
      for (auto & e : v) os << indent << "  - " << flat(e) << "\n";
    } else if (v.is_string() && v.get<std::string>().find('\n') != std::string::npos) {
      os << indent << k << ":\n";
      std::istringstream ls(v.get<std::string>());
      for (std::string line; std::getline(ls, line);) os << indent << "  " << line << "\n";
    } else {
      os << indent << k << ": " << flat(v) << "\n";
    }
  }
}

void emit(const json & report, bool as_json)
{
  if (as_json)
    std::cout << report.dump(2) << "\n";
  else
    print_fields(std::cout, report, "");
}

json header(const std::string & command, const std::vector<std::pair<std::string, std::string>> & files)
{
  json r;
  r["command"] = command;
  json d = json::object();
  for (auto & [role, path] : files) d[role] = sha256(read_file(path));
  if (!d.empty()) r["digests"] = d;
  return r;
}

// ---- commands

struct Common
{
  bool json = false;
  std::string command;
};

int cmd_seq(const Common & g, const std::string & prog_path, const std::string & contract_path,
            const std::string & prop, size_t budget, const std::string & eps)
{
  json r = header(g.command, {{"program", prog_path}, {"contract", contract_path}});
  auto t0 = Clock::now();
  lang::Program prog = lang::parse_program(read_file(prog_path));
  Contract c = load_contract(contract_path);
  SeqOptions so;
  so.budget = budget;
  if (!eps.empty()) so.continuity_eps = Value::parse(eps);
  SeqChecker ck(prog, c, so);
  SeqProperty p = parse_seq_property(prop);
  SeqVerdict v = ck.check(p);
  r["property"] = property_name(p);
  r["verdict"] = status_name(v.status);
  if (!v.reason.empty()) r["reason"] = v.reason;
  r["tuples"] = v.tuples;
  r["evaluations"] = v.evals;
  if (v.continuity) r["continuity"] = v.continuity->str();
  if (v.resolution) r["resolution"] = v.resolution->str();
  if (!v.warnings.empty()) r["warnings"] = v.warnings;
  if (v.witness) {
    const SeqWitness & w = *v.witness;
    auto pn = ck.param_names(), in = ck.input_names(), on = ck.output_names();
    json wj;
    if (!pn.empty()) {
      wj["p"] = valuation(pn, w.p);
      wj["p'"] = valuation(pn, w.p2);
    }
    wj["i"] = valuation(in, w.i);
    wj["i'"] = valuation(in, w.i2);
    json o1 = json::array(), o2 = json::array();
    for (auto & o : w.out1) o1.push_back(valuation(on, o));
    for (auto & o : w.out2) o2.push_back(valuation(on, o));
    wj["outputs"] = o1;
    wj["outputs'"] = o2;
    if (w.div1) wj["diverges"] = true;
    if (w.div2) wj["diverges'"] = true;
    wj["measured"] = w.measured.str();
    wj["bound"] = w.bound.str();
    if (w.item) wj["item"] = w.item;
    wj["replayed"] = replay_witness(prog, c, p, w, budget);
    r["witness"] = wj;
  }
  r["duration_s"] = since(t0);
  emit(r, g.json);
  return exit_code(v.status);
}

int cmd_wp(const Common & g, const std::string & prog_path, const std::string & contract_path,
           const std::string & prop, unsigned unroll, const std::string & emit_vc, bool all,
           size_t max_chars)
{
  json r = header(g.command, {{"program", prog_path}, {"contract", contract_path}});
  auto t0 = Clock::now();
  lang::Program prog = lang::parse_program(read_file(prog_path));
  Contract c = load_contract(contract_path);
  wp::Vc vc = wp::make_vc(prop, prog, c, unroll);
  if (!emit_vc.empty()) {
    std::ofstream out(emit_vc);
    if (!out) throw DataError("cannot write '" + emit_vc + "'");
    for (size_t k = 0; k < vc.parts.size(); ++k)
      out << "# " << vc.part_names[k] << "\n" << wp::render(vc.parts[k], size_t(-1)) << "\n";
  }
  wp::Validity val = wp::check_vc(vc, all);
  r["property"] = vc.property;
  r["verdict"] = status_name(val.status);
  r["unroll"] = unroll;
  json parts = json::array();
  for (size_t k = 0; k < vc.parts.size(); ++k)
    parts.push_back({{"name", vc.part_names[k]},
                     {"nodes", wp::dag_size(vc.parts[k])},
                     {"formula", wp::render(vc.parts[k], max_chars)}});
  r["vc"] = parts;
  if (vc.uses_y) {
    json ys = json::array();
    for (auto & y : vc.ys) ys.push_back(y.str());
    r["y_values"] = ys;
  }
  r["states"] = val.states;
  r["unknown_states"] = val.unknown_states;
  if (!vc.notes.empty()) r["notes"] = vc.notes;
  auto ce = [&](const wp::CounterExample & x) {
    json j = valuation(vc.vars, x.state);
    if (x.y) j["Y"] = x.y->str();
    j["part"] = vc.part_names[x.part];
    return j;
  };
  if (val.first) r["counterexample"] = ce(*val.first);
  if (all) {
    json a = json::array();
    for (auto & x : val.all) a.push_back(ce(x));
    r["counterexamples"] = a;
  }
  r["duration_s"] = since(t0);
  emit(r, g.json);
  return exit_code(val.status);
}

json lasso_json(const react::Signature & sig, const react::Lasso & t)
{
  std::vector<std::string> names;
  for (auto & s : sig.signals()) names.push_back(s.name);
  json j;
  for (auto * part : {&t.stem, &t.loop}) {
    json a = json::array();
    for (auto & l : *part) a.push_back(valuation(names, sig.decode(l)));
    j[part == &t.stem ? "stem" : "loop"] = a;
  }
  return j;
}

struct HyperArgs
{
  std::string model, contract, mode = "strengthen", property = "robust", a, b;
  size_t depth = 0, budget = 2000000;
};

int cmd_hyper(const Common & g, const HyperArgs & h)
{
  if (h.a.empty() != h.b.empty()) throw CLI::ValidationError("--a and --b go together");
  json r = header(g.command, {{"model", h.model}, {"contract", h.contract}});
  auto t0 = Clock::now();
  react::TransitionSystem ts = react::load_model(h.model);
  Contract c = load_contract(h.contract);
  hyper::Options o;
  o.mode = hyper::parse_mode(h.mode);
  o.depth = h.depth;
  o.budget = h.budget;
  hyper::Property p = hyper::parse_property(h.property);
  if (!h.a.empty()) {
    hyper::Vocabulary voc(ts.signature(), c);
    o.a = voc.inputs_of(parse_values(h.a));
    o.b = voc.inputs_of(parse_values(h.b));
  }
  hyper::Verdict v = hyper::check(ts, c, p, o);
  r["property"] = hyper::property_name(p);
  r["mode"] = hyper::mode_name(v.mode);
  r["verdict"] = status_name(v.status);
  if (!v.reason.empty()) r["reason"] = v.reason;
  if (!v.caveat.empty()) r["caveat"] = v.caveat;
  r["states"] = ts.size();
  r["transitions"] = ts.edge_count();
  r["explored"] = v.explored;
  if (v.mode == hyper::Mode::Oracle) {
    r["depth"] = v.depth;
    r["complete"] = v.complete;
  }
  json inst = json::array();
  for (auto & i : v.instances)
    inst.push_back({{"name", i.name}, {"truth", hyper::truth_name(i.truth)}, {"explored", i.explored},
                    {"formula", i.formula}, {"seconds", i.seconds}});
  r["instances"] = inst;
  if (v.witness) {
    const hyper::Witness & w = *v.witness;
    json wj;
    wj["instance"] = w.instance;
    json tr = json::object();
    for (size_t k = 0; k < w.traces.size(); ++k)
      tr[k < w.vars.size() ? w.vars[k] : std::to_string(k)] = lasso_json(ts.signature(), w.traces[k]);
    wj["traces"] = tr;
    if (w.bad_at) wj["bad_at"] = *w.bad_at;
    if (w.far) wj["far"] = *w.far;
    if (!w.note.empty()) wj["note"] = w.note;
    if (v.status == Status::Doped) wj["replayed"] = hyper::replay(ts, c, p, v);
    r["witness"] = wj;
  }
  r["duration_s"] = since(t0);
  emit(r, g.json);
  return exit_code(v.status);
}

struct TableArgs
{
  std::vector<std::string> programs, steps, properties, a;
  std::string b, thrtl_step;
};

int cmd_table(const Common & g, const TableArgs & t)
{
  using namespace casestudy;
  TableOptions o;
  if (!t.programs.empty()) {
    o.programs.clear();
    for (auto & s : t.programs) o.programs.push_back(parse_ecu(s));
  }
  if (!t.steps.empty()) {
    o.nox_steps.clear();
    for (auto & s : t.steps) o.nox_steps.push_back(Value::parse(s));
  }
  if (!t.properties.empty()) {
    o.properties.clear();
    for (auto & s : t.properties) {
      auto p = hyper::parse_property(s);
      if (p == hyper::Property::Clean) throw DataError("the table covers robust and fclean only");
      o.properties.push_back(p);
    }
  }
  if (!t.a.empty()) {
    o.a.clear();
    for (auto & s : t.a) o.a.push_back(Value::parse(s));
  }
  if (!t.b.empty()) o.b = Value::parse(t.b);
  if (!t.thrtl_step.empty()) o.thrtl_step = Value::parse(t.thrtl_step);
  auto t0 = Clock::now();
  auto rows = run_table(o);
  bool ok = true;
  json rj = json::array();
  for (auto & row : rows) {
    ok = ok && row.ok();
    rj.push_back({{"program", row.program},
                  {"nox_step", row.nox_step.str()},
                  {"transitions", row.transitions},
                  {"property", row.property},
                  {"instance", row.instance},
                  {"expected", status_name(row.expected)},
                  {"got", status_name(row.got)},
                  {"match", row.ok()},
                  {"explored", row.explored},
                  {"seconds", row.seconds}});
  }
  json r;
  r["command"] = g.command;
  r["rows"] = rj;
  r["all_match"] = ok;
  r["duration_s"] = since(t0);
  if (g.json) {
    std::cout << r.dump(2) << "\n";
  } else {
    std::printf("%-8s %-9s %11s %-8s %-22s %-8s %-8s %9s  %s\n", "program", "nox_step", "transitions",
                "property", "instance", "expected", "got", "time[s]", "match");
    for (auto & row : rows)
      std::printf("%-8s %-9s %11zu %-8s %-22s %-8s %-8s %9.3f  %s\n", row.program.c_str(),
                  row.nox_step.str().c_str(), row.transitions, row.property.c_str(), row.instance.c_str(),
                  status_name(row.expected), status_name(row.got), row.seconds, row.ok() ? "yes" : "NO");
    std::printf("%zu rows, %s\n", rows.size(), ok ? "all verdicts match" : "MISMATCH");
  }
  if (!ok)
    for (auto & row : rows)
      if (!row.ok())
        std::cerr << "mismatch: " << row.program << " " << row.nox_step.str() << " " << row.property << " "
                  << row.instance << ": expected " << status_name(row.expected) << ", got "
                  << status_name(row.got) << (row.reason.empty() ? "" : " (" + row.reason + ")") << "\n";
  return ok ? 0 : 1;
}

struct CaseArgs
{
  std::string model = "ec", kind = "seq", nox_step, thrtl_step, lambda, k, out;
  bool contract = false;
};

int cmd_casestudy(const CaseArgs & a)
{
  using namespace casestudy;
  std::string text;
  if (a.model.rfind("printer-", 0) == 0) {
    if (a.kind != "seq") throw DataError("printers exist in sequential form only");
    Printer p = parse_printer(a.model.substr(8));
    text = a.contract ? dump_contract(printer_contract(p)) : printer_source(p);
  } else {
    Ecu e = parse_ecu(a.model);
    EcuConfig cfg;
    if (!a.nox_step.empty()) cfg.nox_step = Value::parse(a.nox_step);
    if (!a.thrtl_step.empty()) cfg.thrtl_step = Value::parse(a.thrtl_step);
    if (!a.lambda.empty()) cfg.lambda = Value::parse(a.lambda);
    if (!a.k.empty()) cfg.k = Value::parse(a.k);
    cfg.validate();
    if (a.kind != "seq" && a.kind != "react") throw DataError("unknown kind '" + a.kind + "' (seq or react)");
    bool react = a.kind == "react";
    if (a.contract)
      text = dump_contract(ecu_contract(react, cfg));
    else
      text = react ? react::model_to_json(build_react(e, cfg)).dump(1) + "\n" : seq_source(e, cfg);
  }
  if (a.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(a.out);
    if (!f) throw DataError("cannot write '" + a.out + "'");
    f << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"dopecheck: software doping checks for programs and reactive models"};
  app.require_subcommand(1);
  app.fallthrough();
  Common g;
  for (int k = 0; k < argc; ++k) g.command += (k ? " " : "") + std::string(argv[k]);
  unsigned jobs = 0;
  app.add_option("-j,--jobs", jobs, "worker threads (default: logical cores)")->envname("DOPECHECK_JOBS");
  app.add_flag("--json", g.json, "print the report as JSON");

  std::string prog, contract, prop = "robust", eps, emit_vc;
  size_t seq_budget = lang::kDefaultBudget, max_chars = 4000;
  unsigned unroll = wp::kDefaultUnroll;
  bool all = false;

  auto * seq = app.add_subcommand("seq", "check a sequential program by enumeration");
  seq->add_option("program", prog, "program file")->required();
  seq->add_option("contract", contract, "contract file (JSON)")->required();
  seq->add_option("--property", prop, "clean, robust, fclean or general")->capture_default_str();
  seq->add_option("--budget", seq_budget, "statements per run before a run counts as diverging")
      ->capture_default_str();
  seq->add_option("--continuity-eps", eps, "report the general check as doped once outputs jump this far");

  auto * wpc = app.add_subcommand("wp", "check a sequential program through its verification condition");
  wpc->add_option("program", prog, "program file")->required();
  wpc->add_option("contract", contract, "contract file (JSON)")->required();
  wpc->add_option("--property", prop, "clean, robust or fclean")->capture_default_str();
  wpc->add_option("--unroll", unroll, "loop unrolling depth")->capture_default_str();
  wpc->add_option("--emit-vc", emit_vc, "write the full verification condition to this file");
  wpc->add_flag("--all", all, "list every counterexample state");
  wpc->add_option("--max-chars", max_chars, "longest formula text shown in the report")->capture_default_str();

  HyperArgs h;
  auto * hy = app.add_subcommand("hyper", "check a reactive model");
  hy->add_option("model", h.model, "model file (JSON)")->required();
  hy->add_option("contract", h.contract, "contract file (JSON)")->required();
  hy->add_option("--mode", h.mode, "strengthen, exact or oracle")->capture_default_str();
  hy->add_option("--property", h.property, "clean, robust or fclean")->capture_default_str();
  hy->add_option("--a", h.a, "input values of the first trace for the negation instances, comma separated");
  hy->add_option("--b", h.b, "input values of the second trace");
  hy->add_option("--depth", h.depth, "oracle prefix length bound (0: default)")->capture_default_str();
  hy->add_option("--budget", h.budget, "exact mode: generated configurations")->capture_default_str();

  TableArgs t;
  auto * tab = app.add_subcommand("table", "run the emission control verdict table");
  tab->add_option("--program", t.programs, "ec or aec (repeatable; default both)");
  tab->add_option("--nox-step", t.steps, "NOx grid step (repeatable; default 0.05 and 0.00625)");
  tab->add_option("--property", t.properties, "robust or fclean (repeatable; default both)");
  tab->add_option("--a", t.a, "throttle value of the first trace (repeatable; default 0.1 and 1)");
  tab->add_option("--b", t.b, "throttle value of the second trace (default 2)");
  tab->add_option("--thrtl-step", t.thrtl_step, "throttle grid step (default 0.1)");

  CaseArgs ca;
  auto * cs = app.add_subcommand("casestudy", "write a case study model or contract");
  cs->add_option("--model", ca.model, "ec, aec, printer-general, printer-doped or printer-extended")
      ->capture_default_str();
  cs->add_option("--kind", ca.kind, "seq (program text) or react (JSON model)")->capture_default_str();
  cs->add_option("--nox-step", ca.nox_step, "NOx grid step (default 0.05)");
  cs->add_option("--thrtl-step", ca.thrtl_step, "throttle grid step (default 0.1)");
  cs->add_option("--lambda", ca.lambda, "sensor tolerance (default 0.1)");
  cs->add_option("--k", ca.k, "dosing constant (default 2)");
  cs->add_flag("--contract", ca.contract, "write the matching contract instead of the model");
  cs->add_option("-o,--output", ca.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    set_jobs(jobs);
    if (*seq) return cmd_seq(g, prog, contract, prop, seq_budget, eps);
    if (*wpc) return cmd_wp(g, prog, contract, prop, unroll, emit_vc, all, max_chars);
    if (*hy) return cmd_hyper(g, h);
    if (*tab) return cmd_table(g, t);
    if (*cs) return cmd_casestudy(ca);
  } catch (const CLI::Error & e) {
    std::cerr << "dopecheck: " << e.what() << "\n";
    return kUsage;
  } catch (const UnsupportedError & e) {
    std::cerr << "dopecheck: unsupported: " << e.what() << "\n";
    return kData;
  } catch (const DataError & e) {
    std::cerr << "dopecheck: " << e.what() << "\n";
    return kData;
  } catch (const EvalError & e) {
    std::cerr << "dopecheck: evaluation error: " << e.what() << "\n";
    return kData;
  } catch (const json::exception & e) {
    std::cerr << "dopecheck: malformed JSON: " << e.what() << "\n";
    return kData;
  } catch (const std::exception & e) {
    std::cerr << "dopecheck: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
