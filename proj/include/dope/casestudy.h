#pragma once

#include <string>
#include <vector>

#include "dope/contract.h"
#include "dope/hypercheck.h"
#include "dope/lang/ast.h"
#include "dope/reactive.h"
#include "dope/verdict.h"

namespace dope::casestudy {

// Discretization of the emission control example. Throttle values are
// test values when they lie in (0, test_hi].
struct EcuConfig
{
  Value thrtl_step = Value::parse("0.1");
  Value thrtl_hi = Value::integer(2);
  Value test_hi = Value::integer(1);
  Value nox_step = Value::parse("0.05");
  Value lambda = Value::parse("0.1");
  Value k = Value::integer(2);

  // DataError unless the steps divide the ranges and lambda is in (0, 1)
  void validate() const;
  Domain thrtl_domain() const;
  // [0, (1 + lambda) * thrtl_hi^2 / k], the largest reading of either model
  Domain nox_domain() const;
};

enum class Ecu { Ec, Aec };
const char * ecu_name(Ecu e);
Ecu parse_ecu(const std::string & s);

std::string seq_source(Ecu e, const EcuConfig & cfg = {});
lang::Program build_seq(Ecu e, const EcuConfig & cfg = {});

// NOx readings one step can produce from the previous reading
std::vector<Value> nox_choices(Ecu e, const EcuConfig & cfg, const Value & thrtl, const Value & nox_prev);

// States are (thrtl, NOx) with NOx the reading just written; the initial
// previous reading is 0.
react::TransitionSystem build_react(Ecu e, const EcuConfig & cfg = {});

enum class Printer { General, Doped, Extended };
const char * printer_name(Printer p);
Printer parse_printer(const std::string & s);
std::string printer_source(Printer p);
lang::Program build_printer(Printer p);

// The example contracts: sequential ones with kappa_out 1 and f(x) = x/2,
// reactive ones with kappa_out 1.1 and f(x) = x/2 + 0.3; kappa_in 2. The
// sequential ones take the non-test throttle values as Comm.
Contract ecu_contract(bool reactive, const EcuConfig & cfg = {});
Contract printer_contract(Printer p);

// ---- the verdict table

struct TableRow
{
  std::string program;
  Value nox_step;
  size_t transitions = 0;
  std::string property;  // robust or fclean
  std::string instance;  // "strengthened" or "negation-left a=0.1" ...
  Status expected = Status::Unknown;
  Status got = Status::Unknown;
  double seconds = 0;
  size_t explored = 0;
  std::string reason;

  bool ok() const { return expected == got; }
};

struct TableOptions
{
  std::vector<Ecu> programs{Ecu::Ec, Ecu::Aec};
  std::vector<Value> nox_steps{Value::parse("0.05"), Value::parse("0.00625")};
  std::vector<hyper::Property> properties{hyper::Property::Robust, hyper::Property::FClean};
  std::vector<Value> a{Value::parse("0.1"), Value::integer(1)};
  Value b = Value::integer(2);
  Value thrtl_step = Value::parse("0.1");
};

std::vector<TableRow> run_table(const TableOptions & o);

}  // namespace dope::casestudy
