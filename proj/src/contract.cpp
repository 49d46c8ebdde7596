#include "dope/contract.h"

#include <fstream>
#include <set>
#include <sstream>

#include "dope/errors.h"

namespace dope {

using nlohmann::json;

namespace {

const std::set<std::string> kFields = {"pintrs",   "stdin",     "comm",
                                       "d_in",     "d_out",     "kappa_in",
                                       "kappa_out", "f",        "scale"};

void check_scale(const Value & v, int scale, const char * what)
{
  if (v.is_inf()) return;
  int64_t unit = 1;
  for (int k = scale; k < Value::kDigits; ++k) unit *= 10;
  if (v.mantissa() % unit != 0)
    throw DataError(std::string(what) + " = " + v.str() + " has more than "
                    + std::to_string(scale) + " decimals");
}

}  // namespace

json contract_to_json(const Contract & c)
{
  json j;
  if (c.pintrs.valuations) {
    json arr = json::array();
    for (auto & m : *c.pintrs.valuations) {
      json o = json::object();
      for (auto & [k, v] : m) o[k] = v;
      arr.push_back(o);
    }
    j["pintrs"] = arr;
  } else {
    j["pintrs"] = c.pintrs.predicate;
  }
  j["stdin"] = c.stdin_spec;
  if (c.comm) j["comm"] = *c.comm;
  j["d_in"] = c.d_in;
  j["d_out"] = c.d_out;
  j["kappa_in"] = c.kappa_in;
  j["kappa_out"] = c.kappa_out;
  if (c.f) j["f"] = *c.f;
  j["scale"] = c.scale;
  return j;
}

Contract contract_from_json(const json & j)
{
  if (!j.is_object()) throw DataError("contract must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!kFields.count(it.key()))
      throw DataError("unknown contract field '" + it.key() + "'");
  Contract c;
  try {
    if (j.contains("pintrs")) {
      const json & p = j["pintrs"];
      if (p.is_string()) {
        c.pintrs.predicate = p.get<std::string>();
      } else if (p.is_array()) {
        std::vector<std::map<std::string, Value>> vs;
        for (auto & o : p) {
          if (!o.is_object())
            throw DataError("pintrs entries must be objects name -> value");
          std::map<std::string, Value> m;
          for (auto it = o.begin(); it != o.end(); ++it)
            m[it.key()] = it.value().get<Value>();
          vs.push_back(std::move(m));
        }
        c.pintrs.valuations = std::move(vs);
      } else {
        throw DataError("pintrs must be a predicate string or a list");
      }
    }
    if (j.contains("stdin")) c.stdin_spec = j["stdin"].get<std::string>();
    if (j.contains("comm") && !j["comm"].is_null())
      c.comm = j["comm"].get<std::string>();
    if (j.contains("d_in")) c.d_in = j["d_in"].get<Distance>();
    if (j.contains("d_out")) c.d_out = j["d_out"].get<Distance>();
    if (j.contains("kappa_in")) c.kappa_in = j["kappa_in"].get<Value>();
    if (j.contains("kappa_out")) c.kappa_out = j["kappa_out"].get<Value>();
    if (j.contains("f") && !j["f"].is_null()) c.f = j["f"].get<BoundFn>();
    if (j.contains("scale")) c.scale = j["scale"].get<int>();
  } catch (const json::exception & e) {
    throw DataError(std::string("contract: ") + e.what());
  }
  if (c.scale < 0 || c.scale > Value::kDigits)
    throw DataError("contract scale must be between 0 and "
                    + std::to_string(Value::kDigits));
  if (c.kappa_in < Value() || c.kappa_out < Value())
    throw DataError("tolerances must be nonnegative");
  check_scale(c.kappa_in, c.scale, "kappa_in");
  check_scale(c.kappa_out, c.scale, "kappa_out");
  if (c.pintrs.valuations)
    for (auto & m : *c.pintrs.valuations)
      for (auto & [k, v] : m) check_scale(v, c.scale, k.c_str());
  return c;
}

Contract load_contract(const std::string & path)
{
  std::ifstream in(path);
  if (!in) throw DataError("cannot open contract file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error & e) {
    throw DataError(path + ": " + e.what());
  }
  return contract_from_json(j);
}

std::string dump_contract(const Contract & c)
{
  return contract_to_json(c).dump(2) + "\n";
}

}  // namespace dope
