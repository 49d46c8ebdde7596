#pragma once

#include <string>

namespace dope {

enum class Status { Clean, Doped, Unknown };

inline const char * status_name(Status s)
{
  switch (s) {
    case Status::Clean: return "Clean";
    case Status::Doped: return "Doped";
    case Status::Unknown: return "Unknown";
  }
  return "?";
}

// process exit code of a verdict
inline int exit_code(Status s) { return s == Status::Clean ? 0 : s == Status::Doped ? 1 : 2; }

}  // namespace dope
