#include "dope/parallel.h"

namespace dope {

namespace {
std::atomic<unsigned> g_jobs{0};
}

void set_jobs(unsigned n) { g_jobs = n; }

unsigned jobs()
{
  unsigned n = g_jobs;
  if (n) return n;
  n = std::thread::hardware_concurrency();
  return n ? n : 1;
}

}  // namespace dope
