#include "weaklp/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace weaklp {

namespace {

int from_environment() {
  const char* env = std::getenv("WEAKLP_WORKERS");
  if (!env) return 1;
  try {
    int w = std::stoi(env);
    return w > 0 ? w : 1;
  } catch (...) {
    return 1;
  }
}

std::atomic<int>& workers_slot() {
  static std::atomic<int> w{from_environment()};
  return w;
}

}  // namespace

int default_workers() { return workers_slot().load(); }

void set_default_workers(int workers) { workers_slot().store(workers > 0 ? workers : 1); }

}  // namespace weaklp
