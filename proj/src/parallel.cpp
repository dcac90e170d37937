#include "corrmatch/parallel.hpp"

#include <cstdlib>
#include <string>

namespace corrmatch {

unsigned default_thread_count() {
  if (const char* env = std::getenv("CORRMATCH_THREADS"); env != nullptr && *env != '\0') {
    try {
      const unsigned long value = std::stoul(env);
      if (value >= 1) return static_cast<unsigned>(value);
    } catch (const std::exception&) {
      // fall through to the hardware count
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace corrmatch
