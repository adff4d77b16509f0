#include "raf/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace raf::log {
namespace {
std::atomic<bool> g_quiet{false};
std::mutex g_mutex;
}  // namespace

void warn(std::string_view message) {
  if (g_quiet.load(std::memory_order_relaxed)) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "warning: " << message << '\n';
}

void set_quiet(bool quiet) { g_quiet.store(quiet, std::memory_order_relaxed); }

}  // namespace raf::log
