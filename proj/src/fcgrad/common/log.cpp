#include "fcgrad/common/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace fcg::log {

namespace {
std::atomic<int> g_level{int(Level::Info)};
std::mutex g_mutex;

void emit(const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::fprintf(stderr, "%s\n", msg.c_str());
  std::fflush(stderr);
}
}  // namespace

void set_level(Level l) { g_level = int(l); }
Level level() { return Level(g_level.load()); }

void info(const std::string& msg) {
  if (g_level >= int(Level::Info)) emit(msg);
}

void debug(const std::string& msg) {
  if (g_level >= int(Level::Debug)) emit(msg);
}

}  // namespace fcg::log
