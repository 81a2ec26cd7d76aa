#pragma once

#include <string>

namespace fcg::log {

enum class Level { Quiet = 0, Info = 1, Debug = 2 };

void set_level(Level l);
Level level();
// Thread-safe; writes one line to stderr.
void info(const std::string& msg);
void debug(const std::string& msg);

}  // namespace fcg::log
