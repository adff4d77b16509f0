#pragma once

#include <string_view>

namespace raf::log {

/// Warnings go to stderr unless silenced.
void warn(std::string_view message);
void set_quiet(bool quiet);

}  // namespace raf::log
