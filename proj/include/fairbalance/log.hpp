#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace fairbalance::log {

using Sink = std::function<void(std::string_view)>;

// Warnings go to stderr unless a sink is installed. Thread-safe.
void warn(std::string_view message);

// Replaces the warning sink and returns the previous one. An empty sink
// restores the stderr default.
Sink set_sink(Sink sink);

}  // namespace fairbalance::log
