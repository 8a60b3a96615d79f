#pragma once

#include <functional>
#include <string_view>

namespace vsir {

using LogSink = std::function<void(std::string_view)>;

// Warnings go to stderr unless a sink is installed. Pass an empty function to
// restore the default.
void set_warning_sink(LogSink sink);
void warn(std::string_view message);

}  // namespace vsir
