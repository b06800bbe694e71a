#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>

namespace pricesim {

// Process-wide sink for non-fatal solver warnings. Tests may swap it out;
// the default serializes writes to stderr.
inline std::function<void(const std::string&)>& warning_sink() {
    static std::function<void(const std::string&)> sink = [](const std::string& msg) {
        static std::mutex gate;
        std::lock_guard<std::mutex> lock(gate);
        std::cerr << "pricesim: warning: " << msg << '\n';
    };
    return sink;
}

inline void warn(const std::string& msg) { warning_sink()(msg); }

}  // namespace pricesim
