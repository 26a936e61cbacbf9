#include <cstdlib>
#include <iostream>

#include "ssf/log.hpp"

namespace ssf {

int log_level() {
    static const int level = [] {
        const char* raw = std::getenv("SSF_LOG");
        if (raw == nullptr)
            return 1;
        const std::string value(raw);
        if (value == "quiet" || value == "0")
            return 0;
        if (value == "debug" || value == "2")
            return 2;
        return 1;
    }();
    return level;
}

void log_info(const std::string& message) {
    if (log_level() >= 1)
        std::cerr << "ssf: " << message << "\n";
}

void log_debug(const std::string& message) {
    if (log_level() >= 2)
        std::cerr << "ssf: " << message << "\n";
}

} // namespace ssf
