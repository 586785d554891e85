#include "panda/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>

namespace panda::log {

namespace {

spdlog::logger& logger() {
    static std::once_flag once;
    static std::shared_ptr<spdlog::logger> instance;
    std::call_once(once, [] {
        instance = spdlog::stderr_color_mt("panda");
        instance->set_pattern("[%Y-%m-%d %H:%M:%S.%e] [%l] %v");
        instance->set_level(spdlog::level::warn);
        const char* env = std::getenv("PANDA_LOG");
        if (env != nullptr && *env != '\0') {
            instance->set_level(spdlog::level::from_str(env));
        }
    });
    return *instance;
}

}  // namespace

void configure_from_env() {
    auto& l = logger();
    const char* env = std::getenv("PANDA_LOG");
    l.set_level(env != nullptr && *env != '\0' ? spdlog::level::from_str(env) : spdlog::level::warn);
}

void debug(std::string_view msg) { logger().debug("{}", msg); }
void info(std::string_view msg) { logger().info("{}", msg); }
void warn(std::string_view msg) { logger().warn("{}", msg); }
void error(std::string_view msg) { logger().error("{}", msg); }

}  // namespace panda::log
