#include <mchom/error.hpp>

namespace mchom {

Error::Error(ErrorCategory category, std::string stage, const std::string& message)
    : std::runtime_error(stage + ": " + message), category_(category), stage_(std::move(stage))
{}

int exit_code(ErrorCategory category) noexcept
{
    switch (category) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::solver: return 3;
    case ErrorCategory::io: return 4;
    }
    return 1;
}

const char* category_name(ErrorCategory category) noexcept
{
    switch (category) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::solver: return "solver";
    case ErrorCategory::io: return "io";
    }
    return "unknown";
}

void config_error(const std::string& stage, const std::string& message)
{
    throw Error(ErrorCategory::config, stage, message);
}

void solver_error(const std::string& stage, const std::string& message)
{
    throw Error(ErrorCategory::solver, stage, message);
}

void io_error(const std::string& stage, const std::string& message)
{
    throw Error(ErrorCategory::io, stage, message);
}

} // namespace mchom
