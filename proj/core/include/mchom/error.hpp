#pragma once

#include <stdexcept>
#include <string>

namespace mchom {

enum class ErrorCategory { config, solver, io };

// Exception carrying a category (mapped to the CLI exit code) and the
// pipeline stage that raised it.
class Error : public std::runtime_error
{
public:
    Error(ErrorCategory category, std::string stage, const std::string& message);

    ErrorCategory category() const noexcept { return category_; }
    const std::string& stage() const noexcept { return stage_; }

private:
    ErrorCategory category_;
    std::string stage_;
};

int exit_code(ErrorCategory category) noexcept;
const char* category_name(ErrorCategory category) noexcept;

[[noreturn]] void config_error(const std::string& stage, const std::string& message);
[[noreturn]] void solver_error(const std::string& stage, const std::string& message);
[[noreturn]] void io_error(const std::string& stage, const std::string& message);

} // namespace mchom
