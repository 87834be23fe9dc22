#pragma once

#include <mchom/experiments.hpp>

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mchom::cli {

// Parsed command line: subcommand plus the merged key=value configuration
// (config file first, command-line overrides on top).
struct RunSpec
{
    std::string command;
    std::string config_path;
    std::map<std::string, std::string> overrides;
    ExperimentConfig config;
};

// Flat "key = value" text; '#' starts a comment.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);
std::string config_text(const ExperimentConfig& config);

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mchom::cli
