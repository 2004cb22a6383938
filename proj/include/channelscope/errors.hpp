#pragma once

#include <stdexcept>
#include <string>

namespace channelscope {

// Bad input data or configuration; the CLI maps this to exit code 3.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A required input file is absent or unreadable; CLI exit code 2.
struct MissingInputError : std::runtime_error {
    explicit MissingInputError(const std::string& what) : std::runtime_error(what) {}
};

// A pipeline stage failed after earlier stages completed; CLI exit code 4.
struct PipelineError : std::runtime_error {
    explicit PipelineError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace channelscope
