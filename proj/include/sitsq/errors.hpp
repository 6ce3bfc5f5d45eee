#ifndef SITSQ_ERRORS_HPP
#define SITSQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sitsq {

// Configuration / input-data problems. Carries enough context to print a
// line-numbered message at the CLI.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Ensemble aborted because too many trajectories escaped.
class divergence_error : public std::runtime_error {
public:
    explicit divergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace sitsq

#endif
