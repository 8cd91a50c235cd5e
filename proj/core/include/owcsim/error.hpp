#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace owcsim {

/// One validation failure, located by a dotted key path ("scenario.fov_deg").
struct ConfigIssue
{
    std::string path;
    std::string message;
};

/// Raised when a configuration or scenario fails validation. Carries every
/// issue found, not just the first.
class ConfigError : public std::runtime_error
{
public:
    explicit ConfigError(std::vector<ConfigIssue> issues)
        : std::runtime_error(summarize(issues)), issues_(std::move(issues))
    {
    }

    ConfigError(std::string path, std::string message)
        : ConfigError(std::vector<ConfigIssue>{{std::move(path), std::move(message)}})
    {
    }

    const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

private:
    static std::string summarize(const std::vector<ConfigIssue>& issues)
    {
        std::string out;
        for (const auto& issue : issues) {
            if (!out.empty()) {
                out += '\n';
            }
            out += issue.path.empty() ? issue.message
                                      : issue.path + ": " + issue.message;
        }
        return out;
    }

    std::vector<ConfigIssue> issues_;
};

/// Raised when the preamble power estimator has nothing to work with.
class EstimationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

}  // namespace owcsim
