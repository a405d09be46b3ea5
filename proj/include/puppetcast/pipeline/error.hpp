#pragma once

#include <string>

namespace puppetcast::pipeline {

enum class ErrorKind { Config, Network, Corrupt };

struct PipelineError {
    ErrorKind kind = ErrorKind::Config;
    std::string message;
};

/// Process exit status: 1 config/validation, 2 network, 3 data corruption.
inline int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config: return 1;
        case ErrorKind::Network: return 2;
        case ErrorKind::Corrupt: return 3;
    }
    return 1;
}

}  // namespace puppetcast::pipeline
