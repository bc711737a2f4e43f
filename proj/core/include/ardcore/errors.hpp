#pragma once

#include <stdexcept>
#include <string>

namespace ard {

enum class ErrorCode {
    Config,
    InfeasibleOperatingPoint,
    DegenerateModel,
    NearSingularEvaluation,
    Assembly,
    Unidentifiable,
    Input,
    NearResonance,
    NumericalConditioning,
    InvalidSurrogate,
    InsufficientData,
    EvaluationSingularity,
    Dataset,
    UnknownMode,
    OverConstrainedOmega,
    InfeasibleStart,
    SurrogateDomain,
    BaselineUnstable,
    ComponentSingularity,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

/// Configuration / input validation failures (CLI exit code 2).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCode::Config, what) {}
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) throw Error(code, what);
}

}  // namespace ard
