#pragma once

#include <stdexcept>
#include <string>

namespace veq {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CutError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MaxIterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AmbiguousSupport : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularMoment : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TooCloseToSupport : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyBoundary : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace veq
