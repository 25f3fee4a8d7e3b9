#pragma once

#include <stdexcept>
#include <string>

namespace niuq {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidInput : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct NumericOverflow : Error { using Error::Error; };
struct TapeError : Error { using Error::Error; };
struct TrainingDiverged : Error { using Error::Error; };
struct SamplerStuck : Error { using Error::Error; };
struct InvalidInit : Error { using Error::Error; };
struct SolverDiverged : Error { using Error::Error; };
struct CholeskyFailure : Error { using Error::Error; };
struct InvalidCholesky : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace niuq
