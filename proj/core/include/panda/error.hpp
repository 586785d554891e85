#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace panda {

/// Base of every error thrown by the library. `kind()` is a stable,
/// machine-readable tag used in CLI error reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual std::string_view kind() const noexcept = 0;
};

/// Bad input data or arguments. The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
    std::string_view kind() const noexcept override { return "ValidationError"; }
};

/// Filesystem or codec failure. The CLI maps these to exit code 2.
class IoError : public Error {
public:
    using Error::Error;
    std::string_view kind() const noexcept override { return "IoError"; }
};

#define PANDA_DEFINE_ERROR(Name, Base)                                            \
    class Name : public Base {                                                    \
    public:                                                                       \
        using Base::Base;                                                         \
        std::string_view kind() const noexcept override { return #Name; }         \
    }

PANDA_DEFINE_ERROR(SchemaError, ValidationError);
PANDA_DEFINE_ERROR(ConsistencyError, ValidationError);
PANDA_DEFINE_ERROR(IdOverflow, ValidationError);
PANDA_DEFINE_ERROR(InvalidConfig, ValidationError);
PANDA_DEFINE_ERROR(EmptyMask, ValidationError);
PANDA_DEFINE_ERROR(DegenerateSegment, ValidationError);
PANDA_DEFINE_ERROR(DimensionMismatch, ValidationError);
PANDA_DEFINE_ERROR(EmptyAccumulator, ValidationError);
PANDA_DEFINE_ERROR(EmptyDataset, ValidationError);
PANDA_DEFINE_ERROR(InsufficientPoints, ValidationError);
PANDA_DEFINE_ERROR(DegenerateAbscissa, ValidationError);
PANDA_DEFINE_ERROR(ZeroSlope, ValidationError);
PANDA_DEFINE_ERROR(NonpositiveBaseline, ValidationError);
PANDA_DEFINE_ERROR(MissingFile, IoError);

#undef PANDA_DEFINE_ERROR

/// Process exit code for an error: 1 for validation, 2 for I/O.
int exit_code_for(const Error& e) noexcept;

}  // namespace panda
