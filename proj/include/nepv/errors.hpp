#pragma once

#include <stdexcept>
#include <string>

namespace nepv {

/// Base of every error raised by the library. `name()` is the stable
/// identifier printed by the command-line driver.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual const char* name() const noexcept { return "Error"; }
};

#define NEPV_DEFINE_ERROR(Type)                                                  \
    class Type : public Error {                                                  \
    public:                                                                      \
        using Error::Error;                                                      \
        [[nodiscard]] const char* name() const noexcept override { return #Type; } \
    };

NEPV_DEFINE_ERROR(DimensionMismatch)
NEPV_DEFINE_ERROR(NotHermitian)
NEPV_DEFINE_ERROR(NotPositiveDefinite)
NEPV_DEFINE_ERROR(NoConvergence)
NEPV_DEFINE_ERROR(SingularPencil)
NEPV_DEFINE_ERROR(ZeroVector)
NEPV_DEFINE_ERROR(EmptyNullSpace)
NEPV_DEFINE_ERROR(RankDeficientR)
NEPV_DEFINE_ERROR(TooLarge)
NEPV_DEFINE_ERROR(ShiftIsEigenvalue)
NEPV_DEFINE_ERROR(ProjectedPencilSingular)
NEPV_DEFINE_ERROR(InvalidArgument)
NEPV_DEFINE_ERROR(IoError)

#undef NEPV_DEFINE_ERROR

/// Raised by the generalized Sylvester solver when the Kronecker operator is
/// singular and the right-hand side is not in its range.
class SingularOperator : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* name() const noexcept override { return "SingularOperator"; }
};

} // namespace nepv
