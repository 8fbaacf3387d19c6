#pragma once

#include <stdexcept>
#include <string>

namespace impkit {

// Domain errors thrown by the library. The CLI maps any of these to exit
// code 1; usage problems (bad flags, unreadable files) map to exit code 2.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define IMPKIT_DEFINE_ERROR(NAME)                                   \
    class NAME : public Error {                                     \
    public:                                                         \
        explicit NAME(const std::string& what) : Error(#NAME, what) {} \
    }

IMPKIT_DEFINE_ERROR(NotAntisymmetric);
IMPKIT_DEFINE_ERROR(NotOrthogonal);
IMPKIT_DEFINE_ERROR(SingularTriple);
IMPKIT_DEFINE_ERROR(OddWeightMask);
IMPKIT_DEFINE_ERROR(ZeroNorm);
IMPKIT_DEFINE_ERROR(ModulusOutOfRange);
IMPKIT_DEFINE_ERROR(GapOutOfRange);
IMPKIT_DEFINE_ERROR(DimensionTooLarge);
IMPKIT_DEFINE_ERROR(BudgetExceeded);
IMPKIT_DEFINE_ERROR(DegenerateGram);
IMPKIT_DEFINE_ERROR(RepresentationFailure);
IMPKIT_DEFINE_ERROR(DimensionMismatch);
IMPKIT_DEFINE_ERROR(InvalidModel);
IMPKIT_DEFINE_ERROR(IoError);

#undef IMPKIT_DEFINE_ERROR

}  // namespace impkit
