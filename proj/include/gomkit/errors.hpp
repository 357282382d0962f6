#ifndef GOMKIT_ERRORS_HPP
#define GOMKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gomkit {

// Base class for everything this library throws. The CLI prints the
// concrete class name, so each error condition gets its own type.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual const char* kind() const noexcept { return "Error"; }
};

#define GOMKIT_DEFINE_ERROR(NAME)                                        \
    struct NAME : Error {                                                 \
        explicit NAME(const std::string& msg) : Error(msg) {}             \
        const char* kind() const noexcept override { return #NAME; }      \
    }

// bvh
GOMKIT_DEFINE_ERROR(SyntaxError);
GOMKIT_DEFINE_ERROR(StructureError);
GOMKIT_DEFINE_ERROR(EmptyMotionError);
GOMKIT_DEFINE_ERROR(BindingError);
GOMKIT_DEFINE_ERROR(UnknownDescriptorError);

// preprocess
GOMKIT_DEFINE_ERROR(TooShortError);
GOMKIT_DEFINE_ERROR(SpecError);
GOMKIT_DEFINE_ERROR(RangeError);
GOMKIT_DEFINE_ERROR(BoundsError);
GOMKIT_DEFINE_ERROR(OverlapError);

// similarity
GOMKIT_DEFINE_ERROR(DimensionError);
GOMKIT_DEFINE_ERROR(EmptyError);

// gom
GOMKIT_DEFINE_ERROR(UnknownSensorError);
GOMKIT_DEFINE_ERROR(ChainError);
GOMKIT_DEFINE_ERROR(SingularError);
GOMKIT_DEFINE_ERROR(LengthError);
GOMKIT_DEFINE_ERROR(DivergenceError);
GOMKIT_DEFINE_ERROR(TooLongError);

// metrics
GOMKIT_DEFINE_ERROR(LengthMismatchError);
GOMKIT_DEFINE_ERROR(DegenerateError);

// recognition
GOMKIT_DEFINE_ERROR(DegenerateDataError);
GOMKIT_DEFINE_ERROR(EmptyModelSetError);
GOMKIT_DEFINE_ERROR(InsufficientDataError);

// dataset / cli
GOMKIT_DEFINE_ERROR(NetworkError);
GOMKIT_DEFINE_ERROR(ChecksumError);
GOMKIT_DEFINE_ERROR(ConfigError);
GOMKIT_DEFINE_ERROR(ArtifactError);

#undef GOMKIT_DEFINE_ERROR

} // namespace gomkit

#endif
