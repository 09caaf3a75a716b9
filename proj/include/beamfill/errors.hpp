#pragma once

#include <stdexcept>
#include <string>

namespace beamfill {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// geometry
struct DegenerateGeometry : Error { using Error::Error; };
struct InsufficientBeams : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };

// error model
struct EmptySeries : Error { using Error::Error; };

// dataset
struct MissingColumn : Error { using Error::Error; };
struct NonMonotonicTime : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct SectionTooShort : Error { using Error::Error; };
struct MaskUnsupported : Error { using Error::Error; };
struct BadProfile : Error { using Error::Error; };
struct OverlappingAssignment : Error { using Error::Error; };

// neural core
struct ShapeMismatch : Error { using Error::Error; };
struct NoForwardCache : Error { using Error::Error; };
struct EpochOutOfRange : Error { using Error::Error; };
struct NonFiniteLoss : Error { using Error::Error; };
struct EmptyTrainSet : Error { using Error::Error; };
struct ModelMismatch : Error { using Error::Error; };
struct CheckpointError : Error { using Error::Error; };

// metrics
struct LengthMismatch : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct ConstantTruth : Error { using Error::Error; };
struct ZeroBaseline : Error { using Error::Error; };

// config / cli
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace beamfill
