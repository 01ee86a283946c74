#pragma once

#include <stdexcept>
#include <string>

namespace swm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
    using Error::Error;
};

// chain
struct ChainTooLong : Error {
    using Error::Error;
};
struct ZeroPostSelection : Error {
    using Error::Error;
};

// swv
struct OrthogonalPostSelection : Error {
    using Error::Error;
};
struct ZeroStrength : Error {
    using Error::Error;
};
struct NoPhysicalRoot : Error {
    using Error::Error;
};
struct MissingSetting : Error {
    using Error::Error;
};
struct AllIdentity : Error {
    using Error::Error;
};
struct FitDiverged : Error {
    using Error::Error;
};

// sampler
struct NoPassEvents : Error {
    using Error::Error;
};

// optic
struct NotAWaveplate : Error {
    using Error::Error;
};
struct InvalidLayout : Error {
    using Error::Error;
};

// cli
struct ParseError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

} // namespace swm
