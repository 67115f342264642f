#pragma once

#include <stdexcept>
#include <string>

namespace glove {

// Error taxonomy. The CLI maps these onto exit codes:
//   ConfigError -> 2, DataError -> 3, ModelIoError -> 4, anything else -> 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad flag values, inconsistent options, invalid generator/model configs.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed CSV rows, non-monotone timestamps, unusable datasets.
struct DataError : Error {
    using Error::Error;
};

// Model container problems: magic/version, truncation, checksum.
struct ModelIoError : Error {
    using Error::Error;
};

// Layer graph does not validate (zero-length maps, bad dims).
struct ShapeError : ConfigError {
    using ConfigError::ConfigError;
};

}  // namespace glove
