//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace edgecnn
{

/// Tensor or layer shapes do not line up.
class ShapeError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Input too small for the requested operation (e.g. pooling a 1-pixel edge).
class DegenerateInputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A model builder cannot produce a consistent network for the requested hyperparameters.
class InfeasibleArchitectureError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument to a builder or metric (unsupported alpha, empty sample set, ...).
class ParameterError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed model, image, config or report file.
class FormatError : public std::runtime_error
{
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")")
        , offset_(offset)
    {}
    explicit FormatError(const std::string& what)
        : std::runtime_error(what)
    {}

    std::uint64_t offset() const
    {
        return offset_;
    }

private:
    std::uint64_t offset_ = 0;
};

/// Filesystem read or write failure.
class IoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A timing window that cannot be used (non-positive duration).
class MeasurementError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Raised when the layer graph contains something the gradient engine cannot differentiate.
class CapabilityError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error
{
public:
    TrainingError(const std::string& what, int epoch)
        : std::runtime_error(what)
        , epoch_(epoch)
    {}

    int epoch() const
    {
        return epoch_;
    }

private:
    int epoch_;
};

class DatasetError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

}    // namespace edgecnn
