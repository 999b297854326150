#pragma once

#include <stdexcept>
#include <string>

namespace quorum {

// Base class for all library errors so callers can catch one type at the top.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

// Shape of a tensor does not match what an operation expects.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Two parameter vectors whose layouts were required to match do not.
class LayoutError : public Error {
public:
    using Error::Error;
};

// A binary file (IDX, checkpoint) failed validation; message names the field.
class FormatError : public Error {
public:
    using Error::Error;
};

class SizeError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

class TrainingDivergedError : public Error {
public:
    TrainingDivergedError(const std::string& msg, int epoch)
        : Error(msg), epoch(epoch) {}
    int epoch;
};

class IncompleteCohortError : public Error {
public:
    using Error::Error;
};

}  // namespace quorum
