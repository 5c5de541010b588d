#pragma once

#include <stdexcept>
#include <string>

namespace ruv {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Shape or size of an argument does not match its peer.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

/// Group partition is malformed (out-of-range index, overlap, empty).
class PartitionError : public Error {
public:
    explicit PartitionError(const std::string& msg) : Error(msg) {}
};

/// An input violates a numeric contract (asymmetry, indefiniteness, NaN).
class ContractError : public Error {
public:
    explicit ContractError(const std::string& msg) : Error(msg) {}
};

/// Not enough usable data to perform the operation.
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

/// Requested rank is not supported by the data.
class RankError : public Error {
public:
    explicit RankError(const std::string& msg) : Error(msg) {}
};

/// Input file does not match the expected schema.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

/// An iterative routine failed to converge on valid input.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

}  // namespace ruv
