#pragma once

#include <stdexcept>
#include <string>

namespace adarnn {

// Status codes shared between library exceptions, the C API return values
// and the CLI exit codes (0 ok, 2 config, 3 data, 4 numeric, 5 divergence).
enum class Status : int {
    kOk = 0,
    kConfig = 2,
    kData = 3,
    kNumeric = 4,
    kDiverged = 5,
};

class Error : public std::runtime_error {
public:
    Error(Status status, const std::string& msg) : std::runtime_error(msg), status_(status) {}
    Status status() const noexcept { return status_; }

private:
    Status status_;
};

// Invalid configuration, flags or incompatible shapes requested by the caller.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(Status::kConfig, msg) {}
};

// Operand shapes that cannot be combined.
struct DimensionError : ConfigError {
    explicit DimensionError(const std::string& msg) : ConfigError(msg) {}
};

// API misuse (broken preconditions inside the library).
struct ContractError : ConfigError {
    explicit ContractError(const std::string& msg) : ConfigError(msg) {}
};

// Unusable input data: unreadable files, short series, empty partitions.
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(Status::kData, msg) {}
};

// Malformed file contents (CSV cells, model documents, split documents).
struct FormatError : DataError {
    explicit FormatError(const std::string& msg) : DataError(msg) {}
};

// Non-finite values produced by a numeric kernel.
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(Status::kNumeric, msg) {}
};

// Training loss became non-finite.
struct DivergenceError : Error {
    explicit DivergenceError(const std::string& msg) : Error(Status::kDiverged, msg) {}
};

} // namespace adarnn
