#ifndef GREEDYFOOL_ERRORS_HPP
#define GREEDYFOOL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace greedyfool {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument failed (out-of-range intensity, bad config, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Two images (or an image and an oracle) disagree on dimensions.
class ShapeMismatch : public Error {
public:
    using Error::Error;
};

/// PNG decode/encode or file access failure.
class ImageIoError : public Error {
public:
    using Error::Error;
};

/// Base for everything that can go wrong while querying a classifier.
class OracleError : public Error {
public:
    using Error::Error;
};

/// Could not reach the oracle (connection refused, reset, ...).
class OracleTransportError : public OracleError {
public:
    using OracleError::OracleError;
};

class OracleTimeoutError : public OracleError {
public:
    using OracleError::OracleError;
};

/// The oracle answered with a non-2xx HTTP status.
class OracleStatusError : public OracleError {
public:
    OracleStatusError(int status, const std::string& what) : OracleError(what), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

/// The oracle answered, but the body is not a valid probability vector.
class OracleProtocolError : public OracleError {
public:
    using OracleError::OracleError;
};

} // namespace greedyfool

#endif // GREEDYFOOL_ERRORS_HPP
