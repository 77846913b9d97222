// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sitecheck {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input bytes are not a decodable raster image or audio container.
class DecodeError : public Error {
public:
    using Error::Error;
};

/// A remote provider call failed after all retry attempts.
class ProviderError : public Error {
public:
    ProviderError(const std::string& msg, int status, int attempts)
        : Error(msg), status(status), attempts(attempts) {}
    int status;    // HTTP status of the last attempt, 0 for transport failures
    int attempts;  // total attempts made (max_retries + 1 on exhaustion)
};

/// A provider call timed out on every attempt.
class TimeoutError : public Error {
public:
    TimeoutError(const std::string& msg, int attempts) : Error(msg), attempts(attempts) {}
    int attempts;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

/// An embedding with (near-)zero norm where a direction is required.
class DegenerateVectorError : public Error {
public:
    using Error::Error;
};

class DimMismatchError : public Error {
public:
    using Error::Error;
};

/// Annotation header is missing or malformed; `field` names the offender.
class HeaderParseError : public Error {
public:
    HeaderParseError(const std::string& msg, std::string field)
        : Error(msg), field(std::move(field)) {}
    std::string field;  // "time" or "location"
};

/// On-disk index file is malformed; `offset` is the byte where parsing failed.
class FormatError : public Error {
public:
    FormatError(const std::string& msg, std::size_t offset) : Error(msg), offset(offset) {}
    std::size_t offset;
};

class IoError : public Error {
public:
    using Error::Error;
};

class DuplicatePageError : public Error {
public:
    DuplicatePageError(const std::string& msg, std::string page_id)
        : Error(msg), page_id(std::move(page_id)) {}
    std::string page_id;
};

class EmptyQueryError : public Error {
public:
    using Error::Error;
};

class EmptyIndexError : public Error {
public:
    using Error::Error;
};

/// Prediction set and ground truth are keyed by different report ids.
class KeyMismatchError : public Error {
public:
    KeyMismatchError(const std::string& msg, std::vector<std::string> missing,
                     std::vector<std::string> extra)
        : Error(msg), missing(std::move(missing)), extra(std::move(extra)) {}
    std::vector<std::string> missing;  // ids in ground truth without predictions
    std::vector<std::string> extra;    // predicted ids absent from ground truth
};

class ModeMismatchError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Report generation failed; wraps the underlying provider failure.
class GenerationError : public Error {
public:
    using Error::Error;
};

}  // namespace sitecheck
