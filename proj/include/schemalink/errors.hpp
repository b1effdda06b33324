#pragma once

#include <stdexcept>
#include <string>

namespace schemalink {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Dataset or database file could not be read or violates its format.
class IngestError : public Error {
public:
    using Error::Error;
};

/// A (table, column) lookup against a known schema failed.
class LookupError : public Error {
public:
    using Error::Error;
};

/// SQL could not be parsed or an identifier could not be resolved in strict mode.
class ScopeError : public Error {
public:
    using Error::Error;
};

/// No parseable JSON object in an LLM response.
class JsonExtractError : public Error {
public:
    using Error::Error;
};

/// Completion provider failure (transport, credentials, missing replay fixture).
class BackendError : public Error {
public:
    using Error::Error;
};

/// Invalid or incomplete run configuration; raised before any work starts.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Metric precondition violated (retrieved or gold escapes the full schema).
class MetricError : public Error {
public:
    using Error::Error;
};

/// A gold query failed to execute; the dataset itself is broken.
class DatasetError : public Error {
public:
    using Error::Error;
};

/// Bad CLI usage (missing run dir, missing summary, ...).
class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace schemalink
