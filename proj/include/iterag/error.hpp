#pragma once

#include <stdexcept>
#include <string>

namespace iterag {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Corpus ingestion failed (duplicate id, bad record, dimension mismatch, ...).
class IngestError : public Error {
public:
    using Error::Error;
};

/// A retrieval call could not be served (empty query, missing dense index,
/// not enough noise candidates, ...).
class RetrievalError : public Error {
public:
    using Error::Error;
};

/// A domain value violated one of its invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A caller violated an operation precondition.
class ContractError : public Error {
public:
    using Error::Error;
};

/// A backend response failed task-schema validation, terminally.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A scripted backend had no entry for the requested (task, digest) pair.
class ScriptedMissError : public Error {
public:
    using Error::Error;
};

/// The HTTP transport failed. Retryable by the caller.
class TransportError : public Error {
public:
    using Error::Error;
};

/// A configuration file or backend config was invalid.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace iterag
