#pragma once

#include <stdexcept>
#include <string>

namespace trapline {

/// Base for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violated a domain invariant (degenerate box, bad ratio, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input text or bytes could not be decoded.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Record container checksum or framing failure.
class CorruptRecordError : public Error {
 public:
  CorruptRecordError(std::size_t index, const std::string& what)
      : Error("record " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Storage engine failure; the caller must treat the write as not applied.
class StorageError : public Error {
 public:
  using Error::Error;
};

}  // namespace trapline
