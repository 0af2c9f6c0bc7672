#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tourdesk {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad engine configuration: unknown sight ids, missing files, invalid config values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Corpus or bundle rejected at build time. Carries one diagnostic per offending line.
class CorpusError : public Error {
 public:
  explicit CorpusError(std::vector<std::string> diagnostics);

  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

// Transport-level failure talking to a generation backend.
class BackendError : public Error {
 public:
  using Error::Error;
};

// advance() on a session that already reached Done.
class SessionClosedError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tourdesk
