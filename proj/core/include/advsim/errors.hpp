#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace advsim {

/// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario configuration rejected. `path` is a JSON-pointer-like field path
/// ("/vehicles/2/id"), or empty for syntax errors.
class ConfigError : public Error {
 public:
  enum class Kind { syntax, schema, cross_field };

  ConfigError(Kind kind, std::string path, const std::string& reason)
      : Error(format(kind, path, reason)), kind_(kind), path_(std::move(path)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& path() const noexcept { return path_; }

 private:
  static std::string format(Kind kind, const std::string& path, const std::string& reason) {
    const char* label = kind == Kind::syntax   ? "syntax error"
                        : kind == Kind::schema ? "schema violation"
                                               : "cross-field violation";
    return path.empty() ? std::string(label) + ": " + reason
                        : std::string(label) + " at " + path + ": " + reason;
  }

  Kind kind_;
  std::string path_;
};

/// Filesystem failure, always carrying the offending path.
class IoError : public Error {
 public:
  IoError(std::filesystem::path file, const std::string& what)
      : Error(what + ": " + file.string()), file_(std::move(file)) {}

  const std::filesystem::path& file() const noexcept { return file_; }

 private:
  std::filesystem::path file_;
};

/// A dataset file exists but its content is not decodable.
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

/// Attack or metric parameters that cannot be satisfied for the given input.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A metric whose value is mathematically undefined for the input
/// (empty cloud, zero ground truth, zero clean mAP).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// State synchronization between two roles that do not track the same actors.
class IdMismatchError : public Error {
 public:
  IdMismatchError(std::vector<std::string> missing, std::vector<std::string> extra);

  const std::vector<std::string>& missing() const noexcept { return missing_; }
  const std::vector<std::string>& extra() const noexcept { return extra_; }

 private:
  std::vector<std::string> missing_;
  std::vector<std::string> extra_;
};

/// A simulator role failed during a tick.
class RoleError : public Error {
 public:
  RoleError(std::string role, std::size_t tick, const std::string& what)
      : Error("role '" + role + "' failed at tick " + std::to_string(tick) + ": " + what),
        role_(std::move(role)),
        tick_(tick) {}

  const std::string& role() const noexcept { return role_; }
  std::size_t tick() const noexcept { return tick_; }

 private:
  std::string role_;
  std::size_t tick_;
};

/// A role did not acknowledge within the barrier timeout.
class RoleTimeoutError : public RoleError {
 public:
  RoleTimeoutError(std::string role, std::size_t tick)
      : RoleError(std::move(role), tick, "no ACK within barrier timeout") {}
};

}  // namespace advsim
