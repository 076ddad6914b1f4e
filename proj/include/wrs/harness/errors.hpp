#pragma once

#include <stdexcept>
#include <string>

namespace wrs::harness {

/// Base of every error the CLI maps to a process exit code.
class HarnessError : public std::runtime_error {
 public:
  HarnessError(int exit_code, const std::string& what)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitDegenerate = 4;

/// Invalid or unreadable configuration.
class ConfigError : public HarnessError {
 public:
  explicit ConfigError(const std::string& what) : HarnessError(kExitInput, what) {}
};

/// Invalid command-line input or input file.
class InputError : public HarnessError {
 public:
  explicit InputError(const std::string& what) : HarnessError(kExitInput, what) {}
};

/// Output could not be written.
class IoError : public HarnessError {
 public:
  explicit IoError(const std::string& what) : HarnessError(kExitIo, what) {}
};

/// The data cannot support the requested analysis (e.g. constant objective).
class DegenerateDataError : public HarnessError {
 public:
  explicit DegenerateDataError(const std::string& what) : HarnessError(kExitDegenerate, what) {}
};

}  // namespace wrs::harness
