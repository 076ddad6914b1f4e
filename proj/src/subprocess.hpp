#pragma once

#include <sys/types.h>

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace wrs::detail {

/// A spawned child with pipes on stdin and stdout. The destructor kills and
/// reaps a child that is still running.
class ChildProcess {
 public:
  using Clock = std::chrono::steady_clock;

  /// Throws std::runtime_error if the process cannot be spawned.
  explicit ChildProcess(const std::vector<std::string>& argv);
  ~ChildProcess();

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  /// False on broken pipe or deadline.
  bool write_all(const std::string& data, Clock::time_point deadline);
  void close_stdin();

  enum class ReadStatus { line, eof, timeout, error };
  /// Reads through the next '\n'; `line` receives the text without it.
  ReadStatus read_line(std::string& line, Clock::time_point deadline);

  /// Waits for exit. Returns the raw wait status, or nullopt on deadline.
  std::optional<int> wait(Clock::time_point deadline);

  void kill();
  bool running() const noexcept { return pid_ > 0; }

 private:
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
};

/// Human-readable form of a wait status.
std::string describe_status(int status);

}  // namespace wrs::detail
