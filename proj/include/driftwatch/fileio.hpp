#pragma once

#include <atomic>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <thread>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "driftwatch/error.hpp"

namespace driftwatch {

namespace fs = std::filesystem;

namespace detail {

inline std::string errno_text() { return std::strerror(errno); }

inline void write_all(int fd, std::string_view bytes, const fs::path& path) {
  while (!bytes.empty()) {
    const ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error("write to '" + path.string() + "' failed: " + errno_text());
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace detail

/// Writes `bytes` to a temp file beside `path`, fsyncs it and renames it
/// over `path`. Readers see either the old or the new content.
inline void atomic_write_file(const fs::path& path, std::string_view bytes) {
  static std::atomic<unsigned long> counter{0};
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.parent_path() /
                       ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()) + "." +
                        std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "." +
                        std::to_string(counter.fetch_add(1)));
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
  if (fd < 0) throw Error("cannot create '" + tmp.string() + "': " + detail::errno_text());
  try {
    detail::write_all(fd, bytes, tmp);
    if (::fsync(fd) != 0) throw Error("fsync of '" + tmp.string() + "' failed: " + detail::errno_text());
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    const std::string err = detail::errno_text();
    ::unlink(tmp.c_str());
    throw Error("rename to '" + path.string() + "' failed: " + err);
  }
}

/// Exclusive advisory lock on a lock file, held for the object's lifetime.
/// flock() locks belong to the open file description, so this serializes
/// threads of one process as well as separate processes.
class FileLock {
 public:
  explicit FileLock(const fs::path& path) {
    fs::create_directories(path.parent_path());
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error("cannot open lock file '" + path.string() + "': " + detail::errno_text());
    while (::flock(fd_, LOCK_EX) != 0) {
      if (errno != EINTR) {
        ::close(fd_);
        throw Error("cannot lock '" + path.string() + "': " + detail::errno_text());
      }
    }
  }

  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

  ~FileLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }

 private:
  int fd_ = -1;
};

}  // namespace driftwatch
