#pragma once

#include <stdexcept>
#include <string>

namespace mst {

enum class Status : int {
  ok = 0,
  invalid_argument = 1,
  domain = 2,
  regime = 3,
  convergence = 4,
  budget = 5,
  internal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(Status s, const std::string& what) : std::runtime_error(what), status_(s) {}
  Status status() const noexcept { return status_; }

 private:
  Status status_;
};

[[noreturn]] inline void fail(Status s, const std::string& what) { throw Error(s, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(Status::invalid_argument, what);
}

}  // namespace mst
