#pragma once

#include <cstdint>
#include <string>

#include "klsm/oracle/trace.hpp"

namespace klsm::oracle {

struct CheckResult {
  bool ok = true;
  std::string message;     // empty when ok
  std::uint64_t index = 0; // idx of the offending record when not ok

  explicit operator bool() const { return ok; }
};

// Structural rho-relaxation: every delete removes an element whose rank
// among the elements live at that point is at most rho+1, and every failed
// delete happens while at most rho elements are live. Replay errors
// (non-monotonic idx, deleting a key that is not live) are reported too.
// max_rank, when given, receives the largest delete rank the replay saw.
CheckResult check_structural(const Trace& t, std::uint64_t rho,
                             std::uint64_t* max_rank = nullptr);

// Temporal rho-relaxation: a delete may pass over a smaller live element
// only if fewer than rho inserts happened after that element arrived, and a
// failed delete requires the same of every live element. Deletes of a key
// with several live instances consume the oldest one, which never rules out
// a trace some other instance choice would admit. max_lag, when given,
// receives the largest insert age a delete or fail passed over.
CheckResult check_temporal(const Trace& t, std::uint64_t rho,
                           std::uint64_t* max_lag = nullptr);

}  // namespace klsm::oracle
