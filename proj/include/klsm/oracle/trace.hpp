#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "klsm/config.hpp"

namespace klsm::oracle {

// One linearized queue event. idx is the event's position in the
// linearization order; traces keep records sorted by it.
enum class OpKind : char {
  Insert = 'I',
  Delete = 'D',
  Fail = 'F',  // delete_min that reported an empty queue
};

struct TraceRecord {
  std::uint64_t idx = 0;
  OpKind op = OpKind::Insert;
  unsigned handle = 0;
  Key key = 0;  // zero on Fail records

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using Trace = std::vector<TraceRecord>;

// Text form, one record per line: "idx op handle key" with op one of I/D/F.
// Parsing throws std::runtime_error with a line-numbered message.
Trace parse_trace(std::istream& in);
Trace parse_trace_file(const std::string& path);
void write_trace(std::ostream& out, const Trace& t);
void write_trace_file(const std::string& path, const Trace& t);

}  // namespace klsm::oracle
