#include "klsm/oracle/trace.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace klsm::oracle {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << "trace line " << line << ": " << what;
  throw std::runtime_error(os.str());
}

}  // namespace

Trace parse_trace(std::istream& in) {
  Trace out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::istringstream is(line);
    TraceRecord rec;
    std::string op;
    if (!(is >> rec.idx >> op >> rec.handle >> rec.key))
      fail(lineno, "expected 'idx op handle key'");
    std::string rest;
    if (is >> rest) fail(lineno, "trailing content '" + rest + "'");
    if (op.size() != 1 || (op[0] != 'I' && op[0] != 'D' && op[0] != 'F'))
      fail(lineno, "op must be one of I, D, F");
    rec.op = static_cast<OpKind>(op[0]);
    out.push_back(rec);
  }
  return out;
}

Trace parse_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  return parse_trace(in);
}

void write_trace(std::ostream& out, const Trace& t) {
  for (const TraceRecord& r : t)
    out << r.idx << ' ' << static_cast<char>(r.op) << ' ' << r.handle << ' '
        << r.key << '\n';
}

void write_trace_file(const std::string& path, const Trace& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  write_trace(out, t);
}

}  // namespace klsm::oracle
