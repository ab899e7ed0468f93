#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "klsm/oracle/checkers.hpp"
#include "klsm/oracle/trace.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Replays a priority-queue trace and checks a relaxation bound"};
  std::uint64_t rho = 0;
  std::string mode;
  std::string path;
  app.add_option("--rho", rho, "relaxation bound")->required();
  app.add_option("--mode", mode, "bound semantics")
      ->required()
      ->check(CLI::IsMember({"structural", "temporal"}));
  app.add_option("tracefile", path, "trace file (lines: idx op handle key)")
      ->required();
  CLI11_PARSE(app, argc, argv);

  klsm::oracle::Trace trace;
  try {
    trace = klsm::oracle::parse_trace_file(path);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }

  std::uint64_t metric = 0;
  klsm::oracle::CheckResult res =
      mode == "structural" ? check_structural(trace, rho, &metric)
                           : check_temporal(trace, rho, &metric);
  if (res.ok) {
    std::cout << "PASS " << mode << " rho=" << rho
              << " records=" << trace.size()
              << (mode == "structural" ? " max_rank=" : " max_lag=") << metric
              << "\n";
    return 0;
  }
  std::cout << "FAIL " << mode << " rho=" << rho << " " << res.message << "\n";
  return 1;
}
