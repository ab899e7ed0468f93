#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "klsm/bloom.hpp"
#include "klsm/config.hpp"
#include "klsm/execution_hooks.hpp"
#include "klsm/oracle/trace.hpp"
#include "klsm/rng.hpp"

namespace klsm::oracle {

// One queue operation in a scripted workload.
struct ScriptOp {
  enum class Kind { Insert, DeleteMin };
  Kind kind = Kind::Insert;
  Key key = 0;
  Payload payload = 0;

  static ScriptOp insert(Key k) { return {Kind::Insert, k, k}; }
  static ScriptOp delete_min() { return {Kind::DeleteMin, 0, 0}; }
};

using Script = std::vector<ScriptOp>;

// Picks which runnable fiber continues at each scheduling point.
class Chooser {
 public:
  virtual ~Chooser() = default;
  virtual std::size_t pick(std::size_t runnable) = 0;  // result < runnable
};

class RandomChooser : public Chooser {
 public:
  explicit RandomChooser(std::uint64_t seed) : rng_(seed) {}
  std::size_t pick(std::size_t runnable) override {
    return static_cast<std::size_t>(rng_.below(runnable));
  }

 private:
  Rng rng_;
};

class RoundRobinChooser : public Chooser {
 public:
  std::size_t pick(std::size_t runnable) override {
    return next_++ % runnable;
  }

 private:
  std::size_t next_ = 0;
};

// Replays a fixed choice prefix, then always picks the first runnable
// fiber. Records the runnable-set size and the choice made at every point,
// which is what exhaustive enumeration advances over.
class FixedChooser : public Chooser {
 public:
  explicit FixedChooser(std::vector<std::uint32_t> prefix)
      : prefix_(std::move(prefix)) {}

  std::size_t pick(std::size_t runnable) override {
    std::uint32_t c = step_ < prefix_.size() ? prefix_[step_] : 0;
    if (c >= runnable) c = 0;  // prefixes from other schedules may overshoot
    ++step_;
    sizes_.push_back(static_cast<std::uint32_t>(runnable));
    taken_.push_back(c);
    return c;
  }

  const std::vector<std::uint32_t>& sizes() const { return sizes_; }
  const std::vector<std::uint32_t>& taken() const { return taken_; }

 private:
  std::vector<std::uint32_t> prefix_;
  std::size_t step_ = 0;
  std::vector<std::uint32_t> sizes_;
  std::vector<std::uint32_t> taken_;
};

struct DriverOptions {
  std::uint64_t k = 0;
  std::uint64_t seed = 1;
  std::uint32_t yield_mask = 0;        // yield sites that switch fibers
  std::uint64_t max_steps = 1 << 22;   // scheduling picks before giving up
  int park_fiber = -1;                 // fiber suspended forever mid-run
  std::uint64_t park_after_yields = 0; // masked yields before it parks
  bool poison = false;                 // scribble reclaimed memory
  bool measure_dist_live = false;      // track local-tree live sizes
  bool drain_at_end = false;           // pop everything after scripts finish
  std::shared_ptr<const BloomTables> bloom;  // reuse across many runs
  // Observes every successful publication (runs on the operating fiber).
  std::function<void(unsigned, const PivotSample&)> on_publication;
};

struct RunResult {
  Trace trace;                             // sorted by linearization stamp
  std::vector<std::vector<bool>> deletes;  // per fiber: delete_min results
  std::vector<std::uint64_t> ops_completed;
  std::uint64_t publications = 0;
  std::uint64_t publication_failures = 0;
  // Every failed publication had a competing publication since the session
  // started; false means the progress argument was violated.
  bool progress_ok = true;
  std::uint64_t max_dist_live_between_ops = 0;
  std::uint64_t max_dist_live_any = 0;
  bool parked = false;
  bool hit_step_limit = false;
};

// Runs the scripts as cooperatively scheduled fibers over one queue, fiber i
// owning handle i. Every boundary between two script ops and every masked
// yield site is a scheduling point decided by the chooser.
RunResult drive_schedule(const std::vector<Script>& scripts,
                         const DriverOptions& opt, Chooser& chooser);

// Enumerates schedules in lexicographic choice order until exhaustion or
// max_runs, whichever is first. Returns the number of runs visited.
std::uint64_t enumerate_schedules(
    const std::vector<Script>& scripts, const DriverOptions& opt,
    std::uint64_t max_runs,
    const std::function<void(const RunResult&)>& visit);

}  // namespace klsm::oracle
