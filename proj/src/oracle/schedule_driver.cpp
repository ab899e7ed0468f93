#include "klsm/oracle/schedule_driver.hpp"

#include <ucontext.h>

#include <algorithm>
#include <cassert>
#include <memory>

#include "klsm/queue.hpp"

namespace klsm::oracle {

namespace {

constexpr std::size_t kFiberStack = 256 * 1024;

struct Fiber {
  ucontext_t ctx{};
  std::unique_ptr<char[]> stack;
  bool done = false;
  bool parked = false;
  bool park_pending = false;
  std::uint64_t masked_yields = 0;
};

// Cooperative single-threaded scheduler. Fiber i drives handle i, so a sink
// callback's handle id names the fiber it runs on.
class Driver : public ExecutionSink {
 public:
  Driver(const std::vector<Script>& scripts, const DriverOptions& opt,
         Chooser& chooser)
      : scripts_(scripts), opt_(opt), chooser_(chooser) {}

  RunResult run();

  void yield(unsigned h, YieldSite site) override {
    // The session starts right after this point; remember the publication
    // count so a later failed publication can prove interference.
    if (site == YieldSite::SharedRefresh) session_mark_[h] = pub_count_;
    if (draining_ || !(opt_.yield_mask & yield_bit(site))) return;
    Fiber& f = fibers_[h];
    ++f.masked_yields;
    if (static_cast<int>(h) == opt_.park_fiber &&
        f.masked_yields >= opt_.park_after_yields)
      f.park_pending = true;
    sample_dist(h, false);
    to_scheduler(h);
  }

  void insert_linearized(unsigned h, Key k, Payload) override {
    result_.trace.push_back({next_stamp(), OpKind::Insert, h, k});
  }
  void delete_verified(unsigned h) override { pending_[h] = next_stamp(); }
  void delete_linearized(unsigned h, Key k, Payload) override {
    result_.trace.push_back({pending_[h], OpKind::Delete, h, k});
  }
  void delete_empty(unsigned h) override {
    result_.trace.push_back({pending_[h], OpKind::Fail, h, 0});
  }
  void publication(unsigned h, const PivotSample& s) override {
    ++result_.publications;
    ++pub_count_;
    if (opt_.on_publication) opt_.on_publication(h, s);
  }
  void publication_failed(unsigned h) override {
    ++result_.publication_failures;
    if (pub_count_ <= session_mark_[h]) result_.progress_ok = false;
  }

 private:
  static void trampoline(int idx);

  void fiber_main(unsigned idx) {
    const Script& s = scripts_[idx];
    Handle& h = *handles_[idx];
    for (std::size_t i = 0; i < s.size(); ++i) {
      const ScriptOp& op = s[i];
      if (op.kind == ScriptOp::Kind::Insert) {
        queue_->insert(h, op.key, op.payload);
      } else {
        Entry e;
        result_.deletes[idx].push_back(queue_->try_delete_min(h, e));
      }
      ++result_.ops_completed[idx];
      sample_dist(idx, true);
      if (i + 1 < s.size()) to_scheduler(idx);  // op boundary
    }
    fibers_[idx].done = true;
    // Falling off the end follows uc_link back to the scheduler.
  }

  void to_scheduler(unsigned idx) {
    swapcontext(&fibers_[idx].ctx, &sched_);
  }

  void sample_dist(unsigned idx, bool boundary) {
    if (!opt_.measure_dist_live) return;
    std::uint64_t v = queue_->debug_dist_live(*handles_[idx]);
    result_.max_dist_live_any = std::max(result_.max_dist_live_any, v);
    if (boundary)
      result_.max_dist_live_between_ops =
          std::max(result_.max_dist_live_between_ops, v);
  }

  std::uint64_t next_stamp() { return ++stamp_; }

  const std::vector<Script>& scripts_;
  const DriverOptions& opt_;
  Chooser& chooser_;

  std::unique_ptr<Queue> queue_;
  std::vector<Handle*> handles_;
  std::vector<Fiber> fibers_;
  ucontext_t sched_{};
  bool draining_ = false;

  RunResult result_;
  std::uint64_t stamp_ = 0;
  std::vector<std::uint64_t> pending_;
  std::uint64_t pub_count_ = 0;
  std::vector<std::uint64_t> session_mark_;
};

Driver* g_driver = nullptr;

void Driver::trampoline(int idx) {
  g_driver->fiber_main(static_cast<unsigned>(idx));
}

// swapcontext saves and restores the whole register file, so locals here
// survive fiber switches; the setjmp-style clobber analysis cannot see that.
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wclobbered"
RunResult Driver::run() {
  const unsigned n = static_cast<unsigned>(scripts_.size());
  Queue::Options qo;
  qo.relaxation = opt_.k;
  qo.max_handles = n ? n : 1;
  qo.seed = opt_.seed;
  qo.poison_reclamation = opt_.poison;
  qo.bloom_tables = opt_.bloom;
  queue_ = std::make_unique<Queue>(qo);
  for (unsigned i = 0; i < n; ++i)
    handles_.push_back(&queue_->register_handle());

  result_.deletes.resize(n);
  result_.ops_completed.assign(n, 0);
  pending_.assign(n, 0);
  session_mark_.assign(n, 0);
  queue_->set_execution_sink(this);

  fibers_ = std::vector<Fiber>(n);
  for (unsigned i = 0; i < n; ++i) {
    Fiber& f = fibers_[i];
    if (scripts_[i].empty()) {
      f.done = true;
      continue;
    }
    f.stack = std::make_unique<char[]>(kFiberStack);
    getcontext(&f.ctx);
    f.ctx.uc_stack.ss_sp = f.stack.get();
    f.ctx.uc_stack.ss_size = kFiberStack;
    f.ctx.uc_link = &sched_;
    makecontext(&f.ctx, reinterpret_cast<void (*)()>(&Driver::trampoline), 1,
                static_cast<int>(i));
  }

  assert(g_driver == nullptr);
  g_driver = this;
  std::uint64_t steps = 0;
  std::vector<unsigned> runnable;
  for (;;) {
    runnable.clear();
    for (unsigned i = 0; i < n; ++i) {
      Fiber& f = fibers_[i];
      if (f.park_pending && !f.parked) {
        f.parked = true;
        result_.parked = true;
      }
      if (!f.done && !f.parked) runnable.push_back(i);
    }
    if (runnable.empty()) break;
    if (++steps > opt_.max_steps) {
      result_.hit_step_limit = true;
      break;
    }
    std::size_t c = chooser_.pick(runnable.size());
    assert(c < runnable.size());
    swapcontext(&sched_, &fibers_[runnable[c]].ctx);
  }
  g_driver = nullptr;

  if (opt_.drain_at_end && !result_.parked && !result_.hit_step_limit) {
    // Runs on the scheduler context; yields are suppressed, linearization
    // events still record.
    draining_ = true;
    bool progress = true;
    while (progress) {
      progress = false;
      for (unsigned i = 0; i < n; ++i) {
        Entry e;
        while (queue_->try_delete_min(*handles_[i], e)) progress = true;
      }
    }
  }

  queue_->set_execution_sink(nullptr);
  queue_.reset();  // teardown while parked fibers' stacks are still mapped

  std::sort(result_.trace.begin(), result_.trace.end(),
            [](const TraceRecord& a, const TraceRecord& b) {
              return a.idx < b.idx;
            });
  return std::move(result_);
}
#pragma GCC diagnostic pop

}  // namespace

RunResult drive_schedule(const std::vector<Script>& scripts,
                         const DriverOptions& opt, Chooser& chooser) {
  Driver d(scripts, opt, chooser);
  return d.run();
}

std::uint64_t enumerate_schedules(
    const std::vector<Script>& scripts, const DriverOptions& opt,
    std::uint64_t max_runs,
    const std::function<void(const RunResult&)>& visit) {
  std::vector<std::uint32_t> prefix;
  std::uint64_t runs = 0;
  for (;;) {
    FixedChooser ch(prefix);
    RunResult r = drive_schedule(scripts, opt, ch);
    visit(r);
    if (++runs >= max_runs) break;

    // Advance the last choice that still has an unexplored sibling and drop
    // everything after it; the next run extends with default choices.
    const auto& sizes = ch.sizes();
    const auto& taken = ch.taken();
    std::size_t i = taken.size();
    bool advanced = false;
    while (i > 0) {
      --i;
      if (taken[i] + 1 < sizes[i]) {
        prefix.assign(taken.begin(), taken.begin() + i);
        prefix.push_back(taken[i] + 1);
        advanced = true;
        break;
      }
    }
    if (!advanced) break;
  }
  return runs;
}

}  // namespace klsm::oracle
