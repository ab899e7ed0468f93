#include "klsm/oracle/checkers.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <vector>

namespace klsm::oracle {

namespace {

CheckResult violation(const TraceRecord& r, const std::string& what) {
  std::ostringstream os;
  os << "record " << r.idx << ": " << what;
  return {false, os.str(), r.idx};
}

// Sorted unique keys of all inserts; deletes resolve against this universe.
std::vector<Key> key_universe(const Trace& t) {
  std::vector<Key> keys;
  for (const TraceRecord& r : t)
    if (r.op == OpKind::Insert) keys.push_back(r.key);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

bool find_pos(const std::vector<Key>& keys, Key k, std::size_t& pos) {
  auto it = std::lower_bound(keys.begin(), keys.end(), k);
  if (it == keys.end() || *it != k) return false;
  pos = static_cast<std::size_t>(it - keys.begin());
  return true;
}

// Point-update prefix-sum counts over compressed keys.
class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : t_(n + 1, 0) {}

  void add(std::size_t i, std::int64_t d) {
    for (++i; i < t_.size(); i += i & -i) t_[i] += d;
  }

  // Sum over positions [0, n).
  std::int64_t prefix(std::size_t n) const {
    std::int64_t s = 0;
    for (; n > 0; n -= n & -n) s += t_[n];
    return s;
  }

  std::int64_t total() const { return prefix(t_.size() - 1); }

 private:
  std::vector<std::int64_t> t_;
};

// Point-update range-minimum over compressed keys.
class MinTree {
 public:
  static constexpr std::uint64_t kInf = ~0ull;

  explicit MinTree(std::size_t n) : n_(std::max<std::size_t>(n, 1)) {
    t_.assign(2 * n_, kInf);
  }

  void set(std::size_t i, std::uint64_t v) {
    i += n_;
    t_[i] = v;
    for (i /= 2; i >= 1; i /= 2)
      t_[i] = std::min(t_[2 * i], t_[2 * i + 1]);
  }

  // Minimum over positions [0, count).
  std::uint64_t min_prefix(std::size_t count) const {
    std::uint64_t best = kInf;
    std::size_t lo = n_, hi = n_ + count;
    while (lo < hi) {
      if (lo & 1) best = std::min(best, t_[lo++]);
      if (hi & 1) best = std::min(best, t_[--hi]);
      lo /= 2;
      hi /= 2;
    }
    return best;
  }

  std::uint64_t min_all() const { return min_prefix(n_); }

 private:
  std::size_t n_;
  std::vector<std::uint64_t> t_;
};

// Shared replay validation: strictly increasing idx.
bool check_monotonic(const Trace& t, CheckResult& out) {
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i].idx <= t[i - 1].idx) {
      out = violation(t[i], "idx does not increase");
      return false;
    }
  }
  return true;
}

}  // namespace

CheckResult check_structural(const Trace& t, std::uint64_t rho,
                             std::uint64_t* max_rank) {
  if (max_rank) *max_rank = 0;
  CheckResult res;
  if (!check_monotonic(t, res)) return res;

  std::vector<Key> keys = key_universe(t);
  Fenwick live(keys.size());
  std::vector<std::int64_t> count(keys.size(), 0);

  for (const TraceRecord& r : t) {
    std::size_t pos = 0;
    switch (r.op) {
      case OpKind::Insert:
        find_pos(keys, r.key, pos);  // inserts are always in the universe
        live.add(pos, 1);
        ++count[pos];
        break;
      case OpKind::Delete: {
        if (!find_pos(keys, r.key, pos) || count[pos] == 0)
          return violation(r, "deletes a key that is not live");
        std::uint64_t rank =
            static_cast<std::uint64_t>(live.prefix(pos)) + 1;
        if (max_rank) *max_rank = std::max(*max_rank, rank);
        if (rank > rho + 1) {
          std::ostringstream os;
          os << "delete of key " << r.key << " has live rank " << rank
             << ", limit " << rho + 1;
          return violation(r, os.str());
        }
        live.add(pos, -1);
        --count[pos];
        break;
      }
      case OpKind::Fail: {
        std::uint64_t n = static_cast<std::uint64_t>(live.total());
        if (n > rho) {
          std::ostringstream os;
          os << "failed delete while " << n << " items are live, limit "
             << rho;
          return violation(r, os.str());
        }
        break;
      }
    }
  }
  return res;
}

CheckResult check_temporal(const Trace& t, std::uint64_t rho,
                           std::uint64_t* max_lag) {
  if (max_lag) *max_lag = 0;
  CheckResult res;
  if (!check_monotonic(t, res)) return res;

  std::vector<Key> keys = key_universe(t);
  std::vector<std::deque<std::uint64_t>> seqs(keys.size());
  MinTree oldest(keys.size());
  std::uint64_t inserts = 0;

  auto lag_of = [&](std::uint64_t min_seq) -> std::uint64_t {
    return min_seq == MinTree::kInf ? 0 : inserts - min_seq;
  };

  for (const TraceRecord& r : t) {
    std::size_t pos = 0;
    switch (r.op) {
      case OpKind::Insert:
        find_pos(keys, r.key, pos);
        ++inserts;
        seqs[pos].push_back(inserts);
        if (seqs[pos].size() == 1) oldest.set(pos, inserts);
        break;
      case OpKind::Delete: {
        if (!find_pos(keys, r.key, pos) || seqs[pos].empty())
          return violation(r, "deletes a key that is not live");
        std::uint64_t m = oldest.min_prefix(pos);
        std::uint64_t lag = lag_of(m);
        if (max_lag) *max_lag = std::max(*max_lag, lag);
        if (m != MinTree::kInf && lag >= rho) {
          std::ostringstream os;
          os << "delete of key " << r.key << " passes over an element "
             << lag << " inserts old, limit " << rho;
          return violation(r, os.str());
        }
        seqs[pos].pop_front();
        oldest.set(pos, seqs[pos].empty() ? MinTree::kInf : seqs[pos].front());
        break;
      }
      case OpKind::Fail: {
        std::uint64_t m = oldest.min_all();
        std::uint64_t lag = lag_of(m);
        if (max_lag) *max_lag = std::max(*max_lag, lag);
        if (m != MinTree::kInf && lag >= rho) {
          std::ostringstream os;
          os << "failed delete while an element " << lag
             << " inserts old is live, limit " << rho;
          return violation(r, os.str());
        }
        break;
      }
    }
  }
  return res;
}

}  // namespace klsm::oracle
