#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <optional>

#include "klsm/block.hpp"
#include "klsm/config.hpp"
#include "klsm/item.hpp"
#include "klsm/reclamation.hpp"

using namespace klsm;

namespace {

struct Probe {
  std::atomic<int>* counter;
};

void reclaim_probe(void* p, ReclamationDomain&, unsigned) {
  auto* probe = static_cast<Probe*>(p);
  probe->counter->fetch_add(1);
  delete probe;
}

}  // namespace

TEST_CASE("retire defers while another slot is pinned") {
  ReclamationDomain d(2);
  std::atomic<int> freed{0};

  auto guard = std::optional<ReclamationDomain::Guard>(d.pin(1));
  d.retire(0, new Probe{&freed}, reclaim_probe);
  // Flushing cannot advance two epochs past the retirement while slot 1
  // stays pinned behind it.
  for (int i = 0; i < 8; ++i) d.flush(0);
  CHECK(freed.load() == 0);

  guard.reset();
  d.flush(0);
  CHECK(freed.load() == 1);
}

TEST_CASE("unpinned domains reclaim on flush") {
  ReclamationDomain d(4);
  std::atomic<int> freed{0};
  for (int i = 0; i < 10; ++i) d.retire(2, new Probe{&freed}, reclaim_probe);
  d.flush(2);
  CHECK(freed.load() == 10);
  CHECK(d.reclaimed_count() == 10);
}

TEST_CASE("drain_all reclaims regardless of epochs") {
  std::atomic<int> freed{0};
  {
    ReclamationDomain d(2);
    auto g = d.pin(1);
    d.retire(0, new Probe{&freed}, reclaim_probe);
    // Destructor drains even though slot 1 never unpinned; the caller
    // guarantees quiescence at that point.
    d.drain_all();
    CHECK(freed.load() == 1);
  }
  CHECK(freed.load() == 1);
}

TEST_CASE("retired blocks release their items") {
  ReclamationDomain d(1);
  Block* b = new Block(1);
  Item* it = new Item(5, 5);
  b->append(it, nullptr);
  Block* c = b->copy(1, nullptr);
  CHECK(it->refs() == 2);

  d.retire(0, b, Block::reclaim);
  d.flush(0);
  CHECK(it->refs() == 1);  // copy still holds it
  CHECK(it->key() == 5);

  d.retire(0, c, Block::reclaim);
  d.flush(0);
  // Both references gone; the item was deleted with the last one.
}

TEST_CASE("poison mode scribbles and quarantines until teardown") {
  ReclamationDomain d(1, true);
  CHECK(d.poison());

  Block* b = new Block(1);
  Item* it = new Item(5, 99);
  b->append(it, nullptr);

  d.retire(0, b, Block::reclaim);
  d.flush(0);
  // The item lost its last reference: its memory survives in quarantine but
  // carries the marker, and the block's slots point at the marker item.
  CHECK(it->key() == kPoisonKey);
  CHECK(it->payload() == kPoisonKey);
  CHECK(b->item(0)->key() == kPoisonKey);

  d.drain_all();  // frees quarantined memory; asan-clean end
}

TEST_CASE("immediate reclaim honors poison mode too") {
  ReclamationDomain d(1, true);
  Item* it = new Item(7, 7);
  Item::reclaim(it, d, 0);
  CHECK(it->key() == kPoisonKey);
}

TEST_CASE("epoch advance needs every slot quiescent or current") {
  ReclamationDomain d(3);
  std::atomic<int> freed{0};
  {
    auto g0 = d.pin(0);
    d.retire(0, new Probe{&freed}, reclaim_probe);
    {
      auto g2 = d.pin(2);
      for (int i = 0; i < 4; ++i) d.flush(0);
      CHECK(freed.load() == 0);
    }
    // Slot 0 itself is pinned at the current epoch; that alone does not
    // block an advance, its own retirement just waits two epochs.
    d.flush(0);
  }
  d.flush(0);
  CHECK(freed.load() == 1);
}
