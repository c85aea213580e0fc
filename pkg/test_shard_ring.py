from shard_ring import ShardRing


def test_same_key_lands_on_same_shard():
    ring = ShardRing(["worker-0", "worker-1", "worker-2"])
    assert ring.get_shard("element-7") == ring.get_shard("element-7")


def test_empty_ring():
    assert ShardRing([]).get_shard("x") is None


def test_with_workers_names_shards():
    assert ShardRing.with_workers(3).shards == ["worker-0", "worker-1", "worker-2"]
    assert ShardRing.with_workers(0).shards == ["worker-0"]


def test_partition_covers_items_in_order():
    ring = ShardRing.with_workers(4)
    items = list(range(200))
    groups = ring.partition(items)
    assert sorted(x for group in groups.values() for x in group) == items
    for group in groups.values():
        assert group == sorted(group)
    # 64 virtual nodes per shard spread 200 keys over every worker
    assert all(groups.values())


def test_adding_a_shard_only_moves_keys_onto_it():
    ring = ShardRing.with_workers(3)
    keys = [f"k{i}" for i in range(500)]
    before = {k: ring.get_shard(k) for k in keys}
    ring.add_shard("worker-3")
    for k in keys:
        after = ring.get_shard(k)
        assert after in (before[k], "worker-3")
