import bisect
import hashlib
from collections.abc import Callable, Iterable

VIRTUAL_NODES = 64


class ShardRing:
    """
    Consistent hash ring that assigns work items to named shards.

    Search procedures use it to split a candidate space across worker tasks:
    the assignment depends only on the item key, so the same input always
    lands on the same shard and merged results stay deterministic.
    """
    def __init__(self, shards: list[str], replicas: int = VIRTUAL_NODES):
        self.replicas = replicas
        self._ring = {}
        self._sorted_keys = []

        for shard in shards:
            self.add_shard(shard)

    @classmethod
    def with_workers(cls, count: int, replicas: int = VIRTUAL_NODES) -> "ShardRing":
        return cls([f"worker-{i}" for i in range(max(count, 1))], replicas)

    @property
    def shards(self) -> list[str]:
        return sorted(set(self._ring.values()))

    def add_shard(self, shard: str):
        """Adds a shard with `replicas` virtual points on the ring."""
        for i in range(self.replicas):
            h = self._hash(f"{shard}:{i}")
            if h not in self._ring:
                bisect.insort(self._sorted_keys, h)
            self._ring[h] = shard

    def get_shard(self, key: str) -> str | None:
        """Walks clockwise from the key's hash to the first shard point."""
        if not self._ring:
            return None
        idx = bisect.bisect_left(self._sorted_keys, self._hash(key))
        if idx == len(self._sorted_keys):
            idx = 0
        return self._ring[self._sorted_keys[idx]]

    def partition(self, items: Iterable, key: Callable = repr) -> dict[str, list]:
        """Groups items by shard, keeping the input order inside each group."""
        groups = {shard: [] for shard in self.shards}
        for item in items:
            groups[self.get_shard(key(item))].append(item)
        return groups

    def _hash(self, key: str) -> int:
        return int(hashlib.md5(key.encode('utf-8')).hexdigest(), 16) & 0xFFFFFFFF
