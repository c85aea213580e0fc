from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from itertools import combinations

SEARCH_CHECK_LIMIT = 2_000_000
PARTITION_LIMIT = 250_000


@dataclass(frozen=True)
class SearchResult:
    """
    Outcome of a budgeted minimal-witness search.

    `exact` is True only when `witness` is known to be minimal. When the budget
    or the check limit runs out first, `found` may still be True with a greedy
    witness whose size is reported as `greedy_upper_bound`.
    """
    found: bool
    witness: tuple = ()
    size: int | None = None
    exact: bool = False
    exhausted_budget: bool = False
    greedy_upper_bound: int | None = None
    checked: int = 0
    notes: list[str] = field(default_factory=list, compare=False)

    def with_greedy(self, witness: Sequence | None) -> "SearchResult":
        if witness is None:
            return self
        witness = tuple(witness)
        return SearchResult(found=True, witness=witness, size=len(witness), exact=False,
                            exhausted_budget=self.exhausted_budget, greedy_upper_bound=len(witness),
                            checked=self.checked, notes=self.notes + ["greedy upper bound, not minimal"])


def smallest_subset(candidates: Sequence, accept: Callable[[tuple], bool], budget: int | None = None,
                    required: Sequence = (), max_checks: int = SEARCH_CHECK_LIMIT) -> SearchResult:
    """
    First subset (by size, then lexicographically in `candidates` order) that
    `accept` admits. `required` members are always included and count
    towards the size.
    """
    required = tuple(required)
    pool = [c for c in candidates if c not in required]
    limit = len(required) + len(pool) if budget is None else min(budget, len(required) + len(pool))
    checked = 0
    for size in range(len(required), limit + 1):
        for extra in combinations(pool, size - len(required)):
            checked += 1
            if checked > max_checks:
                return SearchResult(found=False, exhausted_budget=True, checked=checked,
                                    notes=[f"stopped after {max_checks} candidate sets"])
            witness = required + extra
            if accept(witness):
                return SearchResult(found=True, witness=witness, size=len(witness), exact=True, checked=checked)
    return SearchResult(found=False, exhausted_budget=budget is not None and budget < len(required) + len(pool),
                        checked=checked)


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    """All set partitions of `items`; blocks keep the input order."""
    items = list(items)
    if not items:
        yield []
        return
    if len(items) == 1:
        yield [items]
        return
    first = items[0]
    for smaller in set_partitions(items[1:]):
        # insert `first` in each of the subpartition's blocks
        for n, block in enumerate(smaller):
            yield smaller[:n] + [[first] + block] + smaller[n + 1:]
        yield [[first]] + smaller


def bell_number(n: int) -> int:
    """Bell numbers by the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for value in row:
            nxt.append(nxt[-1] + value)
        row = nxt
    return row[0]
