import random
from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass, field
from itertools import combinations, product

from opentelemetry import trace

from core_structures import FiniteCategory, preorder_quotient
from errors import SizeGuardError, StructureError
from eset import ESet, union_hom
from search import PARTITION_LIMIT, SearchResult, bell_number, set_partitions, smallest_subset
from union_find import UnionFind

tracer = trace.get_tracer(__name__)

MINIMAL_GENERATORS_BUDGET = 6


@dataclass(frozen=True)
class RelationFamily:
    """Pairs of elements per object: `pairs[E]` is a tuple of (s, t) within carrier(E)."""
    pairs: Mapping[Hashable, tuple]

    @classmethod
    def build(cls, X: ESet, pairs: Mapping[Hashable, Iterable]) -> "RelationFamily":
        checked = {}
        for obj, items in pairs.items():
            if obj not in X.carriers:
                raise StructureError(f"relation at unknown object {obj!r}", f"relation.{obj}")
            carrier = set(X.carriers[obj])
            rows = []
            for i, (s, t) in enumerate(items):
                if s not in carrier or t not in carrier:
                    raise StructureError(f"pair ({s!r}, {t!r}) leaves carrier({obj!r})", f"relation.{obj}[{i}]")
                rows.append((s, t))
            checked[obj] = tuple(rows)
        return cls(pairs=checked)

    @classmethod
    def from_triples(cls, X: ESet, triples: Iterable[tuple]) -> "RelationFamily":
        grouped = {}
        for obj, s, t in triples:
            grouped.setdefault(obj, []).append((s, t))
        return cls.build(X, grouped)

    def triples(self) -> list[tuple]:
        return [(obj, s, t) for obj, rows in self.pairs.items() for s, t in rows]

    def size(self) -> int:
        return sum(len(rows) for rows in self.pairs.values())


@dataclass(frozen=True)
class CongruenceFamily:
    """
    One partition per object. Blocks are ordered by their first element and
    list their members in carrier order. `merges` counts successful unions
    when the family came out of a closure.
    """
    blocks: Mapping[Hashable, tuple[tuple, ...]]
    merges: int = field(default=0, compare=False)

    @classmethod
    def from_blocks(cls, X: ESet, blocks: Mapping[Hashable, Iterable[Iterable]]) -> "CongruenceFamily":
        uf = {obj: UnionFind(X.carriers[obj]) for obj in X.category.objects}
        for obj, obj_blocks in blocks.items():
            if obj not in uf:
                raise StructureError(f"partition for unknown object {obj!r}", f"partition.{obj}")
            seen = set()
            for block in obj_blocks:
                block = list(block)
                for x in block:
                    if x not in uf[obj].parent or x in seen:
                        raise StructureError(f"{x!r} is not a fresh element of carrier({obj!r})", f"partition.{obj}")
                    seen.add(x)
                for x in block[1:]:
                    uf[obj].union(block[0], x)
        return cls._from_union_find(X, uf)

    @classmethod
    def _from_union_find(cls, X: ESet, uf: Mapping[Hashable, UnionFind], merges: int = 0) -> "CongruenceFamily":
        return cls(blocks={obj: tuple(tuple(b) for b in uf[obj].groups(X.carriers[obj]))
                           for obj in X.category.objects},
                   merges=merges)

    def partition(self, obj) -> tuple[tuple, ...]:
        return self.blocks[obj]

    def relates(self, obj, s, t) -> bool:
        return any(s in block and t in block for block in self.blocks[obj])

    def class_count(self) -> int:
        return sum(len(b) for b in self.blocks.values())

    def class_of(self, obj, x) -> tuple:
        for block in self.blocks[obj]:
            if x in block:
                return block
        raise StructureError(f"{x!r} is not in carrier({obj!r})", f"partition.{obj}")


def discrete_congruence(X: ESet) -> CongruenceFamily:
    return CongruenceFamily({obj: tuple((x,) for x in X.carriers[obj]) for obj in X.category.objects})


def improper_congruence(X: ESet) -> CongruenceFamily:
    return CongruenceFamily({obj: (tuple(X.carriers[obj]),) if X.carriers[obj] else ()
                             for obj in X.category.objects})


def is_improper(family: CongruenceFamily) -> bool:
    return all(len(blocks) <= 1 for blocks in family.blocks.values())


def is_congruence(X: ESet, family: CongruenceFamily) -> bool:
    """Checks that related elements have related images under every action."""
    label = {}
    for obj, blocks in family.blocks.items():
        for i, block in enumerate(blocks):
            for x in block:
                label[(obj, x)] = i
    for m in X.category.morphisms:
        image_label = {}
        for x in X.carriers[m.source]:
            here = label[(m.source, x)]
            there = label[(m.target, X.act(m, x))]
            if image_label.setdefault(here, there) != there:
                return False
    return True


def congruence_closure(X: ESet, relation: RelationFamily, shuffle_seed: int | None = None) -> CongruenceFamily:
    """
    Least congruence containing `relation`.

    One union-find per object and a worklist of pairs. Each successful union
    (s, t) at E enqueues (X(a)(s), X(a)(t)) for the non-identity morphisms a
    out of E. `shuffle_seed` randomizes the pop order, which must not change
    the result.
    """
    with tracer.start_as_current_span("congruence.closure") as span:
        category = X.category
        uf = {obj: UnionFind(X.carriers[obj]) for obj in category.objects}
        worklist = relation.triples()
        rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
        merges = 0
        while worklist:
            if rng is not None:
                i = rng.randrange(len(worklist))
                worklist[i], worklist[-1] = worklist[-1], worklist[i]
            obj, s, t = worklist.pop()
            if not uf[obj].union(s, t):
                continue
            merges += 1
            for m in category.non_identity_out(obj):
                action = X.actions[m]
                worklist.append((m.target, action[s], action[t]))
        result = CongruenceFamily._from_union_find(X, uf, merges)
        span.set_attribute("relation.size", relation.size())
        span.set_attribute("closure.merges", merges)
        return result


def _improper_from(X: ESet, triples: Iterable[tuple]) -> bool:
    return is_improper(congruence_closure(X, RelationFamily(_group(triples))))


def _group(triples: Iterable[tuple]) -> dict:
    grouped = {}
    for obj, s, t in triples:
        grouped.setdefault(obj, []).append((s, t))
    return {obj: tuple(rows) for obj, rows in grouped.items()}


def candidate_pairs(X: ESet) -> list[tuple]:
    """(E, s, t) with s before t in carrier(E), by object then element order."""
    return [(obj, s, t) for obj in X.category.objects for s, t in combinations(X.carriers[obj], 2)]


def greedy_improper_generators(X: ESet) -> list[tuple]:
    """Repeatedly adds the candidate pair that merges the most classes. An upper bound only."""
    chosen = []
    current = congruence_closure(X, RelationFamily({}))
    candidates = candidate_pairs(X)
    while not is_improper(current):
        best, best_classes = None, None
        for triple in candidates:
            obj, s, t = triple
            if current.relates(obj, s, t):
                continue
            classes = congruence_closure(X, RelationFamily(_group(chosen + [triple]))).class_count()
            if best_classes is None or classes < best_classes:
                best, best_classes = triple, classes
        chosen.append(best)
        current = congruence_closure(X, RelationFamily(_group(chosen)))
    return chosen


def minimal_improper_generators(X: ESet, budget: int = MINIMAL_GENERATORS_BUDGET) -> SearchResult:
    """
    Smallest relation family whose closure is improper, searched by total pair
    count with ties broken by object then element order. Beyond the budget a
    greedy family is reported as a labelled upper bound.
    """
    with tracer.start_as_current_span("congruence.minimal_improper_generators") as span:
        candidates = candidate_pairs(X)
        result = smallest_subset(candidates, lambda triples: _improper_from(X, triples), budget=budget)
        if not result.found:
            result = result.with_greedy(greedy_improper_generators(X))
        span.set_attribute("search.checked", result.checked)
        span.set_attribute("search.exact", result.exact)
        return result


def minimal_improper_generator_objects(X: ESet, budget: int | None = None) -> SearchResult:
    """Fewest objects whose full carrier relations together generate the improper congruence."""
    def full_relation(objects: tuple) -> list[tuple]:
        return [(obj, X.carriers[obj][0], x) for obj in objects for x in X.carriers[obj][1:]]

    candidates = [obj for obj in X.category.objects if len(X.carriers[obj]) > 1]
    return smallest_subset(candidates, lambda objects: _improper_from(X, full_relation(objects)), budget=budget)


def enumerate_congruences(X: ESet) -> list[CongruenceFamily]:
    """All congruences of a small E-set, by filtering products of set partitions."""
    total = 1
    for obj in X.category.objects:
        total *= bell_number(len(X.carriers[obj]))
    if total > PARTITION_LIMIT:
        raise SizeGuardError(f"{total} partition families exceed the guard of {PARTITION_LIMIT}")
    objects = X.category.objects
    found = []
    for choice in product(*(list(set_partitions(X.carriers[obj])) for obj in objects)):
        family = CongruenceFamily.from_blocks(X, dict(zip(objects, choice)))
        if is_congruence(X, family):
            found.append(family)
    return found


def brute_force_closure(X: ESet, relation: RelationFamily) -> CongruenceFamily:
    """The least congruence containing `relation`, found by enumeration. Oracle for `congruence_closure`."""
    best = None
    for family in enumerate_congruences(X):
        if all(family.relates(obj, s, t) for obj, s, t in relation.triples()):
            if best is None or family.class_count() > best.class_count():
                best = family
    return best


@dataclass(frozen=True)
class FinitePresentation:
    """Witness that the trivial E-set is finitely presented: objects A and relations on the union of H_E, E in A."""
    sources: tuple
    union: ESet
    relations: SearchResult


def trivial_eset_finitely_presented(category: FiniteCategory,
                                    budget: int = MINIMAL_GENERATORS_BUDGET) -> FinitePresentation:
    if not category.objects:
        raise StructureError("the empty category has no presentation of its trivial E-set", "objects")
    with tracer.start_as_current_span("congruence.finitely_presented") as span:
        quotient, _ = preorder_quotient(category)
        # class labels are the first object of each class
        sources = quotient.minimal_elements()
        H = union_hom(category, sources)
        relations = minimal_improper_generators(H, budget)
        span.set_attribute("presentation.objects", len(sources))
        span.set_attribute("presentation.relations", relations.size or 0)
        return FinitePresentation(sources=tuple(sources), union=H, relations=relations)
