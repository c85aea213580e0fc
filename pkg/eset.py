import asyncio
from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass
from itertools import product
from typing import TYPE_CHECKING

from opentelemetry import trace

from core_structures import FiniteCategory, Morphism
from errors import SizeGuardError, StructureError
from shard_ring import ShardRing

if TYPE_CHECKING:
    from congruence import CongruenceFamily

tracer = trace.get_tracer(__name__)

BRUTE_FORCE_LIMIT = 10**6
LIMIT_WORKERS = 4

# A limit element is a tuple of coordinates aligned with category.objects.
LimitElement = tuple


@dataclass(frozen=True, eq=False)
class ESet:
    """
    A functor from a finite category to finite sets.

    `carriers[E]` lists the elements at E in a fixed order; `actions[a]`
    maps carrier(source) to carrier(target) for every morphism a.
    """
    category: FiniteCategory
    carriers: Mapping[Hashable, tuple]
    actions: Mapping[Morphism, Mapping]

    @classmethod
    def build(cls, category: FiniteCategory, carriers: Mapping[Hashable, Iterable],
              actions: Mapping) -> "ESet":
        """Validates totality and functoriality. Identity actions may be omitted."""
        cars = {}
        for obj in category.objects:
            elems = tuple(carriers.get(obj, ()))
            if len(set(elems)) != len(elems):
                raise StructureError(f"carrier at {obj!r} repeats an element", f"carriers.{obj}")
            cars[obj] = elems
        unknown = set(carriers) - set(category.objects)
        if unknown:
            raise StructureError(f"carriers for unknown objects {sorted(map(str, unknown))}", "carriers")

        given = {}
        for key, mapping in actions.items():
            m = key if isinstance(key, Morphism) else category.morphism(key)
            given[m] = dict(mapping)

        acts = {}
        for m in category.morphisms:
            location = f"actions.{m}"
            if m not in given:
                if category.is_identity(m):
                    acts[m] = {x: x for x in cars[m.source]}
                    continue
                raise StructureError(f"no action given for {m}", location)
            mapping = given[m]
            target = set(cars[m.target])
            for x in cars[m.source]:
                if x not in mapping:
                    raise StructureError(f"action of {m} is undefined on {x!r}", location)
                if mapping[x] not in target:
                    raise StructureError(f"action of {m} sends {x!r} outside carrier({m.target!r})", location)
            acts[m] = {x: mapping[x] for x in cars[m.source]}
            if category.is_identity(m) and any(acts[m][x] != x for x in cars[m.source]):
                raise StructureError(f"identity {m} does not act as the identity", location)

        for (a, b), c in category.table.items():
            for x in cars[b.source]:
                if acts[a][acts[b][x]] != acts[c][x]:
                    raise StructureError(f"action of {a}∘{b} differs from the composite of actions at {x!r}",
                                         f"actions.{c}")
        return cls(category=category, carriers=cars, actions=acts)

    def carrier(self, obj) -> tuple:
        return self.carriers[obj]

    def act(self, m: Morphism, x):
        return self.actions[m][x]

    def size(self) -> int:
        return sum(len(c) for c in self.carriers.values())

    def elements(self) -> list[tuple]:
        """All (object, element) pairs in object then carrier order."""
        return [(obj, x) for obj in self.category.objects for x in self.carriers[obj]]

    def index(self, obj, x) -> int:
        return self.carriers[obj].index(x)

    def is_empty(self) -> bool:
        return all(not c for c in self.carriers.values())

    def same_as(self, other: "ESet") -> bool:
        return (self.category is other.category
                and all(set(self.carriers[o]) == set(other.carriers[o]) for o in self.category.objects)
                and all(dict(self.actions[m]) == dict(other.actions[m]) for m in self.category.morphisms))


@dataclass(frozen=True, eq=False)
class ESetMorphism:
    """A natural transformation given by its components."""
    source: ESet
    target: ESet
    components: Mapping[Hashable, Mapping]

    @classmethod
    def identity(cls, X: ESet) -> "ESetMorphism":
        return cls(X, X, {obj: {x: x for x in X.carriers[obj]} for obj in X.category.objects})

    def apply(self, obj, x):
        return self.components[obj][x]

    def then(self, other: "ESetMorphism") -> "ESetMorphism":
        """Composite: self first, then other."""
        comps = {obj: {x: other.components[obj][y] for x, y in comp.items()}
                 for obj, comp in self.components.items()}
        return ESetMorphism(self.source, other.target, comps)

    def is_natural(self) -> bool:
        for m in self.source.category.morphisms:
            for x in self.source.carriers[m.source]:
                if self.target.act(m, self.apply(m.source, x)) != self.apply(m.target, self.source.act(m, x)):
                    return False
        return True

    def is_surjective(self) -> bool:
        return all(set(self.components[obj].values()) == set(self.target.carriers[obj])
                   for obj in self.target.category.objects)


# --- Limits ---
@dataclass(frozen=True)
class ConstraintSystem:
    """
    Finite carriers on some objects plus maps along edges; solutions are the
    families (x_E) with edge(x_source) = x_target. `limit` builds one from an
    E-set; horizon truncations build one from sampled stages.
    """
    objects: tuple
    carriers: Mapping[Hashable, tuple]
    out_edges: Mapping[Hashable, tuple]

    @classmethod
    def from_eset(cls, X: ESet) -> "ConstraintSystem":
        category = X.category
        out_edges = {obj: tuple((m.target, X.actions[m]) for m in category.non_identity_out(obj))
                     for obj in category.objects}
        return cls(objects=category.objects, carriers=X.carriers, out_edges=out_edges)

    def search_order(self) -> list:
        """Objects with the most outgoing constraints first; ties keep object order."""
        return sorted(self.objects, key=lambda obj: -len(self.out_edges[obj]))

    def sort_key(self):
        index = {obj: {x: i for i, x in enumerate(self.carriers[obj])} for obj in self.objects}
        return lambda t: tuple(index[obj][x] for obj, x in zip(self.objects, t))

    def assign(self, assignment: dict, obj, value) -> list | None:
        """Sets obj := value and propagates forced values. Returns the newly set objects, or None on conflict."""
        pending = [(obj, value)]
        assigned = []
        while pending:
            current, x = pending.pop()
            if current in assignment:
                if assignment[current] != x:
                    for undo in assigned:
                        del assignment[undo]
                    return None
                continue
            assignment[current] = x
            assigned.append(current)
            for target, mapping in self.out_edges[current]:
                pending.append((target, mapping[x]))
        return assigned

    def _search(self, order: list, assignment: dict, position: int, out: list):
        while position < len(order) and order[position] in assignment:
            position += 1
        if position == len(order):
            out.append(tuple(assignment[obj] for obj in self.objects))
            return
        obj = order[position]
        for x in self.carriers[obj]:
            assigned = self.assign(assignment, obj, x)
            if assigned is None:
                continue
            self._search(order, assignment, position + 1, out)
            for undo in assigned:
                del assignment[undo]

    def solve_from(self, order: list, candidates: Iterable) -> list[tuple]:
        if not order:
            return [()]
        out = []
        for x in candidates:
            assignment = {}
            if self.assign(assignment, order[0], x) is not None:
                self._search(order, assignment, 1, out)
        return out

    def solve(self) -> list[tuple]:
        order = self.search_order()
        result = self.solve_from(order, self.carriers[order[0]] if order else ())
        result.sort(key=self.sort_key())
        return result


def search_order(X: ESet) -> list:
    return ConstraintSystem.from_eset(X).search_order()


def limit(X: ESet) -> list[LimitElement]:
    """
    All compatible tuples (x_E), with X(a)(x_E) = x_F for every a: E -> F.

    Backtracks over objects in `search_order`, propagating forced values along
    morphisms. Output follows carrier-index order.
    """
    with tracer.start_as_current_span("eset.limit") as span:
        result = ConstraintSystem.from_eset(X).solve()
        span.set_attribute("eset.objects", len(X.category.objects))
        span.set_attribute("limit.size", len(result))
        return result


async def limit_concurrent(X: ESet, workers: int = LIMIT_WORKERS) -> list[LimitElement]:
    """`limit` with the first object's candidates split across worker threads by a shard ring."""
    with tracer.start_as_current_span("eset.limit_concurrent") as span:
        system = ConstraintSystem.from_eset(X)
        order = system.search_order()
        if not order:
            return [()]
        ring = ShardRing.with_workers(workers)
        shards = ring.partition(system.carriers[order[0]])
        span.set_attribute("limit.shards", len(shards))
        parts = await asyncio.gather(*[
            asyncio.to_thread(system.solve_from, order, candidates)
            for candidates in shards.values() if candidates
        ])
        result = [t for part in parts for t in part]
        result.sort(key=system.sort_key())
        span.set_attribute("limit.size", len(result))
        return result


def is_compatible(X: ESet, t: LimitElement) -> bool:
    coords = dict(zip(X.category.objects, t))
    return all(X.actions[m][coords[m.source]] == coords[m.target] for m in X.category.morphisms)


def brute_force_limit(X: ESet) -> list[LimitElement]:
    """Filters the full cartesian product. Oracle for `limit`."""
    total = 1
    for obj in X.category.objects:
        total *= len(X.carriers[obj])
    if total > BRUTE_FORCE_LIMIT:
        raise SizeGuardError(f"product of carriers has {total} tuples, guard is {BRUTE_FORCE_LIMIT}")
    return [t for t in product(*(X.carriers[obj] for obj in X.category.objects)) if is_compatible(X, t)]


def limit_image(alpha: ESetMorphism, t: LimitElement) -> LimitElement:
    objects = alpha.source.category.objects
    return tuple(alpha.apply(obj, x) for obj, x in zip(objects, t))


def limit_record(X: ESet, t: LimitElement) -> dict:
    return dict(zip(X.category.objects, t))


# --- Constructions ---
def hom_functor(category: FiniteCategory, source) -> ESet:
    """H_source: carrier(F) = hom(source, F), acting by post-composition."""
    carriers = {obj: category.hom(source, obj) for obj in category.objects}
    actions = {m: {b: category.compose(m, b) for b in carriers[m.source]} for m in category.morphisms}
    return ESet(category=category, carriers=carriers, actions=actions)


def union_hom(category: FiniteCategory, sources: Iterable) -> ESet:
    """Objectwise disjoint union of the hom-functors H_E for E in `sources`, in that order."""
    sources = list(dict.fromkeys(sources))
    if not sources:
        raise StructureError("union of hom-functors needs at least one object", "A")
    for obj in sources:
        if obj not in category.objects:
            raise StructureError(f"unknown object {obj!r}", "A")
    carriers = {obj: tuple(b for src in sources for b in category.hom(src, obj)) for obj in category.objects}
    actions = {m: {b: category.compose(m, b) for b in carriers[m.source]} for m in category.morphisms}
    return ESet(category=category, carriers=carriers, actions=actions)


def trivial_eset(category: FiniteCategory) -> ESet:
    carriers = {obj: ("*",) for obj in category.objects}
    actions = {m: {"*": "*"} for m in category.morphisms}
    return ESet(category=category, carriers=carriers, actions=actions)


def quotient(X: ESet, congruence: "CongruenceFamily") -> tuple[ESet, ESetMorphism]:
    """
    X modulo a congruence. Each class is represented by its first element in
    carrier order; the projection sends an element to its representative.
    """
    category = X.category
    rep = {}
    carriers = {}
    for obj in category.objects:
        position = {x: i for i, x in enumerate(X.carriers[obj])}
        blocks = congruence.partition(obj)
        seen = [x for block in blocks for x in block]
        if len(seen) != len(position) or set(seen) != set(position):
            raise StructureError(f"partition at {obj!r} does not cover the carrier exactly once", f"partition.{obj}")
        rep[obj] = {}
        heads = []
        for block in blocks:
            head = min(block, key=position.__getitem__)
            heads.append(head)
            for x in block:
                rep[obj][x] = head
        carriers[obj] = tuple(sorted(heads, key=position.__getitem__))

    actions = {}
    for m in category.morphisms:
        induced = {}
        for x in X.carriers[m.source]:
            image = rep[m.target][X.actions[m][x]]
            head = rep[m.source][x]
            if induced.setdefault(head, image) != image:
                raise StructureError(f"partition is not closed under the action of {m}", f"partition.{m.source}")
        actions[m] = induced
    Q = ESet(category=category, carriers=carriers, actions=actions)
    return Q, ESetMorphism(X, Q, rep)


def generated_subeset(X: ESet, seeds: Mapping[Hashable, Iterable]) -> ESet:
    """The least sub-E-set containing the seeds."""
    members = {obj: set() for obj in X.category.objects}
    pending = []
    for obj, xs in seeds.items():
        for x in xs:
            if x not in X.carriers[obj]:
                raise StructureError(f"seed {x!r} is not in carrier({obj!r})", f"seeds.{obj}")
            pending.append((obj, x))
    while pending:
        obj, x = pending.pop()
        if x in members[obj]:
            continue
        members[obj].add(x)
        for m in X.category.outgoing[obj]:
            pending.append((m.target, X.actions[m][x]))
    carriers = {obj: tuple(x for x in X.carriers[obj] if x in members[obj]) for obj in X.category.objects}
    actions = {m: {x: X.actions[m][x] for x in carriers[m.source]} for m in X.category.morphisms}
    return ESet(category=X.category, carriers=carriers, actions=actions)


def coproduct(X: ESet, Y: ESet) -> ESet:
    """Objectwise disjoint union; elements are tagged (0, x) and (1, y)."""
    category = X.category
    carriers = {obj: tuple((0, x) for x in X.carriers[obj]) + tuple((1, y) for y in Y.carriers[obj])
                for obj in category.objects}
    actions = {}
    for m in category.morphisms:
        actions[m] = {(0, x): (0, X.actions[m][x]) for x in X.carriers[m.source]}
        actions[m].update({(1, y): (1, Y.actions[m][y]) for y in Y.carriers[m.source]})
    return ESet(category=category, carriers=carriers, actions=actions)


def product_eset(X: ESet, Y: ESet) -> ESet:
    """Objectwise cartesian product."""
    category = X.category
    carriers = {obj: tuple(product(X.carriers[obj], Y.carriers[obj])) for obj in category.objects}
    actions = {m: {(x, y): (X.actions[m][x], Y.actions[m][y]) for x, y in carriers[m.source]}
               for m in category.morphisms}
    return ESet(category=category, carriers=carriers, actions=actions)
