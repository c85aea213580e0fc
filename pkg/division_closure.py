from collections.abc import Hashable, Iterable
from dataclasses import dataclass, field
from itertools import product

from opentelemetry import trace

from congruence import RelationFamily, congruence_closure
from core_structures import FiniteCategory, FiniteMonoid, Morphism, monoid_to_category, opposite_monoid
from errors import SizeGuardError, StructureError
from eset import ESet, quotient, union_hom
from search import SearchResult, set_partitions, smallest_subset
from union_find import UnionFind

tracer = trace.get_tracer(__name__)

LEFT_CONGRUENCE_ENUMERATION_GUARD = 6
MINIMAL_SEARCH_BUDGET = 6


# --- Monoid closures ---
def _in_order(M: FiniteMonoid, members: set) -> tuple:
    return tuple(a for a in M.elements if a in members)


def generated_submonoid(M: FiniteMonoid, S: Iterable) -> tuple:
    members = {M.one, *S}
    frontier = list(members)
    while frontier:
        nxt = []
        for a in frontier:
            for b in list(members):
                for c in (M.mult(a, b), M.mult(b, a)):
                    if c not in members:
                        members.add(c)
                        nxt.append(c)
        frontier = nxt
    return _in_order(M, members)


def right_division_closure(M: FiniteMonoid, S: Iterable) -> tuple:
    """
    Least N containing S and 1, closed under products and under right
    division: ab in N and b in N imply a in N.
    """
    members = {M.one, *S}
    if not members <= set(M.elements):
        raise StructureError("closure seeds are not monoid elements", "S")
    changed = True
    while changed:
        changed = False
        for a, b in product(M.elements, repeat=2):
            if a in members:
                if b in members and M.mult(a, b) not in members:
                    members.add(M.mult(a, b))
                    changed = True
            elif b in members and M.mult(a, b) in members:
                members.add(a)
                changed = True
    return _in_order(M, members)


def left_division_closure(M: FiniteMonoid, S: Iterable) -> tuple:
    """The mirror closure: ab in N and a in N imply b in N."""
    return right_division_closure(opposite_monoid(M), S)


def multdiv_holds(M: FiniteMonoid, budget: int | None = MINIMAL_SEARCH_BUDGET) -> SearchResult:
    """Smallest S whose right-division closure is all of M."""
    total = len(M.elements)
    return smallest_subset(M.elements, lambda S: len(right_division_closure(M, S)) == total, budget=budget)


def minimal_generating_set(M: FiniteMonoid, budget: int | None = MINIMAL_SEARCH_BUDGET) -> SearchResult:
    total = len(M.elements)
    candidates = [a for a in M.elements if a != M.one]
    return smallest_subset(candidates, lambda S: len(generated_submonoid(M, S)) == total, budget=budget)


def right_zeros(M: FiniteMonoid) -> tuple:
    """Elements z with uz = z for every u."""
    return tuple(z for z in M.elements if all(M.mult(u, z) == z for u in M.elements))


def smallest_left_ideal(M: FiniteMonoid) -> tuple:
    """(a, Ma) for a principal left ideal of least size; every left ideal contains one."""
    best = None
    for a in M.elements:
        ideal = _in_order(M, {M.mult(u, a) for u in M.elements})
        if best is None or len(ideal) < len(best[1]):
            best = (a, ideal)
    return best


def fgm0_witness(M: FiniteMonoid, budget: int | None = MINIMAL_SEARCH_BUDGET) -> SearchResult:
    """
    Smallest S such that, for M0 the submonoid generated by S, the elements a
    with aM0 ∩ M0 nonempty generate M.
    """
    total = len(M.elements)

    def accept(S: tuple) -> bool:
        M0 = set(generated_submonoid(M, S))
        movers = [a for a in M.elements if any(M.mult(a, b) in M0 for b in M0)]
        return len(generated_submonoid(M, movers)) == total

    return smallest_subset(M.elements, accept, budget=budget)


@dataclass(frozen=True)
class BatteryReport:
    generating_set: SearchResult
    right_zeros: tuple
    left_ideal_generator: Hashable
    left_ideal: tuple
    fgm0: SearchResult
    multdiv: SearchResult


def condition_battery(M: FiniteMonoid, budget: int | None = MINIMAL_SEARCH_BUDGET) -> BatteryReport:
    """Minimal witnesses for the finiteness conditions on a finite monoid."""
    with tracer.start_as_current_span("division.condition_battery") as span:
        generator, ideal = smallest_left_ideal(M)
        report = BatteryReport(generating_set=minimal_generating_set(M, budget), right_zeros=right_zeros(M),
                               left_ideal_generator=generator, left_ideal=ideal,
                               fgm0=fgm0_witness(M, budget), multdiv=multdiv_holds(M, budget))
        span.set_attribute("monoid.size", len(M.elements))
        return report


# --- Left congruences ---
@dataclass(frozen=True)
class LeftCongruence:
    monoid: FiniteMonoid
    blocks: tuple

    def class_of(self, x) -> tuple:
        for block in self.blocks:
            if x in block:
                return block
        raise StructureError(f"{x!r} is not a monoid element", "partition")

    def relates(self, a, b) -> bool:
        return b in self.class_of(a)

    def is_improper(self) -> bool:
        return len(self.blocks) <= 1

    def is_left_congruence(self) -> bool:
        label = {x: i for i, block in enumerate(self.blocks) for x in block}
        for u in self.monoid.elements:
            image = {}
            for x in self.monoid.elements:
                if image.setdefault(label[x], label[self.monoid.mult(u, x)]) != label[self.monoid.mult(u, x)]:
                    return False
        return True


def regular_left_eset(M: FiniteMonoid) -> ESet:
    """M acting on itself by left multiplication, over the one-object category of M."""
    category = monoid_to_category(M)
    obj = category.objects[0]
    actions = {category.morphism(str(a)): {x: M.mult(a, x) for x in M.elements} for a in M.elements}
    return ESet(category=category, carriers={obj: M.elements}, actions=actions)


def left_congruence_closure(M: FiniteMonoid, pairs: Iterable[tuple]) -> LeftCongruence:
    X = regular_left_eset(M)
    obj = X.category.objects[0]
    closure = congruence_closure(X, RelationFamily.build(X, {obj: list(pairs)}))
    return LeftCongruence(monoid=M, blocks=closure.partition(obj))


def left_congruences_enumerate(M: FiniteMonoid) -> list[LeftCongruence]:
    if len(M.elements) > LEFT_CONGRUENCE_ENUMERATION_GUARD:
        raise SizeGuardError(f"monoid has {len(M.elements)} elements, guard is {LEFT_CONGRUENCE_ENUMERATION_GUARD}")
    found = []
    for partition in set_partitions(M.elements):
        candidate = LeftCongruence(monoid=M, blocks=tuple(tuple(b) for b in partition))
        if candidate.is_left_congruence():
            found.append(candidate)
    return found


def fixed_classes(C: LeftCongruence) -> list[tuple]:
    """Classes [a] of M/C with u[a] = [a] for every u."""
    M = C.monoid
    return [block for block in C.blocks
            if all(M.mult(u, block[0]) in block for u in M.elements)]


def hiccup_closure(C: LeftCongruence, a) -> LeftCongruence:
    """The left congruence generated by C together with (a, 1)."""
    M = C.monoid
    pairs = [(block[0], x) for block in C.blocks for x in block[1:]]
    return left_congruence_closure(M, pairs + [(a, M.one)])


def generator_components_closure(M: FiniteMonoid, pairs: Iterable[tuple]) -> tuple:
    """Right-division closure of every element occurring in the pairs."""
    components = {x for pair in pairs for x in pair}
    return right_division_closure(M, components)


def stabilizer(C: LeftCongruence, x) -> tuple:
    """{a | a[x] = [x]} in M/C."""
    M = C.monoid
    home = C.class_of(x)
    return tuple(a for a in M.elements if M.mult(a, x) in home)


def is_submonoid(M: FiniteMonoid, N: Iterable) -> bool:
    members = set(N)
    return M.one in members and all(M.mult(a, b) in members for a in members for b in members)


def is_right_division_closed(M: FiniteMonoid, N: Iterable) -> bool:
    members = set(N)
    return all(a in members for a in M.elements for b in members if M.mult(a, b) in members)


@dataclass(frozen=True)
class CorrespondenceReport:
    division_closed: bool
    congruence: LeftCongruence
    class_of_one: tuple
    recovered: bool
    stabilizer_recovered: bool

    @property
    def consistent(self) -> bool:
        return self.division_closed == self.recovered == self.stabilizer_recovered


def class_of_one_correspondence(M: FiniteMonoid, N: Iterable) -> CorrespondenceReport:
    """
    Builds the left congruence generated by U = {(as, at) | a in M, s, t in N}
    and compares its class of 1 (and the stabilizer of [1]) with N. Equality
    holds exactly when N is a right-division-closed submonoid.
    """
    N = tuple(N)
    if not set(N) <= set(M.elements):
        raise StructureError("N is not a subset of the monoid", "N")
    uf = UnionFind(M.elements)
    # U is closed under left translation, so its equivalence closure is a left congruence
    for a in M.elements:
        images = [M.mult(a, s) for s in N]
        for y in images[1:]:
            uf.union(images[0], y)
    C = LeftCongruence(monoid=M, blocks=tuple(tuple(b) for b in uf.groups(M.elements)))
    one_class = C.class_of(M.one)
    return CorrespondenceReport(
        division_closed=is_submonoid(M, N) and is_right_division_closed(M, N),
        congruence=C,
        class_of_one=one_class,
        recovered=set(one_class) == set(N),
        stabilizer_recovered=set(stabilizer(C, M.one)) == set(N),
    )


def dual_class_of_one_correspondence(M: FiniteMonoid, N: Iterable) -> CorrespondenceReport:
    """The mirror statement for left-division-closed submonoids, run on the opposite monoid."""
    return class_of_one_correspondence(opposite_monoid(M), N)


# --- Categories ---
def subcategory_closure(category: FiniteCategory, S: Iterable[Morphism]) -> tuple[Morphism, ...]:
    """
    Least wide subcategory containing S that is right division-closed:
    ab and b inside imply a inside.
    """
    members = set(category.identities.values()) | set(S)
    changed = True
    while changed:
        changed = False
        for (a, b), c in category.table.items():
            if a in members:
                if b in members and c not in members:
                    members.add(c)
                    changed = True
            elif b in members and c in members:
                members.add(a)
                changed = True
    return tuple(m for m in category.morphisms if m in members)


def emultdiv_check(category: FiniteCategory, budget: int | None = MINIMAL_SEARCH_BUDGET) -> SearchResult:
    """Smallest morphism set whose division-closed subcategory is the whole category."""
    with tracer.start_as_current_span("division.emultdiv_check") as span:
        total = len(category.morphisms)
        candidates = [m for m in category.morphisms if not category.is_identity(m)]
        result = smallest_subset(candidates, lambda S: len(subcategory_closure(category, S)) == total,
                                 budget=budget)
        span.set_attribute("emultdiv.size", result.size or 0)
        return result


def initial_object(category: FiniteCategory):
    """An object with exactly one morphism to every object, or None."""
    for obj in category.objects:
        if all(len(category.hom(obj, other)) == 1 for other in category.objects):
            return obj
    return None


def s0s1_check(category: FiniteCategory, A: Iterable, S0: Iterable[Morphism],
               budget: int | None = MINIMAL_SEARCH_BUDGET) -> SearchResult:
    """
    Smallest S1 such that S0 ∪ S1 generates the whole category as a
    division-closed subcategory. S0 must hold exactly one morphism from A
    into each object outside A.
    """
    A, S0 = tuple(A), tuple(S0)
    for obj in category.objects:
        if not any(category.hom(a, obj) for a in A):
            raise StructureError(f"no morphism from A reaches {obj!r}", "A")
    covered = {}
    for m in S0:
        if m.source not in A or m.target in A:
            raise StructureError(f"{m} does not go from A to an object outside A", "S0")
        if m.target in covered:
            raise StructureError(f"two morphisms of S0 reach {m.target!r}", "S0")
        covered[m.target] = m
    missing = [obj for obj in category.objects if obj not in A and obj not in covered]
    if missing:
        raise StructureError(f"S0 has no morphism into {missing[0]!r}", "S0")

    total = len(category.morphisms)
    candidates = [m for m in category.morphisms if not category.is_identity(m) and m not in S0]
    result = smallest_subset(candidates, lambda S1: len(subcategory_closure(category, S0 + S1)) == total,
                             budget=budget)
    return result


@dataclass(frozen=True)
class SubcategoryReport:
    division_closed: bool
    recovered: tuple
    recovered_matches: bool
    stabilizer_matches: bool
    notes: list[str] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return self.division_closed == self.recovered_matches == self.stabilizer_matches


def is_division_closed_subcategory(category: FiniteCategory, selection: Iterable[Morphism]) -> bool:
    members = set(selection)
    if not set(category.identities.values()) <= members:
        return False
    for (a, b), c in category.table.items():
        if a in members and b in members and c not in members:
            return False
        if b in members and c in members and a not in members:
            return False
    return True


def division_closed_subcategory_correspondence(category: FiniteCategory,
                                               selection: Iterable[Morphism]) -> SubcategoryReport:
    """
    Builds on the union of all H_E the congruence generated by the pairs
    (as, at) with s, t in the selection ending at a common object, then reads
    back {a | (a, id) related} and {a | a[id_E] = [id_F]} in the quotient.
    """
    selection = tuple(selection)
    H = union_hom(category, category.objects)
    pairs = {}
    for F in category.objects:
        ending = [s for s in selection if s.target == F]
        if len(ending) < 2:
            continue
        for a in category.outgoing[F]:
            images = [category.compose(a, s) for s in ending]
            pairs.setdefault(a.target, []).extend((images[0], y) for y in images[1:])
    closure = congruence_closure(H, RelationFamily.build(H, pairs))
    recovered = tuple(m for m in category.morphisms
                      if closure.relates(m.target, m, category.identity(m.target)))
    Q, projection = quotient(H, closure)
    base = {obj: projection.apply(obj, category.identity(obj)) for obj in category.objects}
    stabilized = tuple(m for m in category.morphisms if Q.act(m, base[m.source]) == base[m.target])
    chosen = set(selection)
    return SubcategoryReport(
        division_closed=is_division_closed_subcategory(category, selection),
        recovered=recovered,
        recovered_matches=set(recovered) == chosen,
        stabilizer_matches=set(stabilized) == chosen,
    )


def dual_subcategory_correspondence(category: FiniteCategory, selection: Iterable[Morphism]) -> SubcategoryReport:
    """Left division closure, checked on the opposite category."""
    opposite = opposite_category(category)
    return division_closed_subcategory_correspondence(opposite, [opposite.morphism(m.name) for m in selection])


def opposite_category(category: FiniteCategory) -> FiniteCategory:
    homs = {(tgt, src): [m.name for m in ms] for (src, tgt), ms in category.homs.items()}
    identities = {obj: category.identity(obj).name for obj in category.objects}
    compose = {(b.name, a.name): c.name for (a, b), c in category.table.items()}
    return FiniteCategory.build(category.objects, homs, identities, compose)
