from collections.abc import Callable, Hashable, Iterable, Sequence
from dataclasses import dataclass, field
from itertools import combinations

from opentelemetry import trace

from core_structures import FiniteCategory, Morphism, Poset, lambda_name, preorder_quotient
from errors import SizeGuardError, StructureError
from search import SearchResult, smallest_subset
from union_find import UnionFind

tracer = trace.get_tracer(__name__)

CAPNE_SIZE_GUARD = 12
CAPNE_EXHAUSTIVE_DOWNSETS = 16
CAPNE_FAMILY_SIZE = 3


# --- Minimal elements and downsets ---
def minimal_elements(J: Poset) -> tuple:
    return J.minimal_elements()


def downset(J: Poset, E) -> tuple:
    return J.down(E)


def upset(J: Poset, E) -> tuple:
    return J.up(E)


@dataclass(frozen=True)
class AboveFinReport:
    minimal: tuple
    unsupported: tuple
    holds: bool


def abovefin_check(J: Poset) -> AboveFinReport:
    """Every element should majorize some minimal element; always so for finite posets."""
    minimal = J.minimal_elements()
    unsupported = tuple(x for x in J.elements if not any(J.le(m, x) for m in minimal))
    return AboveFinReport(minimal=minimal, unsupported=unsupported, holds=not unsupported)


def nonempty_downsets(J: Poset) -> list[frozenset]:
    elements = J.elements
    found = []
    for mask in range(1, 1 << len(elements)):
        members = {elements[i] for i in range(len(elements)) if mask >> i & 1}
        if all(y in members for x in members for y in J.down(x)):
            found.append(frozenset(members))
    return found


@dataclass(frozen=True)
class CapneReport:
    holds: bool
    families_checked: int
    exhaustive: bool
    counterexample: tuple | None = None


def _downward_directed(family: Sequence[frozenset]) -> bool:
    return all(any(c <= a & b for c in family) for a, b in combinations(family, 2))


def capne_oracle(J: Poset) -> CapneReport:
    """
    Checks that every downward directed family of nonempty downsets has
    nonempty intersection. Exhaustive when there are few downsets, otherwise
    over families of at most CAPNE_FAMILY_SIZE members.
    """
    if len(J.elements) > CAPNE_SIZE_GUARD:
        raise SizeGuardError(f"poset has {len(J.elements)} elements, guard is {CAPNE_SIZE_GUARD}")
    downsets = nonempty_downsets(J)
    exhaustive = len(downsets) <= CAPNE_EXHAUSTIVE_DOWNSETS
    largest = len(downsets) if exhaustive else CAPNE_FAMILY_SIZE
    checked = 0
    for size in range(1, largest + 1):
        for family in combinations(downsets, size):
            if not _downward_directed(family):
                continue
            checked += 1
            if not frozenset.intersection(*family):
                return CapneReport(False, checked, exhaustive, tuple(tuple(sorted(map(str, d))) for d in family))
    return CapneReport(True, checked, exhaustive)


# --- Gathering ---
@dataclass(frozen=True)
class GatherQuery:
    J: Poset
    A: tuple
    B: tuple
    E: Hashable

    def __post_init__(self):
        members = set(self.J.elements)
        for name, subset in (("A", self.A), ("B", self.B)):
            if not set(subset) <= members:
                raise StructureError(f"{name} is not a subset of the poset", name)
        if self.E not in members:
            raise StructureError(f"{self.E!r} is not an element of the poset", "E")


@dataclass(frozen=True)
class GatherResult:
    gathers: bool
    classes: list


def gathers(query: GatherQuery) -> GatherResult:
    """
    Merges A ∩ down(F) for every F in B ∩ down(E) and reports whether
    A ∩ down(E) ends up in one class. Sets with at most one element gather
    vacuously.
    """
    J, E = query.J, query.E
    below = [a for a in query.A if J.le(a, E)]
    uf = UnionFind(below)
    for F in query.B:
        if not J.le(F, E):
            continue
        group = [a for a in below if J.le(a, F)]
        for a in group[1:]:
            uf.union(group[0], a)
    classes = uf.groups(below)
    return GatherResult(gathers=len(classes) <= 1, classes=classes)


def gathers_everywhere(J: Poset, A: Iterable, B: Iterable) -> bool:
    A, B = tuple(A), tuple(B)
    return all(gathers(GatherQuery(J, A, B, E)).gathers for E in J.elements)


def critical_elements(J: Poset, A: Iterable) -> tuple:
    """Elements E such that J - {E} does not gather A under E."""
    A = tuple(A)
    critical = []
    for E in J.elements:
        others = tuple(x for x in J.elements if x != E)
        if not gathers(GatherQuery(J, A, others, E)).gathers:
            critical.append(E)
    return tuple(critical)


def minimal_gathering_set(J: Poset, A: Iterable, budget: int | None = None) -> SearchResult:
    """
    Smallest B gathering A under every element, by size then element order.
    Every gathering set contains the critical elements, so the search starts
    from them; elements over at most one member of A never help and are skipped.
    """
    A = tuple(A)
    with tracer.start_as_current_span("poset.minimal_gathering_set") as span:
        critical = critical_elements(J, A)
        useful = [x for x in J.elements if x not in critical and sum(1 for a in A if J.le(a, x)) > 1]
        order = {x: i for i, x in enumerate(J.elements)}
        result = smallest_subset(useful, lambda B: gathers_everywhere(J, A, B), budget=budget, required=critical)
        if result.found:
            result = SearchResult(found=True, witness=tuple(sorted(result.witness, key=order.__getitem__)),
                                  size=result.size, exact=result.exact, checked=result.checked)
        span.set_attribute("gathering.critical", len(critical))
        span.set_attribute("gathering.size", result.size or 0)
        return result


def gathering_congruence_generators(category: FiniteCategory, J: Poset, A: Iterable,
                                    B: Iterable) -> list[tuple[Hashable, Morphism, Morphism]]:
    """Pairs (λ(F,E), λ(F',E)) chaining A ∩ down(E) for each E in B, on a poset category."""
    A = tuple(A)
    triples = []
    for E in B:
        below = [a for a in A if J.le(a, E)]
        for a in below[1:]:
            triples.append((E, category.morphism(lambda_name(below[0], E)), category.morphism(lambda_name(a, E))))
    return triples


# --- Condition report ---
@dataclass(frozen=True)
class PosetConditionsReport:
    poset: Poset
    labels: dict
    minimal: tuple
    critical: tuple
    minimal_finite: bool
    above_minimal: bool
    critical_finite: bool
    critical_gathers: bool
    certificates: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.minimal_finite and self.above_minimal and self.critical_finite and self.critical_gathers


def tgath_check(category: FiniteCategory) -> PosetConditionsReport:
    """
    The four necessary conditions on the preorder of objects: finitely many
    minimal classes, every class above one, finitely many critical classes,
    and the critical classes gathering the minimal ones under every class.
    """
    with tracer.start_as_current_span("poset.tgath_check") as span:
        J, labels = preorder_quotient(category)
        minimal = J.minimal_elements()
        critical = critical_elements(J, minimal)
        certificates = {E: gathers(GatherQuery(J, minimal, critical, E)) for E in J.elements}
        report = PosetConditionsReport(poset=J, labels=labels, minimal=minimal, critical=critical,
                             minimal_finite=True, above_minimal=abovefin_check(J).holds,
                             critical_finite=True,
                             critical_gathers=all(c.gathers for c in certificates.values()),
                             certificates=certificates)
        span.set_attribute("tgath.holds", report.holds)
        return report


# --- Families of truncations ---
@dataclass(frozen=True)
class ProbeRow:
    k: int
    critical: tuple
    gathering: tuple


@dataclass(frozen=True)
class ProbeReport:
    """Per-parameter minimal gathering sets. `drifting` is heuristic evidence only."""
    rows: list
    stable_from: int | None
    drifting: bool
    note: str = "heuristic evidence from finite truncations, not a proof"


def horizon_instability_probe(family: Callable[[int], tuple[Poset, Iterable]], ks: Iterable[int],
                              budget: int | None = None) -> ProbeReport:
    rows = []
    for k in ks:
        J, A = family(k)
        A = tuple(A)
        result = minimal_gathering_set(J, A, budget)
        rows.append(ProbeRow(k=k, critical=critical_elements(J, A), gathering=result.witness))
    stable_from = None
    for row in reversed(rows):
        if row.gathering != rows[-1].gathering:
            break
        stable_from = row.k
    earlier = {row.gathering for row in rows[:-1]}
    drifting = len(rows) >= 3 and rows[-1].gathering not in earlier
    return ProbeReport(rows=rows, stable_from=None if drifting else stable_from, drifting=drifting)


# --- DOT export ---
def to_dot(J: Poset, minimal: Iterable = (), critical: Iterable = (), gathering: Iterable = (),
           name: str = "poset") -> str:
    """Hasse diagram, smaller elements at the bottom."""
    minimal, critical, gathering = set(minimal), set(critical), set(gathering)
    hasse = J.hasse_graph()
    lines = [f'digraph "{name}" {{', "  rankdir=BT;", "  node [shape=circle];"]
    for x in J.elements:
        attrs = []
        if x in critical:
            attrs.append('style=filled fillcolor="salmon"')
        elif x in minimal:
            attrs.append('style=filled fillcolor="lightblue"')
        if x in gathering:
            attrs.append("peripheries=2")
        suffix = f" [{' '.join(attrs)}]" if attrs else ""
        lines.append(f'  "{x}"{suffix};')
    for x, y in sorted(hasse.edges, key=lambda e: (J.elements.index(e[0]), J.elements.index(e[1]))):
        lines.append(f'  "{x}" -> "{y}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
