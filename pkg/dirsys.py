import threading
from collections.abc import Callable, Hashable, Iterable, Mapping
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Protocol

from opentelemetry import trace

from core_structures import FiniteCategory, Poset, category_generators
from errors import StructureError
from eset import ConstraintSystem, ESet, ESetMorphism, limit, limit_image

tracer = trace.get_tracer(__name__)

DEFAULT_HORIZON = 8


# --- Verdicts ---
class Outcome(str, Enum):
    PROVEN = "proven"
    REFUTED = "refuted_within_horizon"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Verdict:
    """
    Three-valued answer to a question about a possibly infinite system.

    PROVEN carries the certifying stage (None when the claim follows from the
    shape of the category rather than from a stage). REFUTED carries a witness
    found at `horizon`. UNKNOWN only records how far the search went.
    """
    outcome: Outcome
    stage: int | None = None
    witness: Any = None
    horizon: int | None = None
    reason: str = ""

    @classmethod
    def proven(cls, stage: int | None, witness: Any = None, reason: str = "") -> "Verdict":
        return cls(Outcome.PROVEN, stage=stage, witness=witness, reason=reason)

    @classmethod
    def refuted(cls, witness: Any, horizon: int | None, reason: str = "") -> "Verdict":
        return cls(Outcome.REFUTED, witness=witness, horizon=horizon, reason=reason)

    @classmethod
    def unknown(cls, horizon: int | None, reason: str = "") -> "Verdict":
        return cls(Outcome.UNKNOWN, horizon=horizon, reason=reason)

    @property
    def is_proven(self) -> bool:
        return self.outcome is Outcome.PROVEN

    @property
    def is_refuted(self) -> bool:
        return self.outcome is Outcome.REFUTED


@dataclass(frozen=True)
class ColimitElement:
    """The class of element x of stage `stage` at object `obj`."""
    stage: Hashable
    obj: Hashable
    element: Hashable


# --- Finite-index systems ---
@dataclass(frozen=True, eq=False)
class FiniteDirectedSystem:
    index: Poset
    members: Mapping[Hashable, ESet]
    connect: Mapping[tuple, ESetMorphism]
    top: Hashable

    @classmethod
    def build(cls, index: Poset, members: Mapping[Hashable, ESet],
              connect: Mapping[tuple, ESetMorphism | Mapping]) -> "FiniteDirectedSystem":
        """
        `connect` must cover at least the covering pairs of the index; the
        other pairs are composed along chains and the cocycle condition is
        checked on every pair.
        """
        if not index.elements:
            raise StructureError("directed systems need a nonempty index", "index")
        if not index.is_directed():
            raise StructureError("index poset is not directed", "index")
        top = index.top()
        for i in index.elements:
            if i not in members:
                raise StructureError(f"no member at index {i!r}", f"members.{i}")
        category = members[index.elements[0]].category
        if any(members[i].category is not category for i in index.elements):
            raise StructureError("members live over different categories", "members")

        maps = {}
        for (i, j), alpha in connect.items():
            if not index.le(i, j):
                raise StructureError(f"connecting map {i!r} -> {j!r} against the order", f"connect.{i},{j}")
            if not isinstance(alpha, ESetMorphism):
                alpha = ESetMorphism(members[i], members[j], {obj: dict(alpha.get(obj, {})) for obj in category.objects})
            _check_component_totality(alpha, f"connect.{i},{j}")
            if not alpha.is_natural():
                raise StructureError(f"connecting map {i!r} -> {j!r} is not natural", f"connect.{i},{j}")
            maps[(i, j)] = alpha
        for i in index.elements:
            identity = ESetMorphism.identity(members[i])
            if maps.setdefault((i, i), identity).components != identity.components:
                raise StructureError(f"connecting map at {i!r} is not the identity", f"connect.{i},{i}")

        hasse = index.hasse_graph()
        # fill in composites along the Hasse diagram, shortest chains first
        for i in index.elements:
            frontier = [i]
            visited = {i}
            while frontier:
                nxt = []
                for j in frontier:
                    for k in hasse.successors(j):
                        if (j, k) not in maps:
                            raise StructureError(f"missing connecting map {j!r} -> {k!r}", f"connect.{j},{k}")
                        if (i, k) not in maps:
                            maps[(i, k)] = maps[(i, j)].then(maps[(j, k)])
                        if k not in visited:
                            visited.add(k)
                            nxt.append(k)
                frontier = nxt

        for i, j in index.leq:
            for k in index.up(j):
                via = maps[(i, j)].then(maps[(j, k)])
                if via.components != maps[(i, k)].components:
                    raise StructureError(f"connecting maps {i!r} -> {j!r} -> {k!r} do not compose",
                                         f"connect.{i},{k}")
        return cls(index=index, members=dict(members), connect=maps, top=top)

    @property
    def category(self) -> FiniteCategory:
        return self.members[self.top].category


def _check_component_totality(alpha: ESetMorphism, location: str):
    for obj in alpha.source.category.objects:
        comp = alpha.components.get(obj, {})
        targets = set(alpha.target.carriers[obj])
        for x in alpha.source.carriers[obj]:
            if x not in comp or comp[x] not in targets:
                raise StructureError(f"component at {obj!r} is not a map on {x!r}", location)


@dataclass(frozen=True)
class Colimit:
    """The colimit of a finite directed system, realised as its top member."""
    eset: ESet
    insertions: Mapping[Hashable, ESetMorphism]


def colimit_eset(system: FiniteDirectedSystem) -> Colimit:
    insertions = {i: system.connect[(i, system.top)] for i in system.index.elements}
    return Colimit(eset=system.members[system.top], insertions=insertions)


def equalize_stage_finite(system: FiniteDirectedSystem, a: ColimitElement, b: ColimitElement):
    """Least (in index order) common upper bound where the two elements agree, or None."""
    if a.obj != b.obj:
        return None
    for k in system.index.elements:
        if system.index.le(a.stage, k) and system.index.le(b.stage, k):
            if system.connect[(a.stage, k)].apply(a.obj, a.element) == system.connect[(b.stage, k)].apply(b.obj, b.element):
                return k
    return None


def limit_system(system: FiniteDirectedSystem) -> dict[Hashable, list]:
    """The directed system of limits, stage by stage."""
    return {i: limit(system.members[i]) for i in system.index.elements}


# --- Staged (lazy) systems ---
class StagedSystem(Protocol):
    """
    A directed system indexed by stages first_stage, first_stage + 1, ...
    over a possibly infinite category, inspected through horizon-h windows.

    `arrows(h)` are (arrow, source, target) triples generating the visible
    part of the category; `settled_objects(h)` are objects whose colimit
    component is already final at stage h.
    Systems may carry a `horizon` that iota uses when given none.
    """
    first_stage: int
    constant_from: int | None
    finitely_rooted: bool

    def objects(self, h: int) -> list: ...

    def arrows(self, h: int) -> list[tuple]: ...

    def settled_objects(self, h: int) -> list: ...

    def elements(self, n: int, obj, h: int) -> Iterable: ...

    def act(self, n: int, arrow, x): ...

    def push(self, n: int, obj, x): ...

    def stage_limit(self, n: int, h: int) -> list[tuple]: ...


class LazyStagedSystem:
    """
    Stages and steps of E-sets over a finite category, built on demand.

    `stage_fn(n)` returns the E-set at stage n; `step_fn(n, X_n, X_{n+1})`
    returns the components of the connecting map. Both are cached under a
    lock, and every step is checked for naturality when first built.
    `constant_from` declares a stage from which all steps are isomorphisms.
    """
    finitely_rooted = True

    def __init__(self, category: FiniteCategory, stage_fn: Callable[[int], ESet],
                 step_fn: Callable[[int, ESet, ESet], Mapping], first_stage: int = 0,
                 constant_from: int | None = None, name: str = "lazy"):
        self.category = category
        self.first_stage = first_stage
        self.constant_from = constant_from
        self.name = name
        self._stage_fn = stage_fn
        self._step_fn = step_fn
        self._stages = {}
        self._steps = {}
        self._lock = threading.Lock()
        self._generators = category_generators(category)

    def stage(self, n: int) -> ESet:
        with self._lock:
            if n not in self._stages:
                X = self._stage_fn(n)
                if X.category is not self.category:
                    raise StructureError(f"stage {n} lives over another category", f"{self.name}.stage{n}")
                self._stages[n] = X
            return self._stages[n]

    def step(self, n: int) -> ESetMorphism:
        source, target = self.stage(n), self.stage(n + 1)
        with self._lock:
            if n not in self._steps:
                alpha = self._step_fn(n, source, target)
                if not isinstance(alpha, ESetMorphism):
                    alpha = ESetMorphism(source, target, alpha)
                _check_component_totality(alpha, f"{self.name}.step{n}")
                if not alpha.is_natural():
                    raise StructureError(f"step {n} is not natural", f"{self.name}.step{n}")
                self._steps[n] = alpha
            return self._steps[n]

    def objects(self, h: int) -> list:
        return list(self.category.objects)

    def arrows(self, h: int) -> list[tuple]:
        return [(m, m.source, m.target) for m in self._generators]

    def settled_objects(self, h: int) -> list:
        return list(self.category.objects)

    def elements(self, n: int, obj, h: int) -> tuple:
        return self.stage(n).carriers[obj]

    def act(self, n: int, arrow, x):
        return self.stage(n).act(arrow, x)

    def push(self, n: int, obj, x):
        return self.step(n).apply(obj, x)

    def stage_limit(self, n: int, h: int) -> list[tuple]:
        return limit(self.stage(n))


def push_to(system: StagedSystem, n: int, k: int, obj, x):
    """The image of x under the connecting maps from stage n to stage k >= n."""
    for stage in range(n, k):
        x = system.push(stage, obj, x)
    return x


def push_tuple(system: StagedSystem, n: int, k: int, objects: list, t: tuple) -> tuple:
    return tuple(push_to(system, n, k, obj, x) for obj, x in zip(objects, t))


def equalize_stage(system: StagedSystem, a: ColimitElement, b: ColimitElement, h: int) -> int | None:
    """Least stage k <= h where the two elements have the same image, or None."""
    if a.obj != b.obj:
        return None
    k = max(a.stage, b.stage)
    if k > h:
        return None
    x = push_to(system, a.stage, k, a.obj, a.element)
    y = push_to(system, b.stage, k, b.obj, b.element)
    while True:
        if x == y:
            return k
        if k == h:
            return None
        x, y = system.push(k, a.obj, x), system.push(k, b.obj, y)
        k += 1


def same_class(system: StagedSystem | FiniteDirectedSystem, a: ColimitElement, b: ColimitElement,
               h: int | None = None) -> Verdict:
    """
    Decides whether two representatives name the same colimit element.
    PROVEN means equal, with the certifying stage. REFUTED means provably
    distinct (finite index, or a declared constant stage within the horizon).
    """
    if isinstance(system, FiniteDirectedSystem):
        k = equalize_stage_finite(system, a, b)
        if k is not None:
            return Verdict.proven(k)
        return Verdict.refuted((a, b), None, "distinct at the top of the index")
    h = DEFAULT_HORIZON if h is None else h
    k = equalize_stage(system, a, b, h)
    if k is not None:
        return Verdict.proven(k)
    if a.obj != b.obj:
        return Verdict.refuted((a, b), h, "representatives live at different objects")
    if system.constant_from is not None and system.constant_from <= h:
        return Verdict.refuted((a, b), h, "distinct at a stage past which the system is constant")
    return Verdict.unknown(h)


def check_ijinf(system: StagedSystem | FiniteDirectedSystem, i, j, obj, x, h: int | None = None) -> bool:
    """The class of x at stage i equals the class of its image at stage j."""
    if isinstance(system, FiniteDirectedSystem):
        y = system.connect[(i, j)].apply(obj, x)
        return (system.connect[(i, system.top)].apply(obj, x)
                == system.connect[(j, system.top)].apply(obj, y))
    y = push_to(system, i, j, obj, x)
    return same_class(system, ColimitElement(i, obj, x), ColimitElement(j, obj, y), max(j, h or j)).is_proven


@dataclass(frozen=True)
class ColimitClass:
    key: Hashable
    representative: ColimitElement
    members: tuple


@dataclass(frozen=True)
class HorizonColimit:
    """
    Colimit data visible at horizon h. `classes[obj]` merges sampled elements
    of stages <= h by their image at stage h; `carriers[obj]` is that image
    set closed under the visible arrows at stage h.
    """
    horizon: int
    objects: tuple
    classes: Mapping[Hashable, tuple[ColimitClass, ...]]
    carriers: Mapping[Hashable, tuple]
    final: bool


def colimit_at_horizon(system: StagedSystem, h: int) -> HorizonColimit:
    with tracer.start_as_current_span("dirsys.colimit_at_horizon") as span:
        objects = tuple(system.objects(h))
        arrows = system.arrows(h)
        classes = {}
        carriers = {}
        for obj in objects:
            grouped = {}
            for n in range(system.first_stage, h + 1):
                for x in system.elements(n, obj, h):
                    grouped.setdefault(push_to(system, n, h, obj, x), []).append(ColimitElement(n, obj, x))
            classes[obj] = tuple(ColimitClass(key=key, representative=members[0], members=tuple(members))
                                 for key, members in grouped.items())
            carriers[obj] = list(grouped)
        # close the stage-h images under the visible arrows
        seen = {obj: set(carriers[obj]) for obj in objects}
        pending = [(obj, x) for obj in objects for x in carriers[obj]]
        while pending:
            obj, x = pending.pop()
            for arrow, source, target in arrows:
                if source != obj or target not in seen:
                    continue
                y = system.act(h, arrow, x)
                if y not in seen[target]:
                    seen[target].add(y)
                    carriers[target].append(y)
                    pending.append((target, y))
        final = system.constant_from is not None and system.constant_from <= h
        span.set_attribute("horizon", h)
        span.set_attribute("colimit.classes", sum(len(c) for c in classes.values()))
        return HorizonColimit(horizon=h, objects=objects, classes=classes,
                              carriers={obj: tuple(carriers[obj]) for obj in objects}, final=final)


# --- Comparison map ---
@dataclass(frozen=True)
class IotaReport:
    """
    ι from the colimit of limits to the limit of the colimit.

    `domain` lists one representative (stage, tuple) per class, `codomain`
    the compatible families, and `mapping[i]` is the codomain index of ι of
    domain element i.
    """
    objects: tuple
    domain: list
    codomain: list
    mapping: list
    injective: Verdict
    surjective: Verdict
    horizon: int | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def bijective(self) -> bool:
        return self.injective.is_proven and self.surjective.is_proven


def _iota_finite(system: FiniteDirectedSystem) -> IotaReport:
    top = system.top
    limits = limit_system(system)
    domain_keys = {}
    for i in system.index.elements:
        for t in limits[i]:
            key = limit_image(system.connect[(i, top)], t)
            domain_keys.setdefault(key, (i, t))
    codomain = limit(colimit_eset(system).eset)
    position = {t: n for n, t in enumerate(codomain)}
    domain = list(domain_keys.values())
    mapping = [position[key] for key in domain_keys]

    hits = {}
    injective = Verdict.proven(top)
    for (i, t), target in zip(domain, mapping):
        if target in hits:
            injective = Verdict.refuted([hits[target], (i, t)], None)
            break
        hits[target] = (i, t)
    missed = [c for n, c in enumerate(codomain) if n not in hits]
    surjective = Verdict.refuted(missed[0], None) if missed else Verdict.proven(top)
    return IotaReport(objects=system.category.objects, domain=domain, codomain=codomain, mapping=mapping,
                      injective=injective, surjective=surjective)


def _iota_staged(system: StagedSystem, h: int) -> IotaReport:
    colim = colimit_at_horizon(system, h)
    objects = list(colim.objects)
    settled = [obj for obj in system.settled_objects(h) if obj in colim.carriers]
    positions = [objects.index(obj) for obj in settled]

    domain_keys = {}
    for n in range(system.first_stage, h + 1):
        for t in system.stage_limit(n, h):
            key = push_tuple(system, n, h, objects, t)
            domain_keys.setdefault(key, (n, t))

    settled_set = set(settled)
    out_edges = {obj: [] for obj in settled}
    for arrow, source, target in system.arrows(h):
        if source in settled_set and target in settled_set:
            mapping = {x: system.act(h, arrow, x) for x in colim.carriers[source]}
            out_edges[source].append((target, mapping))
    codomain = ConstraintSystem(objects=tuple(settled), carriers={o: colim.carriers[o] for o in settled},
                                out_edges={o: tuple(e) for o, e in out_edges.items()}).solve()
    position = {t: n for n, t in enumerate(codomain)}

    domain = list(domain_keys.values())
    mapping = [position.get(tuple(key[p] for p in positions)) for key in domain_keys]

    constant = system.constant_from is not None and system.constant_from <= h
    hits = {}
    witness = None
    for rep, target in zip(domain, mapping):
        if target in hits and witness is None:
            witness = [hits[target], rep]
        hits.setdefault(target, rep)
    if witness is not None:
        injective = Verdict.refuted(witness, h, "distinct classes with the same image")
    elif constant:
        injective = Verdict.proven(system.constant_from)
    elif system.finitely_rooted:
        injective = Verdict.proven(None, reason="every object receives a morphism from a finite set of objects")
    else:
        injective = Verdict.unknown(h)

    missed = [c for n, c in enumerate(codomain) if n not in hits]
    if missed:
        surjective = Verdict.refuted(dict(zip(settled, missed[0])), h, "compatible family outside the image")
    elif constant:
        surjective = Verdict.proven(system.constant_from)
    else:
        surjective = Verdict.unknown(h)

    notes = []
    if len(settled) < len(objects):
        notes.append(f"images compared on {len(settled)} settled of {len(objects)} visible objects")
    return IotaReport(objects=tuple(settled), domain=domain, codomain=codomain, mapping=mapping,
                      injective=injective, surjective=surjective, horizon=h, notes=notes)


def iota(system: StagedSystem | FiniteDirectedSystem, horizon: int | None = None) -> IotaReport:
    with tracer.start_as_current_span("dirsys.iota") as span:
        if isinstance(system, FiniteDirectedSystem):
            report = _iota_finite(system)
        else:
            if horizon is None:
                horizon = getattr(system, "horizon", DEFAULT_HORIZON)
            report = _iota_staged(system, horizon)
        span.set_attribute("iota.domain", len(report.domain))
        span.set_attribute("iota.codomain", len(report.codomain))
        span.set_attribute("iota.injective", report.injective.outcome.value)
        span.set_attribute("iota.surjective", report.surjective.outcome.value)
        return report


# --- Stabilization ---
def eventual_fixedness_certificate(system: StagedSystem, rep: ColimitElement, probes: Iterable,
                                   h: int) -> dict:
    """For each probe g, the least stage where g moves the image of rep back onto itself."""
    certificates = {}
    for g in probes:
        moved = ColimitElement(rep.stage, rep.obj, system.act(rep.stage, g, rep.element))
        k = equalize_stage(system, moved, rep, h)
        certificates[g] = Verdict.proven(k) if k is not None else Verdict.unknown(h)
    return certificates


def stabilization_stage(system: StagedSystem, gens: Iterable, rep: ColimitElement, h: int) -> Verdict:
    """
    Stage k by which every generator fixes the image of rep, together with that
    image. Requires rep to be fixed in the colimit; otherwise the answer is
    UNKNOWN at the horizon.
    """
    with tracer.start_as_current_span("dirsys.stabilization_stage") as span:
        gens = list(gens)
        certificates = eventual_fixedness_certificate(system, rep, gens, h)
        pending = [g for g, verdict in certificates.items() if not verdict.is_proven]
        if pending:
            span.set_attribute("stabilization.pending", len(pending))
            return Verdict.unknown(h, f"{len(pending)} generators not equalized")
        k = max([rep.stage] + [v.stage for v in certificates.values()])
        fixed = push_to(system, rep.stage, k, rep.obj, rep.element)
        if any(system.act(k, g, fixed) != fixed for g in gens):
            raise StructureError("connecting maps do not commute with the action", f"stage{k}")
        span.set_attribute("stabilization.stage", k)
        return Verdict.proven(k, witness=ColimitElement(k, rep.obj, fixed))
