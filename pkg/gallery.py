import asyncio
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from opentelemetry import trace

import congruence
import dirsys
import division_closure as dc
import poset_analysis as pa
from core_structures import (FiniteCategory, FiniteGroup, FiniteMonoid, Poset, category_from_functions,
                             lambda_name, monoid_to_category, opposite_monoid, poset_to_category)
from errors import StructureError
from eset import ESet, union_hom
from rewriting import RewriteSystem, division_rounds, in_submonoid, movers
from search import bell_number

tracer = trace.get_tracer(__name__)

MAX_PRIME = 97


# --- Finite monoids ---
def rightzero_monoid(s: int) -> FiniteMonoid:
    """An identity plus s right zeros: uz = z for every u."""
    _require(s >= 1, "s must be at least 1", "s")
    elements = ("1",) + tuple(f"z{i}" for i in range(1, s + 1))
    table = {(a, b): a if b == "1" else b for a in elements for b in elements}
    return FiniteMonoid.build(elements, table, "1")


def rightzero_opposite(s: int) -> FiniteMonoid:
    return opposite_monoid(rightzero_monoid(s))


def maxchain_monoid(k: int) -> FiniteMonoid:
    """{0, ..., k} under max, with identity 0."""
    _require(k >= 1, "k must be at least 1", "k")
    elements = tuple(range(k + 1))
    return FiniteMonoid.build(elements, {(a, b): max(a, b) for a in elements for b in elements}, 0)


def field_mult(p: int) -> FiniteMonoid:
    """The multiplicative monoid of the field with p elements."""
    _require(2 <= p <= MAX_PRIME and all(p % d for d in range(2, int(p ** 0.5) + 1)),
             f"p must be a prime at most {MAX_PRIME}", "p")
    elements = tuple(range(p))
    return FiniteMonoid.build(elements, {(a, b): a * b % p for a in elements for b in elements}, 1)


def cyclic_group(order: int) -> FiniteGroup:
    elements = tuple(f"g{i}" for i in range(order))
    table = {(a, b): f"g{(int(a[1:]) + int(b[1:])) % order}" for a in elements for b in elements}
    return FiniteGroup.build(elements, table, "g0")


# --- Posets ---
def two_bottom_chain(k: int) -> Poset:
    """0_1, 0_2 < 1 < 2 < ... < k."""
    _require(k >= 1, "k must be at least 1", "k")
    chain = [str(i) for i in range(1, k + 1)]
    pairs = [("0_1", "1"), ("0_2", "1")] + list(zip(chain, chain[1:]))
    return Poset.build(("0_1", "0_2", *chain), pairs)


def punctured_two_bottom_chain(k: int) -> Poset:
    """The two-bottoms chain with 1 removed, keeping the points 1+1/n for n <= k below 2."""
    _require(k >= 1, "k must be at least 1", "k")
    points = [f"1+1/{n}" for n in range(k, 1, -1)] + ["2"]
    pairs = [("0_1", points[0]), ("0_2", points[0])] + list(zip(points, points[1:]))
    return Poset.build(("0_1", "0_2", *points), pairs)


def diamond() -> Poset:
    elements = ("b1", "b2", "m1", "m2", "top")
    pairs = [(b, m) for b in ("b1", "b2") for m in ("m1", "m2")] + [("m1", "top"), ("m2", "top")]
    return Poset.build(elements, pairs)


def initial_object_category() -> FiniteCategory:
    """The empty set and a two-element set with its swap; the empty set is initial."""
    return category_from_functions({"0": 0, "A": 2}, {"swap": ("A", "A", (1, 0)), "e": ("0", "A", ())})


# --- Staged systems ---
class DyadicCosetSystem:
    """
    The 2-adic group G = Z[1/2]/Z acting on G/H_n, H_n generated by 2^-n.

    Cosets are represented by dyadic rationals in [0, 2^-n). Stages are
    infinite, so elements are sampled: at horizon h stage n shows 0 and the
    reductions of 2^-m for m <= h. The visible arrows are translations by
    2^-m, m <= h. No stage has a fixed point because H_n is never all of G.
    `horizon` is used when iota is called without one.
    """
    first_stage = 0
    constant_from = None
    finitely_rooted = True

    def __init__(self, horizon: int = dirsys.DEFAULT_HORIZON):
        self.horizon = horizon

    def objects(self, h: int) -> list:
        return ["*"]

    def arrows(self, h: int) -> list[tuple]:
        return [(Fraction(1, 2 ** m), "*", "*") for m in range(1, h + 1)]

    def settled_objects(self, h: int) -> list:
        return ["*"]

    def elements(self, n: int, obj, h: int) -> list:
        modulus = Fraction(1, 2 ** n)
        sample = {Fraction(0)} | {Fraction(1, 2 ** m) % modulus for m in range(1, h + 1)}
        return sorted(sample)

    def act(self, n: int, g, x):
        return (x + Fraction(g)) % Fraction(1, 2 ** n)

    def push(self, n: int, obj, x):
        return x % Fraction(1, 2 ** (n + 1))

    def fixed_points(self, n: int, h: int, generators) -> list[tuple]:
        generators = list(generators)
        return [(x,) for x in self.elements(n, "*", h) if all(self.act(n, g, x) == x for g in generators)]

    def stage_limit(self, n: int, h: int) -> list[tuple]:
        # translations by 2^-m with m <= n fix G/H_n pointwise; 2^-(n+1) moves every coset
        generators = [Fraction(1, 2 ** m) for m in range(1, max(h, n + 1) + 1)]
        return self.fixed_points(n, h, generators)


class NegativeChainSystem:
    """
    Directed system over the chain of negative integers, stages n >= 1.

    Stage n puts {-1, +1} (or nothing, for the empty variant) on the downset
    D_n = {E <= -n} and {0} elsewhere; arrows act as the identity inside D_n
    and collapse to 0 outside. At horizon h the window is -1, ..., -(h+1),
    and -1, ..., -(h-1) are settled.
    `horizon` is used when iota is called without one.
    """
    first_stage = 1
    constant_from = None
    finitely_rooted = False

    def __init__(self, variant: str = "plusminus", horizon: int = dirsys.DEFAULT_HORIZON):
        if variant not in ("plusminus", "empty"):
            raise StructureError(f"unknown variant {variant!r}", "variant")
        self.variant = variant
        self.horizon = horizon

    def _inside(self, n: int, obj) -> bool:
        return obj <= -n

    def objects(self, h: int) -> list:
        return [-j for j in range(1, h + 2)]

    def arrows(self, h: int) -> list[tuple]:
        return [((-(j + 1), -j), -(j + 1), -j) for j in range(1, h + 1)]

    def settled_objects(self, h: int) -> list:
        return [-j for j in range(1, h)]

    def elements(self, n: int, obj, h: int) -> list:
        if self._inside(n, obj):
            return [-1, 1] if self.variant == "plusminus" else []
        return [0]

    def act(self, n: int, arrow, x):
        _, target = arrow
        return x if self._inside(n, target) else 0

    def push(self, n: int, obj, x):
        return x if self._inside(n + 1, obj) else 0

    def x_plus(self, n: int, h: int) -> tuple:
        return tuple(1 if self._inside(n, obj) else 0 for obj in self.objects(h))

    def x_minus(self, n: int, h: int) -> tuple:
        return tuple(-1 if self._inside(n, obj) else 0 for obj in self.objects(h))

    def stage_limit(self, n: int, h: int) -> list[tuple]:
        if self.variant == "empty":
            return []
        return [self.x_plus(n, h), self.x_minus(n, h)]


def dyadic_group_system(h: int = dirsys.DEFAULT_HORIZON) -> DyadicCosetSystem:
    _require(h >= 1, "h must be at least 1", "h")
    return DyadicCosetSystem(h)


def pinje_systems(variant: str = "plusminus", h: int = dirsys.DEFAULT_HORIZON) -> NegativeChainSystem:
    _require(h >= 1, "h must be at least 1", "h")
    return NegativeChainSystem(variant, h)


def c2_collapse(collapse_at: int = 3) -> dirsys.LazyStagedSystem:
    """C2 swapping {a, b} before `collapse_at`, acting on {c} from then on."""
    group = cyclic_group(2)
    category = monoid_to_category(group)
    swap = category.morphism("g1")
    identity = category.morphism("g0")

    def stage(n: int) -> ESet:
        if n < collapse_at:
            return ESet.build(category, {"*": ("a", "b")}, {swap: {"a": "b", "b": "a"}, identity: {"a": "a", "b": "b"}})
        return ESet.build(category, {"*": ("c",)}, {swap: {"c": "c"}, identity: {"c": "c"}})

    def step(n: int, source: ESet, target: ESet) -> dict:
        if n + 1 < collapse_at:
            return {"*": {x: x for x in source.carriers["*"]}}
        return {"*": {x: "c" for x in source.carriers["*"]}}

    return dirsys.LazyStagedSystem(category, stage, step, first_stage=0, constant_from=collapse_at,
                                   name="c2_collapse")


def constant_system(X: ESet) -> dirsys.LazyStagedSystem:
    return dirsys.LazyStagedSystem(X.category, lambda n: X,
                                   lambda n, source, target: {obj: {x: x for x in source.carriers[obj]}
                                                              for obj in X.category.objects},
                                   first_stage=0, constant_from=0, name="constant")


# --- Word monoids ---
def monoid_xy(k: int) -> RewriteSystem:
    """Generators x_0..x_k and y with x_n y = x_0 y."""
    _require(k >= 1, "k must be at least 1", "k")
    xs = tuple(f"x{n}" for n in range(k + 1))
    rules = tuple(((f"x{n}", "y"), ("x0", "y")) for n in range(1, k + 1))
    return RewriteSystem(generators=xs + ("y",), rules=rules)


def monoid_xyzw(k: int) -> RewriteSystem:
    """Generators x_n, y_n (n <= k), z, w with x_n y_n z = z and y_n w = w."""
    _require(k >= 1, "k must be at least 1", "k")
    gens = tuple(f"x{n}" for n in range(k + 1)) + tuple(f"y{n}" for n in range(k + 1)) + ("z", "w")
    rules = tuple(((f"x{n}", f"y{n}", "z"), ("z",)) for n in range(k + 1))
    rules += tuple(((f"y{n}", "w"), ("w",)) for n in range(k + 1))
    return RewriteSystem(generators=gens, rules=rules)


# --- Items and expectations ---
@dataclass(frozen=True)
class Expectation:
    claim: str
    passed: bool
    anchor: str = ""
    detail: Any = None


@dataclass(frozen=True)
class GalleryItem:
    """
    A named construction with default parameters and a checklist.
    `verified` says what is checked exactly at finite scale; `evidenced` what
    only parameter growth suggests.
    """
    name: str
    kind: str
    builder: Callable[..., Any]
    defaults: Mapping[str, Any]
    expectations: Callable[..., list[Expectation]]
    verified: str = ""
    evidenced: str = ""


@dataclass(frozen=True)
class GalleryRun:
    name: str
    params: dict
    expectations: list[Expectation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.expectations)


def _require(condition: bool, message: str, location: str):
    if not condition:
        raise StructureError(message, location)


def _expect_rightzero_opposite(M: FiniteMonoid, s: int) -> list[Expectation]:
    X = dc.regular_left_eset(M)
    found = []
    if s <= 4:
        result = congruence.minimal_improper_generators(X, budget=s)
        found.append(Expectation(f"improper left congruence needs exactly {s} generating pairs",
                                 result.exact and result.size == s, "right-zero opposite monoid", result.size))
    if len(M.elements) <= dc.LEFT_CONGRUENCE_ENUMERATION_GUARD:
        count = len(dc.left_congruences_enumerate(M))
        found.append(Expectation("every equivalence relation is a left congruence",
                                 count == bell_number(s + 1), "left congruences", count))
    return found


def _expect_maxchain(M: FiniteMonoid, k: int) -> list[Expectation]:
    found = []
    if len(M.elements) <= dc.LEFT_CONGRUENCE_ENUMERATION_GUARD:
        congruences = dc.left_congruences_enumerate(M)
        intervals = all(all(block == tuple(range(block[0], block[-1] + 1)) for block in C.blocks)
                        for C in congruences)
        found.append(Expectation("left congruences are the interval partitions, 2^k of them",
                                 len(congruences) == 2 ** k and intervals, "sup monoid", len(congruences)))
    multdiv = dc.multdiv_holds(M)
    found.append(Expectation("the top element alone right-divides everything",
                             multdiv.witness == (k,), "multdiv", multdiv.witness))
    if k >= 2:
        closure = dc.left_congruence_closure(M, [(0, 2)])
        found.append(Expectation("(0, 2) generates the improper left congruence when k = 2",
                                 closure.is_improper() == (k == 2), "left translation by 1", closure.blocks))
    return found


def _expect_field(M: FiniteMonoid, p: int) -> list[Expectation]:
    units = tuple(range(1, p))
    correspondence = dc.class_of_one_correspondence(M, units)
    return [
        Expectation("0 is a right zero", dc.right_zeros(M) == (0,), "rtz", dc.right_zeros(M)),
        Expectation("right division from {0} reaches the whole monoid",
                    dc.right_division_closure(M, [0]) == M.elements, "multiplicative monoid of a field"),
        Expectation("the units are the class of 1 of a left congruence",
                    correspondence.division_closed and correspondence.recovered, "class of 1",
                    correspondence.class_of_one),
    ]


def _expect_two_bottom_chain(J: Poset, k: int) -> list[Expectation]:
    A = J.minimal_elements()
    category = poset_to_category(J)
    H = union_hom(category, A)
    generators = congruence.minimal_improper_generators(H)
    expected = (("1", category.morphism(lambda_name("0_1", "1")), category.morphism(lambda_name("0_2", "1"))),)
    gathering = pa.minimal_gathering_set(J, A)
    return [
        Expectation("minimal elements are 0_1 and 0_2", A == ("0_1", "0_2"), "two bottoms", A),
        Expectation("1 is the only critical element", pa.critical_elements(J, A) == ("1",), "critical element"),
        Expectation("{1} gathers the bottoms everywhere", gathering.witness == ("1",), "gathering",
                    gathering.witness),
        Expectation("a single pair at 1 generates the improper congruence",
                    generators.exact and generators.witness == expected, "generated by the single pair",
                    [(e, str(s), str(t)) for e, s, t in generators.witness]),
        Expectation("all four necessary conditions hold", pa.tgath_check(category).holds, "necessary conditions"),
    ]


def _expect_punctured(J: Poset, k: int) -> list[Expectation]:
    lowest = J.elements[2]
    probe = pa.horizon_instability_probe(lambda n: (punctured_two_bottom_chain(n), ("0_1", "0_2")),
                                         range(max(2, k - 3), k + 1))
    return [
        Expectation("the lowest remaining point is the only critical element",
                    pa.critical_elements(J, ("0_1", "0_2")) == (lowest,), "delete the element 1", lowest),
        Expectation("the minimal gathering set drifts as the truncation grows",
                    k < 4 or probe.drifting, "no longer finitely generated",
                    [row.gathering for row in probe.rows]),
    ]


def _expect_diamond(J: Poset) -> list[Expectation]:
    A = J.minimal_elements()
    gathering = pa.minimal_gathering_set(J, A)
    return [
        Expectation("both middle elements are critical", pa.critical_elements(J, A) == ("m1", "m2"), "critical"),
        Expectation("no single element gathers under both middles", gathering.witness == ("m1", "m2"),
                    "gathering", gathering.witness),
    ]


def _expect_v_chain(J: Poset, k: int) -> list[Expectation]:
    probe = pa.horizon_instability_probe(lambda n: (two_bottom_chain(n), ("0_1", "0_2")), range(1, k + 1))
    return [Expectation("the minimal gathering set is {1} at every length",
                        not probe.drifting and all(row.gathering == ("1",) for row in probe.rows),
                        "gathering", [row.gathering for row in probe.rows])]


def _expect_initial(category: FiniteCategory) -> list[Expectation]:
    init = dc.initial_object(category)
    S0 = [category.hom(init, obj)[0] for obj in category.objects if obj != init]
    result = dc.s0s1_check(category, [init], S0)
    return [
        Expectation("the empty set is initial", init == "0", "initial object", init),
        Expectation("S1 can be empty", result.found and result.size == 0, "letting S1 be the empty set"),
    ]


def _expect_dyadic(system: DyadicCosetSystem, h: int) -> list[Expectation]:
    found = []
    for horizon in range(1, h + 1):
        report = dirsys.iota(system, horizon)
        found.append(Expectation(
            f"horizon {horizon}: empty domain, singleton codomain, not surjective",
            not report.domain and len(report.codomain) == 1 and report.surjective.is_refuted
            and not report.injective.is_refuted,
            "the colimit of fixed-point sets is empty", len(report.codomain)))
    rep = dirsys.ColimitElement(0, "*", Fraction(0))
    probes = [Fraction(1, 2 ** m) for m in range(1, h + 1)] + [Fraction(3, 2 ** h)]
    certificates = dirsys.eventual_fixedness_certificate(system, rep, probes, h)
    exact = all(v.is_proven and v.stage == g.denominator.bit_length() - 1 for g, v in certificates.items())
    found.append(Expectation("a probe a/2^m is certified at stage m", exact, "same image",
                             {str(g): v.stage for g, v in certificates.items()}))
    half = dirsys.stabilization_stage(system, [Fraction(1, 2)], rep, h)
    found.append(Expectation("the generator 1/2 alone stabilizes at stage 1", half.stage == 1,
                             "finitely generated", half.stage))
    return found


def _expect_pinje(system: NegativeChainSystem, h: int) -> list[Expectation]:
    found = []
    for horizon in range(1, h + 1):
        report = dirsys.iota(system, horizon)
        if system.variant == "plusminus":
            witness = report.injective.witness or []
            ok = (report.injective.is_refuted and len(report.codomain) == 1
                  and [t for _, t in witness] == [system.x_plus(1, horizon), system.x_minus(1, horizon)])
            claim = f"horizon {horizon}: x+ and x- are distinct with the same image"
        else:
            ok = not report.domain and len(report.codomain) == 1 and report.surjective.is_refuted
            claim = f"horizon {horizon}: empty domain and singleton codomain"
        found.append(Expectation(claim, ok, "distinct elements x+ and x-", report.injective.outcome.value))
    return found


def _expect_c2(system: dirsys.LazyStagedSystem, h: int) -> list[Expectation]:
    swap = system.category.morphism("g1")
    verdict = dirsys.stabilization_stage(system, [swap], dirsys.ColimitElement(0, "*", "a"), h)
    report = dirsys.iota(system, h)
    return [
        Expectation("the swap fixes the image of a from stage 3", verdict.stage == 3 if h >= 3 else not verdict.is_proven,
                    "common upper bound", verdict.stage),
        Expectation("ι is bijective once the system is constant", report.bijective == (h >= 3), "constant stage",
                    [report.injective.outcome.value, report.surjective.outcome.value]),
    ]


def _expect_xy(system: RewriteSystem, k: int) -> list[Expectation]:
    x0y = ("x0", "y")
    collapse = all(system.normal_form((f"x{n}", "y")) == x0y for n in range(k + 1))
    basis = [("y",), x0y]
    generators = [(g,) for g in system.generators]
    moving = movers(system, generators, basis)
    single = [[("y",)], [x0y]] + [[(g,)] for g in system.generators]
    no_single = all(len(movers(system, generators, b)) < len(generators) for b in single)
    irreducible = all(system.normal_form((f"x{n}", "x0", "y")) == (f"x{n}", "x0", "y") for n in range(1, k + 1))
    return [
        Expectation("every x_n y equals x_0 y", collapse, "all the elements x_n y are equal"),
        Expectation("{y, x_0 y} makes every generator move into M0", len(moving) == len(generators),
                    "the submonoid generated by {y, x_0 y}", len(moving)),
        Expectation("no single word from the sampled candidates suffices", no_single, "witness size stays 2"),
        Expectation("x_n x_0 y is irreducible", irreducible, "no finitely generated left ideal",
                    "recorded fact only"),
        Expectation("x_0 y lies in the submonoid generated by the witness",
                    in_submonoid(system, x0y, basis), "fgM0"),
    ]


def _expect_xyzw(system: RewriteSystem, k: int) -> list[Expectation]:
    rounds = division_rounds(system, [("z",), ("w",)])
    first = set(rounds[0].added) if rounds else set()
    second = set(rounds[1].added) if len(rounds) > 1 else set()
    reached = {w for r in rounds for w in r.added} | {("z",), ("w",)}
    return [
        Expectation("round 1 yields every y_n and x_n y_n",
                    all((f"y{n}",) in first and (f"x{n}", f"y{n}") in first for n in range(k + 1)),
                    "all elements of the forms x_n y_n and y_n"),
        Expectation("round 2 yields every x_n", all((f"x{n}",) in second for n in range(k + 1)),
                    "gives all elements x_n"),
        Expectation("all generators are reached within 3 rounds",
                    len(rounds) <= 3 and all((g,) in reached for g in system.generators),
                    "starting with the finite set {z, w}", len(rounds)),
    ]


ITEMS: dict[str, GalleryItem] = {item.name: item for item in [
    GalleryItem("rightzero_opposite", "monoid", rightzero_opposite, {"s": 3},
                lambda M, s: _expect_rightzero_opposite(M, s),
                verified="generator counts and left congruence counts for s <= 4",
                evidenced="the generator count grows with s, so the infinite version is not finitely generated"),
    GalleryItem("maxchain_monoid", "monoid", maxchain_monoid, {"k": 3}, lambda M, k: _expect_maxchain(M, k),
                verified="interval partitions for k <= 5",
                evidenced="uncountable chains are outside finite truncation"),
    GalleryItem("field_mult", "monoid", field_mult, {"p": 3}, lambda M, p: _expect_field(M, p),
                verified="right zero and division closure for every prime up to the guard"),
    GalleryItem("two_bottom_chain", "poset", two_bottom_chain, {"k": 3}, lambda J, k: _expect_two_bottom_chain(J, k),
                verified="critical set, gathering set and generator pair at each length"),
    GalleryItem("punctured_two_bottom_chain", "poset", punctured_two_bottom_chain, {"k": 5},
                lambda J, k: _expect_punctured(J, k),
                verified="the critical point of each truncation",
                evidenced="drift of the gathering set as k grows"),
    GalleryItem("diamond", "poset", diamond, {}, lambda J: _expect_diamond(J),
                verified="critical and gathering sets"),
    GalleryItem("v_poset_chain", "poset", two_bottom_chain, {"k": 5}, lambda J, k: _expect_v_chain(J, k),
                verified="stability of the gathering set over lengths 1..k"),
    GalleryItem("initial_object_category", "category", initial_object_category, {},
                lambda E: _expect_initial(E), verified="S1 empty suffices"),
    GalleryItem("dyadic_group_system", "staged", dyadic_group_system, {"h": 6},
                lambda S, h: _expect_dyadic(S, h),
                verified="domain, codomain and probe stages at each horizon up to h",
                evidenced="non-surjectivity in the limit, by the structural absence of fixed points"),
    GalleryItem("pinje_plusminus", "staged", lambda h: pinje_systems("plusminus", h), {"h": 6},
                lambda S, h: _expect_pinje(S, h), verified="witnesses x+ and x- at each horizon up to h"),
    GalleryItem("pinje_empty", "staged", lambda h: pinje_systems("empty", h), {"h": 6},
                lambda S, h: _expect_pinje(S, h), verified="empty domain at each horizon up to h"),
    GalleryItem("c2_collapse", "staged", c2_collapse, {"h": 5}, lambda S, h: _expect_c2(S, h),
                verified="stabilization stage 3"),
    GalleryItem("monoid_xy", "words", monoid_xy, {"k": 5}, lambda S, k: _expect_xy(S, k),
                verified="normal forms and the size 2 witness for generators up to k"),
    GalleryItem("monoid_xyzw", "words", monoid_xyzw, {"k": 5}, lambda S, k: _expect_xyzw(S, k),
                verified="division rounds for generators up to k"),
]}

# builder parameters per item; the remaining defaults only feed the expectations
BUILDER_PARAMS = {
    "rightzero_opposite": ("s",), "maxchain_monoid": ("k",), "field_mult": ("p",),
    "two_bottom_chain": ("k",), "punctured_two_bottom_chain": ("k",), "v_poset_chain": ("k",),
    "monoid_xy": ("k",), "monoid_xyzw": ("k",),
    "dyadic_group_system": ("h",), "pinje_plusminus": ("h",), "pinje_empty": ("h",),
}


def list_items() -> list[GalleryItem]:
    return list(ITEMS.values())


def get_item(name: str) -> GalleryItem:
    try:
        return ITEMS[name]
    except KeyError:
        raise StructureError(f"unknown gallery item {name!r}", "gallery") from None


def resolve_params(item: GalleryItem, params: Mapping[str, Any] | None) -> dict:
    merged = dict(item.defaults)
    for key, value in (params or {}).items():
        if key not in merged:
            raise StructureError(f"{item.name} takes no parameter {key!r}", f"param.{key}")
        merged[key] = int(value)
    return merged


def build_item(name: str, params: Mapping[str, Any] | None = None) -> tuple[GalleryItem, Any, dict]:
    item = get_item(name)
    merged = resolve_params(item, params)
    built = item.builder(**{key: merged[key] for key in BUILDER_PARAMS.get(name, ())})
    return item, built, merged


def run_item(name: str, params: Mapping[str, Any] | None = None) -> GalleryRun:
    with tracer.start_as_current_span("gallery.run_item") as span:
        item, built, merged = build_item(name, params)
        expectations = item.expectations(built, **merged)
        run = GalleryRun(name=name, params=merged, expectations=expectations)
        span.set_attribute("gallery.item", name)
        span.set_attribute("gallery.passed", run.passed)
        return run


async def run_all(names: list[str] | None = None) -> list[GalleryRun]:
    """Runs every item's checklist in worker threads."""
    names = names or list(ITEMS)
    return list(await asyncio.gather(*[asyncio.to_thread(run_item, name) for name in names]))
