"""Random structures for the property suites: seeded builders plus hypothesis strategies."""
import random
from functools import cache
from itertools import combinations

import networkx as nx
from hypothesis import strategies as st

from congruence import RelationFamily, congruence_closure
from core_structures import (FiniteCategory, FiniteMonoid, Poset, category_from_functions, monoid_to_category,
                             transformation_monoid)
from dirsys import FiniteDirectedSystem
from eset import ESet, ESetMorphism, coproduct, generated_subeset, quotient, trivial_eset, union_hom

MAX_OBJECTS = 4
MAX_CARRIER = 6
MAX_MORPHISMS = 10
MAX_POSET = 10
MAX_MONOID = 5
ATTEMPTS = 200


# --- Categories ---
def random_function_category(rng: random.Random, max_objects: int = MAX_OBJECTS, max_size: int = 3,
                             max_morphisms: int = MAX_MORPHISMS):
    """A random subcategory of finite sets, with the sizes and generators that produced it."""
    for _ in range(ATTEMPTS):
        objects = "ABCD"[:rng.randint(1, max_objects)]
        sizes = {obj: rng.randint(1, max_size) for obj in objects}
        generators = {}
        for i in range(rng.randint(0, 3)):
            src, tgt = rng.choice(objects), rng.choice(objects)
            generators[f"f{i}"] = (src, tgt, tuple(rng.randrange(sizes[tgt]) for _ in range(sizes[src])))
        category = category_from_functions(sizes, generators)
        if len(category.morphisms) <= max_morphisms:
            return category, sizes, generators
    raise RuntimeError("no small category found; loosen the limits")


def tautological_eset(category: FiniteCategory, sizes: dict, generators: dict) -> ESet:
    """Each object acting as the set range(size) it was built from."""
    def evaluate(name: str, x: int) -> int:
        if name.startswith("id_"):
            return x
        for step in reversed(name.split(".")):
            x = generators[step][2][x]
        return x

    carriers = {obj: tuple(range(sizes[obj])) for obj in category.objects}
    actions = {m: {x: evaluate(m.name, x) for x in carriers[m.source]} for m in category.morphisms}
    return ESet.build(category, carriers, actions)


# --- E-sets ---
def _small(X: ESet, limit: int) -> bool:
    return all(len(X.carriers[obj]) <= limit for obj in X.category.objects)


def random_eset_over(rng: random.Random, category: FiniteCategory, sizes: dict, generators: dict,
                     max_carrier: int = MAX_CARRIER) -> ESet:
    for _ in range(ATTEMPTS):
        shape = rng.choice(["tautological", "hom", "coproduct", "subeset", "trivial"])
        if shape == "hom":
            X = union_hom(category, rng.sample(category.objects, rng.randint(1, len(category.objects))))
        elif shape == "coproduct":
            X = coproduct(tautological_eset(category, sizes, generators), trivial_eset(category))
        elif shape == "subeset":
            base = tautological_eset(category, sizes, generators)
            obj = rng.choice(category.objects)
            X = generated_subeset(base, {obj: [rng.choice(base.carriers[obj])]})
        elif shape == "trivial":
            X = trivial_eset(category)
        else:
            X = tautological_eset(category, sizes, generators)
        if _small(X, max_carrier):
            return X
    return trivial_eset(category)


def random_eset(rng: random.Random) -> ESet:
    category, sizes, generators = random_function_category(rng)
    return random_eset_over(rng, category, sizes, generators)


def random_relation(rng: random.Random, X: ESet, max_pairs: int = 4) -> RelationFamily:
    triples = []
    for _ in range(rng.randint(0, max_pairs)):
        obj = rng.choice(X.category.objects)
        if X.carriers[obj]:
            triples.append((obj, rng.choice(X.carriers[obj]), rng.choice(X.carriers[obj])))
    return RelationFamily.from_triples(X, triples)


# --- Oracles ---
def fixpoint_closure(X: ESet, relation: RelationFamily) -> dict:
    """
    The least congruence containing `relation` by naive saturation of pair
    sets (reflexive, symmetric, transitive, action images), as a frozenset
    partition per object.
    """
    related = {obj: {(x, x) for x in X.carriers[obj]} for obj in X.category.objects}
    for obj, s, t in relation.triples():
        related[obj].add((s, t))
    changed = True
    while changed:
        changed = False
        for obj in X.category.objects:
            pairs = related[obj]
            new = {(t, s) for s, t in pairs}
            new |= {(s, u) for s, t in pairs for t2, u in pairs if t == t2}
            if not new <= pairs:
                pairs |= new
                changed = True
        for m in X.category.morphisms:
            images = {(X.act(m, s), X.act(m, t)) for s, t in related[m.source]}
            if not images <= related[m.target]:
                related[m.target] |= images
                changed = True
    return {obj: frozenset(frozenset(t for s2, t in related[obj] if s2 == s) for s in X.carriers[obj])
            for obj in X.category.objects}


def partition_sets(family) -> dict:
    return {obj: frozenset(frozenset(block) for block in blocks) for obj, blocks in family.blocks.items()}


# --- Directed systems ---
def _projection_onto(X: ESet, relation: RelationFamily) -> tuple[ESet, ESetMorphism]:
    return quotient(X, congruence_closure(X, relation))


def _induced(source: ESet, target_projection: ESetMorphism) -> dict:
    """Components of source -> target where source elements are elements of the common base."""
    return {obj: {x: target_projection.apply(obj, x) for x in source.carriers[obj]}
            for obj in source.category.objects}


def random_directed_system_over(rng: random.Random, X: ESet) -> FiniteDirectedSystem:
    """A chain or a diamond of quotients of X, all maps induced by projections."""
    if rng.random() < 0.5:
        length = rng.randint(1, 3)
        members = {0: X}
        connect = {}
        relation = []
        for i in range(1, length + 1):
            relation += random_relation(rng, X, 2).triples()
            Q, projection = _projection_onto(X, RelationFamily.from_triples(X, relation))
            members[i] = Q
            connect[(i - 1, i)] = _induced(members[i - 1], projection)
        index = Poset.build(range(length + 1), [(i, i + 1) for i in range(length)])
        return FiniteDirectedSystem.build(index, members, connect)
    left = random_relation(rng, X, 2).triples()
    right = random_relation(rng, X, 2).triples()
    L, to_left = _projection_onto(X, RelationFamily.from_triples(X, left))
    R, to_right = _projection_onto(X, RelationFamily.from_triples(X, right))
    T, to_top = _projection_onto(X, RelationFamily.from_triples(X, left + right))
    index = Poset.build(("b", "l", "r", "t"), [("b", "l"), ("b", "r"), ("l", "t"), ("r", "t")])
    connect = {("b", "l"): to_left.components, ("b", "r"): to_right.components,
               ("l", "t"): _induced(L, to_top), ("r", "t"): _induced(R, to_top)}
    return FiniteDirectedSystem.build(index, {"b": X, "l": L, "r": R, "t": T}, connect)


def random_directed_system(rng: random.Random) -> FiniteDirectedSystem:
    return random_directed_system_over(rng, random_eset(rng))


# --- Monoids ---
def random_monoid(rng: random.Random, max_size: int = MAX_MONOID) -> FiniteMonoid:
    """A transformation monoid on two or three points with at most `max_size` elements."""
    for _ in range(ATTEMPTS):
        degree = rng.randint(2, 3)
        gens = [tuple(rng.randrange(degree) for _ in range(degree)) for _ in range(rng.randint(1, 2))]
        M = transformation_monoid(degree, gens)
        if len(M.elements) <= max_size:
            return M
    return transformation_monoid(2, [])


def random_monoid_system(rng: random.Random) -> FiniteDirectedSystem:
    """A directed system over the one-object category of a random monoid."""
    M = random_monoid(rng)
    category = monoid_to_category(M)
    obj = category.objects[0]
    actions = {category.morphism(str(a)): {x: M.mult(a, x) for x in M.elements} for a in M.elements}
    regular = ESet.build(category, {obj: M.elements}, actions)
    return random_directed_system_over(rng, regular)


# --- Posets ---
def random_poset(rng: random.Random, max_elements: int = MAX_POSET) -> Poset:
    n = rng.randint(1, max_elements)
    density = rng.random() * 0.6
    pairs = [(i, j) for i, j in combinations(range(n), 2) if rng.random() < density]
    return Poset.build(range(n), pairs)


def _down_sets(J: Poset) -> list[list]:
    found = []
    for mask in range(1 << len(J.elements)):
        chosen = [x for i, x in enumerate(J.elements) if mask >> i & 1]
        if all(set(J.down(x)) <= set(chosen) for x in chosen):
            found.append(chosen)
    return found


def _strict_order(J: Poset) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(J.elements)
    graph.add_edges_from((x, y) for x, y in J.leq if x != y)
    return graph


@cache
def all_small_posets(n: int) -> list[Poset]:
    """
    One poset on range(n) per isomorphism class. Each poset comes from a
    smaller one by adding a maximal element over one of its down-sets.
    """
    if n < 1:
        return []
    level = [Poset.build([0])]
    for size in range(1, n):
        buckets = {}
        grown = []
        for J in level:
            below = [(x, y) for x, y in J.leq if x != y]
            for ideal in _down_sets(J):
                K = Poset.build(range(size + 1), below + [(x, size) for x in ideal])
                graph = _strict_order(K)
                bucket = buckets.setdefault(nx.weisfeiler_lehman_graph_hash(graph), [])
                if not any(nx.is_isomorphic(graph, other) for other in bucket):
                    bucket.append(graph)
                    grown.append(K)
        level = grown
    return level


# --- Hypothesis strategies ---
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def esets():
    return seeds.map(lambda s: random_eset(random.Random(s)))


def eset_relations():
    def build(seed: int):
        rng = random.Random(seed)
        X = random_eset(rng)
        return X, random_relation(rng, X)
    return seeds.map(build)


def monoids():
    return seeds.map(lambda s: random_monoid(random.Random(s)))


@st.composite
def posets(draw, max_elements: int = MAX_POSET):
    n = draw(st.integers(min_value=1, max_value=max_elements))
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n))
    return Poset.build(range(n), [(min(a, b), max(a, b)) for a, b in edges if a != b])
