from collections import deque
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import product

import networkx as nx

from errors import StructureError


@dataclass(frozen=True)
class Morphism:
    """A morphism name tagged with its domain and codomain."""
    name: str
    source: Hashable
    target: Hashable

    def __str__(self) -> str:
        return self.name


# --- Categories ---
@dataclass(frozen=True, eq=False)
class FiniteCategory:
    """
    A finite category with object-tagged morphisms.

    `table[(a, b)]` is the composite a∘b (first b, then a). Instances are
    only created through `build`, which validates identities and
    associativity; everything downstream assumes a valid category.
    """
    objects: tuple
    homs: Mapping[tuple, tuple[Morphism, ...]]
    identities: Mapping[Hashable, Morphism]
    table: Mapping[tuple[Morphism, Morphism], Morphism]
    morphisms: tuple[Morphism, ...] = field(repr=False)
    by_name: Mapping[str, Morphism] = field(repr=False)
    outgoing: Mapping[Hashable, tuple[Morphism, ...]] = field(repr=False)
    proper_outgoing: Mapping[Hashable, tuple[Morphism, ...]] = field(repr=False)

    @classmethod
    def build(cls, objects: Sequence, homs: Mapping[tuple, Sequence[str]],
              identities: Mapping[Hashable, str] | None = None,
              compose: Mapping[tuple[str, str], str] | None = None) -> "FiniteCategory":
        objects = tuple(objects)
        if len(set(objects)) != len(objects):
            raise StructureError("duplicate object identifiers", "objects")
        object_set = set(objects)

        by_name = {}
        hom_table = {}
        for (src, tgt), names in homs.items():
            if src not in object_set or tgt not in object_set:
                raise StructureError(f"hom-set between unknown objects {src!r}, {tgt!r}", f"homs.{src},{tgt}")
            entries = []
            for i, name in enumerate(names):
                name = str(name)
                if name in by_name:
                    raise StructureError(f"morphism {name!r} appears in two hom-sets", f"homs.{src},{tgt}[{i}]")
                by_name[name] = Morphism(name, src, tgt)
                entries.append(by_name[name])
            hom_table[(src, tgt)] = tuple(entries)
        for src, tgt in product(objects, repeat=2):
            hom_table.setdefault((src, tgt), ())

        identities = dict(identities or {})
        identity_table = {}
        for obj in objects:
            name = identities.get(obj)
            if name is None:
                raise StructureError(f"object {obj!r} has no identity", f"identities.{obj}")
            ident = by_name.get(str(name))
            if ident is None or (ident.source, ident.target) != (obj, obj):
                raise StructureError(f"identity {name!r} is not an endomorphism of {obj!r}", f"identities.{obj}")
            identity_table[obj] = ident

        identity_set = set(identity_table.values())
        table = {}
        for (a_name, b_name), c_name in (compose or {}).items():
            location = f"compose.{a_name},{b_name}"
            a, b, c = by_name.get(str(a_name)), by_name.get(str(b_name)), by_name.get(str(c_name))
            if a is None or b is None or c is None:
                raise StructureError("composition mentions an unknown morphism", location)
            if b.target != a.source:
                raise StructureError(f"{a_name} and {b_name} are not composable", location)
            if (c.source, c.target) != (b.source, a.target):
                raise StructureError(f"{c_name} is not a morphism {b.source!r} -> {a.target!r}", location)
            table[(a, b)] = c

        morphisms = tuple(m for src, tgt in product(objects, repeat=2) for m in hom_table[(src, tgt)])
        for m in morphisms:
            for a, b in ((identity_table[m.target], m), (m, identity_table[m.source])):
                if table.setdefault((a, b), m) != m:
                    raise StructureError(f"identity is not neutral on {m}", f"compose.{a},{b}")

        for a, b in product(morphisms, repeat=2):
            if b.target == a.source and (a, b) not in table:
                raise StructureError(f"composite {a}∘{b} is missing", f"compose.{a},{b}")

        category = cls._assemble(objects, hom_table, identity_table, table, morphisms, by_name)
        category._check_associativity(identity_set)
        return category

    @classmethod
    def _assemble(cls, objects, hom_table, identity_table, table, morphisms, by_name) -> "FiniteCategory":
        outgoing = {obj: tuple(m for m in morphisms if m.source == obj) for obj in objects}
        proper = {obj: tuple(m for m in outgoing[obj] if m != identity_table[obj]) for obj in objects}
        return cls(objects=objects, homs=hom_table, identities=identity_table, table=table,
                   morphisms=morphisms, by_name=by_name, outgoing=outgoing, proper_outgoing=proper)

    def _check_associativity(self, identity_set: set):
        for b in self.morphisms:
            if b in identity_set:
                continue
            for a in self.outgoing[b.target]:
                if a in identity_set:
                    continue
                ab = self.table[(a, b)]
                for c in self.outgoing[a.target]:
                    if c in identity_set:
                        continue
                    if self.table[(c, ab)] != self.table[(self.table[(c, a)], b)]:
                        raise StructureError(f"composition is not associative on ({c}, {a}, {b})",
                                             f"compose.{c},{a}")

    def hom(self, source, target) -> tuple[Morphism, ...]:
        return self.homs[(source, target)]

    def identity(self, obj) -> Morphism:
        return self.identities[obj]

    def is_identity(self, m: Morphism) -> bool:
        return self.identities[m.source] == m

    def compose(self, a: Morphism, b: Morphism) -> Morphism:
        """a∘b: apply b, then a."""
        return self.table[(a, b)]

    def morphism(self, name: str) -> Morphism:
        try:
            return self.by_name[str(name)]
        except KeyError:
            raise StructureError(f"unknown morphism {name!r}", name) from None

    def non_identity_out(self, obj) -> tuple[Morphism, ...]:
        return self.proper_outgoing[obj]

    def object_index(self, obj) -> int:
        return self.objects.index(obj)


def discrete_category(objects: Sequence) -> FiniteCategory:
    objects = tuple(objects)
    homs = {(obj, obj): [f"id_{obj}"] for obj in objects}
    identities = {obj: f"id_{obj}" for obj in objects}
    compose = {(f"id_{obj}", f"id_{obj}"): f"id_{obj}" for obj in objects}
    return FiniteCategory.build(objects, homs, identities, compose)


def category_from_functions(sizes: Mapping[Hashable, int],
                            generators: Mapping[str, tuple[Hashable, Hashable, Sequence[int]]]) -> FiniteCategory:
    """
    The subcategory of finite sets generated by the given functions.

    Object E is the set range(sizes[E]); generator g = (E, F, f) is the map
    x -> f[x] from E to F. Composites are found breadth-first so every
    morphism is named by a shortest word (`a.b` is a after b).
    """
    objects = tuple(sizes)
    key_to_name = {}
    names_by_hom = {(src, tgt): [] for src, tgt in product(objects, repeat=2)}
    queue = deque()

    def register(src, tgt, fn, name):
        key = (src, tgt, tuple(fn))
        if key in key_to_name:
            return key_to_name[key]
        key_to_name[key] = name
        names_by_hom[(src, tgt)].append(name)
        queue.append(key)
        return name

    for obj in objects:
        register(obj, obj, range(sizes[obj]), f"id_{obj}")
    gens = []
    for gname, (src, tgt, fn) in generators.items():
        if src not in sizes or tgt not in sizes:
            raise StructureError(f"generator {gname} between unknown objects", f"generators.{gname}")
        fn = tuple(int(v) for v in fn)
        if len(fn) != sizes[src] or any(not 0 <= v < sizes[tgt] for v in fn):
            raise StructureError(f"generator {gname} is not a function {src!r} -> {tgt!r}", f"generators.{gname}")
        gens.append((register(src, tgt, fn, gname), (src, tgt, fn)))

    # every composite is a word in generators, so closing under post-composition suffices
    while queue:
        src, tgt, fn = queue.popleft()
        name = key_to_name[(src, tgt, fn)]
        for gname, (gsrc, gtgt, gfn) in gens:
            if gsrc != tgt:
                continue
            composite = tuple(gfn[v] for v in fn)
            label = gname if name == f"id_{src}" else f"{gname}.{name}"
            register(src, gtgt, composite, label)

    keys = {name: key for key, name in key_to_name.items()}
    compose = {}
    for b_name, (bsrc, btgt, bfn) in keys.items():
        for a_name, (asrc, atgt, afn) in keys.items():
            if asrc != btgt:
                continue
            compose[(a_name, b_name)] = key_to_name[(bsrc, atgt, tuple(afn[v] for v in bfn))]
    identities = {obj: f"id_{obj}" for obj in objects}
    return FiniteCategory.build(objects, names_by_hom, identities, compose)


def category_generators(category: FiniteCategory) -> tuple[Morphism, ...]:
    """
    A generating set under composition: the morphisms that are not a composite
    of two non-identity morphisms, then greedily whatever they miss, in
    morphism order.
    """
    identities = set(category.identities.values())
    composites = {c for (a, b), c in category.table.items() if a not in identities and b not in identities}
    proper = [m for m in category.morphisms if m not in identities]
    ordered = [m for m in proper if m not in composites] + [m for m in proper if m in composites]
    generated = set(identities)
    chosen = []
    for m in ordered:
        if m in generated:
            continue
        chosen.append(m)
        frontier = [m]
        generated.add(m)
        # close under composition with everything generated so far
        while frontier:
            new = []
            for x in frontier:
                for y in list(generated):
                    for a, b in ((x, y), (y, x)):
                        if b.target == a.source:
                            c = category.compose(a, b)
                            if c not in generated:
                                generated.add(c)
                                new.append(c)
            frontier = new
    order = {m: i for i, m in enumerate(category.morphisms)}
    return tuple(sorted(chosen, key=order.__getitem__))


# --- Posets ---
@dataclass(frozen=True, eq=False)
class Poset:
    """A finite partial order; `leq` holds every related pair (x, y) with x <= y."""
    elements: tuple
    leq: frozenset

    @classmethod
    def build(cls, elements: Sequence, pairs: Iterable[tuple] = ()) -> "Poset":
        """Takes the reflexive transitive closure of `pairs` and checks antisymmetry."""
        elements = tuple(elements)
        if len(set(elements)) != len(elements):
            raise StructureError("duplicate poset elements", "elements")
        graph = nx.DiGraph()
        graph.add_nodes_from(elements)
        for i, (x, y) in enumerate(pairs):
            if x not in graph or y not in graph:
                raise StructureError(f"relation mentions unknown element in ({x!r}, {y!r})", f"leq[{i}]")
            graph.add_edge(x, y)
        closure = nx.transitive_closure(graph, reflexive=True)
        leq = frozenset(closure.edges)
        for x, y in leq:
            if x != y and (y, x) in leq:
                raise StructureError(f"{x!r} and {y!r} are below each other", "leq")
        return cls(elements=elements, leq=leq)

    def le(self, x, y) -> bool:
        return (x, y) in self.leq

    def lt(self, x, y) -> bool:
        return x != y and (x, y) in self.leq

    def down(self, x) -> tuple:
        return tuple(e for e in self.elements if (e, x) in self.leq)

    def up(self, x) -> tuple:
        return tuple(e for e in self.elements if (x, e) in self.leq)

    def minimal_elements(self) -> tuple:
        return tuple(x for x in self.elements if not any(self.lt(y, x) for y in self.elements))

    def maximal_elements(self) -> tuple:
        return tuple(x for x in self.elements if not any(self.lt(x, y) for y in self.elements))

    def top(self):
        """The greatest element, or None."""
        for x in self.elements:
            if all(self.le(y, x) for y in self.elements):
                return x
        return None

    def is_directed(self) -> bool:
        return bool(self.elements) and len(self.maximal_elements()) == 1

    def hasse_graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(self.elements)
        graph.add_edges_from((x, y) for x, y in self.leq if x != y)
        return nx.transitive_reduction(graph)

    def relabel(self, mapping: Mapping) -> "Poset":
        return Poset(elements=tuple(mapping[x] for x in self.elements),
                     leq=frozenset((mapping[x], mapping[y]) for x, y in self.leq))

    def remove(self, x) -> "Poset":
        return Poset(elements=tuple(e for e in self.elements if e != x),
                     leq=frozenset((a, b) for a, b in self.leq if x not in (a, b)))

    def __len__(self) -> int:
        return len(self.elements)


def lambda_name(source, target) -> str:
    return f"{source}->{target}"


def poset_to_category(poset: Poset) -> FiniteCategory:
    """One morphism E->F exactly when E <= F; composites are forced."""
    objects = poset.elements
    homs = {}
    by_name = {}
    for src, tgt in product(objects, repeat=2):
        if poset.le(src, tgt):
            m = Morphism(lambda_name(src, tgt), src, tgt)
            homs[(src, tgt)] = (m,)
            by_name[m.name] = m
        else:
            homs[(src, tgt)] = ()
    identities = {obj: homs[(obj, obj)][0] for obj in objects}
    table = {}
    for (x, y), (z, w) in product(poset.leq, repeat=2):
        if y == z:
            table[(homs[(z, w)][0], homs[(x, y)][0])] = homs[(x, w)][0]
    morphisms = tuple(m for src, tgt in product(objects, repeat=2) for m in homs[(src, tgt)])
    # composition in a poset is unique, so no associativity check is needed
    return FiniteCategory._assemble(objects, homs, identities, table, morphisms, by_name)


def preorder_quotient(category: FiniteCategory) -> tuple[Poset, dict]:
    """
    Collapses objects with morphisms both ways. Each class is labelled by its
    first object in category order; the returned map sends objects to labels.
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(category.objects)
    graph.add_edges_from((m.source, m.target) for m in category.morphisms)
    order = {obj: i for i, obj in enumerate(category.objects)}
    labels = {}
    for component in nx.strongly_connected_components(graph):
        label = min(component, key=order.__getitem__)
        for obj in component:
            labels[obj] = label
    classes = tuple(obj for obj in category.objects if labels[obj] == obj)
    pairs = {(labels[m.source], labels[m.target]) for m in category.morphisms}
    return Poset.build(classes, sorted(pairs, key=lambda p: (order[p[0]], order[p[1]]))), labels


# --- Monoids and groups ---
@dataclass(frozen=True, eq=False)
class FiniteMonoid:
    elements: tuple
    table: Mapping[tuple, Hashable]
    one: Hashable

    @classmethod
    def build(cls, elements: Sequence, table, one) -> "FiniteMonoid":
        """`table` is either a mapping (a, b) -> ab or a square list of rows in element order."""
        elements = tuple(elements)
        if len(set(elements)) != len(elements):
            raise StructureError("duplicate monoid elements", "elements")
        members = set(elements)
        if isinstance(table, Mapping):
            mult = dict(table)
        else:
            rows = list(table)
            if len(rows) != len(elements):
                raise StructureError(f"table has {len(rows)} rows, expected {len(elements)}", "table")
            mult = {}
            for i, row in enumerate(rows):
                row = list(row)
                if len(row) != len(elements):
                    raise StructureError(f"row has {len(row)} entries, expected {len(elements)}", f"table[{i}]")
                for j, value in enumerate(row):
                    mult[(elements[i], elements[j])] = value
        for a, b in product(elements, repeat=2):
            if (a, b) not in mult:
                raise StructureError(f"product {a!r}*{b!r} is missing", f"table.{a},{b}")
            if mult[(a, b)] not in members:
                raise StructureError(f"product {a!r}*{b!r} = {mult[(a, b)]!r} is not an element", f"table.{a},{b}")
        if one not in members:
            raise StructureError(f"identity {one!r} is not an element", "one")
        for a in elements:
            if mult[(one, a)] != a or mult[(a, one)] != a:
                raise StructureError(f"{one!r} is not neutral on {a!r}", "one")
        for a, b, c in product(elements, repeat=3):
            if mult[(mult[(a, b)], c)] != mult[(a, mult[(b, c)])]:
                raise StructureError(f"multiplication is not associative on ({a!r}, {b!r}, {c!r})", "table")
        return cls(elements=elements, table=mult, one=one)

    def mult(self, a, b):
        return self.table[(a, b)]

    def product(self, word: Iterable):
        result = self.one
        for a in word:
            result = self.table[(result, a)]
        return result

    def rows(self) -> list[list]:
        return [[self.table[(a, b)] for b in self.elements] for a in self.elements]

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True, eq=False)
class FiniteGroup(FiniteMonoid):
    inverse: Mapping[Hashable, Hashable] = field(default_factory=dict)

    @classmethod
    def build(cls, elements: Sequence, table, one) -> "FiniteGroup":
        monoid = FiniteMonoid.build(elements, table, one)
        inverse = {}
        for a in monoid.elements:
            for b in monoid.elements:
                if monoid.mult(a, b) == monoid.one and monoid.mult(b, a) == monoid.one:
                    inverse[a] = b
                    break
            else:
                raise StructureError(f"{a!r} has no inverse", f"elements.{a}")
        return cls(elements=monoid.elements, table=monoid.table, one=monoid.one, inverse=inverse)


def monoid_to_category(monoid: FiniteMonoid, obj: Hashable = "*") -> FiniteCategory:
    names = {a: str(a) for a in monoid.elements}
    if len(set(names.values())) != len(names):
        raise StructureError("monoid elements must have distinct string forms", "elements")
    homs = {(obj, obj): [names[a] for a in monoid.elements]}
    compose = {(names[a], names[b]): names[monoid.mult(a, b)] for a, b in product(monoid.elements, repeat=2)}
    return FiniteCategory.build((obj,), homs, {obj: names[monoid.one]}, compose)


def opposite_monoid(monoid: FiniteMonoid) -> FiniteMonoid:
    table = {(a, b): monoid.table[(b, a)] for a, b in monoid.table}
    return FiniteMonoid(elements=monoid.elements, table=table, one=monoid.one)


def transformation_monoid(degree: int, generators: Iterable[Sequence[int]]) -> FiniteMonoid:
    """
    Closure of maps on range(degree) under composition. Elements are tuples;
    the product ab is "b first, then a", matching left actions.
    """
    one = tuple(range(degree))
    gens = [tuple(int(v) for v in g) for g in generators]
    for i, g in enumerate(gens):
        if len(g) != degree or any(not 0 <= v < degree for v in g):
            raise StructureError(f"generator is not a map on range({degree})", f"generators[{i}]")
    seen = {one: None}
    queue = deque([one])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = tuple(g[v] for v in x)
            if y not in seen:
                seen[y] = None
                queue.append(y)
    elements = tuple(seen)
    table = {(a, b): tuple(a[v] for v in b) for a, b in product(elements, repeat=2)}
    return FiniteMonoid(elements=elements, table=table, one=one)
