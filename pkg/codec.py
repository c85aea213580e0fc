import json
from collections.abc import Hashable, Mapping
from dataclasses import fields, is_dataclass
from enum import Enum
from fractions import Fraction
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, StrictInt, StrictStr, ValidationError, model_validator

from congruence import CongruenceFamily, RelationFamily
from core_structures import FiniteCategory, FiniteMonoid, Morphism, Poset, category_from_functions
from dirsys import FiniteDirectedSystem, LazyStagedSystem
from errors import StructureError
from eset import ESet, ESetMorphism

Scalar = StrictStr | StrictInt


# --- Input models ---
class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class HomModel(_Model):
    source: Scalar
    target: Scalar
    morphisms: list[str]


class FunctionModel(_Model):
    source: Scalar
    target: Scalar
    images: list[StrictInt]


class CategoryModel(_Model):
    """
    Either explicit hom-sets, identities and composition triples [a, b, a∘b],
    or finite sets (`sets`, by size) with generating `functions`.
    """
    objects: list[Scalar]
    homs: list[HomModel] = Field(default_factory=list)
    identities: dict[str, str] = Field(default_factory=dict)
    compose: list[tuple[str, str, str]] = Field(default_factory=list)
    sets: dict[str, StrictInt] | None = None
    functions: dict[str, FunctionModel] | None = None

    @model_validator(mode="after")
    def _one_form(self):
        explicit = bool(self.homs or self.identities or self.compose)
        if self.sets is not None and explicit:
            raise ValueError("give either homs/identities/compose or sets/functions, not both")
        if self.functions is not None and self.sets is None:
            raise ValueError("functions need sets")
        return self


class PosetModel(_Model):
    elements: list[Scalar]
    leq: list[tuple[Scalar, Scalar]] = Field(default_factory=list)
    A: list[Scalar] | None = None


class MonoidModel(_Model):
    elements: list[Scalar]
    table: list[list[Scalar]]
    one: Scalar


class MemberModel(_Model):
    carriers: dict[str, list[Scalar]]
    actions: dict[str, list[Scalar]] = Field(default_factory=dict)


class ESetModel(MemberModel):
    category: CategoryModel


class RelationModel(_Model):
    eset: ESetModel
    pairs: dict[str, list[tuple[Scalar, Scalar]]] = Field(default_factory=dict)


class ConnectModel(_Model):
    source: Scalar
    target: Scalar
    components: dict[str, list[Scalar]]


class DirectedSystemModel(_Model):
    category: CategoryModel
    index: PosetModel
    members: dict[str, MemberModel]
    connect: list[ConnectModel] = Field(default_factory=list)


class StagedSystemModel(_Model):
    """Finitely many stages; the last one repeats forever along identity steps."""
    category: CategoryModel
    stages: list[MemberModel] = Field(min_length=1)
    steps: list[dict[str, list[Scalar]]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _step_count(self):
        if len(self.steps) != len(self.stages) - 1:
            raise ValueError(f"{len(self.stages)} stages need {len(self.stages) - 1} steps")
        return self


def _location(loc: tuple) -> str:
    out = ""
    for part in loc:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "document"


def _validate(model: type[BaseModel], doc: Any) -> BaseModel:
    try:
        return model.model_validate(doc)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise StructureError(first["msg"], _location(first["loc"])) from exc


def load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructureError(f"malformed JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from exc


def _keyed(mapping: Mapping[str, Any], keys, where: str, required: bool = True) -> dict:
    """Re-keys a JSON object (string keys) by the given identifiers."""
    lookup = {str(k): k for k in keys}
    unknown = [k for k in mapping if k not in lookup]
    if unknown:
        raise StructureError(f"unknown key {unknown[0]!r}", f"{where}.{unknown[0]}")
    if required:
        missing = [k for k in lookup if k not in mapping]
        if missing:
            raise StructureError(f"missing key {missing[0]!r}", f"{where}.{missing[0]}")
    return {lookup[k]: value for k, value in mapping.items()}


# --- Structure builders ---
def category_from_model(model: CategoryModel) -> FiniteCategory:
    if model.sets is not None:
        sizes = _keyed(model.sets, model.objects, "sets")
        lookup = {str(o): o for o in model.objects}
        generators = {}
        for name, fn in (model.functions or {}).items():
            generators[name] = (lookup.get(str(fn.source), fn.source), lookup.get(str(fn.target), fn.target),
                                fn.images)
        return category_from_functions({obj: sizes[obj] for obj in model.objects}, generators)
    homs = {}
    for i, hom in enumerate(model.homs):
        key = (hom.source, hom.target)
        if key in homs:
            raise StructureError(f"hom-set {hom.source!r} -> {hom.target!r} listed twice", f"homs[{i}]")
        homs[key] = hom.morphisms
    identities = _keyed(model.identities, model.objects, "identities", required=False)
    compose = {}
    for i, (a, b, c) in enumerate(model.compose):
        if compose.setdefault((a, b), c) != c:
            raise StructureError(f"two composites given for {a}∘{b}", f"compose[{i}]")
    return FiniteCategory.build(model.objects, homs, identities, compose)


def parse_category(doc: Any) -> FiniteCategory:
    return category_from_model(_validate(CategoryModel, doc))


def parse_poset(doc: Any) -> tuple[Poset, tuple | None]:
    """The poset and its chosen subset A, if the document names one."""
    model = _validate(PosetModel, doc)
    J = Poset.build(model.elements, model.leq)
    if model.A is not None:
        unknown = [a for a in model.A if a not in set(J.elements)]
        if unknown:
            raise StructureError(f"{unknown[0]!r} is not an element", "A")
    return J, None if model.A is None else tuple(model.A)


def parse_monoid(doc: Any) -> FiniteMonoid:
    model = _validate(MonoidModel, doc)
    return FiniteMonoid.build(model.elements, model.table, model.one)


def _member(category: FiniteCategory, model: MemberModel, where: str) -> ESet:
    carriers = _keyed(model.carriers, category.objects, f"{where}.carriers")
    actions = {}
    for name, images in model.actions.items():
        m = category.by_name.get(name)
        if m is None:
            raise StructureError(f"unknown morphism {name!r}", f"{where}.actions.{name}")
        source = carriers[m.source]
        if len(images) != len(source):
            raise StructureError(f"{len(images)} images for {len(source)} elements", f"{where}.actions.{name}")
        actions[m] = dict(zip(source, images))
    try:
        return ESet.build(category, carriers, actions)
    except StructureError as exc:
        location = f"{where}.{exc.location}" if exc.location else where
        raise StructureError(exc.args[0], location) from exc


def parse_eset(doc: Any) -> ESet:
    model = _validate(ESetModel, doc)
    return _member(category_from_model(model.category), model, "eset")


def parse_relation(doc: Any) -> tuple[ESet, RelationFamily]:
    model = _validate(RelationModel, doc)
    X = _member(category_from_model(model.eset.category), model.eset, "eset")
    pairs = _keyed(model.pairs, X.category.objects, "pairs", required=False)
    return X, RelationFamily.build(X, pairs)


def _components(source: ESet, target: ESet, images: Mapping[str, list], where: str) -> ESetMorphism:
    by_obj = _keyed(images, source.category.objects, where)
    components = {}
    for obj, values in by_obj.items():
        carrier = source.carriers[obj]
        if len(values) != len(carrier):
            raise StructureError(f"{len(values)} images for {len(carrier)} elements", f"{where}.{obj}")
        components[obj] = dict(zip(carrier, values))
    return ESetMorphism(source, target, components)


def parse_directed_system(doc: Any) -> FiniteDirectedSystem:
    model = _validate(DirectedSystemModel, doc)
    category = category_from_model(model.category)
    index = Poset.build(model.index.elements, model.index.leq)
    members_by_key = _keyed(model.members, index.elements, "members")
    members = {i: _member(category, members_by_key[i], f"members.{i}") for i in index.elements}
    connect = {}
    for n, edge in enumerate(model.connect):
        if edge.source not in members or edge.target not in members:
            raise StructureError("connecting map between unknown indices", f"connect[{n}]")
        connect[(edge.source, edge.target)] = _components(members[edge.source], members[edge.target],
                                                          edge.components, f"connect[{n}].components")
    return FiniteDirectedSystem.build(index, members, connect)


def parse_staged_system(doc: Any) -> LazyStagedSystem:
    model = _validate(StagedSystemModel, doc)
    category = category_from_model(model.category)
    stages = [_member(category, stage, f"stages[{n}]") for n, stage in enumerate(model.stages)]
    last = len(stages) - 1
    steps = [_components(stages[n], stages[n + 1], images, f"steps[{n}]") for n, images in enumerate(model.steps)]

    def step(n: int, source: ESet, target: ESet) -> ESetMorphism:
        return steps[n] if n < last else ESetMorphism.identity(source)

    return LazyStagedSystem(category, lambda n: stages[min(n, last)], step, first_stage=0, constant_from=last,
                            name="document")


def parse_system(doc: Any) -> FiniteDirectedSystem | LazyStagedSystem:
    if isinstance(doc, Mapping) and "stages" in doc:
        return parse_staged_system(doc)
    return parse_directed_system(doc)


# --- Emitters ---
def category_to_json(category: FiniteCategory) -> dict:
    identities = set(category.identities.values())
    return {
        "objects": list(category.objects),
        "homs": [{"source": src, "target": tgt, "morphisms": [m.name for m in ms]}
                 for (src, tgt), ms in category.homs.items() if ms],
        "identities": {str(obj): m.name for obj, m in category.identities.items()},
        "compose": sorted([a.name, b.name, c.name] for (a, b), c in category.table.items()
                          if a not in identities and b not in identities),
    }


def poset_to_json(J: Poset, A=None) -> dict:
    order = {x: i for i, x in enumerate(J.elements)}
    doc = {"elements": list(J.elements),
           "leq": [list(e) for e in sorted(J.hasse_graph().edges, key=lambda e: (order[e[0]], order[e[1]]))]}
    if A is not None:
        doc["A"] = list(A)
    return doc


def monoid_to_json(M: FiniteMonoid) -> dict:
    return {"elements": list(M.elements), "table": M.rows(), "one": M.one}


def _member_to_json(X: ESet) -> dict:
    return {
        "carriers": {str(obj): list(X.carriers[obj]) for obj in X.category.objects},
        "actions": {m.name: [X.actions[m][x] for x in X.carriers[m.source]]
                    for m in X.category.morphisms if not X.category.is_identity(m)},
    }


def eset_to_json(X: ESet) -> dict:
    return {"category": category_to_json(X.category), **_member_to_json(X)}


def congruence_to_json(family: CongruenceFamily) -> dict:
    return {"blocks": {str(obj): [list(b) for b in blocks] for obj, blocks in family.blocks.items()},
            "classes": family.class_count(), "merges": family.merges}


def directed_system_to_json(system: FiniteDirectedSystem) -> dict:
    hasse = system.index.hasse_graph()
    order = {x: i for i, x in enumerate(system.index.elements)}
    connect = []
    for i, j in sorted(hasse.edges, key=lambda e: (order[e[0]], order[e[1]])):
        alpha = system.connect[(i, j)]
        connect.append({"source": i, "target": j,
                        "components": {str(obj): [alpha.apply(obj, x) for x in system.members[i].carriers[obj]]
                                       for obj in system.category.objects}})
    return {"category": category_to_json(system.category),
            "index": poset_to_json(system.index),
            "members": {str(i): _member_to_json(system.members[i]) for i in system.index.elements},
            "connect": connect}


def plain(value: Any) -> Any:
    """JSON-ready form of report values."""
    if isinstance(value, Morphism):
        return value.name
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (ESet, FiniteCategory, Poset, FiniteMonoid)):
        return str(type(value).__name__)
    if is_dataclass(value):
        return {f.name: plain(getattr(value, f.name)) for f in fields(value) if not f.name.startswith("_")}
    if isinstance(value, Mapping):
        return {_key(k): plain(v) for k, v in value.items()}
    if isinstance(value, (set, frozenset)):
        return sorted((plain(v) for v in value), key=str)
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    return str(value)


def _key(key: Hashable) -> str:
    if isinstance(key, tuple):
        return ",".join(_key(k) for k in key)
    return str(plain(key))


def dumps(doc: Any) -> str:
    """Sorted keys, so equal reports are byte-identical."""
    return json.dumps(plain(doc), sort_keys=True, indent=2, ensure_ascii=False)
