import asyncio
import functools
import json
import time
from pathlib import Path

import click

import congruence
import dirsys
import division_closure as dc
import gallery
import poset_analysis as pa
from benchmark import ELEMENTS, MORPHISMS, PAIRS, REPEATS, format_report, run_closure_benchmark
from codec import (category_to_json, congruence_to_json, dumps, eset_to_json, load_json, parse_category,
                   parse_eset, parse_monoid, parse_poset, parse_relation, parse_system, plain)
from core_structures import Poset, category_generators, monoid_to_category, poset_to_category
from errors import SizeGuardError, StructureError
from eset import LIMIT_WORKERS, limit, limit_concurrent, limit_record, quotient, union_hom
from telemetry import setup_telemetry, shutdown_telemetry

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_INPUT_ERROR = 2

SERVICE_NAME = "limcolim-cli"


# --- Input selection ---
def parse_params(items: tuple[str, ...]) -> dict:
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise StructureError(f"expected key=value, got {item!r}", "param")
        try:
            params[key] = int(value)
        except ValueError:
            raise StructureError(f"{key} must be an integer", f"param.{key}") from None
    return params


def _from_gallery(name: str, params: dict, kind: str):
    item, built, merged = gallery.build_item(name, params)
    if kind == item.kind:
        return built
    if kind == "category" and item.kind == "poset":
        return poset_to_category(built)
    if kind == "category" and item.kind == "monoid":
        return monoid_to_category(built)
    if kind == "eset" and item.kind == "poset":
        return union_hom(poset_to_category(built), built.minimal_elements())
    if kind == "eset" and item.kind == "monoid":
        return dc.regular_left_eset(built)
    raise StructureError(f"gallery item {name!r} is a {item.kind}, not a {kind}", "gallery")


PARSERS = {"category": parse_category, "poset": parse_poset, "monoid": parse_monoid, "eset": parse_eset,
           "relation": parse_relation, "staged": parse_system}


def load_input(options: dict, kind: str):
    """Reads the structure named by --file or --gallery/--param."""
    file_path, name = options.get("file_path"), options.get("gallery_name")
    if bool(file_path) == bool(name):
        raise StructureError("give exactly one of --file and --gallery", "input")
    if file_path:
        return PARSERS[kind](load_json(Path(file_path).read_text()))
    built = _from_gallery(name, parse_params(options.get("params", ())), kind)
    if kind == "poset":
        return built, None
    return built


# --- Output ---
def render(value, indent: int = 0) -> list[str]:
    """Human-readable rendering of a JSON-ready report, key for key."""
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for key in sorted(value):
            item = value[key]
            if isinstance(item, (dict, list)) and item:
                lines.append(f"{pad}{key}:")
                lines.extend(render(item, indent + 1))
            else:
                lines.append(f"{pad}{key}: {json.dumps(item, ensure_ascii=False)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)) and item:
                lines.append(f"{pad}-")
                lines.extend(render(item, indent + 1))
            else:
                lines.append(f"{pad}- {json.dumps(item, ensure_ascii=False)}")
    else:
        lines.append(f"{pad}{json.dumps(value, ensure_ascii=False)}")
    return lines


def emit(report: dict, options: dict, refuted: bool = False):
    report = plain(report)
    if options.get("timing"):
        report["timing_ms"] = round((time.perf_counter() - options["started"]) * 1000, 3)
    if options.get("as_json"):
        click.echo(dumps(report))
    else:
        for line in render(report):
            click.echo(line)
    click.get_current_context().exit(EXIT_REFUTED if refuted else EXIT_OK)


def command(fn):
    """Collects the shared flags into one dict and turns input errors into exit code 2."""
    @click.option("--file", "file_path", type=click.Path(exists=True, dir_okay=False), help="JSON input.")
    @click.option("--gallery", "gallery_name", help="Gallery item to use as input.")
    @click.option("--param", "params", multiple=True, help="Gallery parameter, key=value.")
    @click.option("--json", "as_json", is_flag=True, help="Emit JSON with sorted keys.")
    @click.option("--timing", is_flag=True, help="Include wall-clock timing.")
    @functools.wraps(fn)
    def wrapper(file_path, gallery_name, params, as_json, timing, **kwargs):
        options = {"file_path": file_path, "gallery_name": gallery_name, "params": params,
                   "as_json": as_json, "timing": timing, "started": time.perf_counter()}
        try:
            return fn(options, **kwargs)
        except (StructureError, SizeGuardError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            click.get_current_context().exit(EXIT_INPUT_ERROR)
    return wrapper


@click.group()
@click.option("--trace", is_flag=True, help="Print spans to stderr.")
@click.pass_context
def main(ctx, trace):
    """
    Limits, directed colimits and their comparison map for set-valued functors.

    Everything is deterministic except `congruence close` and `bench closure`,
    the only commands that take --seed.
    """
    if setup_telemetry(SERVICE_NAME, console=trace):
        ctx.call_on_close(shutdown_telemetry)


# --- category ---
@main.group("category")
def category_group():
    """Finite categories."""


@category_group.command("validate")
@command
def category_validate(options):
    E = load_input(options, "category")
    emit({"objects": len(E.objects), "morphisms": len(E.morphisms),
          "generators": [m.name for m in category_generators(E)],
          "initial_object": dc.initial_object(E), "category": category_to_json(E)}, options)


@category_group.command("emultdiv")
@click.option("--budget", type=int, default=dc.MINIMAL_SEARCH_BUDGET, show_default=True)
@command
def category_emultdiv(options, budget):
    E = load_input(options, "category")
    result = dc.emultdiv_check(E, budget)
    report = {"emultdiv": result}
    init = dc.initial_object(E)
    if init is not None:
        S0 = [E.hom(init, obj)[0] for obj in E.objects if obj != init]
        report["initial_object"] = init
        report["s1"] = dc.s0s1_check(E, [init], S0, budget)
    emit(report, options)


# --- poset ---
@main.group("poset")
def poset_group():
    """Gathering analysis on finite posets."""


def _poset_and_subset(options) -> tuple[Poset, tuple]:
    J, A = load_input(options, "poset")
    return J, A if A is not None else J.minimal_elements()


@poset_group.command("analyze")
@click.option("--budget", type=int, default=None)
@click.option("--dot", is_flag=True, help="Emit the annotated Hasse diagram instead.")
@command
def poset_analyze(options, budget, dot):
    J, A = _poset_and_subset(options)
    critical = pa.critical_elements(J, A)
    gathering = pa.minimal_gathering_set(J, A, budget)
    if dot:
        click.echo(pa.to_dot(J, A, critical, gathering.witness), nl=False)
        return
    tgath = pa.tgath_check(poset_to_category(J))
    report = {"A": A, "minimal": J.minimal_elements(), "critical": critical, "gathering": gathering,
              "abovefin": pa.abovefin_check(J).holds, "tgath": tgath.holds}
    if len(J.elements) <= pa.CAPNE_SIZE_GUARD:
        report["capne"] = pa.capne_oracle(J)
    emit(report, options)


@poset_group.command("gather")
@click.option("--element", "element", required=True, help="The element E.")
@click.option("--b", "b_members", multiple=True, help="A member of B (repeatable).")
@command
def poset_gather(options, element, b_members):
    J, A = _poset_and_subset(options)
    lookup = {str(x): x for x in J.elements}
    unknown = [x for x in (element, *b_members) if x not in lookup]
    if unknown:
        raise StructureError(f"{unknown[0]!r} is not an element", "element")
    result = pa.gathers(pa.GatherQuery(J, A, tuple(lookup[b] for b in b_members), lookup[element]))
    emit({"gathers": result.gathers, "classes": result.classes}, options, refuted=not result.gathers)


@poset_group.command("critical")
@command
def poset_critical(options):
    J, A = _poset_and_subset(options)
    emit({"critical": pa.critical_elements(J, A)}, options)


@poset_group.command("dot")
@command
def poset_dot(options):
    J, A = _poset_and_subset(options)
    critical = pa.critical_elements(J, A)
    click.echo(pa.to_dot(J, J.minimal_elements(), critical, pa.minimal_gathering_set(J, A).witness), nl=False)


# --- monoid ---
@main.group("monoid")
def monoid_group():
    """Division closure and left congruences of finite monoids."""


@monoid_group.command("battery")
@click.option("--budget", type=int, default=dc.MINIMAL_SEARCH_BUDGET, show_default=True)
@command
def monoid_battery(options, budget):
    M = load_input(options, "monoid")
    emit({"battery": dc.condition_battery(M, budget)}, options)


@monoid_group.command("multdiv")
@click.option("--budget", type=int, default=dc.MINIMAL_SEARCH_BUDGET, show_default=True)
@command
def monoid_multdiv(options, budget):
    M = load_input(options, "monoid")
    emit({"multdiv": dc.multdiv_holds(M, budget)}, options)


@monoid_group.command("congruences")
@command
def monoid_congruences(options):
    M = load_input(options, "monoid")
    found = dc.left_congruences_enumerate(M)
    emit({"count": len(found), "left_congruences": [C.blocks for C in found]}, options)


# --- eset ---
@main.group("eset")
def eset_group():
    """Limits and quotients of E-sets."""


@eset_group.command("limit")
@click.option("--workers", type=int, default=1, show_default=True,
              help=f"Shard the search across worker threads (e.g. {LIMIT_WORKERS}).")
@command
def eset_limit(options, workers):
    X = load_input(options, "eset")
    elements = asyncio.run(limit_concurrent(X, workers)) if workers > 1 else limit(X)
    emit({"size": len(elements), "limit": [limit_record(X, t) for t in elements]}, options)


@eset_group.command("quotient")
@command
def eset_quotient(options):
    X, relation = load_input(options, "relation")
    closure = congruence.congruence_closure(X, relation)
    Q, _ = quotient(X, closure)
    emit({"congruence": congruence_to_json(closure), "quotient": eset_to_json(Q)}, options)


# --- congruence ---
@main.group("congruence")
def congruence_group():
    """Congruences on E-sets."""


@congruence_group.command("close")
@click.option("--seed", type=int, default=None, help="Shuffle the pair order (the result must not change).")
@command
def congruence_close(options, seed):
    X, relation = load_input(options, "relation")
    closure = congruence.congruence_closure(X, relation, shuffle_seed=seed)
    emit({"congruence": congruence_to_json(closure), "improper": congruence.is_improper(closure)}, options)


@congruence_group.command("minimal-gens")
@click.option("--budget", type=int, default=congruence.MINIMAL_GENERATORS_BUDGET, show_default=True)
@click.option("--objects", "by_objects", is_flag=True, help="Count objects instead of pairs.")
@command
def congruence_minimal_gens(options, budget, by_objects):
    X = load_input(options, "eset")
    if by_objects:
        result = congruence.minimal_improper_generator_objects(X, budget)
    else:
        result = congruence.minimal_improper_generators(X, budget)
    emit({"generators": result}, options)


# --- dirsys ---
@main.group("dirsys")
def dirsys_group():
    """Directed systems and the comparison map."""


@dirsys_group.command("iota")
@click.option("--horizon", type=int, default=None,
              help=f"Stage horizon (default: the system's own, else {dirsys.DEFAULT_HORIZON}).")
@command
def dirsys_iota(options, horizon):
    system = load_input(options, "staged")
    report = dirsys.iota(system, horizon)
    emit({"iota": report, "bijective": report.bijective}, options,
         refuted=report.injective.is_refuted or report.surjective.is_refuted)


def _resolve(token: str, candidates, what: str):
    for candidate in candidates:
        if str(candidate) == token:
            return candidate
    raise StructureError(f"no {what} named {token!r}", what)


@dirsys_group.command("stabilize")
@click.option("--horizon", type=int, default=dirsys.DEFAULT_HORIZON, show_default=True)
@click.option("--stage", type=int, default=None, help="Stage of the representative (default: first stage).")
@click.option("--object", "obj", default=None, help="Object of the representative (default: first object).")
@click.option("--element", default=None, help="The representative (default: first element).")
@click.option("--gen", "gens", multiple=True, help="Generator to check (default: all visible arrows).")
@command
def dirsys_stabilize(options, horizon, stage, obj, element, gens):
    system = load_input(options, "staged")
    if isinstance(system, dirsys.FiniteDirectedSystem):
        raise StructureError("stabilization needs a staged system (a document with stages)", "stages")
    stage = system.first_stage if stage is None else stage
    objects = system.objects(horizon)
    obj = objects[0] if obj is None else _resolve(obj, objects, "object")
    elements = list(system.elements(stage, obj, horizon))
    if not elements:
        raise StructureError(f"stage {stage} is empty at {obj!r}", "element")
    x = elements[0] if element is None else _resolve(element, elements, "element")
    arrows = [arrow for arrow, source, target in system.arrows(horizon) if source == obj == target]
    chosen = arrows if not gens else [_resolve(g, arrows, "generator") for g in gens]
    rep = dirsys.ColimitElement(stage, obj, x)
    verdict = dirsys.stabilization_stage(system, chosen, rep, horizon)
    certificates = dirsys.eventual_fixedness_certificate(system, rep, chosen, horizon)
    emit({"representative": rep, "verdict": verdict, "certificates": certificates}, options)


# --- gallery ---
@main.group("gallery")
def gallery_group():
    """Named examples with their expected properties."""


@gallery_group.command("list")
@click.option("--json", "as_json", is_flag=True)
def gallery_list(as_json):
    items = [{"name": item.name, "kind": item.kind, "defaults": dict(item.defaults), "verified": item.verified,
              "evidenced": item.evidenced} for item in gallery.list_items()]
    if as_json:
        click.echo(dumps({"items": items}))
    else:
        for item in items:
            params = ", ".join(f"{k}={v}" for k, v in item["defaults"].items())
            click.echo(f"{item['name']:<28} {item['kind']:<9} {params}")


@gallery_group.command("run")
@click.argument("name", required=False)
@click.option("--all", "run_all", is_flag=True, help="Run every item concurrently.")
@command
def gallery_run(options, name, run_all):
    if run_all:
        runs = asyncio.run(gallery.run_all())
    elif name:
        runs = [gallery.run_item(name, parse_params(options["params"]))]
    else:
        raise StructureError("name an item or pass --all", "name")
    report = {"runs": [{"item": run.name, "params": run.params, "passed": run.passed,
                        "expectations": run.expectations} for run in runs]}
    emit(report, options, refuted=not all(run.passed for run in runs))


# --- bench ---
@main.group("bench")
def bench_group():
    """Benchmarks."""


@bench_group.command("closure")
@click.option("--elements", type=int, default=ELEMENTS, show_default=True)
@click.option("--morphisms", type=int, default=MORPHISMS, show_default=True)
@click.option("--pairs", type=int, default=PAIRS, show_default=True)
@click.option("--repeats", type=int, default=REPEATS, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for the synthetic maps and pairs.")
@click.option("--json", "as_json", is_flag=True)
def bench_closure(elements, morphisms, pairs, repeats, seed, as_json):
    report = run_closure_benchmark(elements, morphisms, pairs, repeats, seed)
    if as_json:
        click.echo(dumps({**plain(report), **report.stats}))
    else:
        for line in format_report(report):
            click.echo(line)


def run(argv: list[str]) -> int:
    """Runs one CLI invocation in-process and returns its exit code."""
    try:
        result = main.main(args=list(argv), prog_name="limcolim", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return EXIT_INPUT_ERROR
    return result if isinstance(result, int) else EXIT_OK


if __name__ == '__main__':
    main()
