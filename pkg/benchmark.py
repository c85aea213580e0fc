import time
from dataclasses import dataclass, field

import numpy as np
from opentelemetry import trace

from telemetry import setup_telemetry, shutdown_telemetry
from union_find import array_congruence_closure

# Synthetic single-object E-set: carrier range(ELEMENTS), MORPHISMS random maps.
ELEMENTS = 1_000_000
MORPHISMS = 10
PAIRS = 500_000
REPEATS = 3
SEED = 0

tracer = trace.get_tracer(__name__)


@dataclass(frozen=True)
class BenchReport:
    elements: int
    morphisms: int
    pairs: int
    initial_classes: int
    final_classes: int
    merges: int
    rounds: int
    timings_ms: list[float] = field(default_factory=list)

    @property
    def stats(self) -> dict:
        if not self.timings_ms:
            return {}
        timings = np.asarray(self.timings_ms)
        return {"mean_ms": float(timings.mean()), "p50_ms": float(np.percentile(timings, 50)),
                "p99_ms": float(np.percentile(timings, 99))}


# --- Input generation ---
def synthetic_closure_input(elements: int, morphisms: int, pairs: int, seed: int = SEED):
    """Random maps on range(elements) and random seed pairs, reproducible from `seed`."""
    rng = np.random.default_rng(seed)
    maps = [rng.integers(0, elements, size=elements, dtype=np.int64) for _ in range(morphisms)]
    seed_pairs = rng.integers(0, elements, size=(pairs, 2), dtype=np.int64)
    return maps, seed_pairs


# --- Benchmark ---
def run_closure_benchmark(elements: int = ELEMENTS, morphisms: int = MORPHISMS, pairs: int = PAIRS,
                          repeats: int = REPEATS, seed: int = SEED) -> BenchReport:
    maps, seed_pairs = synthetic_closure_input(elements, morphisms, pairs, seed)
    timings = []
    result = None
    with tracer.start_as_current_span("benchmark-congruence-closure") as span:
        span.set_attribute("bench.elements", elements)
        span.set_attribute("bench.morphisms", morphisms)
        span.set_attribute("bench.pairs", pairs)
        for _ in range(max(repeats, 1)):
            start_time = time.perf_counter()
            result = array_congruence_closure(maps, seed_pairs, size=elements)
            timings.append((time.perf_counter() - start_time) * 1000)
        span.set_attribute("closure.merges", result.merges)
        span.set_attribute("closure.rounds", result.rounds)
    return BenchReport(elements=elements, morphisms=morphisms, pairs=pairs,
                       initial_classes=result.initial_classes, final_classes=result.final_classes,
                       merges=result.merges, rounds=result.rounds, timings_ms=timings)


def format_report(report: BenchReport) -> list[str]:
    lines = ["=" * 60, "  Congruence Closure Benchmark", "=" * 60,
             f"Configuration: {report.elements:,} elements, {report.morphisms} maps, {report.pairs:,} seed pairs",
             f"Classes: {report.initial_classes:,} -> {report.final_classes:,} "
             f"({report.merges:,} merges, {report.rounds} rounds)"]
    stats = report.stats
    if stats:
        lines.append(f"Latency: mean {stats['mean_ms']:.1f} ms, p50 {stats['p50_ms']:.1f} ms, "
                     f"p99 {stats['p99_ms']:.1f} ms over {len(report.timings_ms)} runs")
    return lines


if __name__ == '__main__':
    setup_telemetry("limcolim-benchmark")
    for line in format_report(run_closure_benchmark()):
        print(line)
    shutdown_telemetry()
