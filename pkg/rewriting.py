from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

from errors import SizeGuardError, StructureError

MAX_WORD_LENGTH = 64

Word = tuple[str, ...]


@dataclass(frozen=True)
class RewriteSystem:
    """
    Monoid presented by generators and length-nonincreasing rules, rewritten
    left-most first. The rules are assumed confluent; normal forms then
    decide equality.
    """
    generators: tuple[str, ...]
    rules: tuple[tuple[Word, Word], ...]
    max_length: int = MAX_WORD_LENGTH
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        known = set(self.generators)
        for i, (lhs, rhs) in enumerate(self.rules):
            if not lhs:
                raise StructureError("rule with empty left side", f"rules[{i}]")
            if not set(lhs) <= known or not set(rhs) <= known:
                raise StructureError("rule mentions an unknown generator", f"rules[{i}]")
            if len(rhs) > len(lhs):
                raise StructureError("rule lengthens words", f"rules[{i}]")
            self._index.setdefault(lhs[0], []).append((lhs, rhs))

    def word(self, text: str) -> Word:
        """Parses a space separated word."""
        symbols = tuple(text.split())
        unknown = [s for s in symbols if s not in self.generators]
        if unknown:
            raise StructureError(f"unknown generator {unknown[0]!r}", text)
        return symbols

    def normal_form(self, word: Sequence[str]) -> Word:
        word = tuple(word)
        if len(word) > self.max_length:
            raise SizeGuardError(f"word of length {len(word)} exceeds the horizon {self.max_length}")
        return self._normalize(word)

    def _normalize(self, word: Word) -> Word:
        changed = True
        while changed:
            changed = False
            for i, symbol in enumerate(word):
                for lhs, rhs in self._index.get(symbol, ()):
                    if word[i:i + len(lhs)] == lhs:
                        word = word[:i] + rhs + word[i + len(lhs):]
                        changed = True
                        break
                if changed:
                    break
        return word

    def multiply(self, a: Sequence[str], b: Sequence[str]) -> Word:
        return self.normal_form(tuple(a) + tuple(b))

    def equal(self, a: Sequence[str], b: Sequence[str]) -> bool:
        return self.normal_form(a) == self.normal_form(b)


def parses_as_product(word: Word, pieces: Iterable[Word]) -> bool:
    """Whether `word` is a concatenation of the given pieces (the empty word always is)."""
    pieces = tuple(p for p in set(pieces) if p)

    @lru_cache(maxsize=None)
    def from_position(i: int) -> bool:
        if i == len(word):
            return True
        return any(word[i:i + len(p)] == p and from_position(i + len(p)) for p in pieces)

    return from_position(0)


def in_submonoid(system: RewriteSystem, word: Sequence[str], basis: Iterable[Word]) -> bool:
    """Membership in the submonoid generated by `basis`, for systems whose basis products stay normal."""
    return parses_as_product(system.normal_form(word), [system.normal_form(b) for b in basis])


def movers(system: RewriteSystem, candidates: Iterable[Word], basis: Sequence[Word], depth: int = 2) -> list[Word]:
    """
    Candidates a with aM0 ∩ M0 nonempty, where M0 is generated by `basis`,
    probing the products of at most `depth` basis words.
    """
    samples = {()}
    frontier = {()}
    for _ in range(depth):
        frontier = {system.multiply(u, b) for u in frontier for b in basis}
        samples |= frontier
    return [a for a in candidates
            if any(in_submonoid(system, system.multiply(a, m), basis) for m in samples)]


@dataclass(frozen=True)
class DivisionRound:
    number: int
    added: tuple[Word, ...]


def division_rounds(system: RewriteSystem, seeds: Iterable[Word], max_rounds: int = 5) -> list[DivisionRound]:
    """
    Right-division inference from `seeds`: when ab equals a word of N and b is
    in N, add a. Candidate factorizations are the literal splits of words of
    N and of rule left sides whose right side normalizes into N. Each round
    reads N as it stood after the previous round.
    """
    N = {system.normal_form(s) for s in seeds}
    rounds = []
    for number in range(1, max_rounds + 1):
        snapshot = frozenset(N)
        sources = set(snapshot)
        sources |= {lhs for lhs, rhs in system.rules if system.normal_form(rhs) in snapshot}
        added = []
        for v in sorted(sources, key=lambda w: (len(w), w)):
            for cut in range(1, len(v)):
                a, b = v[:cut], v[cut:]
                if system.normal_form(b) in snapshot:
                    a = system.normal_form(a)
                    if a not in N:
                        N.add(a)
                        added.append(a)
        if not added:
            break
        rounds.append(DivisionRound(number=number, added=tuple(added)))
    return rounds
