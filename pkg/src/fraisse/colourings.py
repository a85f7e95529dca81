"""Colourings of embedding sets and the epsilon-approximate Ramsey checker.

Colour values are exact rationals throughout: the certificate inequalities
downstream are strict, and floating point would forge or destroy them.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .embeddings import (
    Embedding,
    compose_embeddings,
    enumerate_embeddings,
    format_embedding,
    parse_embedding,
)
from .errors import OutOfDomain, ParseError
from .parallel import pmap
from .structures import FinStructure


def parse_fraction(text, line=None, path=None) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {text!r}", line=line, path=path) from exc


@dataclass
class Colouring:
    """A finite-image rational colouring, total on Binom(ambient, pattern)."""

    pattern: FinStructure
    ambient: FinStructure
    table: dict
    palette: tuple = field(init=False)

    def __post_init__(self):
        domain = enumerate_embeddings(self.ambient, self.pattern)
        self.table = {h: Fraction(v) for h, v in self.table.items()}
        if set(self.table) != set(domain):
            raise ValueError("table must be total on the enumerated embedding list")
        self.palette = tuple(sorted(set(self.table.values())))

    def value(self, h: Embedding) -> Fraction:
        try:
            return self.table[h]
        except KeyError:
            raise OutOfDomain("embedding outside the colouring's domain") from None


def oscillation(colouring: Colouring, embeddings) -> Fraction:
    """max - min of the colouring over the given embeddings; 0 when there are
    fewer than two of them."""
    values = [colouring.value(h) for h in embeddings]
    if len(values) <= 1:
        return Fraction(0)
    return max(values) - min(values)


@dataclass
class RamseyQuery:
    pattern: FinStructure          # the A whose embeddings carry colour
    copy: FinStructure             # the B we want a monochromatic copy of
    colourings: list
    epsilon: Fraction

    def __post_init__(self):
        self.epsilon = Fraction(self.epsilon)
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if not self.colourings:
            raise ValueError("a query needs at least one colouring")
        if not all(
            c.pattern == self.pattern and c.ambient == self.colourings[0].ambient
            for c in self.colourings
        ):
            raise ValueError("all colourings must share pattern and ambient")

    @property
    def ambient(self) -> FinStructure:
        return self.colourings[0].ambient


@dataclass(frozen=True)
class MonochromaticWitness:
    h: Embedding


@dataclass(frozen=True)
class RamseyExhausted:
    """No monochromatic copy exists in the ambient fragment; carries the
    per-candidate worst oscillation table."""

    worst: tuple  # ((h, worst oscillation), ...)


def check_ramsey_upto(query: RamseyQuery, threads=1):
    """Lexicographically least h with every colouring epsilon-constant on
    h o Binom(copy, pattern), or RamseyExhausted after the full scan."""
    ambient = query.ambient
    inner = enumerate_embeddings(query.copy, query.pattern)
    candidates = enumerate_embeddings(ambient, query.copy)

    def worst_for(h):
        composed = [compose_embeddings(h, b) for b in inner]
        worsts = [oscillation(c, composed) for c in query.colourings]
        return max(worsts) if worsts else Fraction(0)

    worsts = pmap(worst_for, candidates, threads)
    for h, w in zip(candidates, worsts):
        if w <= query.epsilon:
            return MonochromaticWitness(h)
    return RamseyExhausted(tuple(zip(candidates, worsts)))


# ---------------------------------------------------------------------------
# colouring families
#
# A family is a rule, not a table: it induces a colouring on any ambient the
# pipeline constructs. Values depend only on the embedding's image positions
# relative to its free-join block (global positions when no block layout is
# given or an image straddles blocks), so every block sees the same table.


def _local_coords(h: Embedding, blocks):
    if blocks:
        for off, size in blocks:
            if all(off <= p < off + size for p in h.map):
                return tuple(p - off for p in h.map)
    return tuple(h.map)


class ColouringFamily:
    """Base class: subclasses define name, palette, and value()."""

    name = "family"
    palette: tuple = ()

    def value(self, h: Embedding, blocks=None) -> Fraction:
        raise NotImplementedError

    def colouring(self, pattern, ambient, blocks=None, threads=1) -> Colouring:
        table = {
            h: self.value(h, blocks)
            for h in enumerate_embeddings(ambient, pattern, threads=threads)
        }
        return Colouring(pattern, ambient, table)

    def describe(self) -> str:
        return self.name


class ConstantFamily(ColouringFamily):
    name = "constant"

    def __init__(self, value=Fraction(0)):
        self.constant = Fraction(value)
        self.palette = (self.constant,)

    def value(self, h, blocks=None):
        return self.constant


class OrientationFamily(ColouringFamily):
    """0 when the map's value sequence is strictly increasing, else 1."""

    name = "orientation"
    palette = (Fraction(0), Fraction(1))

    def value(self, h, blocks=None):
        seq = h.map
        ascending = all(seq[i] < seq[i + 1] for i in range(len(seq) - 1))
        return Fraction(0) if ascending else Fraction(1)


class ParityFamily(ColouringFamily):
    """Parity of the sum of block-relative image positions."""

    name = "parity"
    palette = (Fraction(0), Fraction(1))

    def value(self, h, blocks=None):
        return Fraction(sum(_local_coords(h, blocks)) % 2)


class SeededRandomFamily(ColouringFamily):
    """Deterministic pseudo-random palette choice per image position tuple."""

    def __init__(self, seed: int, palette_size: int = 4):
        if palette_size < 1:
            raise ValueError("palette size must be >= 1")
        self.seed = seed
        self.palette_size = palette_size
        self.palette = tuple(Fraction(i) for i in range(palette_size))
        self.name = f"seeded-random({seed},{palette_size})"

    def value(self, h, blocks=None):
        coords = _local_coords(h, blocks)
        digest = hashlib.sha256(f"{self.seed}|{coords}".encode()).digest()
        return Fraction(int.from_bytes(digest[:8], "big") % self.palette_size)


_SEEDED_RE = re.compile(r"seeded-random(?:\((\d+)(?:\s*,\s*(\d+))?\))?$")


def parse_family(text, default_seed=0) -> ColouringFamily:
    """Parse a family descriptor: constant, orientation, parity, or
    seeded-random[(seed[, palette])]; a bare seeded-random takes the run's
    --seed value."""
    text = text.strip()
    if text == "constant":
        return ConstantFamily()
    if text == "orientation":
        return OrientationFamily()
    if text == "parity":
        return ParityFamily()
    m = _SEEDED_RE.fullmatch(text)
    if m:
        seed = int(m.group(1)) if m.group(1) is not None else default_seed
        palette = int(m.group(2)) if m.group(2) is not None else 4
        return SeededRandomFamily(seed, palette)
    raise ValueError(f"unknown colouring family {text!r}")


# ---------------------------------------------------------------------------
# colouring files
#
#   colouring pattern=vertex.fst ambient=host.fst
#   embed A->F: 0->0 = 1/2


def format_colouring(col: Colouring, pattern_ref: str, ambient_ref: str) -> str:
    lines = [f"colouring pattern={pattern_ref} ambient={ambient_ref}"]
    for h in enumerate_embeddings(col.ambient, col.pattern):
        lines.append(f"{format_embedding(h)} = {col.table[h]}")
    return "\n".join(lines) + "\n"


def parse_colouring(text, base_dir=None, path=None) -> Colouring:
    from .structures import content_lines, parse_structure

    lines = content_lines(text)
    if not lines or not lines[0][1].startswith("colouring"):
        at = lines[0][0] if lines else 1
        raise ParseError("expected 'colouring' header", line=at, path=path)
    num, header = lines[0]
    m = re.fullmatch(r"colouring\s+pattern=(\S+)\s+ambient=(\S+)", header)
    if not m:
        raise ParseError("bad colouring header", line=num, path=path)
    base = Path(base_dir) if base_dir is not None else Path(".")

    def load(ref):
        p = base / ref
        try:
            return parse_structure(p.read_text(), path=p)
        except OSError as exc:
            raise ParseError(f"cannot read {ref!r}: {exc}", line=num, path=path)

    pattern = load(m.group(1))
    ambient = load(m.group(2))
    table = {}
    for lnum, line in lines[1:]:
        if " = " not in line:
            raise ParseError("expected '<embedding> = <rational>'", line=lnum, path=path)
        emb_text, _, value_text = line.rpartition(" = ")
        h = parse_embedding(emb_text, pattern, ambient, line=lnum, path=path)
        table[h] = parse_fraction(value_text, line=lnum, path=path)
    try:
        return Colouring(pattern, ambient, table)
    except ValueError as exc:
        raise ParseError(str(exc), path=path) from exc
