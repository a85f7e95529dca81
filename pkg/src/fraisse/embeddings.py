"""Embeddings, partial automorphisms, and the backtracking search behind them.

Enumeration order is load-bearing: embeddings come out in lexicographic order
of their value sequence, and every deterministic tie-break downstream (least
monochromatic copy, least failing pair, least witness) leans on it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    CompositionMismatch,
    DomainNotCovered,
    DomainOverlap,
    NotAnEmbedding,
    NotAPartialAutomorphism,
    ParseError,
    SignatureMismatch,
)
from .parallel import pmap
from .structures import FinStructure


@lru_cache(maxsize=1024)
def _incidence(structure: FinStructure):
    """Per relation: element -> tuple of incident tuples."""
    out = []
    for tuples in structure.relations:
        idx = {}
        for t in tuples:
            for e in set(t):
                idx.setdefault(e, []).append(t)
        out.append({e: tuple(ts) for e, ts in idx.items()})
    return tuple(out)


def _relations_respected(source, target, pairs):
    """Full preserve-and-reflect scan for a partial injective map.

    Walks only tuples incident to mapped elements; any tuple wholly inside
    the domain (or image) is incident to one of them, so nothing is missed.
    """
    fwd = dict(pairs)
    inv = {t: s for s, t in pairs}
    inc_s = _incidence(source)
    inc_t = _incidence(target)
    for r_idx, (rel_s, rel_t) in enumerate(zip(source.relations, target.relations)):
        seen = set()
        for e in fwd:
            for tup in inc_s[r_idx].get(e, ()):
                if tup in seen:
                    continue
                seen.add(tup)
                if all(x in fwd for x in tup):
                    if tuple(fwd[x] for x in tup) not in rel_t:
                        return False
        seen = set()
        for e in inv:
            for tup in inc_t[r_idx].get(e, ()):
                if tup in seen:
                    continue
                seen.add(tup)
                if all(x in inv for x in tup):
                    if tuple(inv[x] for x in tup) not in rel_s:
                        return False
    return True


@dataclass(frozen=True)
class Embedding:
    """An injective map that preserves and reflects every relation."""

    source: FinStructure
    target: FinStructure
    map: tuple[int, ...]

    def __post_init__(self):
        if self.source.signature != self.target.signature:
            raise NotAnEmbedding("source and target signatures differ")
        if len(self.map) != self.source.size:
            raise NotAnEmbedding("map must be total on the source carrier")
        if any(not (0 <= v < self.target.size) for v in self.map):
            raise NotAnEmbedding("map leaves the target carrier")
        if len(set(self.map)) != len(self.map):
            raise NotAnEmbedding("map is not injective")
        pairs = tuple(enumerate(self.map))
        if not _relations_respected(self.source, self.target, pairs):
            raise NotAnEmbedding("map does not preserve and reflect relations")

    @property
    def image(self) -> frozenset:
        return frozenset(self.map)

    def __call__(self, x: int) -> int:
        return self.map[x]


@dataclass(frozen=True)
class PartialAutomorphism:
    """A partial injective self-map respecting relations inside its domain/image."""

    structure: FinStructure
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(sorted(self.pairs)))
        srcs = [s for s, _ in self.pairs]
        dsts = [t for _, t in self.pairs]
        if len(set(srcs)) != len(srcs):
            raise NotAPartialAutomorphism("domain lists an element twice")
        if len(set(dsts)) != len(dsts):
            raise NotAPartialAutomorphism("map is not injective")
        if any(not (0 <= e < self.structure.size) for e in srcs + dsts):
            raise NotAPartialAutomorphism("map leaves the carrier")
        if not _relations_respected(self.structure, self.structure, self.pairs):
            raise NotAPartialAutomorphism(
                "map does not preserve and reflect relations on its domain/image"
            )

    @classmethod
    def identity(cls, structure, subset=None):
        elems = range(structure.size) if subset is None else sorted(subset)
        return cls(structure, tuple((e, e) for e in elems))

    @property
    def domain(self) -> frozenset:
        return frozenset(s for s, _ in self.pairs)

    @property
    def image(self) -> frozenset:
        return frozenset(t for _, t in self.pairs)

    @property
    def mapping(self) -> dict:
        return dict(self.pairs)

    def is_total(self) -> bool:
        return len(self.pairs) == self.structure.size

    def __call__(self, x: int) -> int:
        for s, t in self.pairs:
            if s == x:
                return t
        raise DomainNotCovered(f"{x} is outside the domain")


# ---------------------------------------------------------------------------
# search core


def _extend_ok(pattern, ambient, fwd, inv, a, t):
    """Can the partial map fwd be extended by a -> t?"""
    if t in inv:
        return False
    inc_p = _incidence(pattern)
    inc_a = _incidence(ambient)
    for r_idx in range(len(pattern.relations)):
        rel_p = pattern.relations[r_idx]
        rel_a = ambient.relations[r_idx]
        for tup in inc_p[r_idx].get(a, ()):
            if all(e == a or e in fwd for e in tup):
                img = tuple(t if e == a else fwd[e] for e in tup)
                if img not in rel_a:
                    return False
        for tup in inc_a[r_idx].get(t, ()):
            if all(e == t or e in inv for e in tup):
                pre = tuple(a if e == t else inv[e] for e in tup)
                if pre not in rel_p:
                    return False
    return True


def _search_maps(ambient, pattern, seed=None, first_only=False, first_value=None):
    """Backtracking search for embedding maps of pattern into ambient.

    Unassigned source elements are filled in ascending order with ascending
    target candidates, so the output is in lexicographic order of the value
    sequence. ``seed`` pins some assignments; ``first_value`` restricts the
    first unassigned element to a single candidate (used to partition work
    across threads).
    """
    if pattern.signature != ambient.signature:
        raise SignatureMismatch("embedding endpoints need a shared signature")
    fwd: dict = {}
    inv: dict = {}
    for a, t in sorted((seed or {}).items()):
        if a in fwd:
            if fwd[a] != t:
                return
            continue
        if not (0 <= a < pattern.size) or not _extend_ok(pattern, ambient, fwd, inv, a, t):
            return
        fwd[a] = t
        inv[t] = a
    order = [a for a in range(pattern.size) if a not in fwd]
    results_every = pattern.size == len(fwd)
    if results_every:
        yield tuple(fwd[a] for a in range(pattern.size))
        return

    def candidates(pos):
        if pos == 0 and first_value is not None:
            return (first_value,)
        return range(ambient.size)

    def rec(pos):
        if pos == len(order):
            yield tuple(fwd[a] for a in range(pattern.size))
            return
        a = order[pos]
        for t in candidates(pos):
            if _extend_ok(pattern, ambient, fwd, inv, a, t):
                fwd[a] = t
                inv[t] = a
                for m in rec(pos + 1):
                    yield m
                    if first_only:
                        del inv[t], fwd[a]
                        return
                del inv[t]
                del fwd[a]

    yield from rec(0)


@lru_cache(maxsize=256)
def _enumerate_cached(ambient, pattern):
    return tuple(
        Embedding(pattern, ambient, m) for m in _search_maps(ambient, pattern)
    )


def enumerate_embeddings(ambient, pattern, threads=1):
    """All embeddings of pattern into ambient, in lexicographic map order."""
    if threads <= 1 or pattern.size == 0 or ambient.size == 0:
        return list(_enumerate_cached(ambient, pattern))

    def chunk(t):
        return [
            Embedding(pattern, ambient, m)
            for m in _search_maps(ambient, pattern, first_value=t)
        ]

    merged = []
    for part in pmap(chunk, range(ambient.size), threads):
        merged.extend(part)
    return merged


def embedding_exists(ambient, pattern, seed=None) -> bool:
    for _ in _search_maps(ambient, pattern, seed=seed, first_only=True):
        return True
    return False


def first_embedding(ambient, pattern, seed=None):
    for m in _search_maps(ambient, pattern, seed=seed, first_only=True):
        return Embedding(pattern, ambient, m)
    return None


# ---------------------------------------------------------------------------
# operations


def compose_embeddings(outer: Embedding, inner: Embedding) -> Embedding:
    """outer o inner; inner's target must be outer's source."""
    if inner.target != outer.source:
        raise CompositionMismatch("inner target differs from outer source")
    return Embedding(inner.source, outer.target, tuple(outer.map[v] for v in inner.map))


def identity_embedding(structure) -> Embedding:
    return Embedding(structure, structure, tuple(range(structure.size)))


def block_embedding(part, joined, offset) -> Embedding:
    """Inclusion of one free-join block at the given carrier offset."""
    return Embedding(part, joined, tuple(offset + i for i in range(part.size)))


def apply_partial(g: PartialAutomorphism, h: Embedding) -> Embedding:
    """The left action g . h = g o h, defined when im(h) is inside dom(g)."""
    if g.structure != h.target:
        raise DomainNotCovered("partial automorphism lives on a different structure")
    m = g.mapping
    missing = [v for v in h.map if v not in m]
    if missing:
        raise DomainNotCovered(f"domain misses image points {sorted(missing)}")
    return Embedding(h.source, h.target, tuple(m[v] for v in h.map))


def union_partials(parts) -> PartialAutomorphism:
    """Union of partial automorphisms with pairwise disjoint domains and images.

    The result is re-checked against the partial-automorphism invariant, so a
    union that would relate two blocks incorrectly raises rather than passing
    silently; callers arrange blocks with no relations between them.
    """
    parts = list(parts)
    if not parts:
        raise ValueError("union of zero partial automorphisms")
    structure = parts[0].structure
    if any(p.structure != structure for p in parts):
        raise SignatureMismatch("all parts must live on one structure")
    seen_dom: set = set()
    seen_img: set = set()
    pairs = []
    for p in parts:
        if seen_dom & p.domain:
            raise DomainOverlap(f"domains overlap on {sorted(seen_dom & p.domain)}")
        if seen_img & p.image:
            raise NotAPartialAutomorphism(
                f"images overlap on {sorted(seen_img & p.image)}"
            )
        seen_dom |= p.domain
        seen_img |= p.image
        pairs.extend(p.pairs)
    return PartialAutomorphism(structure, tuple(pairs))


def extend_partial_to_automorphism(g: PartialAutomorphism, structure):
    """Extend g to a total automorphism of structure by backtracking.

    Returns the first extension in lexicographic order, or None when no
    automorphism of the structure agrees with g (the search is exhausted).
    """
    if g.structure != structure:
        raise ValueError("partial automorphism does not live on this structure")
    m = first_embedding(structure, structure, seed=g.mapping)
    if m is None:
        return None
    return PartialAutomorphism(structure, tuple(enumerate(m.map)))


# ---------------------------------------------------------------------------
# serialization: `embed A->F: 0->3 1->5`, `pauto F: 3->7 5->5`

_PAIR_RE = re.compile(r"^(\d+)->(\d+)$")


def format_embedding(h: Embedding, source_label="A", target_label="F") -> str:
    body = " ".join(f"{a}->{t}" for a, t in enumerate(h.map))
    return f"embed {source_label}->{target_label}:" + (" " + body if body else "")


def format_partial(g: PartialAutomorphism, label="F") -> str:
    body = " ".join(f"{s}->{t}" for s, t in g.pairs)
    return f"pauto {label}:" + (" " + body if body else "")


def _parse_pairs(body, line=None, path=None):
    pairs = []
    for token in body.split():
        m = _PAIR_RE.match(token)
        if not m:
            raise ParseError(f"bad map token {token!r}", line=line, path=path)
        pairs.append((int(m.group(1)), int(m.group(2))))
    return pairs


def parse_embedding(text, source, target, line=None, path=None) -> Embedding:
    m = re.match(r"embed\s+\S+\s*:\s*(.*)$", text.strip())
    if not m:
        raise ParseError(f"bad embedding line {text!r}", line=line, path=path)
    pairs = dict(_parse_pairs(m.group(1), line=line, path=path))
    if sorted(pairs) != list(range(source.size)):
        raise ParseError("embedding map is not total on the source", line=line, path=path)
    try:
        return Embedding(source, target, tuple(pairs[a] for a in range(source.size)))
    except NotAnEmbedding as exc:
        raise ParseError(str(exc), line=line, path=path) from exc


def parse_partial(text, structure, line=None, path=None) -> PartialAutomorphism:
    m = re.match(r"pauto\s+\S*\s*:\s*(.*)$", text.strip())
    if not m:
        raise ParseError(f"bad partial automorphism line {text!r}", line=line, path=path)
    pairs = _parse_pairs(m.group(1), line=line, path=path)
    try:
        return PartialAutomorphism(structure, tuple(pairs))
    except NotAPartialAutomorphism as exc:
        raise ParseError(str(exc), line=line, path=path) from exc
