"""Finite relational structures and their algebra.

Carriers are initial segments of the non-negative integers; every map in the
package is given on indices. Structures are immutable after construction and
validate their signature axioms (irreflexivity, symmetric closure) up front,
so downstream code never has to re-check them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import (
    AmalgamationBaseMismatch,
    InvalidSubset,
    ParseError,
    SignatureMismatch,
)


@dataclass(frozen=True, order=True)
class RelationSymbol:
    """A named relation with its arity and enforced axioms."""

    name: str
    arity: int
    irreflexive: bool = False
    symmetric: bool = False

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError(f"relation {self.name!r} needs arity >= 1")
        if self.symmetric and self.arity != 2:
            raise ValueError(f"symmetric axiom on {self.name!r} requires arity 2")


@dataclass(frozen=True)
class Signature:
    relations: tuple[RelationSymbol, ...] = ()

    def __post_init__(self):
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise ValueError("relation names must be pairwise distinct")

    def index_of(self, name: str) -> int:
        for i, rel in enumerate(self.relations):
            if rel.name == name:
                return i
        raise KeyError(name)


@dataclass(frozen=True)
class FinStructure:
    """A finite structure over a relational signature.

    ``relations`` is parallel to ``signature.relations``: one frozenset of
    index tuples per relation symbol.
    """

    signature: Signature
    size: int
    relations: tuple[frozenset, ...]

    def __post_init__(self):
        if self.size < 0:
            raise ValueError("carrier size must be non-negative")
        if len(self.relations) != len(self.signature.relations):
            raise ValueError("one tuple set per relation symbol required")
        for sym, tuples in zip(self.signature.relations, self.relations):
            for t in tuples:
                if len(t) != sym.arity:
                    raise ValueError(f"tuple {t} has wrong arity for {sym.name}")
                if any(not (0 <= e < self.size) for e in t):
                    raise ValueError(f"tuple {t} leaves the carrier of size {self.size}")
                if sym.irreflexive and len(set(t)) != len(t):
                    raise ValueError(f"{sym.name} is irreflexive but holds {t}")
            if sym.symmetric:
                for a, b in tuples:
                    if (b, a) not in tuples:
                        raise ValueError(
                            f"{sym.name} is symmetric but {(b, a)} is missing"
                        )

    def rel(self, name: str) -> frozenset:
        return self.relations[self.signature.index_of(name)]

    def total_tuples(self) -> int:
        return sum(len(t) for t in self.relations)


@dataclass(frozen=True, order=True)
class CanonicalForm:
    """A total-order-comparable token identifying an isomorphism class."""

    data: bytes


# ---------------------------------------------------------------------------
# convenience builders

GRAPH_SIGNATURE = Signature((RelationSymbol("E", 2, irreflexive=True, symmetric=True),))
ORDER_SIGNATURE = Signature((RelationSymbol("lt", 2, irreflexive=True),))


def make_structure(signature, size, tuples_by_name) -> FinStructure:
    """Build a structure from per-relation tuple lists.

    Symmetric relations are closed under transposition automatically.
    """
    rels = []
    for sym in signature.relations:
        raw = {tuple(t) for t in tuples_by_name.get(sym.name, ())}
        if sym.symmetric:
            raw |= {(b, a) for a, b in raw}
        rels.append(frozenset(raw))
    return FinStructure(signature, size, tuple(rels))


def graph(n, edges=()) -> FinStructure:
    return make_structure(GRAPH_SIGNATURE, n, {"E": [tuple(e) for e in edges]})


def chain(n) -> FinStructure:
    """The linear order 0 < 1 < ... < n-1."""
    pairs = [(i, j) for i in range(n) for j in range(n) if i < j]
    return make_structure(ORDER_SIGNATURE, n, {"lt": pairs})


def empty_structure(signature) -> FinStructure:
    return FinStructure(signature, 0, tuple(frozenset() for _ in signature.relations))


def complete_graph(n) -> FinStructure:
    return graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path_graph(n) -> FinStructure:
    return graph(n, [(i, i + 1) for i in range(n - 1)])


# ---------------------------------------------------------------------------
# algebra


def induced_substructure(s: FinStructure, subset) -> FinStructure:
    """Restrict to a carrier subset, re-indexed to 0..|subset|-1 in order."""
    elems = sorted(set(subset))
    if any(not (0 <= e < s.size) for e in elems):
        raise InvalidSubset(f"subset {elems} leaves the carrier of size {s.size}")
    pos = {e: i for i, e in enumerate(elems)}
    keep = set(elems)
    rels = tuple(
        frozenset(tuple(pos[e] for e in t) for t in tuples if set(t) <= keep)
        for tuples in s.relations
    )
    return FinStructure(s.signature, len(elems), rels)


def free_join(a: FinStructure, b: FinStructure) -> FinStructure:
    """Disjoint union with no relations between the two blocks."""
    if a.signature != b.signature:
        raise SignatureMismatch("free join needs a shared signature")
    off = a.size
    rels = tuple(
        ta | frozenset(tuple(e + off for e in t) for t in tb)
        for ta, tb in zip(a.relations, b.relations)
    )
    return FinStructure(a.signature, a.size + b.size, rels)


def free_join_many(parts):
    """Free join of a list of structures; returns (joined, block offsets)."""
    parts = list(parts)
    if not parts:
        raise ValueError("free_join_many needs at least one part")
    sig = parts[0].signature
    offsets = []
    off = 0
    rels = [set() for _ in sig.relations]
    for p in parts:
        if p.signature != sig:
            raise SignatureMismatch("free join needs a shared signature")
        offsets.append(off)
        for i, tuples in enumerate(p.relations):
            rels[i] |= {tuple(e + off for e in t) for t in tuples}
        off += p.size
    joined = FinStructure(sig, off, tuple(frozenset(r) for r in rels))
    return joined, tuple(offsets)


def free_amalgam(f1, f2):
    """Glue the targets of f1: A -> B and f2: A -> C along A, adding nothing.

    Returns (D, g1, g2) with g1 the identity-layout embedding of B and g2 the
    embedding of C; g1 o f1 == g2 o f2 and |D| = |B| + |C| - |A|.
    """
    from .embeddings import Embedding  # deferred: embeddings imports structures

    if f1.source != f2.source:
        raise AmalgamationBaseMismatch("amalgamation embeddings need one source")
    b, c = f1.target, f2.target
    if b.signature != c.signature:
        raise SignatureMismatch("amalgamation targets need a shared signature")
    shared = {f2.map[a]: f1.map[a] for a in range(f1.source.size)}
    g2_map = []
    nxt = b.size
    for e in range(c.size):
        if e in shared:
            g2_map.append(shared[e])
        else:
            g2_map.append(nxt)
            nxt += 1
    rels = tuple(
        tb | frozenset(tuple(g2_map[e] for e in t) for t in tc)
        for tb, tc in zip(b.relations, c.relations)
    )
    d = FinStructure(b.signature, nxt, rels)
    g1 = Embedding(b, d, tuple(range(b.size)))
    g2 = Embedding(c, d, tuple(g2_map))
    return d, g1, g2


# ---------------------------------------------------------------------------
# canonical forms

# Exactness matters here: the pigeonhole bookkeeping downstream deduplicates
# by canonical form, so this must agree with isomorphism, not approximate it.
# The scheme is colour refinement seeded by relation degrees, plus
# individualization backtracking; the certificate is the relabelled structure
# itself, minimized over all discrete leaves of the search tree.


def _initial_colours(s: FinStructure):
    keys = []
    for x in range(s.size):
        counts = []
        for r_idx, tuples in enumerate(s.relations):
            arity = s.signature.relations[r_idx].arity
            for p in range(arity):
                counts.append(sum(1 for t in tuples if t[p] == x))
        keys.append(tuple(counts))
    return _compress(keys)


def _compress(keys):
    ranking = {k: i for i, k in enumerate(sorted(set(keys)))}
    return [ranking[k] for k in keys]


def _refine(s: FinStructure, colours):
    while True:
        keys = []
        for x in range(s.size):
            sig = []
            for r_idx, tuples in enumerate(s.relations):
                for t in tuples:
                    for p, e in enumerate(t):
                        if e == x:
                            sig.append((r_idx, p, tuple(colours[y] for y in t)))
            sig.sort()
            keys.append((colours[x], tuple(sig)))
        new = _compress(keys)
        if new == colours:
            return colours
        colours = new


def _certificate(s: FinStructure, perm):
    """Byte token of s relabelled by perm (original index -> new index)."""
    body = [repr(tuple((r.name, r.arity, r.irreflexive, r.symmetric)
                       for r in s.signature.relations)),
            str(s.size)]
    for tuples in s.relations:
        relabelled = sorted(tuple(perm[e] for e in t) for t in tuples)
        body.append(repr(relabelled))
    return "|".join(body).encode()


def _individualize(colours, v):
    keys = [(c, 0 if x == v else 1) for x, c in enumerate(colours)]
    return _compress(keys)


def canonical_form(s: FinStructure) -> CanonicalForm:
    """Canonical form: equal iff the structures are isomorphic."""
    if s.size == 0:
        return CanonicalForm(_certificate(s, []))
    best = [None]

    def search(colours):
        colours = _refine(s, colours)
        cells = {}
        for x, c in enumerate(colours):
            cells.setdefault(c, []).append(x)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = cells[c]
                break
        if target is None:
            cert = _certificate(s, colours)
            if best[0] is None or cert < best[0]:
                best[0] = cert
            return
        for v in target:
            search(_individualize(colours, v))

    search(_initial_colours(s))
    return CanonicalForm(best[0])


# ---------------------------------------------------------------------------
# text format
#
#   signature E/2:ir+sym
#   carrier 3
#   E: (0,1) (1,0) (1,2) (2,1)

_TUPLE_RE = re.compile(r"\(([^()]*)\)")


def format_structure(s: FinStructure) -> str:
    items = []
    for sym in s.signature.relations:
        flags = "+".join(
            f for f, on in (("ir", sym.irreflexive), ("sym", sym.symmetric)) if on
        )
        items.append(f"{sym.name}/{sym.arity}" + (f":{flags}" if flags else ""))
    lines = ["signature " + " ".join(items), f"carrier {s.size}"]
    for sym, tuples in zip(s.signature.relations, s.relations):
        body = " ".join("(" + ",".join(str(e) for e in t) + ")" for t in sorted(tuples))
        lines.append(f"{sym.name}:" + (" " + body if body else ""))
    return "\n".join(lines) + "\n"


def parse_signature_items(text, line=None, path=None) -> Signature:
    symbols = []
    for item in text.split():
        m = re.fullmatch(r"([A-Za-z_][\w-]*)/(\d+)(?::([a-z+]+))?", item)
        if not m:
            raise ParseError(f"bad signature item {item!r}", line=line, path=path)
        flags = (m.group(3) or "").split("+") if m.group(3) else []
        bad = [f for f in flags if f not in ("ir", "sym")]
        if bad:
            raise ParseError(f"unknown signature flag {bad[0]!r}", line=line, path=path)
        try:
            symbols.append(
                RelationSymbol(
                    m.group(1),
                    int(m.group(2)),
                    irreflexive="ir" in flags,
                    symmetric="sym" in flags,
                )
            )
        except ValueError as exc:
            raise ParseError(str(exc), line=line, path=path) from exc
    try:
        return Signature(tuple(symbols))
    except ValueError as exc:
        raise ParseError(str(exc), line=line, path=path) from exc


def _parse_tuples(body, arity, line, path):
    tuples = []
    stripped = body.strip()
    if stripped:
        consumed = re.sub(_TUPLE_RE, "", stripped).replace(" ", "")
        if consumed:
            raise ParseError(f"stray text {consumed!r} in tuple list", line=line, path=path)
    for m in _TUPLE_RE.finditer(body):
        inner = m.group(1).strip()
        entries = [e.strip() for e in inner.split(",")] if inner else []
        if not all(e.isdigit() for e in entries):
            raise ParseError(f"bad tuple ({inner})", line=line, path=path)
        t = tuple(int(e) for e in entries)
        if len(t) != arity:
            raise ParseError(f"tuple {t} has wrong arity {len(t)}", line=line, path=path)
        tuples.append(t)
    return tuples


def content_lines(text):
    """(lineno, stripped) pairs for non-blank, non-comment lines."""
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        ln = raw.strip()
        if ln and not ln.startswith("#"):
            out.append((i, ln))
    return out


def parse_structure_lines(lines, path=None, signature=None):
    """Parse the structure format from (lineno, text) pairs.

    Returns (structure, consumed_count). ``signature`` may be supplied when
    the surrounding file already fixed it (class spec forbid blocks).
    """
    idx = 0

    def need(prefix):
        if idx >= len(lines) or not lines[idx][1].startswith(prefix):
            at = lines[idx][0] if idx < len(lines) else (lines[-1][0] if lines else 1)
            raise ParseError(f"expected '{prefix}' line", line=at, path=path)
        return lines[idx]

    first_line = lines[idx][0] if lines else 1
    if signature is None:
        num, text = need("signature")
        signature = parse_signature_items(text[len("signature"):], line=num, path=path)
        idx += 1
    num, text = need("carrier")
    m = re.fullmatch(r"carrier\s+(\d+)", text)
    if not m:
        raise ParseError("bad carrier line", line=num, path=path)
    size = int(m.group(1))
    idx += 1
    by_name = {}
    while idx < len(lines):
        num, text = lines[idx]
        m = re.match(r"([A-Za-z_][\w-]*):(.*)$", text)
        if not m or m.group(1) not in {r.name for r in signature.relations}:
            break
        name = m.group(1)
        if name in by_name:
            raise ParseError(f"duplicate relation line {name!r}", line=num, path=path)
        arity = signature.relations[signature.index_of(name)].arity
        by_name[name] = _parse_tuples(m.group(2), arity, num, path)
        idx += 1
    rels = tuple(frozenset(by_name.get(r.name, ())) for r in signature.relations)
    try:
        return FinStructure(signature, size, rels), idx
    except ValueError as exc:
        raise ParseError(str(exc), line=first_line, path=path) from exc


def parse_structure(text, path=None) -> FinStructure:
    lines = content_lines(text)
    s, used = parse_structure_lines(lines, path=path)
    if used != len(lines):
        raise ParseError("trailing content after structure", line=lines[used][0], path=path)
    return s
