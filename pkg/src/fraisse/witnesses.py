"""Finite certificate systems for non-null and non-tame colourings.

A non-null witness is an inequality system over all index sets I inside
{0..n-1}; a non-tame witness truncates the infinite family to the nonempty
index sets inside {0..m-1} and only constrains i <= max I on the outside.
Verifiers re-evaluate the colouring, so a witness that "verifies" did so
against actual values, not against how it was built.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .colourings import Colouring, parse_fraction
from .embeddings import (
    Embedding,
    PartialAutomorphism,
    apply_partial,
    enumerate_embeddings,
    format_embedding,
    format_partial,
    parse_embedding,
    parse_partial,
)
from .errors import DomainNotCovered, WitnessInvalid

MAX_INDEX_BITS = 12  # index families are materialized: 2^n subsets


def subsets_by_mask(n, include_empty=True):
    start = 0 if include_empty else 1
    for mask in range(start, 1 << n):
        yield frozenset(i for i in range(n) if mask >> i & 1)


def _check_gap(r, s, k0, k1, epsilon):
    if not r < s:
        raise ValueError("witness needs r < s")
    if not (k0 < r and s < k1):
        raise ValueError("witness needs k0 < r and s < k1")
    if not k1 - k0 > 2 * epsilon:
        raise ValueError("witness needs k1 - k0 > 2*epsilon")
    if not (abs(k0 - r) > epsilon and abs(k1 - s) > epsilon):
        raise ValueError("witness needs |k0 - r| > epsilon and |k1 - s| > epsilon")


def _check_family(size, g, x, expected_keys):
    if size > MAX_INDEX_BITS:
        raise ValueError(f"index families above {MAX_INDEX_BITS} bits are not materialized")
    if len(g) != size:
        raise ValueError(f"expected {size} partial automorphisms, got {len(g)}")
    if set(x) != expected_keys:
        raise ValueError("index family does not match the expected subsets")
    embeddings = list(x.values())
    if embeddings:
        ambient = embeddings[0].target
        pattern = embeddings[0].source
        if any(e.target != ambient or e.source != pattern for e in embeddings):
            raise ValueError("all x_I must share pattern and ambient")
        if any(p.structure != ambient for p in g):
            raise ValueError("partial automorphisms must live on the ambient")
    for p in g:
        dom = p.domain
        for e in embeddings:
            if not e.image <= dom:
                raise DomainNotCovered(
                    "a partial automorphism's domain misses an x_I image"
                )


@dataclass
class NonNullWitness:
    """Certificate that a colouring admits a size-n independence pattern."""

    n: int
    r: Fraction
    s: Fraction
    g: list                      # n partial automorphisms
    x: dict                      # frozenset I -> Embedding, all I in {0..n-1}
    colour_pair: tuple
    epsilon: Fraction

    def __post_init__(self):
        self.r, self.s = Fraction(self.r), Fraction(self.s)
        self.epsilon = Fraction(self.epsilon)
        self.colour_pair = (Fraction(self.colour_pair[0]), Fraction(self.colour_pair[1]))
        if self.n < 0:
            raise ValueError("n must be non-negative")
        _check_gap(self.r, self.s, *self.colour_pair, self.epsilon)
        _check_family(self.n, self.g, self.x, set(subsets_by_mask(self.n)))

    @property
    def ambient(self):
        return next(iter(self.x.values())).target

    @property
    def pattern(self):
        return next(iter(self.x.values())).source


@dataclass
class NonTameWitness:
    """Truncated certificate over the nonempty index sets inside {0..m-1}."""

    m: int
    r: Fraction
    s: Fraction
    g: list
    x: dict                      # frozenset I (nonempty) -> Embedding
    colour_pair: tuple
    epsilon: Fraction

    def __post_init__(self):
        self.r, self.s = Fraction(self.r), Fraction(self.s)
        self.epsilon = Fraction(self.epsilon)
        self.colour_pair = (Fraction(self.colour_pair[0]), Fraction(self.colour_pair[1]))
        if self.m < 1:
            raise ValueError("truncation length m must be >= 1")
        _check_gap(self.r, self.s, *self.colour_pair, self.epsilon)
        _check_family(
            self.m, self.g, self.x, set(subsets_by_mask(self.m, include_empty=False))
        )

    @property
    def ambient(self):
        return next(iter(self.x.values())).target

    @property
    def pattern(self):
        return next(iter(self.x.values())).source


def _ordered_subsets(n, include_empty):
    return list(subsets_by_mask(n, include_empty=include_empty))


def verify_nonnull_witness(w: NonNullWitness, colouring: Colouring):
    """True iff chi(g_i . x_I) < r for i in I and > s for i not in I.

    Returns (ok, failing) with failing the least (i, I) in (index, bitmask)
    order on failure.
    """
    if w.n and (colouring.ambient != w.ambient or colouring.pattern != w.pattern):
        raise ValueError("colouring does not match the witness's ambient/pattern")
    subsets = _ordered_subsets(w.n, include_empty=True)
    for i in range(w.n):
        for I in subsets:
            value = colouring.value(apply_partial(w.g[i], w.x[I]))
            if i in I:
                if not value < w.r:
                    return False, (i, I)
            else:
                if not value > w.s:
                    return False, (i, I)
    return True, None


def verify_nontame_witness(w: NonTameWitness, colouring: Colouring):
    """As the non-null verifier, but i outside I is only constrained when
    i <= max I."""
    if colouring.ambient != w.ambient or colouring.pattern != w.pattern:
        raise ValueError("colouring does not match the witness's ambient/pattern")
    subsets = _ordered_subsets(w.m, include_empty=False)
    for i in range(w.m):
        for I in subsets:
            if i in I:
                value = colouring.value(apply_partial(w.g[i], w.x[I]))
                if not value < w.r:
                    return False, (i, I)
            elif i <= max(I):
                value = colouring.value(apply_partial(w.g[i], w.x[I]))
                if not value > w.s:
                    return False, (i, I)
    return True, None


# ---------------------------------------------------------------------------
# independence sets


@dataclass
class IndependenceResult:
    ok: bool
    counterexample: tuple | None = None   # (candidate index tuple J, sigma tuple)
    checked: int = 0


def is_independence_set(ambient, pattern, sets, candidates) -> IndependenceResult:
    """Exhaustive check that for every J inside the candidate list and every
    sigma: J -> k the intersection of preimages j^{-1} sets[sigma(j)] is
    nonempty. An embedding whose image escapes a candidate's domain counts
    as outside that candidate's preimages."""
    universe = enumerate_embeddings(ambient, pattern)
    k = len(sets)
    sets = [frozenset(a) for a in sets]
    pre = []
    for cand in candidates:
        dom = cand.domain
        row = []
        for target in sets:
            members = frozenset(
                h for h in universe
                if h.image <= dom and apply_partial(cand, h) in target
            )
            row.append(members)
        pre.append(row)
    all_h = frozenset(universe)
    checked = 0
    for js in _ordered_subsets(len(candidates), include_empty=True):
        j_list = sorted(js)
        for sigma in itertools.product(range(k), repeat=len(j_list)):
            checked += 1
            meet = all_h
            for j, colour in zip(j_list, sigma):
                meet = meet & pre[j][colour]
                if not meet:
                    break
            if not meet:
                return IndependenceResult(False, (tuple(j_list), sigma), checked)
    return IndependenceResult(True, None, checked)


@dataclass
class IndependenceConversion:
    low_set: frozenset           # {h : chi(h) <= r}
    high_set: frozenset          # {h : chi(h) >= s}
    candidates: list
    result: IndependenceResult


def witness_to_independence_set(w, colouring: Colouring) -> IndependenceConversion:
    """Convert a verified witness into the closed threshold sets and run the
    independence check over the witness's partial automorphisms.

    For a non-null witness the check must come back true; for a non-tame one
    its truth value is reported (the truncation can starve some sigma)."""
    if isinstance(w, NonNullWitness):
        ok, failing = verify_nonnull_witness(w, colouring)
    else:
        ok, failing = verify_nontame_witness(w, colouring)
    if not ok:
        raise WitnessInvalid(f"witness fails verification at {failing}")
    low = frozenset(h for h, v in colouring.table.items() if v <= w.r)
    high = frozenset(h for h, v in colouring.table.items() if v >= w.s)
    result = is_independence_set(colouring.ambient, colouring.pattern, [low, high], w.g)
    return IndependenceConversion(low, high, list(w.g), result)


# ---------------------------------------------------------------------------
# serialization (JSON-compatible dicts; structures embedded as text)


def _subset_key(I):
    return sorted(I)


def witness_to_dict(w) -> dict:
    from .structures import format_structure

    kind = "nonnull" if isinstance(w, NonNullWitness) else "nontame"
    size = w.n if kind == "nonnull" else w.m
    include_empty = kind == "nonnull"
    return {
        "kind": kind,
        "size": size,
        "r": str(w.r),
        "s": str(w.s),
        "epsilon": str(w.epsilon),
        "colour_pair": [str(w.colour_pair[0]), str(w.colour_pair[1])],
        "pattern": format_structure(w.pattern),
        "ambient": format_structure(w.ambient),
        "g": [format_partial(p, label="F") for p in w.g],
        "x": [
            {"I": _subset_key(I), "embedding": format_embedding(w.x[I])}
            for I in _ordered_subsets(size, include_empty=include_empty)
        ],
    }


def witness_from_dict(doc: dict):
    from .structures import parse_structure

    pattern = parse_structure(doc["pattern"])
    ambient = parse_structure(doc["ambient"])
    g = [parse_partial(text, ambient) for text in doc["g"]]
    x = {
        frozenset(entry["I"]): parse_embedding(entry["embedding"], pattern, ambient)
        for entry in doc["x"]
    }
    args = dict(
        r=parse_fraction(doc["r"]),
        s=parse_fraction(doc["s"]),
        g=g,
        x=x,
        colour_pair=(
            parse_fraction(doc["colour_pair"][0]),
            parse_fraction(doc["colour_pair"][1]),
        ),
        epsilon=parse_fraction(doc["epsilon"]),
    )
    if doc["kind"] == "nonnull":
        return NonNullWitness(n=doc["size"], **args)
    if doc["kind"] == "nontame":
        return NonTameWitness(m=doc["size"], **args)
    raise ValueError(f"unknown witness kind {doc['kind']!r}")
