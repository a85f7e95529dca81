"""Constructive pipelines turning a Ramsey failure into verified certificates.

Both constructions build a free-join universe of copies, detect oscillation
failures copy by copy, pigeonhole a colour pair into enough copies, and
assemble blockwise partial automorphisms. The non-null route moves points
inside each block directly; the non-tame route first rides an EPPA witness so
each block map extends to a full automorphism of its copy.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .colourings import Colouring, oscillation
from .embeddings import (
    Embedding,
    PartialAutomorphism,
    apply_partial,
    block_embedding,
    compose_embeddings,
    enumerate_embeddings,
    extend_partial_to_automorphism,
    union_partials,
)
from .errors import ClosureViolated, EppaContractViolated, InsufficientCopies
from .parallel import pmap
from .structures import free_join_many
from .witnesses import (
    MAX_INDEX_BITS,
    NonNullWitness,
    NonTameWitness,
    subsets_by_mask,
    verify_nonnull_witness,
    verify_nontame_witness,
)


@dataclass
class NoRamseyFailure:
    """Success path: this copy is epsilon-monochromatic for every colouring.

    Carries the colourings built on the constructed ambient so callers can
    re-check the oscillation claim independently.
    """

    h: Embedding
    copy_index: int
    colourings: list
    inner: list    # Binom(copy, pattern), the composition fan at h


@dataclass
class NonNullConstruction:
    witness: NonNullWitness
    colour_index: int
    colourings: list
    copies: int

    @property
    def colouring(self) -> Colouring:
        return self.colourings[self.colour_index]


@dataclass
class NonTameConstruction:
    witness: NonTameWitness
    colour_index: int
    colourings: list
    copies: int

    @property
    def colouring(self) -> Colouring:
        return self.colourings[self.colour_index]


def _copy_count(families, index_sets):
    """One pigeonhole layer per quantifier: t colourings times C(p, 2) colour
    pairs times the number of index sets, clamped to at least one copy."""
    t = len(families)
    p = max(len(f.palette) for f in families)
    return max(1, t * (p * (p - 1) // 2) * index_sets)


def _scan_copies(colourings, inclusions, inner, epsilon, threads):
    """Per copy: the composed embedding set, each colouring's value set there,
    and whether all oscillations stay within 2*epsilon."""
    def scan(inc):
        composed = [compose_embeddings(inc, b) for b in inner]
        value_sets = [frozenset(c.value(e) for e in composed) for c in colourings]
        ok = all(oscillation(c, composed) <= 2 * epsilon for c in colourings)
        return value_sets, ok

    return pmap(scan, inclusions, threads)


def _pick_colour_pair(colourings, value_sets_per_copy, epsilon, needed):
    """Least (colour index, k0, k1) with gap > 2*epsilon realized in at least
    `needed` copies, plus the realizing copies in ascending order."""
    counts = {}
    for values in value_sets_per_copy:
        for t_idx, vs in enumerate(values):
            ordered = sorted(vs)
            for i, k0 in enumerate(ordered):
                for k1 in ordered[i + 1:]:
                    if k1 - k0 > 2 * epsilon:
                        counts[(t_idx, k0, k1)] = counts.get((t_idx, k0, k1), 0) + 1
    qualifying = sorted(key for key, c in counts.items() if c >= needed)
    if not qualifying:
        raise InsufficientCopies(
            f"no colour pair realized in {needed} copies",
            counts={str(k): v for k, v in counts.items()},
            needed=needed,
        )
    t_idx, k0, k1 = qualifying[0]
    realizing = [
        i
        for i, values in enumerate(value_sets_per_copy)
        if k0 in values[t_idx] and k1 in values[t_idx]
    ]
    return t_idx, k0, k1, realizing


def _attaining(colouring, h_block, inner, value):
    """Least b in Binom(B, A) with chi(h_block o b) == value."""
    for b in inner:
        if colouring.value(compose_embeddings(h_block, b)) == value:
            return b
    raise AssertionError("value vanished from its own copy")  # pigeonhole says no


def _thresholds(k0, k1, epsilon):
    delta = (k1 - k0 - 2 * epsilon) / 4
    return k0 + epsilon + delta, k1 - epsilon - delta


def _check_exact_values(colouring, g, x, k0, k1):
    # The assembly promises chi(g_i . x_I) lands exactly on k0 or k1; the
    # inequality verifier only needs the thresholds, but a miss here means
    # the construction itself is wrong, so fail loudly.
    for I, emb in x.items():
        for i, gi in enumerate(g):
            value = colouring.value(apply_partial(gi, emb))
            expected = k0 if i in I else k1
            if value != expected:
                raise AssertionError(
                    f"assembled value {value} != {expected} at (i={i}, I={sorted(I)})"
                )


def construct_nonnull_witness(spec, pattern, copy, families, epsilon, n, threads=1):
    """Non-null certificate from a Ramsey failure in a free-join universe.

    Builds enough copies of `copy`, and either returns NoRamseyFailure for
    the least epsilon-monochromatic copy or assembles a NonNullWitness whose
    verification is re-run before returning.
    """
    epsilon = Fraction(epsilon)
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if not 0 <= n <= MAX_INDEX_BITS:
        raise ValueError(f"n must be between 0 and {MAX_INDEX_BITS}")
    if not families:
        raise ValueError("at least one colouring family is required")
    if not spec.is_member(pattern) or not spec.is_member(copy):
        raise ClosureViolated("pattern and copy must be members of the class")

    copies = _copy_count(families, 1 << n)
    ambient, offsets = free_join_many([copy] * copies)
    if not spec.is_member(ambient):
        raise ClosureViolated("free join of copies left the class (no free JEP)")
    blocks = tuple((off, copy.size) for off in offsets)
    colourings = [f.colouring(pattern, ambient, blocks=blocks, threads=threads) for f in families]
    inner = enumerate_embeddings(copy, pattern)
    inclusions = [block_embedding(copy, ambient, off) for off in offsets]

    scans = _scan_copies(colourings, inclusions, inner, epsilon, threads)
    for i, (_, ok) in enumerate(scans):
        if ok:
            return NoRamseyFailure(inclusions[i], i, colourings, inner)

    t_idx, k0, k1, realizing = _pick_colour_pair(
        colourings, [vs for vs, _ in scans], epsilon, 1 << n
    )
    chi = colourings[t_idx]

    x = {}
    g_parts = {i: [] for i in range(n)}
    for mask, I in enumerate(subsets_by_mask(n)):
        h_block = inclusions[realizing[mask]]
        b0 = _attaining(chi, h_block, inner, k0)
        b1 = _attaining(chi, h_block, inner, k1)
        low = compose_embeddings(h_block, b0)    # lands on k0
        high = compose_embeddings(h_block, b1)   # lands on k1
        x[I] = high
        moved = PartialAutomorphism(ambient, tuple(zip(high.map, low.map)))
        frozen = PartialAutomorphism.identity(ambient, high.image)
        for i in range(n):
            g_parts[i].append(moved if i in I else frozen)

    g = [union_partials(g_parts[i]) for i in range(n)]
    r, s = _thresholds(k0, k1, epsilon)
    _check_exact_values(chi, g, x, k0, k1)
    witness = NonNullWitness(
        n=n, r=r, s=s, g=g, x=x, colour_pair=(k0, k1), epsilon=epsilon
    )
    ok, failing = verify_nonnull_witness(witness, chi)
    if not ok:
        raise AssertionError(f"freshly built witness failed verification at {failing}")
    return NonNullConstruction(witness, t_idx, colourings, copies)


def construct_nontame_witness(
    spec, pattern, copy, families, epsilon, m, eppa_witness, threads=1
):
    """Non-tame certificate riding an EPPA witness f: copy -> host.

    The universe is a free join of hosts; each block's inequality map is
    extended to a full automorphism of its host, which the EPPA property
    guarantees. A failed extension therefore indicts the provided witness
    and raises EppaContractViolated.
    """
    epsilon = Fraction(epsilon)
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if not 1 <= m <= MAX_INDEX_BITS:
        raise ValueError(f"m must be between 1 and {MAX_INDEX_BITS}")
    if not families:
        raise ValueError("at least one colouring family is required")
    if eppa_witness.source != copy:
        raise ValueError("the EPPA witness must extend the copy structure")
    host = eppa_witness.target
    if not spec.is_member(pattern) or not spec.is_member(copy) or not spec.is_member(host):
        raise ClosureViolated("pattern, copy, and host must be members of the class")

    index_sets = (1 << m) - 1
    copies = _copy_count(families, index_sets)
    ambient, offsets = free_join_many([host] * copies)
    if not spec.is_member(ambient):
        raise ClosureViolated("free join of hosts left the class (no free JEP)")
    blocks = tuple((off, host.size) for off in offsets)
    colourings = [f.colouring(pattern, ambient, blocks=blocks, threads=threads) for f in families]
    inner = enumerate_embeddings(copy, pattern)
    host_inclusions = [block_embedding(host, ambient, off) for off in offsets]
    copy_inclusions = [
        compose_embeddings(inc, eppa_witness) for inc in host_inclusions
    ]

    scans = _scan_copies(colourings, copy_inclusions, inner, epsilon, threads)
    for i, (_, ok) in enumerate(scans):
        if ok:
            return NoRamseyFailure(copy_inclusions[i], i, colourings, inner)

    t_idx, k0, k1, realizing = _pick_colour_pair(
        colourings, [vs for vs, _ in scans], epsilon, index_sets
    )
    chi = colourings[t_idx]

    x = {}
    g_parts = {i: [] for i in range(m)}
    for mask, I in enumerate(subsets_by_mask(m, include_empty=False)):
        block = realizing[mask]
        h_block = copy_inclusions[block]
        offset = offsets[block]
        b0 = _attaining(chi, h_block, inner, k0)
        b1 = _attaining(chi, h_block, inner, k1)
        x[I] = compose_embeddings(h_block, b1)
        # Block-local inequality map on the host copy, then its EPPA extension.
        local_pairs = tuple(
            zip(compose_embeddings(eppa_witness, b1).map,
                compose_embeddings(eppa_witness, b0).map)
        )
        local = PartialAutomorphism(host, local_pairs)
        total = extend_partial_to_automorphism(local, host)
        if total is None:
            raise EppaContractViolated(
                "the provided witness failed to extend a partial automorphism"
            )
        moved = PartialAutomorphism(
            ambient, tuple((offset + a, offset + b) for a, b in total.pairs)
        )
        frozen = PartialAutomorphism.identity(
            ambient, range(offset, offset + host.size)
        )
        for i in range(m):
            g_parts[i].append(moved if i in I else frozen)

    g = [union_partials(g_parts[i]) for i in range(m)]
    r, s = _thresholds(k0, k1, epsilon)
    _check_exact_values(chi, g, x, k0, k1)
    witness = NonTameWitness(
        m=m, r=r, s=s, g=g, x=x, colour_pair=(k0, k1), epsilon=epsilon
    )
    ok, failing = verify_nontame_witness(witness, chi)
    if not ok:
        raise AssertionError(f"freshly built witness failed verification at {failing}")
    return NonTameConstruction(witness, t_idx, colourings, copies)
