"""Verification and brute-force search for EPPA witnesses.

An embedding h: A -> B is an EPPA witness when every partial automorphism of
the image copy h(A) extends to a total automorphism of B. Enumeration runs
over the image copy only, which matches the property being tested; scanning
all partial maps of B would test something strictly stronger.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .classes import ClassSpec, generate_members
from .embeddings import (
    Embedding,
    PartialAutomorphism,
    _relations_respected,
    enumerate_embeddings,
    extend_partial_to_automorphism,
)
from .parallel import pmap


@dataclass(frozen=True)
class EppaWitness:
    inclusion: Embedding

    @property
    def source(self):
        return self.inclusion.source

    @property
    def target(self):
        return self.inclusion.target


def enumerate_partial_automorphisms(structure, subset=None):
    """All partial automorphisms with domain and image inside the subset,
    by domain size, then domain, then image tuple (all ascending)."""
    elems = sorted(range(structure.size) if subset is None else set(subset))
    out = [PartialAutomorphism(structure, ())]
    for d in range(1, len(elems) + 1):
        for dom in itertools.combinations(elems, d):
            for img in itertools.permutations(elems, d):
                pairs = tuple(zip(dom, img))
                if len(set(img)) == d and _relations_respected(
                    structure, structure, pairs
                ):
                    out.append(PartialAutomorphism(structure, pairs))
    return out


@dataclass
class EppaVerification:
    ok: bool
    failing: PartialAutomorphism | None = None
    log: tuple = ()   # ((partial, extension), ...) when collected


def verify_eppa_witness(candidate: Embedding, collect_log=False) -> EppaVerification:
    """Extend every partial automorphism of the image copy to the target.

    The first inextensible map is reported; with collect_log each partial
    map is paired with the extension found for it.
    """
    target = candidate.target
    log = []
    for p in enumerate_partial_automorphisms(target, candidate.image):
        total = extend_partial_to_automorphism(p, target)
        if total is None:
            return EppaVerification(False, failing=p, log=tuple(log))
        if collect_log:
            log.append((p, total))
    return EppaVerification(True, log=tuple(log))


def search_eppa_witness(pattern, spec: ClassSpec, max_size: int, threads=1):
    """First EPPA witness for pattern among class members of carrier up to
    max_size, scanning members in generation order and embeddings in
    lexicographic order; None when the bounded search is exhausted."""
    if not spec.is_member(pattern):
        raise ValueError("pattern is not a member of the class")
    for member in generate_members(spec, max_size):
        candidates = enumerate_embeddings(member, pattern)
        if not candidates:
            continue
        verdicts = pmap(lambda h: verify_eppa_witness(h).ok, candidates, threads)
        for h, ok in zip(candidates, verdicts):
            if ok:
                return EppaWitness(h)
    return None
