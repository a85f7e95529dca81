"""Class specifications, member generation, property checkers, approximants.

A class is cut out by forbidden substructures plus an optional builtin
predicate. Every class expressible here is hereditary, which is what makes
one-point-extension generation complete: any member of carrier s+1 restricts
to a member of carrier s, so the extension frontier reaches everything.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from .embeddings import embedding_exists
from .errors import BudgetExceeded, ClosureViolated, ParseError, SignatureMismatch
from .structures import (
    FinStructure,
    Signature,
    canonical_form,
    content_lines,
    empty_structure,
    free_amalgam,
    free_join,
    graph,
    induced_substructure,
    parse_signature_items,
    parse_structure_lines,
)

BUILTIN_PREDICATES = ("linear_order",)


def _is_linear_order(s: FinStructure) -> bool:
    if len(s.signature.relations) != 1 or s.signature.relations[0].arity != 2:
        raise ValueError("linear_order needs a signature with one binary relation")
    rel = s.relations[0]
    for a in range(s.size):
        if (a, a) in rel:
            return False
        for b in range(s.size):
            if a == b:
                continue
            if ((a, b) in rel) == ((b, a) in rel):
                return False  # totality and antisymmetry in one stroke
    for a, b in rel:
        for c in range(s.size):
            if (b, c) in rel and (a, c) not in rel:
                return False
    return True


@dataclass(frozen=True)
class ClassSpec:
    """A decidable class of finite structures over one signature."""

    signature: Signature
    forbidden: tuple[FinStructure, ...] = ()
    builtin: str | None = None
    name: str = ""

    def __post_init__(self):
        for f in self.forbidden:
            if f.signature != self.signature:
                raise SignatureMismatch("forbidden structure has a foreign signature")
        if self.builtin is not None and self.builtin not in BUILTIN_PREDICATES:
            raise ValueError(f"unknown builtin predicate {self.builtin!r}")

    def is_member(self, s: FinStructure) -> bool:
        if s.signature != self.signature:
            return False
        for f in self.forbidden:
            if f.size <= s.size and embedding_exists(s, f):
                return False
        if self.builtin == "linear_order":
            return _is_linear_order(s)
        return True


def graphs_class() -> ClassSpec:
    from .structures import GRAPH_SIGNATURE

    return ClassSpec(GRAPH_SIGNATURE, name="graphs")


def kn_free_class(n: int) -> ClassSpec:
    from .structures import GRAPH_SIGNATURE, complete_graph

    return ClassSpec(GRAPH_SIGNATURE, (complete_graph(n),), name=f"k{n}-free")


def linear_orders_class() -> ClassSpec:
    from .structures import ORDER_SIGNATURE

    return ClassSpec(ORDER_SIGNATURE, builtin="linear_order", name="linear-orders")


# ---------------------------------------------------------------------------
# generation


def one_point_extensions(base: FinStructure):
    """All structures extending base by the single new point base.size.

    Symmetric relations contribute transposition orbits as indivisible
    choices, so every yielded structure satisfies the signature axioms.
    """
    new = base.size
    per_relation = []
    for sym, existing in zip(base.signature.relations, base.relations):
        universe = [
            t
            for t in itertools.product(range(new + 1), repeat=sym.arity)
            if new in t and not (sym.irreflexive and len(set(t)) != len(t))
        ]
        if sym.symmetric:
            orbits = sorted({tuple(sorted([t, t[::-1]])) for t in universe})
            choices = [tuple(set(o)) for o in orbits]
        else:
            choices = [(t,) for t in sorted(universe)]
        per_relation.append((existing, choices))
    counts = [len(c) for _, c in per_relation]
    for masks in itertools.product(*(range(1 << c) for c in counts)):
        rels = []
        for (existing, choices), mask in zip(per_relation, masks):
            extra = set()
            for i, orbit in enumerate(choices):
                if mask >> i & 1:
                    extra.update(orbit)
            rels.append(existing | frozenset(extra))
        yield FinStructure(base.signature, new + 1, tuple(rels))


def generate_members(spec: ClassSpec, n: int):
    """One representative per isomorphism class of members with carrier <= n,
    ordered by (carrier size, canonical form)."""
    out = []
    level = []
    base = empty_structure(spec.signature)
    if spec.is_member(base):
        level = [base]
    out.extend(level)
    for _ in range(n):
        seen = {}
        for m in level:
            for ext in one_point_extensions(m):
                if not spec.is_member(ext):
                    continue
                key = canonical_form(ext)
                if key not in seen:
                    seen[key] = ext
        level = [seen[k] for k in sorted(seen)]
        out.extend(level)
    return out


# ---------------------------------------------------------------------------
# property checks


@dataclass
class PropertyCheck:
    name: str
    holds: bool
    counterexample: dict | None = None


@dataclass
class ClassPropertyReport:
    spec: ClassSpec
    max_size: int
    checks: dict

    def all_hold(self) -> bool:
        return all(c.holds for c in self.checks.values())


def _subsets(n):
    for k in range(n + 1):
        yield from itertools.combinations(range(n), k)


def check_class_properties(spec: ClassSpec, n: int) -> ClassPropertyReport:
    """Exhaustively check HP/JEP/AP and their free variants over members of
    carrier <= n. Joint targets and amalgams are searched up to carrier 2n;
    the canonical free join / free amalgam is tried first as a fast path."""
    if n < 1:
        raise ValueError("property checking needs n >= 1")
    members = generate_members(spec, n)
    from .embeddings import enumerate_embeddings

    pool = None

    def search_pool():
        nonlocal pool
        if pool is None:
            pool = generate_members(spec, 2 * n)
        return pool

    checks = {}

    # HP: every induced substructure of a member is a member.
    hp = PropertyCheck("HP", True)
    for s in members:
        for subset in _subsets(s.size):
            sub = induced_substructure(s, subset)
            if not spec.is_member(sub):
                hp = PropertyCheck(
                    "HP", False, {"structure": s, "subset": list(subset)}
                )
                break
        if not hp.holds:
            break
    checks["HP"] = hp

    # free JEP: the free join of members with combined size <= n is a member.
    fjep = PropertyCheck("freeJEP", True)
    for a, b in itertools.product(members, repeat=2):
        if a.size + b.size > n:
            continue
        j = free_join(a, b)
        if not spec.is_member(j):
            fjep = PropertyCheck("freeJEP", False, {"a": a, "b": b, "free_join": j})
            break
    checks["freeJEP"] = fjep

    # JEP: some member of carrier <= 2n jointly embeds each pair.
    jep = PropertyCheck("JEP", True)
    for a, b in itertools.product(members, repeat=2):
        j = free_join(a, b)
        if spec.is_member(j):
            continue
        found = False
        for d in search_pool():
            if d.size < max(a.size, b.size):
                continue
            if embedding_exists(d, a) and embedding_exists(d, b):
                found = True
                break
        if not found:
            jep = PropertyCheck("JEP", False, {"a": a, "b": b})
            break
    checks["JEP"] = jep

    # free AP / AP over every base-embedding pair.
    fap = PropertyCheck("freeAP", True)
    ap = PropertyCheck("AP", True)
    for a in members:
        if not (fap.holds or ap.holds):
            break
        for b in members:
            f1s = enumerate_embeddings(b, a)
            if not f1s:
                continue
            for c in members:
                f2s = enumerate_embeddings(c, a)
                for f1 in f1s:
                    for f2 in f2s:
                        d, _, _ = free_amalgam(f1, f2)
                        if spec.is_member(d):
                            continue
                        if fap.holds:
                            fap = PropertyCheck(
                                "freeAP",
                                False,
                                {"a": a, "b": b, "c": c, "f1": f1, "f2": f2,
                                 "free_amalgam": d},
                            )
                        if ap.holds and not _ap_search(spec, search_pool(), f1, f2):
                            ap = PropertyCheck(
                                "AP", False, {"a": a, "b": b, "c": c, "f1": f1, "f2": f2}
                            )
                        if not (fap.holds or ap.holds):
                            break
                    if not (fap.holds or ap.holds):
                        break
                if not (fap.holds or ap.holds):
                    break
            if not (fap.holds or ap.holds):
                break
    checks["freeAP"] = fap
    checks["AP"] = ap
    return ClassPropertyReport(spec, n, checks)


def _ap_search(spec, pool, f1, f2) -> bool:
    """Find D <= 2n with g1: B -> D, g2: C -> D and g1 o f1 = g2 o f2."""
    from .embeddings import enumerate_embeddings

    b, c = f1.target, f2.target
    for d in pool:
        if d.size < max(b.size, c.size):
            continue
        for g1 in enumerate_embeddings(d, b):
            seed = {f2.map[x]: g1.map[f1.map[x]] for x in range(f1.source.size)}
            if embedding_exists(d, c, seed=seed):
                return True
    return False


# ---------------------------------------------------------------------------
# approximants


@dataclass(frozen=True)
class Approximant:
    """A member realizing every one-point extension over substructures of
    size < extension_rank. Validated exhaustively on construction."""

    structure: FinStructure
    class_spec: ClassSpec
    extension_rank: int

    def __post_init__(self):
        if self.extension_rank < 1:
            raise ValueError("extension rank must be >= 1")
        if not self.class_spec.is_member(self.structure):
            raise ClosureViolated("approximant is not a member of its class")
        defect = extension_defect(self.structure, self.class_spec, self.extension_rank)
        if defect is not None:
            subset, ext = defect
            raise ValueError(
                f"rank-{self.extension_rank} extension property fails at "
                f"subset {subset} (one-point extension of size {ext.size})"
            )


def extension_defect(structure, spec, rank):
    """First unrealized (subset, one-point extension) at the given rank,
    or None when the rank-`rank` extension property holds."""
    for size in range(min(rank, structure.size + 1)):
        for subset in itertools.combinations(range(structure.size), size):
            base = induced_substructure(structure, subset)
            for ext in one_point_extensions(base):
                if not spec.is_member(ext):
                    continue
                seed = {i: subset[i] for i in range(size)}
                if not embedding_exists(structure, ext, seed=seed):
                    return subset, ext
    return None


def build_approximant(spec, rank, budget, builtin=None) -> Approximant:
    """Close under one-point extensions of substructures of size < rank.

    Either runs the free-amalgamation closure loop or, with
    ``builtin='bit-graph:m'``, validates the explicit construction instead.
    Raises BudgetExceeded with the partial structure when the carrier budget
    runs out before closure.
    """
    if builtin is not None:
        m = re.fullmatch(r"bit-graph:(\d+)", builtin)
        if not m:
            raise ValueError(f"unknown builtin construction {builtin!r}")
        return Approximant(builtin_bit_graph(int(m.group(1))), spec, rank)
    if rank < 1:
        raise ValueError("extension rank must be >= 1")
    current = empty_structure(spec.signature)
    if not spec.is_member(current):
        raise ClosureViolated("the empty structure is not a member")
    steps = 0
    while True:
        pending = _all_defects(current, spec, rank)
        if not pending:
            break
        for subset, ext in pending:
            seed = {i: subset[i] for i in range(len(subset))}
            if embedding_exists(current, ext, seed=seed):
                continue  # an earlier adjunction already realized it
            if current.size + 1 > budget:
                raise BudgetExceeded(
                    f"budget {budget} exhausted at carrier {current.size}",
                    partial=current,
                    diagnostics={"unrealized": len(pending), "rank": rank,
                                 "steps": steps},
                )
            current = _adjoin(current, spec, subset, ext)
            steps += 1
    return Approximant(current, spec, rank)


def _all_defects(structure, spec, rank):
    """Every unrealized (subset, extension) pair, in breadth-first order
    sorted by the extension's canonical form."""
    pending = []
    for size in range(min(rank, structure.size + 1)):
        for subset in itertools.combinations(range(structure.size), size):
            base = induced_substructure(structure, subset)
            for ext in one_point_extensions(base):
                if not spec.is_member(ext):
                    continue
                seed = {i: subset[i] for i in range(size)}
                if not embedding_exists(structure, ext, seed=seed):
                    pending.append((subset, ext))
    pending.sort(
        key=lambda p: (
            canonical_form(p[1]).data,
            p[0],
            tuple(tuple(sorted(ts)) for ts in p[1].relations),
        )
    )
    return pending


def _adjoin(current, spec, subset, ext):
    from .embeddings import Embedding

    base = induced_substructure(current, subset)
    f1 = Embedding(base, current, tuple(subset))
    f2 = Embedding(base, ext, tuple(range(base.size)))
    d, _, _ = free_amalgam(f1, f2)
    if not spec.is_member(d):
        raise ClosureViolated(
            "free amalgamation left the class; the spec lacks free amalgamation"
        )
    return d


def builtin_bit_graph(m: int) -> FinStructure:
    """Graph on 2^m vertices: for i < j there is an edge iff bit i of j is 1.

    Bits at positions >= m vanish on a carrier below 2^m, which is the
    natural truncation of the rule; at m = 4 the result satisfies the rank-2
    extension property.
    """
    if m < 1:
        raise ValueError("bit graph needs m >= 1")
    size = 1 << m
    edges = [(i, j) for i in range(size) for j in range(i + 1, size) if j >> i & 1]
    return graph(size, edges)


# ---------------------------------------------------------------------------
# class spec files
#
#   class k3-free
#   signature E/2:ir+sym
#   forbid
#   carrier 3
#   E: (0,1) (0,2) (1,0) (1,2) (2,0) (2,1)
#   end
#   builtin linear_order


def parse_class_spec(text, path=None) -> ClassSpec:
    lines = content_lines(text)
    idx = 0
    name = ""
    if idx < len(lines) and lines[idx][1].startswith("class"):
        name = lines[idx][1][len("class"):].strip()
        idx += 1
    if idx >= len(lines) or not lines[idx][1].startswith("signature"):
        at = lines[idx][0] if idx < len(lines) else 1
        raise ParseError("expected 'signature' line", line=at, path=path)
    num, sig_line = lines[idx]
    signature = parse_signature_items(sig_line[len("signature"):], line=num, path=path)
    idx += 1
    forbidden = []
    builtin = None
    while idx < len(lines):
        num, line = lines[idx]
        if line == "forbid":
            idx += 1
            block = []
            while idx < len(lines) and lines[idx][1] != "end":
                block.append(lines[idx])
                idx += 1
            if idx >= len(lines):
                raise ParseError("unterminated forbid block", line=num, path=path)
            idx += 1  # consume 'end'
            s, used = parse_structure_lines(block, path=path, signature=signature)
            if used != len(block):
                raise ParseError("trailing content in forbid block",
                                 line=block[used][0], path=path)
            forbidden.append(s)
        elif line.startswith("builtin"):
            builtin = line[len("builtin"):].strip()
            if builtin not in BUILTIN_PREDICATES:
                raise ParseError(f"unknown builtin {builtin!r}", line=num, path=path)
            idx += 1
        else:
            raise ParseError(f"unexpected line {line!r}", line=num, path=path)
    return ClassSpec(signature, tuple(forbidden), builtin, name=name)


def format_class_spec(spec: ClassSpec) -> str:
    from .structures import format_structure

    out = []
    if spec.name:
        out.append(f"class {spec.name}")
    sig_line = format_structure(empty_structure(spec.signature)).splitlines()[0]
    out.append(sig_line)
    for f in spec.forbidden:
        out.append("forbid")
        out.extend(format_structure(f).splitlines()[1:])  # skip signature line
        out.append("end")
    if spec.builtin:
        out.append(f"builtin {spec.builtin}")
    return "\n".join(out) + "\n"
