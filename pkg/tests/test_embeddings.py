import itertools
import random

import pytest

from fraisse.classes import generate_members, graphs_class
from fraisse.embeddings import (
    Embedding,
    PartialAutomorphism,
    apply_partial,
    compose_embeddings,
    enumerate_embeddings,
    extend_partial_to_automorphism,
    identity_embedding,
    union_partials,
)
from fraisse.errors import (
    CompositionMismatch,
    DomainNotCovered,
    DomainOverlap,
    NotAnEmbedding,
    NotAPartialAutomorphism,
)
from fraisse.structures import (
    GRAPH_SIGNATURE,
    complete_graph,
    empty_structure,
    free_join,
    free_join_many,
    graph,
    induced_substructure,
    path_graph,
)

from .oracles import all_labeled_structures, brute_automorphisms, brute_embedding_maps

K2 = complete_graph(2)
K3 = complete_graph(3)
P3 = path_graph(3)


def test_binom_k3_k2_has_six_elements():
    embs = enumerate_embeddings(K3, K2)
    assert len(embs) == 6
    assert [e.map for e in embs] == sorted(brute_embedding_maps(K3, K2))


def test_binom_with_empty_pattern_is_singleton():
    embs = enumerate_embeddings(K3, empty_structure(GRAPH_SIGNATURE))
    assert len(embs) == 1
    assert embs[0].map == ()


def test_binom_of_larger_pattern_is_empty():
    assert enumerate_embeddings(K2, K3) == []


def test_enumeration_is_lexicographic():
    maps = [e.map for e in enumerate_embeddings(K3, K2)]
    assert maps == sorted(maps)


def test_enumeration_matches_brute_force_over_small_graphs():
    # oracle equivalence for every pattern of carrier <= 3 against every
    # graph of carrier <= 6, one isomorphism-class representative each
    patterns = generate_members(graphs_class(), 3)
    ambients = generate_members(graphs_class(), 6)
    for a in patterns:
        for f in ambients:
            got = [e.map for e in enumerate_embeddings(f, a)]
            assert got == sorted(brute_embedding_maps(f, a)), (a, f)


def test_enumeration_threaded_equals_serial():
    for threads in (2, 4):
        assert enumerate_embeddings(K3, K2, threads=threads) == enumerate_embeddings(
            K3, K2
        )


def test_embedding_validation():
    with pytest.raises(NotAnEmbedding):
        Embedding(K2, K3, (0, 0))  # not injective
    with pytest.raises(NotAnEmbedding):
        Embedding(graph(2), K3, (0, 1))  # image has an edge the source lacks
    with pytest.raises(NotAnEmbedding):
        Embedding(K2, graph(2), (0, 1))  # source edge not preserved


def test_compose_examples():
    h = Embedding(K2, K3, (0, 1))
    assert compose_embeddings(identity_embedding(K3), h) == h
    swap = Embedding(K2, K2, (1, 0))
    assert compose_embeddings(h, swap).map == (1, 0)
    composed = {compose_embeddings(h, b).map for b in enumerate_embeddings(K2, K2)}
    assert len(composed) == len(enumerate_embeddings(K2, K2))


def test_compose_mismatch():
    h = Embedding(K2, K3, (0, 1))
    with pytest.raises(CompositionMismatch):
        compose_embeddings(h, Embedding(graph(1), K3, (0,)))


def test_apply_partial_identity_and_gap():
    h = Embedding(K2, K3, (0, 1))
    assert apply_partial(PartialAutomorphism.identity(K3), h) == h
    partial = PartialAutomorphism(K3, ((0, 0),))
    with pytest.raises(DomainNotCovered):
        apply_partial(partial, h)


def test_apply_partial_block_swap_formula():
    # two freely joined copies of K2; the block map sending the descending
    # pair onto the ascending one pulls x back to the ascending composite
    joined, offsets = free_join_many([K2, K2])
    h_block = Embedding(K2, joined, (0, 1))
    asc = compose_embeddings(h_block, Embedding(K2, K2, (0, 1)))
    desc = compose_embeddings(h_block, Embedding(K2, K2, (1, 0)))
    g = PartialAutomorphism(joined, tuple(zip(desc.map, asc.map)))
    assert apply_partial(g, desc) == asc


def test_apply_partial_lands_in_enumeration():
    joined, _ = free_join_many([K2, K2])
    g = PartialAutomorphism.identity(joined)
    universe = enumerate_embeddings(joined, K2)
    for h in universe:
        assert apply_partial(g, h) in universe


def test_restriction_then_induced_is_embedding():
    rng = random.Random(3)
    ambients = generate_members(graphs_class(), 5)
    for _ in range(40):
        f = rng.choice(ambients)
        patterns = [a for a in generate_members(graphs_class(), 3) if a.size <= f.size]
        a = rng.choice(patterns)
        embs = enumerate_embeddings(f, a)
        if not embs:
            continue
        h = rng.choice(embs)
        subset = sorted(rng.sample(range(a.size), rng.randint(0, a.size)))
        sub = induced_substructure(a, subset)
        Embedding(sub, f, tuple(h.map[e] for e in subset))  # must not raise


def test_union_partials_examples():
    joined, offsets = free_join_many([K2, K2])
    one = PartialAutomorphism(joined, ((0, 1), (1, 0)))
    assert union_partials([one]) == one
    id0 = PartialAutomorphism.identity(joined, {0, 1})
    id1 = PartialAutomorphism.identity(joined, {2, 3})
    both = union_partials([id0, id1])
    assert both.pairs == ((0, 0), (1, 1), (2, 2), (3, 3))


def test_union_partials_blockwise_exhaustive_two_blocks():
    # every blockwise union of partial automorphisms of a two-block free
    # join of graphs with carrier <= 3 is a partial automorphism
    from .oracles import brute_partial_automorphism_maps

    blocks = [s for n in range(1, 4) for s in all_labeled_structures(GRAPH_SIGNATURE, n)]
    for a, b in itertools.product(blocks, repeat=2):
        joined, offsets = free_join_many([a, b])
        for mpa in brute_partial_automorphism_maps(a):
            for mpb in brute_partial_automorphism_maps(b):
                parts = [
                    PartialAutomorphism(
                        joined, tuple((s + offsets[0], t + offsets[0]) for s, t in mpa)
                    ),
                    PartialAutomorphism(
                        joined, tuple((s + offsets[1], t + offsets[1]) for s, t in mpb)
                    ),
                ]
                union_partials(parts)  # must not raise


def test_union_partials_blockwise_exhaustive_three_blocks():
    from .oracles import brute_partial_automorphism_maps

    blocks = [graph(1), K2, P3, graph(3, [(0, 1)])]
    for triple in itertools.product(blocks, repeat=3):
        joined, offsets = free_join_many(list(triple))
        per_block = [brute_partial_automorphism_maps(s) for s in triple]
        for maps in itertools.product(*per_block):
            parts = [
                PartialAutomorphism(
                    joined, tuple((s + off, t + off) for s, t in m)
                )
                for m, off in zip(maps, offsets)
            ]
            union_partials(parts)  # must not raise


def test_union_partials_triple_blocks():
    joined, offsets = free_join_many([K2, P3, K2])
    parts = [
        PartialAutomorphism(joined, ((0, 1), (1, 0))),
        PartialAutomorphism.identity(joined, range(2, 5)),
        PartialAutomorphism(joined, ((5, 6), (6, 5))),
    ]
    u = union_partials(parts)
    assert u.domain == frozenset(range(7))


def test_union_partials_overlap_errors():
    joined, _ = free_join_many([K2, K2])
    a = PartialAutomorphism.identity(joined, {0})
    b = PartialAutomorphism.identity(joined, {0, 1})
    with pytest.raises(DomainOverlap):
        union_partials([a, b])
    c = PartialAutomorphism(joined, ((0, 1),))
    d = PartialAutomorphism(joined, ((2, 1),))
    with pytest.raises(NotAPartialAutomorphism):
        union_partials([c, d])


def test_union_partials_rejects_cross_block_relation_breakage():
    # moving one endpoint of an edge while freezing the other breaks the
    # preserve/reflect invariant and must be caught
    host = graph(3, [(0, 1)])
    with pytest.raises(NotAPartialAutomorphism):
        union_partials(
            [
                PartialAutomorphism(host, ((0, 0),)),
                PartialAutomorphism(host, ((1, 2),)),
            ]
        )


def test_extend_partial_examples():
    assert extend_partial_to_automorphism(
        PartialAutomorphism(K2, ()), K2
    ).pairs == ((0, 0), (1, 1))
    swap = extend_partial_to_automorphism(PartialAutomorphism(K2, ((0, 1),)), K2)
    assert swap.pairs == ((0, 1), (1, 0))
    # P3 has exactly two automorphisms, neither moves an endpoint to the middle
    assert len(brute_automorphisms(P3)) == 2
    assert extend_partial_to_automorphism(PartialAutomorphism(P3, ((0, 1),)), P3) is None


def test_extensions_are_automorphisms():
    for s in generate_members(graphs_class(), 4):
        got = extend_partial_to_automorphism(PartialAutomorphism(s, ()), s)
        assert got is not None and got.is_total()
        autos = {tuple(t for _, t in a.pairs) for a in [got]}
        assert autos <= set(brute_automorphisms(s))
