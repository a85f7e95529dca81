from fractions import Fraction

import pytest

from fraisse.classes import graphs_class, kn_free_class
from fraisse.colourings import (
    ConstantFamily,
    OrientationFamily,
    ParityFamily,
    SeededRandomFamily,
    oscillation,
)
from fraisse.constructors import (
    NonNullConstruction,
    NonTameConstruction,
    NoRamseyFailure,
    construct_nonnull_witness,
    construct_nontame_witness,
)
from fraisse.embeddings import (
    apply_partial,
    compose_embeddings,
    enumerate_embeddings,
    identity_embedding,
)
from fraisse.errors import ClosureViolated, EppaContractViolated
from fraisse.structures import complete_graph, graph, path_graph
from fraisse.witnesses import (
    verify_nonnull_witness,
    verify_nontame_witness,
    witness_to_independence_set,
)

GRAPHS = graphs_class()
K2 = complete_graph(2)
K3 = complete_graph(3)
P3 = path_graph(3)
VERTEX = graph(1)
EPS = Fraction(1, 4)


def test_constant_family_yields_no_ramsey_failure():
    out = construct_nonnull_witness(GRAPHS, K2, K2, [ConstantFamily()], EPS, 2)
    assert isinstance(out, NoRamseyFailure)
    assert out.copy_index == 0


def test_orientation_n2_witness():
    out = construct_nonnull_witness(GRAPHS, K2, K2, [OrientationFamily()], EPS, 2)
    assert isinstance(out, NonNullConstruction)
    w = out.witness
    assert w.colour_pair == (0, 1)
    assert w.n == 2 and len(w.g) == 2 and len(w.x) == 4
    ok, _ = verify_nonnull_witness(w, out.colouring)
    assert ok


def test_orientation_n3_witness_shape():
    out = construct_nonnull_witness(GRAPHS, K2, K2, [OrientationFamily()], EPS, 3)
    w = out.witness
    assert len(w.g) == 3 and len(w.x) == 8
    ok, _ = verify_nonnull_witness(w, out.colouring)
    assert ok


def test_exact_values_on_assembled_witness():
    out = construct_nonnull_witness(GRAPHS, K2, P3, [OrientationFamily()], EPS, 2)
    w = out.witness
    chi = out.colouring
    k0, k1 = w.colour_pair
    for I, x in w.x.items():
        for i, g in enumerate(w.g):
            assert chi.value(apply_partial(g, x)) == (k0 if i in I else k1)


def test_thresholds_satisfy_proof_inequalities():
    out = construct_nonnull_witness(
        GRAPHS, K2, K3, [SeededRandomFamily(2, 3)], EPS, 2
    )
    if isinstance(out, NoRamseyFailure):
        pytest.skip("this seed happens to be monochromatic")
    w = out.witness
    k0, k1 = w.colour_pair
    assert k0 < w.r < w.s < k1
    assert abs(k0 - w.r) > w.epsilon and abs(k1 - w.s) > w.epsilon
    assert k1 - k0 > 2 * w.epsilon


def test_pipeline_completeness_over_corpus():
    # every run lands in exactly one verified branch
    families = [
        ConstantFamily(),
        OrientationFamily(),
        ParityFamily(),
        SeededRandomFamily(0, 3),
        SeededRandomFamily(1, 3),
    ]
    for family in families:
        for pattern in (VERTEX, K2):
            for copy in (K2, P3):
                for n in (1, 2):
                    out = construct_nonnull_witness(
                        GRAPHS, pattern, copy, [family], EPS, n
                    )
                    if isinstance(out, NoRamseyFailure):
                        composed = [
                            compose_embeddings(out.h, b) for b in out.inner
                        ]
                        for chi in out.colourings:
                            values = [chi.table[e] for e in composed]
                            spread = max(values) - min(values) if values else 0
                            assert spread <= 2 * EPS
                    else:
                        ok, failing = verify_nonnull_witness(out.witness, out.colouring)
                        assert ok, failing


def test_no_ramsey_failure_oscillation_recheck():
    out = construct_nonnull_witness(GRAPHS, K2, K2, [ParityFamily()], EPS, 2)
    assert isinstance(out, NoRamseyFailure)
    composed = [compose_embeddings(out.h, b) for b in out.inner]
    values = [out.colourings[0].table[e] for e in composed]
    assert max(values) == min(values)  # parity is constant on each K2 block


def test_multi_family_query_counts():
    families = [OrientationFamily(), ConstantFamily()]
    out = construct_nonnull_witness(GRAPHS, K2, K2, families, EPS, 2)
    assert isinstance(out, NonNullConstruction)
    assert out.colour_index == 0
    assert out.copies == len(families) * 1 * 4


def test_nonmember_inputs_rejected():
    with pytest.raises(ClosureViolated):
        construct_nonnull_witness(
            kn_free_class(3), K2, K3, [OrientationFamily()], EPS, 1
        )


def test_blockwise_assembly_is_partial_automorphism():
    # the unions never raise across patterns and copies
    for pattern, copy in ((VERTEX, P3), (K2, K3), (K2, P3)):
        out = construct_nonnull_witness(GRAPHS, pattern, copy, [ParityFamily()], EPS, 2)
        if isinstance(out, NonNullConstruction):
            for g in out.witness.g:
                assert g.domain  # constructed and validated


def test_nontame_identity_eppa_witness():
    for m in (1, 2, 3):
        out = construct_nontame_witness(
            GRAPHS, K2, K2, [OrientationFamily()], EPS, m, identity_embedding(K2)
        )
        assert isinstance(out, NonTameConstruction)
        w = out.witness
        assert w.m == m and len(w.x) == (1 << m) - 1
        ok, failing = verify_nontame_witness(w, out.colouring)
        assert ok, failing


def test_nontame_m1_single_constraint():
    out = construct_nontame_witness(
        GRAPHS, K2, K2, [OrientationFamily()], EPS, 1, identity_embedding(K2)
    )
    w = out.witness
    assert list(w.x) == [frozenset({0})]
    value = out.colouring.value(apply_partial(w.g[0], w.x[frozenset({0})]))
    assert value < w.r


def test_nontame_constant_no_failure():
    out = construct_nontame_witness(
        GRAPHS, K2, K2, [ConstantFamily()], EPS, 2, identity_embedding(K2)
    )
    assert isinstance(out, NoRamseyFailure)


def test_nontame_with_c4_witness_for_p3():
    # C4 hosts P3 as an EPPA witness; the pipeline must extend block maps
    c4 = graph(4, [(0, 1), (0, 2), (1, 3), (2, 3)])
    from fraisse.embeddings import Embedding

    inclusion = Embedding(P3, c4, (0, 1, 3))
    out = construct_nontame_witness(
        GRAPHS, K2, P3, [OrientationFamily()], EPS, 2, inclusion
    )
    assert isinstance(out, NonTameConstruction)
    ok, failing = verify_nontame_witness(out.witness, out.colouring)
    assert ok, failing


def test_nontame_bad_witness_raises_contract_violation():
    # identity on P3 is not an EPPA witness; the endpoint-to-midpoint block
    # map cannot extend, which the pipeline reports as a contract violation
    with pytest.raises(EppaContractViolated):
        construct_nontame_witness(
            GRAPHS, K2, P3, [OrientationFamily()], EPS, 2, identity_embedding(P3)
        )


def test_nontame_independence_reported():
    out = construct_nontame_witness(
        GRAPHS, K2, K2, [OrientationFamily()], EPS, 2, identity_embedding(K2)
    )
    conv = witness_to_independence_set(out.witness, out.colouring)
    assert isinstance(conv.result.ok, bool)


def test_deterministic_construction():
    a = construct_nonnull_witness(GRAPHS, K2, K3, [SeededRandomFamily(4, 3)], EPS, 2)
    b = construct_nonnull_witness(GRAPHS, K2, K3, [SeededRandomFamily(4, 3)], EPS, 2)
    assert type(a) is type(b)
    if isinstance(a, NonNullConstruction):
        assert a.witness == b.witness
        assert a.colour_index == b.colour_index
