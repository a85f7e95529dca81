import pytest

from fraisse.embeddings import (
    Embedding,
    PartialAutomorphism,
    format_embedding,
    format_partial,
    parse_embedding,
    parse_partial,
)
from fraisse.errors import ParseError
from fraisse.structures import (
    chain,
    complete_graph,
    empty_structure,
    format_structure,
    GRAPH_SIGNATURE,
    graph,
    parse_structure,
    path_graph,
)

K2 = complete_graph(2)
K3 = complete_graph(3)
P3 = path_graph(3)


def test_structure_round_trip():
    for s in (K2, K3, P3, graph(4, [(0, 2), (1, 3)]), chain(3),
              empty_structure(GRAPH_SIGNATURE)):
        assert parse_structure(format_structure(s)) == s


def test_structure_format_shape():
    text = format_structure(P3)
    lines = text.splitlines()
    assert lines[0] == "signature E/2:ir+sym"
    assert lines[1] == "carrier 3"
    assert lines[2] == "E: (0,1) (1,0) (1,2) (2,1)"


def test_structure_format_orders_tuples():
    s = graph(3, [(2, 1), (0, 2)])
    line = format_structure(s).splitlines()[2]
    assert line == "E: (0,2) (1,2) (2,0) (2,1)"


def test_parse_structure_accepts_comments_and_blanks():
    text = "# a graph\n\nsignature E/2:ir+sym\ncarrier 2\n\nE: (0,1) (1,0)\n"
    assert parse_structure(text) == K2


def test_parse_structure_errors_carry_line_numbers():
    with pytest.raises(ParseError) as err:
        parse_structure("signature E/2:ir+sym\ncarrier x\n")
    assert err.value.line == 2
    with pytest.raises(ParseError) as err:
        parse_structure("signature E/2:ir+sym\ncarrier 2\nE: (0,1) junk\n")
    assert err.value.line == 3
    with pytest.raises(ParseError) as err:
        parse_structure("signature E/two\ncarrier 1\n")
    assert err.value.line == 1


def test_parse_structure_rejects_axiom_violations():
    with pytest.raises(ParseError):
        parse_structure("signature E/2:ir+sym\ncarrier 2\nE: (0,1)\n")
    with pytest.raises(ParseError):
        parse_structure("signature E/2:ir\ncarrier 2\nE: (0,0)\n")


def test_parse_structure_trailing_content():
    with pytest.raises(ParseError):
        parse_structure(format_structure(K2) + "stray\n")


def test_embedding_round_trip():
    for h in (Embedding(K2, K3, (0, 2)), Embedding(empty_structure(GRAPH_SIGNATURE), K3, ())):
        text = format_embedding(h)
        assert parse_embedding(text, h.source, h.target) == h


def test_partial_round_trip():
    for g in (
        PartialAutomorphism(P3, ((0, 2), (2, 0))),
        PartialAutomorphism(K3, ()),
        PartialAutomorphism.identity(K2),
    ):
        assert parse_partial(format_partial(g), g.structure) == g


def test_parse_embedding_rejects_bad_maps():
    with pytest.raises(ParseError):
        parse_embedding("embed A->F: 0->0", K2, K3)  # not total
    with pytest.raises(ParseError):
        parse_embedding("embed A->F: 0->0 1->0", K2, K3)  # not injective
    with pytest.raises(ParseError):
        parse_embedding("embed A->F: 0->0 1->nope", K2, K3)


def test_parse_partial_rejects_relation_breakage():
    # image pair 0,1 carries an edge whose preimage 0,2 does not
    with pytest.raises(ParseError):
        parse_partial("pauto F: 0->0 2->1", P3)
