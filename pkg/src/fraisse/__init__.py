"""Workbench for finite relational structures: class-property checking,
embedding search, approximate Ramsey certificates, and EPPA witnesses."""

__version__ = "0.1.0"

from .classes import (
    Approximant,
    ClassSpec,
    build_approximant,
    builtin_bit_graph,
    check_class_properties,
    extension_defect,
    generate_members,
    graphs_class,
    kn_free_class,
    linear_orders_class,
    one_point_extensions,
    parse_class_spec,
)
from .colourings import (
    Colouring,
    ColouringFamily,
    ConstantFamily,
    MonochromaticWitness,
    OrientationFamily,
    ParityFamily,
    RamseyExhausted,
    RamseyQuery,
    SeededRandomFamily,
    check_ramsey_upto,
    oscillation,
    parse_family,
)
from .constructors import (
    NonNullConstruction,
    NonTameConstruction,
    NoRamseyFailure,
    construct_nonnull_witness,
    construct_nontame_witness,
)
from .embeddings import (
    Embedding,
    PartialAutomorphism,
    apply_partial,
    compose_embeddings,
    enumerate_embeddings,
    extend_partial_to_automorphism,
    identity_embedding,
    union_partials,
)
from .eppa import (
    EppaWitness,
    enumerate_partial_automorphisms,
    search_eppa_witness,
    verify_eppa_witness,
)
from .errors import FraisseError
from .structures import (
    CanonicalForm,
    FinStructure,
    RelationSymbol,
    Signature,
    canonical_form,
    chain,
    complete_graph,
    empty_structure,
    free_amalgam,
    free_join,
    free_join_many,
    graph,
    induced_substructure,
    make_structure,
    parse_structure,
    path_graph,
)
from .witnesses import (
    NonNullWitness,
    NonTameWitness,
    is_independence_set,
    verify_nonnull_witness,
    verify_nontame_witness,
    witness_to_independence_set,
)
