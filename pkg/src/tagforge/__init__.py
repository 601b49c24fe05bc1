"""Grammar metacompiler for feature-based lexicalized tree-adjoining grammars.

The layers, bottom up:

- `features`: feature structures, unification, coindexation, equations
- `trees`: elementary trees, substitution, adjunction, validation, names,
  the tree file format
- `descriptions`: tree descriptions and their minimal-model solver
- `lexorg`: subcategorization frames, lexical redistribution rules, block
  instantiation, tree-family generation
- `metarules`: pattern-tree rewriting with four application modes
- `derive`: lexicalization, derivation trees, recognition
- `source`: the sectioned grammar source format
- `cli`: the command line front end
"""

from .features import (
    AtomSet,
    CoindexRef,
    FeatureEquation,
    FeatureError,
    FeaturePath,
    FeatureStructure,
    parse_equation,
    parse_fs,
    resolve_fs,
    subsumes,
    unify,
    unify_in,
)
from .trees import (
    ElementaryTree,
    Failure,
    NodeLabel,
    TreeError,
    TreeNode,
    adjoin,
    canonical_key,
    family_name,
    finalize,
    install_equations,
    make_node,
    parse_trees,
    serialize_tree,
    serialize_trees,
    substitute,
    tree_name,
    unify_features,
    validate_elementary,
)
from .descriptions import (
    DescriptionError,
    NodeSpec,
    SolverConfig,
    TreeDescription,
    conjoin,
    describe,
    satisfies,
    solve,
)
from .lexorg import (
    Argument,
    ArgPattern,
    ArgTemplate,
    BlockLibrary,
    LRR,
    Provenance,
    SubcatFrame,
    TransformationBlock,
    TreeFamily,
    frame_closure,
    frame_lattice,
    generate_family,
    lrr_apply,
)
from .metarules import (
    Metarule,
    MetaruleError,
    apply_metarule,
    load_metarules,
    match_trees,
    run_files,
    run_mode,
)

__version__ = "0.1.0"
