"""deepflow: checkable deep-inference proofs, atomic flows, and flow-driven
normalization, with compilers from Resolution, truth tables and pigeonhole
principles into the cut-free system."""

import sys

# formula and derivation builders recurse on formula structure; proof objects
# themselves are traversed iteratively
if sys.getrecursionlimit() < 20000:
    sys.setrecursionlimit(20000)

from .formula import (  # noqa: F401,E402
    Formula,
    bot,
    canonicalize,
    conj,
    conj_all,
    disj,
    disj_all,
    dual,
    eq_mod,
    evaluate,
    fparse,
    fprint,
    is_tautology,
    lit,
    neg,
    top,
)
from .derivation import (  # noqa: F401,E402
    KS,
    KS_PLUS,
    SKS,
    Derivation,
    check,
    compose,
    conclusion,
    dparse,
    dprint,
    dualize,
    endpoints,
    ensure_checked,
    expand_generic,
    glue,
    is_proof,
    leaf,
    premiss,
    rule_census,
    size,
    step,
    substitute_atom,
)
from .flow import (  # noqa: F401,E402
    AtomicFlow,
    FlowBuilder,
    extract,
    flip_dual,
    from_json,
    iso,
    to_dot,
    to_json,
    validate,
)
from .rewrite import (  # noqa: F401,E402
    CONT,
    NORM,
    WK,
    Redex,
    apply_redex,
    explore_reductions,
    find_redexes,
    normalize,
    termination_measure,
)
from .metrics import (  # noqa: F401,E402
    contraction_loops,
    dimensions,
    edge_weight,
    metrics_record,
    node_count,
    open_ai_paths,
    open_ai_paths_bruteforce,
)
from .lift import lift_step, normalize_proof  # noqa: F401,E402
from .resolution import (  # noqa: F401,E402
    AndStep,
    Axiom,
    Clause,
    Res,
    ResDerivation,
    Term,
    Wk,
    check_res,
    parse_res,
    print_res,
    simulate,
    translate_R,
)
from .simulations import (  # noqa: F401,E402
    gamma_of_assignment,
    php_formula,
    php_ks,
    php_ksplus,
    phi_st,
    sks_php_proof,
    switch_cut,
    truthtable_ks,
    truthtable_ksplus,
)
