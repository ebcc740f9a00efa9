"""Numerical dilations of unital completely positive maps.

Kraus/Choi channel calculus, two independent single-step dilation
constructions, an iterated dilation tower on level-graded vectors, the
minimal unitary dilation on head ⊕ tail vectors, a string/gamma/napla
operator calculus with exact word reduction, and ergodicity-transfer
checks that cross-validate a direct graded evaluation against a
closed-form reduction.
"""

from .algebra import (
    MatrixSubalgebra,
    State,
    adjoint,
    conditional_expectation,
    hermitian_eig,
    hs_inner,
    matrix_from_json,
    matrix_to_json,
    membership_residual,
    operator_norm,
)
from .channel import (
    AdjointAbsent,
    ChoiMatrix,
    FixedPoint,
    UcpMap,
    amplitude_damping,
    channel_from_spec,
    choi,
    conjugation,
    cyclic_shift,
    depolarizing,
    identity_channel,
    invariant_state,
    is_multiplicative,
    kraus_from_choi,
    minimal_kraus,
    multiplicative_domain_member,
    phi_adjoint,
    random_mixed_unitary,
    random_ucp,
    rank2_faithful,
)
from .stinespring import (
    StinespringTriple,
    gns_dilate,
    kraus_dilate,
    multiplicative_commutation_check,
    unitarity_defect,
)
from .tower import (
    GradedOperator,
    GradedVector,
    Tower,
    build_tower,
    covariance_residual,
    f_projection,
    pi_infty,
    v_infty_adjoint_apply,
    v_infty_apply,
)
from .nagy import (
    NagyDilation,
    NagyVector,
    TailVector,
    build_nagy,
    minimality_span_dim,
    rel_identities_check,
    z_adjoint,
    z_embed,
)
from .strings import (
    AlgebraString,
    FactoredCorner,
    GammaOperator,
    NaplaOperator,
    NaplaSum,
    bra_R_ket,
    bra_apply,
    gamma_adjoint_apply,
    gamma_apply,
    gamma_pair_product,
    ket_apply,
    napla_adjoint,
    napla_apply,
    napla_product,
    s_conjugation_check,
    s_element,
    sigma_membership,
    w_invariance_check,
)
from .ergodic import (
    ErgodicReport,
    GeneratedBlock,
    cesaro_abs,
    cesaro_signed,
    dilated_cesaro_direct,
    dilated_cesaro_reduced,
    lemma_reduction,
    lemma_terms,
    spectral_verdict,
)
from . import errors

__version__ = "0.1.0"
