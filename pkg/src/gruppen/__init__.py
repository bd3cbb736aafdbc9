"""k-of-n multiple secret sharing with private recovery.

Every participant owns a secret; any k of the others can privately
recover it for them, while any k-1 learn nothing even when handed all
remaining secrets.  One polynomial over a finite field carries all n
secrets, and each participant stores just n-k extra field elements --
the provable minimum.

Layers: field/poly (arithmetic), scheme (dealing & reconstruction),
recovery (the three recovery protocols and the policy gate), dealerless
(setup without a trusted dealer), analysis (exact rank and entropy
verification), harness (message-level simulation), files/cli (formats
and the command-line front end).
"""

from .field import (
    FieldElement,
    FieldSpec,
    binary_field,
    field_descriptor,
    parse_field_descriptor,
    prime_field,
    random_element,
)
from .poly import LagrangeRow, Poly, interpolate, lagrange_coefficients, random_poly, random_poly_constrained
from .scheme import (
    LAYOUT_PARTICIPANT_MAJOR,
    LAYOUT_SECRETS_FIRST,
    LAYOUTS,
    Dealing,
    Params,
    ParticipantBundle,
    PointLayout,
    QuorumError,
    deal_random,
    deal_with_secrets,
    layout_default,
    make_layout,
    point_index,
    reconstruct_all,
)
from .recovery import (
    FULL_STATE,
    MASKED,
    MODES,
    NAIVE,
    Contribution,
    MaskMatrix,
    ProtocolIncomplete,
    RecoveryLedger,
    RecoveryRefused,
    RecoverySession,
    combine_contributions,
    full_state_contributions,
    leak_extract_demo,
    masked_contribution,
    masked_round1,
    naive_contribution,
    recover_full_state,
    recover_secret,
    recovery_lambdas,
)
from .dealerless import (
    IncompleteSetup,
    SetupContribution,
    homomorphic_add,
    setup_aggregate,
    setup_deal_own,
)
from .analysis import (
    ContribKnown,
    EntropyReport,
    InstanceTooLarge,
    KnowledgeMatrix,
    MaskKnown,
    PerfectnessReport,
    PointKnown,
    SetupLeakageCheck,
    View,
    entropy_oracle,
    km_codim,
    km_contains,
    km_from_view,
    km_leaked_combination,
    km_rank,
    sabotage_perfectness,
    secret_rows,
    setup_security_report,
    verify_perfectness,
)
from .harness import (
    Message,
    Party,
    SessionDescriptor,
    Transcript,
    adversary_view,
    derive_party_seed,
    make_parties,
    parties_from_dealing,
    run_recovery,
    run_setup,
)

__version__ = "0.1.0"
