"""Off-diagonal geometric phases of mixed quantum states under unitary evolution."""

from .errors import *  # noqa: F401,F403
from .linalg import (
    DEFAULT_TOLERANCES,
    PhaseResult,
    ToleranceConfig,
    eig_hermitian,
    matrix_root,
    phase_factor,
    trace_product,
)
from .perm import (
    BlockDecomposition,
    SequenceSpec,
    compute_f,
    decompose,
    fast_trace,
    full_cycle,
    gamma_parity,
)
from .phases import (
    ProjectionConfig,
    QubitPathDescriptor,
    dense_trace,
    gamma,
    nodal_eta,
    projection_phase,
    projection_trace,
    qubit_l1_trace,
    qubit_l2_trace,
)
from .purification import (
    ArmConfiguration,
    JointState,
    coincidence_intensity,
    entangled_pair,
    extract_phase,
    l1_recipe,
    l2_recipe,
    measured_trace,
    purify,
)
from .states import (
    CyclicShift,
    DensityOperator,
    OrthogonalFamily,
    bures_fidelity,
    is_orthogonal,
    make_family,
    normalization_check,
)
from .transport import (
    GeneratorPath,
    Propagator,
    integrate,
    polarization_rotation,
    qubit_descriptor,
    transport_residual,
)

__version__ = "0.1.0"
