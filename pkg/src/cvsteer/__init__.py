"""Gaussian EPR steering and monogamy analysis for continuous-variable cluster states."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .errors import (
    ArityError,
    CvsteerError,
    DomainError,
    IncompletePlanError,
    MultiCrossingError,
    NumericalError,
    PartitionParseError,
    SingularBlockError,
    SymplecticPairingError,
)
from .states import (
    CLUSTER_NETWORK,
    DEFAULT_R,
    LossChannel,
    Quadrature,
    SqueezedInputSpec,
    apply_loss,
    beamsplitter,
    lossy_cluster,
    phase_rotation,
    square_cluster,
    squeezed_vacuum,
    tensor,
    unitary_to_symplectic,
    verify_network_decomposition,
)
from .steering import (
    MonogamyReport,
    RelationType,
    SteeringReport,
    audit_all,
    audit_monogamy,
    critical_eta,
    enumerate_instances,
    gaussian_steering,
    nullifier_variances,
    parse_partition,
    vlf_inseparability,
)
from .symplectic import (
    CovarianceMatrix,
    ModePartition,
    SymplecticTransform,
    is_physical,
    load_json,
    restrict,
    save_json,
    schur_complement,
    symplectic_eigenvalues,
    symplectic_form,
)
from .tomography import (
    MeasurementRecord,
    ReconstructionResult,
    measurement_plan,
    reconstruct,
    sampling_tolerance,
    simulate_variances,
)

__version__ = "0.1.0"
