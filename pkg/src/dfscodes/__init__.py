"""Decoherence-free code subspaces for replicated registers under collective noise.

The register is N replicas of a (r+1)-level system coupled to bosonic modes
through collective algebra generators only.  States in the joint null space
of the generators (the singlet sector) decouple from the bath exactly:
``codes.singlet_basis`` constructs that sector, ``repn`` counts it, and
``dynamics`` verifies the fixed-point property by exact joint evolution.
"""

from .algebra import (
    chevalley_basis,
    collective,
    collective_generators,
    embed_local,
    GeneratorSet,
)
from .codes import (
    antisymmetric_singlet,
    CodeSubspace,
    NullSpaceMismatchError,
    principal_angles,
    singlet_basis,
)
from .dynamics import (
    assemble_hamiltonian,
    BathSpec,
    CouplingSpec,
    evolve,
    fidelity,
    liouvillian_fixed_point_check,
    run_trajectory,
    SimulationSetup,
    SystemSpec,
    trace_distance,
    Trajectory,
)
from .repn import (
    catalan_singlets,
    cg_defining,
    cg_sl2,
    encoding_efficiency,
    singlet_multiplicity,
)

__all__ = [
    "antisymmetric_singlet",
    "assemble_hamiltonian",
    "BathSpec",
    "catalan_singlets",
    "cg_defining",
    "cg_sl2",
    "chevalley_basis",
    "CodeSubspace",
    "collective",
    "collective_generators",
    "CouplingSpec",
    "embed_local",
    "encoding_efficiency",
    "evolve",
    "fidelity",
    "GeneratorSet",
    "liouvillian_fixed_point_check",
    "NullSpaceMismatchError",
    "principal_angles",
    "run_trajectory",
    "SimulationSetup",
    "singlet_basis",
    "singlet_multiplicity",
    "SystemSpec",
    "trace_distance",
    "Trajectory",
]

__version__ = "0.1.0"
