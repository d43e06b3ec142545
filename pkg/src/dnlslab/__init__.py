"""dnlslab: simulation and sampling laboratory for discrete NLS lattices."""

from .lattice import (
    LatticeConfig,
    Wavefunction,
    CouplingKernel,
    build_torus,
    build_chain,
    nearest_neighbor_kernel,
    zero_kernel,
    periodize_kernel,
    coupling_symbol,
    apply_coupling,
    apply_coupling_spectral,
)
from .observables import (
    ModelSpec,
    Nonlinearity,
    CondensationStats,
    power_nonlinearity,
    saturable_nonlinearity,
    power,
    hamiltonian,
    top_two_masses,
    discrete_h1,
    mixed_norm,
)
from .dynamics import (
    Trajectory,
    evolve,
    evolve_free,
    conservation_report,
    decay_experiment,
    small_data_scatter,
)
from .groundstate import (
    GroundState,
    SolverOptions,
    minimize_at_power,
    el_residual,
    excitation_threshold,
    soliton_ansatz,
)
from .theory import (
    g_theta,
    critical_theta,
    free_energy,
    condensate_fraction,
    continuum_exponent,
    classify_phase,
)
from .gibbs import (
    GibbsParams,
    ChainState,
    EnsembleStats,
    run_chain,
    tempered_sweep,
    log_partition,
    log_partition_zero,
    condensation_stats,
)
from .spectral import sample_spectral_1d, saturable_spectral_ensemble

__version__ = "0.1.0"
