"""Two atoms in fibre-coupled cavities: closed and dissipative gate emulation."""

from .dynamics import (KrausSet, Propagator, find_decoupling_times, kraus_set, leakage,
                       propagator)
from .entanglement import concurrence, entanglement_of_formation
from .gates import (ChannelMatrix, GateTarget, average_fidelity, average_fidelity_monte_carlo,
                    channel_from_kraus, extract_controlled_phase,
                    fidelity_local_phase_optimized, swap_fidelity_optimized)
from .hilbert import enumerate_sector, full_space, index_of
from .model import (SystemParams, build_hamiltonian, fibre_coupling_estimate,
                    lambda_effective_params, normal_mode_frequencies, short_fibre_mode_count)
from .open_system import (DensityMatrix, Liouvillian, build_liouvillian, evolve,
                          partial_trace_field, tomography_channel)

__version__ = "0.1.0"
