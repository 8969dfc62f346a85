"""Energy-differential absorption spectra for 1D quantum systems probed by
quadratic absorbing potentials, one absorption at a time."""

__version__ = "0.1.0"

from .grids import (CapSpec, Grid1D, InteractionSpec, PotentialSpec, PulseSpec,
                    build_grid, cap_values, interaction_matrix,
                    potential_values, vector_potential)
from .eigenbasis import (EigenBasis, build_h0_dense, continuum_weights,
                         eigendecompose, load_or_build)
from .twobody import (SplitFactors, TwoBodyState, WavePacketSpec,
                      energy_expectation, init_scattering_state, norm2,
                      relax_imaginary_time, step_split_operator)
from .lindblad import (OneBodyDensity, TraceLedger, cap_flux, source_matrix,
                       step_rho1, trace_of, update_p0)
from .spectra import (ExtentTracker, SpectralAccumulator, accumulate,
                      duration_from_norms, negative_content, spectrum_first,
                      spectrum_second, total_probability)
from .scenarios import (PRESETS, RunRecord, ScenarioConfig, SharedPieces,
                        convergence_gamma, export_record, export_summary,
                        l1_distance, prepare_shared, preset_photo03,
                        preset_photo10, preset_scattering, run_scenario,
                        sweep_gamma)

__all__ = [name for name in dir() if not name.startswith("_")]
