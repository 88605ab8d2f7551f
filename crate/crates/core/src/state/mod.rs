//! Grids, wavefunctions, initial states and decay diagnostics.

mod decay;
mod grid;
mod init;
mod io;
mod wavefunction;

pub use decay::{check_decay, DecayReport};
pub use grid::{Grid, GridSpec};
pub use init::{
    apply_hamiltonian, eigen_residual, energy, gaussian_packet, gaussian_state,
    hydrogenic_ground_state, hydrogenic_tail_mass, potential_on_grid, relax_ground_state,
    RelaxOptions, Relaxed, TAIL_MASS_LIMIT,
};
pub use io::{read_binary, write_binary, write_slice_csv};
pub use wavefunction::{Representation, Wavefunction};
