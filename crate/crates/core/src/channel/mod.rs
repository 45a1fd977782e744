//! Quantum channels in operator-sum form and the fiber degradation catalog.

mod catalog;
mod gaussian;
mod kraus;

pub use catalog::{
    dephasing_channel, depolarizing_channel, embed_in_rail, herald_on_photon, loss_channel,
    pauli_channel, rotation_unitary, sop_angle, sop_rotation_channel, SopMode, RAIL_DIM,
    RAIL_VACUUM,
};
pub use gaussian::{
    beamsplitter_dilation, beamsplitter_to_kraus, dilate_and_trace, gaussian_evolve,
    symplectic_form, GaussianHamiltonian, SymplecticTransform,
};
pub use kraus::{
    apply_channel, choi_matrix, compose, verify_cptp, CptpReport, KrausChannel, COMPLETENESS_TOL,
};
