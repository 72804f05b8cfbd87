//! Multiscale correlators, subsystem entropies, compression and purification.

pub mod correlators;
pub mod eop;
pub mod subsystem;

pub use correlators::{
    boson_bulk_approx, fermion_bulk_approx, renormalized_mass, same_scale_row, wavelet_correlator,
    wavelet_correlator_transformed, BosonObservable, Phase,
};
pub use eop::{eop_four_mode, eop_two_mode, purification_entropy, EoPResult};
pub use subsystem::{
    calabrese_cardy_fit, compress, compress_boson, compression_rows, log_log_fit, mutual_information,
    subsystem_entropy, subsystem_reduce, wedge_cross_section, GaussianState, MajoranaCovariance, SubsystemSpec,
};
