//! Wavelet discretizations of free lattice field theories: filters, exact derivative
//! stencils, periodic and open transforms, Gaussian ground states and the
//! scale-resolved entanglement measures built on them.

pub mod analysis;
pub mod boson;
pub mod error;
pub mod fermion;
pub mod fwt;
pub mod lattice;
pub mod linalg;
pub mod optim;
pub mod scans;
pub mod stencil;
pub mod wavelet;

pub use boson::{BosonCovariance, KMatrix, PeriodicBosonState, SymplecticSpectrum};
pub use error::{Error, Result};
pub use fwt::{LabeledMatrix, LabeledVector, ModeIndex, ModeKind, TransformPlan};
pub use fermion::{BogoliubovAngles, CouplingMatrix, FermionCovariance};
pub use lattice::{Boundary, LatticeSpec, MassUnits, Spectrum};
pub use stencil::{autocorrelation, solve_stencil, Autocorrelation, DerivativeStencil};
pub use wavelet::{make_daubechies, FilterBank, FunctionKind, FunctionSamples, WaveletMoments};
pub use analysis::{EoPResult, SubsystemSpec};
