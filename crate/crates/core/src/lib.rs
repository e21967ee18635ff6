//! Exact symbolic tools for coisotropic deformations of Poisson and
//! symplectic structures on vector-bundle charts.
//!
//! ```
//! use coiso_core::linfty::CoisoAlgebra;
//! use coiso_core::obstruction::{obstructedness_certificate, Verdict};
//! use coiso_core::symplectic_model::symplectic_to_poisson;
//! use coiso_core::{ChartSpec, DifferentialForm, RingElement, VerticalSection};
//!
//! let chart = ChartSpec::bundle(
//!     &[("y1", true), ("y2", true), ("q1", true), ("q2", true)],
//!     &["p1", "p2"],
//! )?;
//! let one = RingElement::one(&chart);
//! let mut omega = DifferentialForm::zero(&chart, 2);
//! for pair in [["y1", "y2"], ["q1", "p1"], ["q2", "p2"]] {
//!     omega = omega.try_add(&DifferentialForm::basis(&chart, &pair, one.clone())?)?;
//! }
//! let pi = symplectic_to_poisson(&omega, 6)?.pi;
//! let a = VerticalSection::from_components(
//!     &chart,
//!     vec![RingElement::sin(&chart, "y1", 1)?, RingElement::sin(&chart, "y2", 1)?],
//! )?;
//! let report = obstructedness_certificate(&CoisoAlgebra::new(pi)?, &a)?;
//! assert_eq!(report.verdict, Verdict::Nonzero);
//! assert_eq!(report.integral.unwrap().to_string(), "8*pi^2*cos(2*pi*y1)*cos(2*pi*y2)");
//! # Ok::<(), coiso_core::CoisoError>(())
//! ```

pub mod chart;
pub mod error;
pub mod forms;
pub mod linfty;
pub mod matrix;
pub mod multivector;
pub mod numeric;
pub mod obstruction;
pub mod ring;
pub mod scalar;
pub mod symplectic_model;

mod graded;

pub use chart::{BaseCoordinate, ChartSpec, Slot};
pub use error::{CoisoError, Result};
pub use forms::{
    leafwise_musical_inverse, leafwise_sharp_star, musical_inverse, sharp_contract, sharp_star,
    DifferentialForm, SubbundleSpec,
};
pub use graded::Blade;
pub use linfty::{
    higher_jacobi_verify, jacobiator, CoisoAlgebra, ConvergenceRow, ConvergenceTable,
    LInfinityAlgebra, PoissonStatus, TwistedAlgebra, TwistedElement,
};
pub use multivector::{vertical_blades, MultiVectorField, VerticalSection};
pub use numeric::{
    coisotropy_check_numeric, sample_grid, CoisotropyReport, CompiledBivector, NumericBivector,
    COISOTROPY_TOLERANCE,
};
pub use obstruction::{
    beta_of, build_t4_example, fibre_torus_integral, obstructedness_certificate, product_leaf,
    ObstructionReport, T4Example, Verdict,
};
pub use ring::{CompiledFunction, Monomial, RingElement};
pub use scalar::{rat, GaussianRational, Rational, Scalar};
