//! One-period evolution operator of the tilted chain and its spectral
//! analysis.
//!
//! Columns are built in the interaction picture of the static tilt: the
//! tilt-free equation (phased hopping, hard walls) is integrated over one
//! period and the exact tilt factor `exp(-i w_x l T_y) = exp(-i 2 pi beta l)`
//! is applied at the end. Each column is only integrated over the sites it
//! actually reaches, so the build cost follows the bandwidth rather than `L`.

mod build;
mod io;
mod scan;
mod spectral;

pub use build::{band_truncate, build_floquet, unitarity_defect, FloquetOperator, DEFAULT_TOL};
pub use io::{read_operator, write_operator, HEADER_LEN, MAGIC, VERSION};
pub use scan::{
    alpha_scan, localization_scan, select_centered, ControlKind, LocalizationScan, ScanPoint,
    ScanSettings, ScanTemplate,
};
pub use spectral::{
    density_centroid, eigendecompose, participation_ratio, FloquetEigenSet, RESIDUAL_LIMIT,
};
