//! Tauberian machinery: one-sided polynomials for Karamata's method, the
//! windowed Korevaar kernel that extracts partial sums from boundary values of
//! a power series, and the contour integrals behind its main terms.

mod contour;
mod kernel;
mod poly;

pub use contour::{contour_b1, contour_b2, contour_b2_truncated, contour_b3, ContourValue};
pub use kernel::{
    binomial_series, kernel_extract, kernel_weights, taub_theorem_check, KernelEstimate, KernelParams,
    PowerSeries, TaubReport, TaubRow, window_errors, window_integrals,
};
pub use poly::{
    fixed_quadratic, freud_one_sided, freud_one_sided_with, karamata_poly, FreudOptions, OneSidedPoly, Side,
};
