//! Exact combinatorics and scalar special functions.

mod combinatorics;
mod gamma;

pub use combinatorics::{
    binomial, double_factorial, factorial, multinomial, odd_double_factorial_f64,
    stirling_first_unsigned, stirling_inversion_holds, stirling_second, TABLE_MAX,
};
pub use gamma::{
    erf, erfc, gamma, kummer_m, ln_gamma, lower_incomplete_gamma, raising_factorial,
    regularized_lower_gamma, regularized_upper_gamma, CF_MAX_ITERATIONS, SERIES_MAX_TERMS,
};
