pub mod chargroup;
pub mod ergohollow;
pub mod error;
pub mod factorize;
pub mod hemicirc;
pub mod laurent;
pub mod powers;
pub mod num;
pub mod seqspec;

pub use chargroup::FiniteAbelianGroup;
pub use error::{Error, Result};
pub use hemicirc::{Dense, DenseMatrix, Hemi, HemicirculantMatrix};
pub use laurent::{CPoly, FieldMode, LaurentPoly, Poly, QPoly};
pub use num::{Bound, CBall, Coeff, Cyclo, Exponent, Rational};
