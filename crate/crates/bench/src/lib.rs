//! Shared fixtures for the criterion benches.

use hemicirc::laurent::qpoly;
use hemicirc::seqspec::{ExponentSchedule, SequenceSpec};
use hemicirc::QPoly;

/// ∏_{j<k} (1 + x^{2^j})/2, dense in [0, 2^k).
pub fn dyadic_product(k: u32) -> QPoly {
    (0..k).fold(QPoly::one(), |acc, j| acc.mul(&qpoly(&[(0, 1, 2), (1i64 << j, 1, 2)])))
}

pub fn fibonacci_z2() -> SequenceSpec {
    SequenceSpec::circulant_half(2, ExponentSchedule::fibonacci())
}

pub fn dyadic(n: u64) -> SequenceSpec {
    SequenceSpec::circulant_half(n, ExponentSchedule::geometric(2))
}
