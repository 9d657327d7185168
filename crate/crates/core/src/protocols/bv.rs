//! The "guess the number" game: one-query recovery of a hidden bit string
//! through the sign oracle, by conjugating it with Hadamard-Walsh
//! transforms.

use crate::error::{Error, Result};
use crate::linalg::{cr, ComplexMatrix};
use crate::states::PureState;

/// Instance of the guessing game: a hidden integer `a` in [0, 2^n).
#[derive(Debug, Clone, Copy)]
pub struct BVInstance {
    pub n: usize,
    pub a: usize,
}

impl BVInstance {
    pub fn new(n: usize, a: usize) -> Result<Self> {
        if n == 0 || a >= (1 << n) {
            return Err(Error::InvalidParameter(format!(
                "hidden value {a} out of range for {n} qubits"
            )));
        }
        Ok(BVInstance { n, a })
    }
}

/// The single-qubit Hadamard gate.
pub fn walsh_hadamard() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]])
}

/// The n-fold tensor power of the Hadamard gate.
pub fn walsh_hadamard_n(n: usize) -> ComplexMatrix {
    let w = walsh_hadamard();
    let mut out = w.clone();
    for _ in 1..n {
        out = out.tensor(&w);
    }
    out
}

/// The sign oracle |x> -> (-1)^{a.x} |x>, with a.x the bitwise inner
/// product mod 2.
pub fn bv_oracle(n: usize, a: usize) -> ComplexMatrix {
    let d = 1usize << n;
    let mut m = ComplexMatrix::zeros(d, d);
    for x in 0..d {
        let sign = if (a & x).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        m[(x, x)] = cr(sign);
    }
    m
}

/// Recover the hidden value with a single oracle application:
/// W^{(x)n} T_a W^{(x)n} |0...0> lands exactly on |a>. Returns the guess
/// and the number of oracle calls made (always 1).
pub fn bv_guess(inst: BVInstance) -> Result<(usize, usize)> {
    let d = 1usize << inst.n;
    let w = walsh_hadamard_n(inst.n);
    let start = PureState::basis_state(&[d], 0);
    let superposed = start.apply(&w)?;
    let queried = superposed.apply(&bv_oracle(inst.n, inst.a))?;
    let finished = queried.apply(&w)?;
    let mut best = (0usize, 0.0f64);
    for (x, amp) in finished.amplitudes().iter().enumerate() {
        if amp.norm() > best.1 {
            best = (x, amp.norm());
        }
    }
    if (best.1 - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized((best.1 - 1.0).abs()));
    }
    Ok((best.0, 1))
}
