use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::Generator;
use crate::error::{Error, Result};
use crate::hilbert::RegisterState;

/// Above this dimension `Method::Auto` switches from a dense matrix
/// exponential to the Taylor action.
pub const DENSE_MAX_DIM: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Auto,
    /// Pade scaling-and-squaring exponential of the full generator.
    Dense,
    /// Truncated Taylor series of `exp(-iHt) psi` on sub-steps with
    /// `||H dt|| <= 1`, summed until terms drop below machine precision.
    Taylor,
}

/// `exp(-i H t)` ready to be applied to many states.
#[derive(Clone, Debug)]
pub enum Propagator {
    Dense(DMatrix<Complex64>),
    Taylor {
        generator: Generator,
        step: f64,
        steps: usize,
    },
}

impl Propagator {
    pub fn new(method: Method, generator: Generator, duration: f64) -> Result<Self> {
        if !duration.is_finite() || duration < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "duration {duration} must be finite and >= 0"
            )));
        }
        let dense = match method {
            Method::Auto => generator.dim() <= DENSE_MAX_DIM,
            Method::Dense => true,
            Method::Taylor => false,
        };
        if dense {
            let h = generator.dense();
            let u = (h * Complex64::new(0.0, -duration)).exp();
            Ok(Propagator::Dense(u))
        } else {
            let steps = (generator.norm_bound() * duration).ceil().max(1.0) as usize;
            Ok(Propagator::Taylor {
                step: duration / steps as f64,
                steps,
                generator,
            })
        }
    }

    pub fn apply(&self, state: &mut RegisterState) {
        match self {
            Propagator::Dense(u) => {
                let v = DVector::from_column_slice(state.amplitudes());
                let out = u * v;
                state.amplitudes_mut().copy_from_slice(out.as_slice());
            }
            Propagator::Taylor { generator, step, steps } => {
                let n = state.len();
                let mut term = vec![Complex64::new(0.0, 0.0); n];
                let mut next = vec![Complex64::new(0.0, 0.0); n];
                for _ in 0..*steps {
                    let acc = state.amplitudes_mut();
                    term.copy_from_slice(acc);
                    for order in 1..=120 {
                        generator.apply(&term, &mut next);
                        let scale = Complex64::new(0.0, -step / order as f64);
                        let mut term_norm = 0.0;
                        for (t, x) in term.iter_mut().zip(&next) {
                            *t = x * scale;
                            term_norm += t.norm_sqr();
                        }
                        let mut acc_norm = 0.0;
                        for (a, t) in acc.iter_mut().zip(&term) {
                            *a += t;
                            acc_norm += a.norm_sqr();
                        }
                        if term_norm <= 1e-34 * acc_norm.max(1e-300) {
                            break;
                        }
                    }
                }
            }
        }
    }
}
