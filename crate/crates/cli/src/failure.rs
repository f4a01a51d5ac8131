use std::fmt;

use diagsynth::cluster::ClusterError;
use diagsynth::diagonal::DiagonalError;
use diagsynth::mlpipe::MlError;
use diagsynth::numkit::NumError;

pub const INPUT: u8 = 2;
pub const NUMERIC: u8 = 3;

/// A check that ran to completion and failed.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn diagonal_code(e: &DiagonalError) -> u8 {
    match e {
        DiagonalError::QubitCount { .. }
        | DiagonalError::AngleCount { .. }
        | DiagonalError::Sequence(_)
        | DiagonalError::Circuit(_) => INPUT,
        _ => NUMERIC,
    }
}

fn ml_code(e: &MlError) -> u8 {
    match e {
        MlError::Numeric(_) | MlError::Diverged { .. } => NUMERIC,
        MlError::Diagonal(d) => diagonal_code(d),
        _ => INPUT,
    }
}

/// 2 for bad input, 3 for a numerical or verification failure.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<CheckFailed>() || cause.is::<NumError>() {
            return NUMERIC;
        }
        if let Some(d) = cause.downcast_ref::<DiagonalError>() {
            return diagonal_code(d);
        }
        if let Some(m) = cause.downcast_ref::<MlError>() {
            return ml_code(m);
        }
        if let Some(c) = cause.downcast_ref::<ClusterError>() {
            return match c {
                ClusterError::Numeric(_) => NUMERIC,
                ClusterError::Ml(m) => ml_code(m),
                _ => INPUT,
            };
        }
    }
    INPUT
}
