use serde::{Deserialize, Serialize};

use super::{MlError, MlResult};

/// Harmonic plateau learning rate: plateau `m = 1, 2, …` holds the value
/// `init_lr / m^α` for `⌈m^β⌉ · step_size` consecutive steps.
///
/// `Σγ` diverges iff `α − β ≤ 1` and `Σγ²` converges iff `2α − β > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub alpha: f64,
    pub beta: f64,
    pub init_lr: f64,
    pub step_size: usize,
}

impl Default for StepSchedule {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.5,
            init_lr: 1.0,
            step_size: 100,
        }
    }
}

/// Outcome of [`StepSchedule::validate`] for an admissible schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleCheck {
    Ok,
    /// `2α − β = 1`: `Σγ²` sits on the divergence boundary.
    SquareSumBoundary,
}

impl StepSchedule {
    pub fn new(alpha: f64, beta: f64, init_lr: f64, step_size: usize) -> Self {
        Self {
            alpha,
            beta,
            init_lr,
            step_size,
        }
    }

    pub fn validate(&self) -> MlResult<ScheduleCheck> {
        let bad = |msg: String| Err(MlError::InvalidSchedule(msg));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha = {} must be positive", self.alpha));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad(format!("beta = {} must be non-negative", self.beta));
        }
        if !(self.init_lr > 0.0 && self.init_lr.is_finite()) {
            return bad(format!("init_lr = {} must be positive", self.init_lr));
        }
        if self.step_size == 0 {
            return bad("step_size must be at least 1".into());
        }
        if self.alpha - self.beta > 1.0 {
            return bad(format!(
                "alpha - beta = {} > 1: the step sizes are summable",
                self.alpha - self.beta
            ));
        }
        let square = 2.0 * self.alpha - self.beta;
        if square < 1.0 - 1e-12 {
            return bad(format!("2*alpha - beta = {square} < 1: squared steps diverge"));
        }
        if (square - 1.0).abs() <= 1e-12 {
            log::warn!(
                "schedule (alpha={}, beta={}) has 2*alpha - beta = 1; squared steps diverge logarithmically",
                self.alpha,
                self.beta
            );
            return Ok(ScheduleCheck::SquareSumBoundary);
        }
        Ok(ScheduleCheck::Ok)
    }

    /// Steps spent on plateau `m` (1-based).
    pub fn plateau_len(&self, m: u64) -> u64 {
        (m as f64).powf(self.beta).ceil() as u64 * self.step_size as u64
    }

    pub fn plateau_value(&self, m: u64) -> f64 {
        self.init_lr / (m as f64).powf(self.alpha)
    }

    /// Infinite sequence of per-step learning rates.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (1u64..).flat_map(move |m| {
            std::iter::repeat_n(self.plateau_value(m), self.plateau_len(m) as usize)
        })
    }

    /// Numerical check of `Σγ = ∞`, `Σγ² < ∞` over the first `terms` steps.
    pub fn robbins_monro(&self, terms: usize) -> RobbinsMonroReport {
        let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
        let mut checkpoints = Vec::new();
        let mut next = 1usize;
        for (k, g) in self.iter().take(terms).enumerate() {
            sum += g;
            sum_sq += g * g;
            if k + 1 == next {
                checkpoints.push(sum);
                next *= 10;
            }
        }
        // Plateau reached after `terms` steps, for the tail estimate.
        let mut m = 1u64;
        let mut used = 0u64;
        while used + self.plateau_len(m) <= terms as u64 {
            used += self.plateau_len(m);
            m += 1;
        }
        let sum_growing = checkpoints.windows(2).all(|w| w[1] > w[0]);
        let square_tail_bound = self.square_tail_bound(m);
        RobbinsMonroReport {
            terms,
            sum,
            sum_sq,
            sum_checkpoints: checkpoints,
            sum_growing,
            square_tail_bound,
        }
    }

    /// Upper bound on `Σ_{plateaus ≥ m} ⌈p^β⌉·step·(init/p^α)²`, using
    /// `⌈p^β⌉ ≤ p^β + 1` and integral bounds; infinite when divergent.
    fn square_tail_bound(&self, m: u64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let scale = self.step_size as f64 * self.init_lr * self.init_lr;
        let integral = |exponent: f64| -> f64 {
            // Σ_{p ≥ m} p^{−exponent} ≤ m^{−exponent} + m^{1−exponent}/(exponent − 1)
            if exponent <= 1.0 {
                return f64::INFINITY;
            }
            let mf = m as f64;
            mf.powf(-exponent) + mf.powf(1.0 - exponent) / (exponent - 1.0)
        };
        scale * (integral(2.0 * a - b) + integral(2.0 * a))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobbinsMonroReport {
    pub terms: usize,
    pub sum: f64,
    pub sum_sq: f64,
    /// Partial sums after 1, 10, 100, … steps.
    pub sum_checkpoints: Vec<f64>,
    pub sum_growing: bool,
    /// Bound on the remaining `Σγ²` beyond the tested terms.
    pub square_tail_bound: f64,
}
