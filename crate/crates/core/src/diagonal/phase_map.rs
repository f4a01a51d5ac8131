use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ansatz::{angle_count, build_ansatz, check_qubits};
use super::{DiagonalError, DiagonalResult};
use crate::circuit::{diag_phases_at, qubit_mask, Circuit, CircuitError, Gate};
use crate::numkit::{fwht, RealMatrix};
use crate::rng;
use crate::sequences::SequenceKind;
use crate::tol;

/// Largest register whose phase map may be expanded into a dense matrix.
pub const MAX_DENSE_MAP_QUBITS: usize = 12;

/// Phase response of one RZ angle: `θ · sign/2 · (−1)^{popcount(mask & x)}`
/// on basis state `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Character {
    pub mask: usize,
    pub sign: i8,
}

impl Character {
    /// Entry of the phase-map column at basis state `x`: `±1/2`.
    #[inline]
    pub fn value(&self, x: usize) -> f64 {
        let parity = (self.mask & x).count_ones() & 1;
        let s = if parity == 0 { self.sign } else { -self.sign };
        f64::from(s) / 2.0
    }
}

/// Walsh characters of every RZ in an RZ/X/CNOT circuit, in gate order.
///
/// Each wire is tracked as an affine GF(2) function of the input bits; an RZ
/// contributes `−θ/2` on states where its wire reads 0 and `+θ/2` where it
/// reads 1. Fails if the circuit leaves the basis permuted.
pub fn rz_characters(c: &Circuit) -> DiagonalResult<Vec<Character>> {
    let n = c.n();
    let mut wires: Vec<(usize, bool)> = (0..n).map(|q| (qubit_mask(n, q), false)).collect();
    let mut out = Vec::new();
    for (index, g) in c.gates().iter().enumerate() {
        match *g {
            Gate::Rz { qubit, .. } => {
                let (mask, flipped) = wires[qubit];
                out.push(Character {
                    mask,
                    sign: if flipped { 1 } else { -1 },
                });
            }
            Gate::X { qubit } => wires[qubit].1 ^= true,
            Gate::Cnot { control, target } => {
                let (m, f) = wires[control];
                wires[target].0 ^= m;
                wires[target].1 ^= f;
            }
            _ => {
                return Err(CircuitError::NonDiagonalGate {
                    index,
                    kind: g.kind(),
                }
                .into())
            }
        }
    }
    // An affine map is the identity iff it fixes 0 and every unit vector.
    let candidates = std::iter::once(0).chain((0..n).map(|q| qubit_mask(n, q)));
    for state in candidates {
        let image = image_of(&wires, n, state);
        if image != state {
            return Err(CircuitError::NotDiagonal { state, image }.into());
        }
    }
    Ok(out)
}

fn image_of(wires: &[(usize, bool)], n: usize, x: usize) -> usize {
    wires.iter().enumerate().fold(0, |acc, (q, &(m, f))| {
        let bit = ((m & x).count_ones() & 1 == 1) ^ f;
        if bit {
            acc | qubit_mask(n, q)
        } else {
            acc
        }
    })
}

/// Phases produced by a list of characters at the given angles, via one
/// Walsh–Hadamard transform.
pub fn apply_characters(n: usize, chars: &[Character], angles: &[f64]) -> DiagonalResult<Vec<f64>> {
    if chars.len() != angles.len() {
        return Err(DiagonalError::AngleCount {
            n,
            expected: chars.len(),
            found: angles.len(),
        });
    }
    let mut g = vec![0.0; 1 << n];
    for (ch, &theta) in chars.iter().zip(angles) {
        g[ch.mask] += f64::from(ch.sign) * theta / 2.0;
    }
    fwht(&mut g)?;
    Ok(g)
}

/// Exact linear map from ansatz angles to diagonal phases.
///
/// Column `j` is the phase response of angle `j`; every entry is `±1/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMap {
    n: usize,
    kind: SequenceKind,
    columns: Vec<Character>,
    /// `slot[mask]` is the column carrying that character (`usize::MAX` for mask 0).
    slot: Vec<usize>,
}

impl PhaseMap {
    /// Extracts and verifies the map of the `n`-qubit ansatz.
    pub fn build(n: usize, kind: SequenceKind) -> DiagonalResult<Self> {
        check_qubits(n)?;
        let template = build_ansatz(n, &vec![0.0; angle_count(n)], kind)?;
        let map = Self::from_characters(n, kind, rz_characters(&template)?)?;
        map.verify_against_simulator()?;
        Ok(map)
    }

    /// Shared, memoised map for `(n, kind)`.
    pub fn cached(n: usize, kind: SequenceKind) -> DiagonalResult<Arc<Self>> {
        type Cache = RwLock<HashMap<(usize, SequenceKind), Arc<PhaseMap>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(m) = cache.read().expect("phase map cache poisoned").get(&(n, kind)) {
            return Ok(Arc::clone(m));
        }
        let map = Arc::new(Self::build(n, kind)?);
        cache
            .write()
            .expect("phase map cache poisoned")
            .entry((n, kind))
            .or_insert_with(|| Arc::clone(&map));
        Ok(map)
    }

    /// Accepts a character list only if it spans the traceless phases, i.e.
    /// its masks are exactly the `2ⁿ − 1` non-zero masks in some order.
    fn from_characters(n: usize, kind: SequenceKind, columns: Vec<Character>) -> DiagonalResult<Self> {
        let dim = 1usize << n;
        let mut slot = vec![usize::MAX; dim];
        let mut distinct = 0;
        for (j, ch) in columns.iter().enumerate() {
            if ch.mask != 0 && slot[ch.mask] == usize::MAX {
                slot[ch.mask] = j;
                distinct += 1;
            }
        }
        if columns.len() != dim - 1 || distinct != dim - 1 {
            return Err(DiagonalError::RankDeficient {
                n,
                rank: distinct,
                expected: dim - 1,
            });
        }
        Ok(Self {
            n,
            kind,
            columns,
            slot,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        1 << self.n
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Character] {
        &self.columns
    }

    pub fn entry(&self, x: usize, j: usize) -> f64 {
        self.columns[j].value(x)
    }

    /// Rank implied by the characters: distinct non-zero Walsh characters are
    /// mutually orthogonal, so every column is independent.
    pub fn rank(&self) -> usize {
        self.slot.iter().filter(|&&s| s != usize::MAX).count()
    }

    /// Dense `2ⁿ × (2ⁿ − 1)` matrix.
    pub fn dense(&self) -> DiagonalResult<RealMatrix> {
        if self.n > MAX_DENSE_MAP_QUBITS {
            return Err(DiagonalError::QubitCount {
                n: self.n,
                max: MAX_DENSE_MAP_QUBITS,
            });
        }
        Ok(RealMatrix::from_fn(self.rows(), self.cols(), |x, j| self.entry(x, j)))
    }

    /// `M · angles` in `O(n·2ⁿ)`.
    pub fn apply(&self, angles: &[f64]) -> DiagonalResult<Vec<f64>> {
        apply_characters(self.n, &self.columns, angles)
    }

    /// Angles reproducing `phases` up to their mean, in `O(n·2ⁿ)`.
    ///
    /// Uses `MᵀM = (2ⁿ/4)·I`: the angles are `(4/2ⁿ)·Mᵀ·phases`, and `Mᵀ`
    /// reduces to reading the Walsh spectrum at each column's mask. The mean
    /// of `phases` sits on the constant character, which no column carries, so
    /// it drops out.
    pub fn solve(&self, phases: &[f64]) -> DiagonalResult<Vec<f64>> {
        self.check_phases(phases)?;
        let mut spectrum = phases.to_vec();
        fwht(&mut spectrum)?;
        let scale = 2.0 / self.rows() as f64;
        Ok(self
            .columns
            .iter()
            .map(|ch| scale * f64::from(ch.sign) * spectrum[ch.mask])
            .collect())
    }

    /// The same solve through an explicit dense `Mᵀ` product; `O(4ⁿ)`.
    pub fn solve_dense(&self, phases: &[f64]) -> DiagonalResult<Vec<f64>> {
        self.check_phases(phases)?;
        let m = self.dense()?;
        let scale = 4.0 / self.rows() as f64;
        Ok(m.transpose()
            .mul_vec(phases)?
            .into_iter()
            .map(|v| v * scale)
            .collect())
    }

    fn check_phases(&self, phases: &[f64]) -> DiagonalResult<()> {
        if phases.len() != self.rows() {
            return Err(CircuitError::PhaseLength {
                n: self.n,
                expected: self.rows(),
                found: phases.len(),
            }
            .into());
        }
        Ok(())
    }

    /// Re-derives a sample of columns from unit impulses through the phase
    /// propagation simulator, snaps them to `±1/2`, and checks superposition
    /// of two random angle vectors.
    fn verify_against_simulator(&self) -> DiagonalResult<()> {
        let (n, dim, cols) = (self.n, self.rows(), self.cols());
        let (col_budget, state_budget) = match n {
            0..=8 => (cols, dim),
            9..=10 => (32, dim),
            11..=12 => (32, 1024),
            _ => (8, 256),
        };
        let states = spread(dim, state_budget);
        let columns = spread(cols, col_budget);
        let mut impulse = vec![0.0; cols];
        for &j in &columns {
            impulse[j] = 1.0;
            let c = build_ansatz(n, &impulse, self.kind)?;
            impulse[j] = 0.0;
            let phases = diag_phases_at(&c, &states)?;
            for (&x, &p) in states.iter().zip(&phases) {
                let snapped = if p < 0.0 { -0.5 } else { 0.5 };
                if (p - snapped).abs() > tol::SNAP {
                    return Err(DiagonalError::SnapDeviation { column: j, state: x, value: p });
                }
                if snapped != self.entry(x, j) {
                    return Err(DiagonalError::Inconsistent {
                        column: j,
                        state: x,
                        expected: self.entry(x, j),
                        found: snapped,
                    });
                }
            }
        }

        let mut r = rng::stream(0x5EED, rng::purpose::TARGETS);
        let a: Vec<f64> = (0..cols).map(|_| r.gen_range(-3.0..3.0)).collect();
        let b: Vec<f64> = (0..cols).map(|_| r.gen_range(-3.0..3.0)).collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let at = |angles: &[f64]| -> DiagonalResult<Vec<f64>> {
            Ok(diag_phases_at(&build_ansatz(n, angles, self.kind)?, &states)?)
        };
        let (pa, pb, ps) = (at(&a)?, at(&b)?, at(&sum)?);
        let predicted = self.apply(&a)?;
        let mut deviation: f64 = 0.0;
        for (k, &x) in states.iter().enumerate() {
            deviation = deviation
                .max((ps[k] - pa[k] - pb[k]).abs())
                .max((pa[k] - predicted[x]).abs());
        }
        // Accumulated rounding grows with the number of gates touching a state.
        let bound = tol::RESIDUAL * (cols as f64).sqrt().max(1.0) / 8.0;
        if deviation > bound.max(tol::SIMULATOR_AGREEMENT) {
            return Err(DiagonalError::NonLinear { deviation });
        }
        Ok(())
    }
}

/// Up to `budget` indices spread evenly over `0..len`, always including both ends.
fn spread(len: usize, budget: usize) -> Vec<usize> {
    if budget >= len {
        return (0..len).collect();
    }
    let mut out: Vec<usize> = (0..budget)
        .map(|k| k * (len - 1) / (budget - 1).max(1))
        .collect();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::diag_phases;
    use crate::numkit::{lstsq, rank, LeastSquares, RealMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn single_qubit_map() {
        let m = PhaseMap::build(1, SequenceKind::BinaryTree).unwrap();
        assert_eq!(m.dense().unwrap().to_rows(), vec![vec![-0.5], vec![0.5]]);
    }

    #[test]
    fn two_qubit_map() {
        let m = PhaseMap::build(2, SequenceKind::BinaryTree).unwrap().dense().unwrap();
        let expected = vec![
            vec![-0.5, -0.5, -0.5],
            vec![-0.5, 0.5, 0.5],
            vec![0.5, -0.5, 0.5],
            vec![0.5, 0.5, -0.5],
        ];
        assert_eq!(m.to_rows(), expected);
    }

    #[test]
    fn columns_match_full_impulse_extraction() {
        for kind in SequenceKind::ALL {
            for n in 1..=5 {
                let m = PhaseMap::build(n, kind).unwrap();
                let cols = angle_count(n);
                for j in 0..cols {
                    let mut e = vec![0.0; cols];
                    e[j] = 1.0;
                    let p = diag_phases(&build_ansatz(n, &e, kind).unwrap()).unwrap();
                    for (x, v) in p.as_slice().iter().enumerate() {
                        assert_eq!(*v, m.entry(x, j), "{kind} n={n} col={j} x={x}");
                    }
                }
            }
        }
    }

    #[test]
    fn regression_oracle_recovers_map() {
        // Fit M from 200 random (angles, phases) pairs: Y = X·Mᵀ.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in SequenceKind::ALL {
            for n in 3..=5 {
                let cols = angle_count(n);
                let samples = 200;
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for _ in 0..samples {
                    let a: Vec<f64> = (0..cols).map(|_| rng.gen_range(-PI..PI)).collect();
                    ys.push(diag_phases(&build_ansatz(n, &a, kind).unwrap()).unwrap().into_vec());
                    xs.push(a);
                }
                let x = RealMatrix::from_rows(&xs).unwrap();
                let solver = LeastSquares::new(&x).unwrap();
                let m = PhaseMap::build(n, kind).unwrap().dense().unwrap();
                let mut dev: f64 = 0.0;
                for row in 0..(1 << n) {
                    let y: Vec<f64> = ys.iter().map(|p| p[row]).collect();
                    let fitted = solver.solve(&y).unwrap();
                    for (j, f) in fitted.iter().enumerate() {
                        dev = dev.max((f - m.get(row, j)).abs());
                    }
                }
                assert!(dev < 1e-9, "{kind} n={n}: {dev}");
            }
        }
    }

    #[test]
    fn structure_up_to_ten_qubits() {
        for kind in SequenceKind::ALL {
            for n in 1..=10 {
                let m = PhaseMap::build(n, kind).unwrap();
                assert_eq!(m.rank(), (1 << n) - 1);
                let d = m.dense().unwrap();
                for j in 0..m.cols() {
                    let col = d.column(j);
                    assert!(col.iter().all(|v| v.abs() == 0.5));
                    assert_eq!(col.iter().sum::<f64>(), 0.0);
                }
            }
        }
    }

    #[test]
    fn dense_rank_agrees_for_small_maps() {
        for kind in SequenceKind::ALL {
            for n in 1..=6 {
                let d = PhaseMap::build(n, kind).unwrap().dense().unwrap();
                assert_eq!(rank(&d), (1 << n) - 1);
            }
        }
    }

    #[test]
    fn fast_dense_and_lstsq_solves_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for kind in SequenceKind::ALL {
            for n in 1..=7 {
                let m = PhaseMap::build(n, kind).unwrap();
                let d = m.dense().unwrap();
                let mut y: Vec<f64> = (0..m.rows()).map(|_| rng.gen_range(-PI..PI)).collect();
                let mean = y.iter().sum::<f64>() / y.len() as f64;
                y.iter_mut().for_each(|v| *v -= mean);
                let fast = m.solve(&y).unwrap();
                let dense = m.solve_dense(&y).unwrap();
                let oracle = lstsq(&d, &y).unwrap();
                for k in 0..fast.len() {
                    assert!((fast[k] - dense[k]).abs() < 1e-12);
                    assert!((fast[k] - oracle[k]).abs() < 1e-9);
                }
                let back = m.apply(&fast).unwrap();
                let dense_back = d.mul_vec(&fast).unwrap();
                for x in 0..y.len() {
                    assert!((back[x] - y[x]).abs() < 1e-12);
                    assert!((back[x] - dense_back[x]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn characters_track_x_gates() {
        // X·RZ(θ)·X flips the sign of the response.
        let c = Circuit::from_gates(1, [Gate::x(0), Gate::rz(0, 1.0), Gate::x(0)]).unwrap();
        assert_eq!(rz_characters(&c).unwrap(), vec![Character { mask: 1, sign: 1 }]);
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1), Gate::rz(1, 1.0)]).unwrap();
        assert!(matches!(
            rz_characters(&c),
            Err(DiagonalError::Circuit(CircuitError::NotDiagonal { .. }))
        ));
        let c = Circuit::from_gates(1, [Gate::h(0)]).unwrap();
        assert!(rz_characters(&c).is_err());
    }

    #[test]
    fn large_maps_build() {
        for n in [12, 14] {
            let m = PhaseMap::build(n, SequenceKind::BinaryTree).unwrap();
            assert_eq!(m.rank(), (1 << n) - 1);
        }
        assert!(PhaseMap::build(13, SequenceKind::StrangeFractal).unwrap().dense().is_err());
    }

    #[test]
    fn spread_covers_ends() {
        assert_eq!(spread(10, 3), vec![0, 4, 9]);
        assert_eq!(spread(3, 8), vec![0, 1, 2]);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn ansatz_response_is_linear(seed in 0u64..10_000, n in 1usize..=8, tree in proptest::bool::ANY) {
            let kind = if tree { SequenceKind::BinaryTree } else { SequenceKind::StrangeFractal };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cols = angle_count(n);
            let a: Vec<f64> = (0..cols).map(|_| rng.gen_range(-PI..PI)).collect();
            let b: Vec<f64> = (0..cols).map(|_| rng.gen_range(-PI..PI)).collect();
            let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let p = |v: &[f64]| diag_phases(&build_ansatz(n, v, kind).unwrap()).unwrap().into_vec();
            let (pa, pb, ps) = (p(&a), p(&b), p(&s));
            for x in 0..pa.len() {
                proptest::prop_assert!((ps[x] - pa[x] - pb[x]).abs() < 1e-10);
            }
        }
    }
}
