//! The plane tester for `C^m`, its robustness, and the composed `n^2`-query
//! tester obtained by chaining plane testers down to a 2-axis view.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::tensor::{PlaneIndex, TensorCode, TensorWord};
use crate::{derive_seed, Rational};

/// Largest number of tester paths enumerated in exact mode.
pub const MAX_EXACT_PATHS: u64 = 1 << 22;

/// Which axes the tester draws `b` from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxesMode {
    /// `b` uniform over all `m` axes.
    #[default]
    All,
    /// `b` uniform over the first three axes only.
    First3,
}

impl AxesMode {
    pub fn count(self, m: usize) -> usize {
        match self {
            AxesMode::All => m,
            AxesMode::First3 => m.min(3),
        }
    }
}

/// Picks a uniformly random `(b, i)`-plane of an input to `C^m`, `m >= 3`.
#[derive(Debug, Clone)]
pub struct PlaneTester {
    code: TensorCode,
    axes: AxesMode,
}

impl PlaneTester {
    pub fn new(code: TensorCode) -> Result<Self> {
        if code.axes() < 3 {
            return Err(shape("the plane tester needs m >= 3"));
        }
        Ok(PlaneTester {
            code,
            axes: AxesMode::All,
        })
    }

    pub fn with_axes(mut self, axes: AxesMode) -> Self {
        self.axes = axes;
        self
    }

    pub fn code(&self) -> &TensorCode {
        &self.code
    }

    pub fn axes_mode(&self) -> AxesMode {
        self.axes
    }

    /// Every plane the tester can return, each equally likely.
    pub fn planes(&self) -> Vec<PlaneIndex> {
        let n = self.code.side();
        (0..self.axes.count(self.code.axes()))
            .flat_map(|b| (0..n).map(move |i| PlaneIndex::new(b, i)))
            .collect()
    }

    pub fn sample_plane<R: Rng + ?Sized>(&self, rng: &mut R) -> PlaneIndex {
        let n = self.code.side();
        let total = self.axes.count(self.code.axes()) * n;
        let pick = rng.gen_range(0..total);
        PlaneIndex::new(pick / n, pick % n)
    }

    /// `E_pl[ delta(M|_pl, C^(m-1)) ]` over the tester's plane distribution.
    pub fn robustness_exact(&self, word: &TensorWord) -> Result<Rational> {
        check_shape(&self.code, word)?;
        let plane_code = self.code.lower()?.flat_code()?;
        let planes = self.planes();
        let total: u64 = planes
            .iter()
            .map(|&pl| -> Result<u64> {
                let view = word.extract_plane(pl)?;
                Ok(plane_code.distance_to_code(view.data())? as u64)
            })
            .sum::<Result<u64>>()?;
        let denom = planes.len() as i128 * plane_code.n() as i128;
        Ok(Rational::new(total as i128, denom))
    }
}

fn check_shape(code: &TensorCode, word: &TensorWord) -> Result<()> {
    if word.axes() != code.axes() || word.side() != code.side() || word.field() != code.field() {
        return Err(shape("word does not match the tensor code"));
    }
    Ok(())
}

/// `delta(C)^m / (2 m^2)`, the guaranteed robustness of the plane tester for `C^m`.
pub fn theorem_bound(code: &TensorCode) -> Result<Rational> {
    let delta = code.base().relative_distance()?;
    let m = code.axes() as i128;
    Ok(delta.pow(m as i32) / Rational::from_integer(2 * m * m))
}

/// Product of [`theorem_bound`] over `C^m, C^(m-1), ..., C^3`: the
/// rejection-rate constant of the composed tester.
pub fn composed_bound(code: &TensorCode) -> Result<Rational> {
    let mut acc = Rational::from_integer(1);
    for j in 3..=code.axes() {
        acc *= theorem_bound(&TensorCode::new(code.base().clone(), j)?)?;
    }
    Ok(acc)
}

/// The view returned by the composed tester.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewOutcome {
    /// Points of `[n]^m` read by the tester, in the view's row-major order.
    pub coordinates: Vec<Vec<usize>>,
    /// Planes chosen at each stage, in coordinates of the shrinking view.
    pub stages: Vec<PlaneIndex>,
    pub view: TensorWord,
    pub consistent: bool,
    pub local_relative_distance: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum RejectionMode {
    Exact,
    Sampled { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampledEstimate {
    pub rejections: u64,
    pub trials: u64,
    pub seed: u64,
    pub estimate: f64,
    pub std_error: f64,
}

impl SampledEstimate {
    fn new(rejections: u64, trials: u64, seed: u64) -> Self {
        let estimate = rejections as f64 / trials as f64;
        let std_error = (estimate * (1.0 - estimate) / trials as f64).sqrt();
        SampledEstimate {
            rejections,
            trials,
            seed,
            estimate,
            std_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RejectionProbability {
    Exact(Rational),
    Sampled(SampledEstimate),
}

impl RejectionProbability {
    pub fn value(&self) -> f64 {
        match self {
            RejectionProbability::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            RejectionProbability::Sampled(s) => s.estimate,
        }
    }
}

/// Plane testers for `C^m, C^(m-1), ..., C^3` run in sequence, each on the
/// previous stage's view, ending in an `n x n` view checked against `C^2`.
#[derive(Debug, Clone)]
pub struct ComposedTester {
    code: TensorCode,
    square: TensorCode,
    axes: AxesMode,
}

impl ComposedTester {
    pub fn new(code: TensorCode) -> Result<Self> {
        if code.axes() < 3 {
            return Err(shape("the composed tester needs m >= 3"));
        }
        let square = TensorCode::new(code.base().clone(), 2)?;
        Ok(ComposedTester {
            code,
            square,
            axes: AxesMode::All,
        })
    }

    pub fn with_axes(mut self, axes: AxesMode) -> Self {
        self.axes = axes;
        self
    }

    pub fn code(&self) -> &TensorCode {
        &self.code
    }

    /// Number of equally likely stage-choice paths.
    pub fn path_count(&self) -> Option<u64> {
        let n = self.code.side() as u64;
        (3..=self.code.axes()).try_fold(1u64, |acc, j| {
            acc.checked_mul(self.axes.count(j) as u64 * n)
        })
    }

    // Each stage draws from its own ChaCha stream keyed off one draw of `rng`.
    fn sample_stages<R: RngCore + ?Sized>(&self, rng: &mut R) -> Vec<PlaneIndex> {
        let base = rng.next_u64();
        let n = self.code.side();
        (0..self.code.axes() - 2)
            .map(|stage| {
                let axes_now = self.code.axes() - stage;
                let mut stage_rng = ChaCha8Rng::seed_from_u64(derive_seed(base, stage as u64));
                let total = self.axes.count(axes_now) * n;
                let pick = stage_rng.gen_range(0..total);
                PlaneIndex::new(pick / n, pick % n)
            })
            .collect()
    }

    fn apply_stages(&self, word: &TensorWord, stages: &[PlaneIndex]) -> Result<TensorWord> {
        let mut view = word.clone();
        for &pl in stages {
            view = view.extract_plane(pl)?;
        }
        Ok(view)
    }

    pub fn composed_view<R: RngCore + ?Sized>(
        &self,
        word: &TensorWord,
        rng: &mut R,
    ) -> Result<ViewOutcome> {
        check_shape(&self.code, word)?;
        let stages = self.sample_stages(rng);
        self.view_for(word, &stages)
    }

    /// The outcome for a fixed sequence of stage choices.
    pub fn view_for(&self, word: &TensorWord, stages: &[PlaneIndex]) -> Result<ViewOutcome> {
        check_shape(&self.code, word)?;
        if stages.len() != self.code.axes() - 2 {
            return Err(shape("one plane per stage is required"));
        }
        let m = self.code.axes();
        let n = self.code.side();
        let mut remaining: Vec<usize> = (0..m).collect();
        let mut pinned = vec![None; m];
        for &pl in stages {
            if pl.axis >= remaining.len() {
                return Err(shape(format!("stage plane {pl} out of range")));
            }
            pinned[remaining.remove(pl.axis)] = Some(pl.index);
        }
        let view = self.apply_stages(word, stages)?;
        let coordinates = (0..n * n)
            .map(|local| {
                let free = [local / n, local % n];
                let mut slot = 0;
                pinned
                    .iter()
                    .map(|p| {
                        p.unwrap_or_else(|| {
                            slot += 1;
                            free[slot - 1]
                        })
                    })
                    .collect()
            })
            .collect();
        let consistent = self.square.contains(&view)?;
        let flat = self.square.flat_code()?;
        let local_relative_distance = flat.relative_distance_to_code(view.data())?;
        Ok(ViewOutcome {
            coordinates,
            stages: stages.to_vec(),
            view,
            consistent,
            local_relative_distance,
        })
    }

    pub fn rejection_probability(
        &self,
        word: &TensorWord,
        mode: RejectionMode,
    ) -> Result<RejectionProbability> {
        check_shape(&self.code, word)?;
        match mode {
            RejectionMode::Exact => {
                let paths = self
                    .path_count()
                    .filter(|&p| p <= MAX_EXACT_PATHS)
                    .ok_or_else(|| {
                        Error::Capacity(format!(
                            "exact rejection needs more than {MAX_EXACT_PATHS} tester paths"
                        ))
                    })?;
                let rejected = self.count_rejections(word)?;
                Ok(RejectionProbability::Exact(Rational::new(
                    rejected as i128,
                    paths as i128,
                )))
            }
            RejectionMode::Sampled { trials, seed } => {
                if trials == 0 {
                    return Err(shape("sampled mode needs at least one trial"));
                }
                let rejections = (0..trials)
                    .into_par_iter()
                    .map(|t| -> Result<u64> {
                        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t));
                        let stages = self.sample_stages(&mut rng);
                        let view = self.apply_stages(word, &stages)?;
                        Ok(u64::from(!self.square.contains(&view)?))
                    })
                    .sum::<Result<u64>>()?;
                Ok(RejectionProbability::Sampled(SampledEstimate::new(
                    rejections, trials, seed,
                )))
            }
        }
    }

    fn count_rejections(&self, view: &TensorWord) -> Result<u64> {
        if view.axes() == 2 {
            return Ok(u64::from(!self.square.contains(view)?));
        }
        let n = view.side();
        let mut total = 0;
        for b in 0..self.axes.count(view.axes()) {
            for i in 0..n {
                total += self.count_rejections(&view.extract_plane(PlaneIndex::new(b, i))?)?;
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::LinearCode;

    fn cube(m: usize) -> TensorCode {
        TensorCode::new(LinearCode::parity(3).unwrap(), m).unwrap()
    }

    fn flipped_codeword(code: &TensorCode, at: usize) -> TensorWord {
        let msg: Vec<u32> = (0..code.message_length())
            .map(|i| (i % 3 == 0) as u32)
            .collect();
        let mut w = code.encode(&msg).unwrap();
        w.data_mut()[at] ^= 1;
        w
    }

    #[test]
    fn rejects_small_m() {
        assert!(PlaneTester::new(cube(2)).is_err());
        assert!(ComposedTester::new(cube(2)).is_err());
    }

    #[test]
    fn plane_sampling_is_uniform_and_reproducible() {
        let tester = PlaneTester::new(cube(3)).unwrap();
        assert_eq!(tester.planes().len(), 9);
        let mut counts = std::collections::HashMap::new();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 9000;
        for _ in 0..draws {
            *counts.entry(tester.sample_plane(&mut rng)).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 9);
        let expected = draws as f64 / 9.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 8 degrees of freedom, 0.999 quantile = 26.12.
        assert!(chi2 < 26.12, "chi2 = {chi2}");

        let a: Vec<_> = {
            let mut r = ChaCha8Rng::seed_from_u64(9);
            (0..20).map(|_| tester.sample_plane(&mut r)).collect()
        };
        let b: Vec<_> = {
            let mut r = ChaCha8Rng::seed_from_u64(9);
            (0..20).map(|_| tester.sample_plane(&mut r)).collect()
        };
        assert_eq!(a, b);

        let three = PlaneTester::new(cube(4))
            .unwrap()
            .with_axes(AxesMode::First3);
        assert_eq!(three.planes().len(), 9);
        assert!(three.planes().iter().all(|p| p.axis < 3));
    }

    #[test]
    fn robustness_examples() {
        let code = cube(3);
        let tester = PlaneTester::new(code.clone()).unwrap();
        let cw = code.encode(&[1, 1, 0, 1, 0, 0, 1, 1]).unwrap();
        assert_eq!(
            tester.robustness_exact(&cw).unwrap(),
            Rational::from_integer(0)
        );
        let w = flipped_codeword(&code, 13);
        let rho = tester.robustness_exact(&w).unwrap();
        assert_eq!(rho, Rational::new(1, 27));
        let bound = theorem_bound(&code).unwrap() * Rational::new(1, 27);
        assert!(rho > bound);
    }

    #[test]
    fn theorem_bound_examples() {
        assert_eq!(theorem_bound(&cube(3)).unwrap(), Rational::new(4, 243));
        let rep = TensorCode::new(LinearCode::repetition(3).unwrap(), 3).unwrap();
        assert_eq!(theorem_bound(&rep).unwrap(), Rational::new(1, 18));
        let half = TensorCode::new(LinearCode::parity(4).unwrap(), 4).unwrap();
        assert_eq!(theorem_bound(&half).unwrap(), Rational::new(1, 512));
        assert_eq!(composed_bound(&cube(3)).unwrap(), Rational::new(4, 243));
        let c4 = composed_bound(&cube(4)).unwrap();
        assert_eq!(c4, Rational::new(4, 243) * Rational::new(16, 81 * 32));
    }

    #[test]
    fn composed_views() {
        let code = cube(4);
        let tester = ComposedTester::new(code.clone()).unwrap();
        assert_eq!(tester.path_count(), Some(12 * 9));
        let cw = code.encode(&[1; 16]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let out = tester.composed_view(&cw, &mut rng).unwrap();
            assert_eq!(out.coordinates.len(), 9);
            assert!(out.consistent);
            assert_eq!(out.local_relative_distance, Rational::from_integer(0));
            for (local, pt) in out.coordinates.iter().enumerate() {
                assert_eq!(cw.get(pt).unwrap(), out.view.data()[local]);
            }
            // Two coordinates are pinned across all points.
            let pinned = (0..4)
                .filter(|&a| {
                    out.coordinates
                        .iter()
                        .all(|p| p[a] == out.coordinates[0][a])
                })
                .count();
            assert_eq!(pinned, 2);
        }
        let m3 = ComposedTester::new(cube(3)).unwrap();
        let w = flipped_codeword(&cube(3), 4);
        let out = m3.view_for(&w, &[PlaneIndex::new(0, 0)]).unwrap();
        assert_eq!(out.view, w.extract_plane(PlaneIndex::new(0, 0)).unwrap());
        assert!(!out.consistent);
        assert_eq!(out.local_relative_distance, Rational::new(1, 9));
    }

    #[test]
    fn rejection_examples() {
        let code = cube(3);
        let tester = ComposedTester::new(code.clone()).unwrap();
        let cw = code.encode(&[0, 1, 1, 0, 1, 0, 0, 1]).unwrap();
        assert_eq!(
            tester
                .rejection_probability(&cw, RejectionMode::Exact)
                .unwrap(),
            RejectionProbability::Exact(Rational::from_integer(0))
        );
        let w = flipped_codeword(&code, 22);
        assert_eq!(
            tester
                .rejection_probability(&w, RejectionMode::Exact)
                .unwrap(),
            RejectionProbability::Exact(Rational::new(1, 3))
        );
    }

    #[test]
    fn sampled_rejection_tracks_exact() {
        let code = cube(4);
        let tester = ComposedTester::new(code.clone()).unwrap();
        for at in [0usize, 40, 77] {
            let w = flipped_codeword(&code, at);
            let exact = tester
                .rejection_probability(&w, RejectionMode::Exact)
                .unwrap()
                .value();
            let mode = RejectionMode::Sampled {
                trials: 4000,
                seed: at as u64,
            };
            let RejectionProbability::Sampled(s) = tester.rejection_probability(&w, mode).unwrap()
            else {
                panic!("expected a sampled estimate");
            };
            assert!(
                (s.estimate - exact).abs() <= 3.0 * s.std_error.max(1e-3),
                "{s:?} vs {exact}"
            );
            assert_eq!(
                tester.rejection_probability(&w, mode).unwrap(),
                RejectionProbability::Sampled(s)
            );
        }
    }
}
