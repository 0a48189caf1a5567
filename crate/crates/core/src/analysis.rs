//! Instrumentation of the plane-tester robustness argument.
//!
//! Every plane of a word `M` gets an opinion: the nearest codeword of
//! `C^(m-1)` to its view. From the opinions we build the inconsistency
//! tensor `E` (points where two planes through the point disagree), the set
//! of almost-fixed points, heavy planes and lines, the sub-cube `S` left
//! after deleting heavy planes, and finally an upper bound on
//! `delta(M, C^m)` together with a codeword witnessing it.
//!
//! Each step records the inequality it is supposed to satisfy so callers can
//! check it instead of trusting it.

use serde::Serialize;
use serde_json::json;

use crate::code::{hamming_distance, ErasureOutcome, PartialWord};
use crate::error::{shape, Result};
use crate::field::PrimeField;
use crate::tensor::{line_starts, LineIndex, PartialTensor, PlaneIndex, TensorCode, TensorWord};
use crate::Rational;

/// The opinion of one plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opinion {
    pub plane: PlaneIndex,
    pub codeword: Vec<u32>,
    pub distance: u32,
}

/// Opinions for all `m * n` planes, indexed by `axis * n + index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpinionTable {
    m: usize,
    n: usize,
    opinions: Vec<Opinion>,
}

impl OpinionTable {
    pub fn get(&self, plane: PlaneIndex) -> &Opinion {
        &self.opinions[plane.axis * self.n + plane.index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Opinion> {
        self.opinions.iter()
    }

    /// Mean of `delta(M|_pl, r(pl))` over a uniform plane.
    pub fn mean_local_distance(&self) -> Rational {
        let total: i128 = self.opinions.iter().map(|o| o.distance as i128).sum();
        let plane_len = self.n.pow(self.m as u32 - 1) as i128;
        Rational::new(total, self.opinions.len() as i128 * plane_len)
    }

    // r(pl)|_p for a tensor point given by linear index.
    #[inline]
    fn value_at(&self, plane: PlaneIndex, linear: usize) -> u32 {
        self.get(plane).codeword[plane.local_position(self.m, self.n, linear)]
    }
}

pub fn compute_opinions(word: &TensorWord, code: &TensorCode) -> Result<OpinionTable> {
    check_input(word, code)?;
    let (m, n) = (code.axes(), code.side());
    let plane_code = code.lower()?.flat_code()?;
    let mut opinions = Vec::with_capacity(m * n);
    for axis in 0..m {
        for index in 0..n {
            let plane = PlaneIndex::new(axis, index);
            let view = word.extract_plane(plane)?;
            let (codeword, distance) = plane_code.nearest_codeword(view.data())?;
            opinions.push(Opinion {
                plane,
                codeword,
                distance,
            });
        }
    }
    Ok(OpinionTable { m, n, opinions })
}

fn check_input(word: &TensorWord, code: &TensorCode) -> Result<()> {
    if code.axes() < 3 {
        return Err(shape("the robustness analysis needs m >= 3"));
    }
    if word.axes() != code.axes() || word.side() != code.side() || word.field() != code.field() {
        return Err(shape("word does not match the tensor code"));
    }
    Ok(())
}

/// `E`, `ToFix` and the heavy structure derived from an opinion table.
#[derive(Debug, Clone)]
pub struct InconsistencyReport {
    m: usize,
    n: usize,
    base_distance: u32,
    /// Binary tensor over GF(2): 1 where two planes through the point disagree.
    pub e: TensorWord,
    /// Linear indices of almost-fixed points, ascending.
    pub to_fix: Vec<usize>,
    pub heavy_planes: Vec<PlaneIndex>,
    pub heavy_lines: Vec<LineIndex>,
    /// Smallest number of disagreements seen between two intersecting
    /// planes that disagree at all, over their common region.
    pub min_pair_disagreement: Option<usize>,
}

impl InconsistencyReport {
    pub fn weight_e(&self) -> usize {
        self.e.data().iter().filter(|&&v| v != 0).count()
    }

    /// `wt(E) = |E| / n^m`.
    pub fn relative_weight_e(&self) -> Rational {
        Rational::new(self.weight_e() as i128, self.e.len() as i128)
    }

    pub fn num_to_fix(&self) -> usize {
        self.to_fix.len()
    }

    pub fn axes(&self) -> usize {
        self.m
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn base_distance(&self) -> u32 {
        self.base_distance
    }

    /// Heavy-plane threshold `(delta(C) n)^(m-1) / 2 = d^(m-1) / 2`.
    pub fn heavy_plane_threshold(&self) -> Rational {
        Rational::new((self.base_distance as i128).pow(self.m as u32 - 1), 2)
    }

    /// Two intersecting planes that disagree somewhere disagree on at least
    /// `d^(m-2)` points of their intersection.
    pub fn pairwise_bound_holds(&self) -> bool {
        let need = (self.base_distance as usize).pow(self.m as u32 - 2);
        self.min_pair_disagreement.is_none_or(|d| d >= need)
    }

    /// ToFix and the support of E must be disjoint.
    pub fn to_fix_disjoint(&self) -> bool {
        self.to_fix.iter().all(|&p| self.e.data()[p] == 0)
    }
}

pub fn inconsistency(
    word: &TensorWord,
    code: &TensorCode,
    opinions: &OpinionTable,
) -> Result<InconsistencyReport> {
    check_input(word, code)?;
    let (m, n) = (code.axes(), code.side());
    let d = code.base().minimum_distance()?;
    let len = word.len();
    let mut e = vec![0u32; len];
    let mut to_fix = Vec::new();
    let mut coords = vec![0usize; m];
    for (p, mark) in e.iter_mut().enumerate() {
        let mut rest = p;
        for c in coords.iter_mut().rev() {
            *c = rest % n;
            rest /= n;
        }
        let first = opinions.value_at(PlaneIndex::new(0, coords[0]), p);
        let agree = (1..m).all(|b| opinions.value_at(PlaneIndex::new(b, coords[b]), p) == first);
        if !agree {
            *mark = 1;
        } else if first != word.data()[p] {
            to_fix.push(p);
        }
    }

    let mut heavy_planes = Vec::new();
    let threshold = (d as usize).pow(m as u32 - 1);
    for axis in 0..m {
        for index in 0..n {
            let pl = PlaneIndex::new(axis, index);
            let count = pl
                .positions(m, n)
                .into_iter()
                .filter(|&i| e[i] != 0)
                .count();
            if 2 * count >= threshold {
                heavy_planes.push(pl);
            }
        }
    }

    let mut heavy_lines = Vec::new();
    for axis in 0..m {
        for (start, step) in line_starts(m, n, axis) {
            let count = (0..n).filter(|&i| e[start + i * step] != 0).count();
            if count >= d as usize {
                let point = word.point(start);
                heavy_lines.push(LineIndex::through(axis, &point));
            }
        }
    }

    let mut min_pair_disagreement = None;
    for b1 in 0..m {
        for b2 in b1 + 1..m {
            for i1 in 0..n {
                for i2 in 0..n {
                    let (p1, p2) = (PlaneIndex::new(b1, i1), PlaneIndex::new(b2, i2));
                    let differ = p1
                        .positions(m, n)
                        .into_iter()
                        .filter(|&p| p2.contains_point(&word.point(p)))
                        .filter(|&p| opinions.value_at(p1, p) != opinions.value_at(p2, p))
                        .count();
                    if differ > 0 {
                        min_pair_disagreement =
                            Some(min_pair_disagreement.map_or(differ, |x: usize| x.min(differ)));
                    }
                }
            }
        }
    }

    Ok(InconsistencyReport {
        m,
        n,
        base_distance: d,
        e: TensorWord::new(PrimeField::binary(), m, n, e)?,
        to_fix,
        heavy_planes,
        heavy_lines,
        min_pair_disagreement,
    })
}

/// Both sides of `rho(M) >= wt(E)/m + NumToFix/n^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InconsistencyBound {
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
}

pub fn check_inconsistency_bound(report: &InconsistencyReport, opinions: &OpinionTable) -> InconsistencyBound {
    let lhs = opinions.mean_local_distance();
    let rhs = report.relative_weight_e() / Rational::from_integer(report.m as i128)
        + Rational::new(report.num_to_fix() as i128, report.e.len() as i128);
    InconsistencyBound {
        lhs,
        rhs,
        holds: lhs >= rhs,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeavyCoverCheck {
    pub holds: bool,
    /// Support points of `E` lying in no heavy plane.
    pub counterexamples: Vec<usize>,
}

/// Every point of `supp(E)` must lie in some heavy plane.
pub fn verify_heavy_cover(report: &InconsistencyReport) -> HeavyCoverCheck {
    let (m, n) = (report.m, report.n);
    let mut heavy = vec![false; m * n];
    for pl in &report.heavy_planes {
        heavy[pl.axis * n + pl.index] = true;
    }
    let counterexamples: Vec<usize> = report
        .e
        .data()
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v != 0)
        .map(|(p, _)| p)
        .filter(|&p| {
            let point = report.e.point(p);
            !(0..m).any(|b| heavy[b * n + point[b]])
        })
        .collect();
    HeavyCoverCheck {
        holds: counterexamples.is_empty(),
        counterexamples,
    }
}

/// `S_1 x ... x S_m`: the sub-cube left after deleting the heavy planes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SSets {
    pub sets: Vec<Vec<usize>>,
    pub removed: usize,
    /// `E|_S = 0`.
    pub e_vanishes: bool,
    /// `removed * d^(m-1) <= 2 |E| m`.
    pub removal_bound_holds: bool,
}

impl SSets {
    /// The full cube `[n]^m`.
    pub fn full(m: usize, n: usize) -> Self {
        SSets {
            sets: vec![(0..n).collect(); m],
            removed: 0,
            e_vanishes: true,
            removal_bound_holds: true,
        }
    }

    /// Keeps `sets[b]` on axis `b`; the derived checks are left trivially true.
    pub fn from_sets(n: usize, sets: Vec<Vec<usize>>) -> Self {
        let removed = sets.iter().map(|s| n - s.len()).sum();
        SSets {
            sets,
            removed,
            e_vanishes: true,
            removal_bound_holds: true,
        }
    }

    pub fn contains(&self, point: &[usize]) -> bool {
        point
            .iter()
            .zip(&self.sets)
            .all(|(c, s)| s.binary_search(c).is_ok())
    }
}

pub fn build_s_sets(report: &InconsistencyReport) -> SSets {
    let (m, n) = (report.m, report.n);
    let mut keep = vec![vec![true; n]; m];
    for pl in &report.heavy_planes {
        keep[pl.axis][pl.index] = false;
    }
    let sets: Vec<Vec<usize>> = keep
        .iter()
        .map(|k| (0..n).filter(|&i| k[i]).collect())
        .collect();
    let mut s = SSets::from_sets(n, sets);
    s.e_vanishes = report
        .e
        .data()
        .iter()
        .enumerate()
        .all(|(p, &v)| v == 0 || !s.contains(&report.e.point(p)));
    let d_pow = (report.base_distance as u128).pow(m as u32 - 1);
    s.removal_bound_holds = s.removed as u128 * d_pow <= 2 * report.weight_e() as u128 * m as u128;
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtendOutcome {
    Extended(TensorWord),
    Ambiguous,
    Inconsistent,
}

/// Completes the values of `partial` on `S` to a codeword of `C^m` by
/// erasure-decoding lines axis by axis. Entries of `partial` outside `S` are
/// ignored.
pub fn extend_from_subcube(
    partial: &PartialTensor,
    code: &TensorCode,
    s: &SSets,
) -> Result<ExtendOutcome> {
    let (m, n) = (code.axes(), code.side());
    if partial.axes() != m || partial.side() != n || partial.field() != code.field() {
        return Err(shape("partial tensor does not match the tensor code"));
    }
    if s.sets.len() != m || s.sets.iter().flatten().any(|&i| i >= n) {
        return Err(shape("S-sets do not match the tensor shape"));
    }
    let len = partial.entries().len();
    let mut point = vec![0usize; m];
    let decode_point = |p: usize, point: &mut [usize]| {
        let mut rest = p;
        for c in point.iter_mut().rev() {
            *c = rest % n;
            rest /= n;
        }
    };
    let mut data: Vec<Option<u32>> = vec![None; len];
    for (p, slot) in data.iter_mut().enumerate() {
        decode_point(p, &mut point);
        if s.contains(&point) {
            *slot = Some(
                partial.entries()[p]
                    .ok_or_else(|| shape(format!("entry {p} inside S is erased")))?,
            );
        }
    }
    let mut in_set = vec![vec![false; n]; m];
    for (b, set) in s.sets.iter().enumerate() {
        for &i in set {
            in_set[b][i] = true;
        }
    }
    let base = code.base();
    for axis in 0..m {
        for (start, step) in line_starts(m, n, axis) {
            decode_point(start, &mut point);
            // Axes after this one must still lie in S; earlier ones are filled.
            if !(axis + 1..m).all(|a| in_set[a][point[a]]) {
                continue;
            }
            let entries: Vec<Option<u32>> = (0..n)
                .map(|i| {
                    if in_set[axis][i] {
                        data[start + i * step]
                    } else {
                        None
                    }
                })
                .collect();
            if entries.iter().all(Option::is_none) {
                return Ok(ExtendOutcome::Ambiguous);
            }
            match base.erasure_decode(&PartialWord::new(entries)?)? {
                ErasureOutcome::Decoded(line) => {
                    for (i, v) in line.into_iter().enumerate() {
                        data[start + i * step] = Some(v);
                    }
                }
                ErasureOutcome::Ambiguous => return Ok(ExtendOutcome::Ambiguous),
                ErasureOutcome::Inconsistent => return Ok(ExtendOutcome::Inconsistent),
            }
        }
    }
    let full: Vec<u32> = data
        .into_iter()
        .map(|v| v.expect("every line filled"))
        .collect();
    let word = TensorWord::new(code.field(), m, n, full)?;
    if !code.contains(&word)? {
        return Ok(ExtendOutcome::Inconsistent);
    }
    Ok(ExtendOutcome::Extended(word))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `wt(E) < delta(C)^m / (2m)`: the sub-cube argument applies.
    SmallInconsistency,
    /// `wt(E) >= delta(C)^m / (2m)`: robustness is large outright; the
    /// distance bound is the trivial 1.
    LargeInconsistency,
}

/// Upper bound on `delta(M, C^m)` with an explicit codeword when one can be built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceCertificate {
    pub bound: Rational,
    pub branch: Branch,
    pub witness: Option<TensorWord>,
    pub witness_distance: Option<usize>,
}

fn certify(
    word: &TensorWord,
    code: &TensorCode,
    opinions: &OpinionTable,
    report: &InconsistencyReport,
    s: &SSets,
) -> Result<DistanceCertificate> {
    let m = code.axes() as i128;
    let delta = code.base().relative_distance()?;
    let wt_e = report.relative_weight_e();
    let threshold = delta.pow(m as i32) / Rational::from_integer(2 * m);
    if wt_e >= threshold {
        return Ok(DistanceCertificate {
            bound: Rational::from_integer(1),
            branch: Branch::LargeInconsistency,
            witness: None,
            witness_distance: None,
        });
    }
    let bound = Rational::from_integer(2 * m) * wt_e / delta.pow(m as i32 - 1)
        + Rational::new(report.num_to_fix() as i128, word.len() as i128);

    // Consensus of the plane opinions on S, extended to the whole cube.
    let mut entries = vec![None; word.len()];
    for (p, slot) in entries.iter_mut().enumerate() {
        let point = word.point(p);
        if s.contains(&point) {
            *slot = Some(opinions.value_at(PlaneIndex::new(0, point[0]), p));
        }
    }
    let partial = PartialTensor::new(word.field(), word.axes(), word.side(), entries)?;
    let (witness, witness_distance) = match extend_from_subcube(&partial, code, s)? {
        ExtendOutcome::Extended(c) => {
            let dist = hamming_distance(c.data(), word.data());
            (Some(c), Some(dist))
        }
        _ => (None, None),
    };
    Ok(DistanceCertificate {
        bound,
        branch: Branch::SmallInconsistency,
        witness,
        witness_distance,
    })
}

pub fn certified_distance_bound(
    word: &TensorWord,
    code: &TensorCode,
) -> Result<DistanceCertificate> {
    Ok(analyze(word, code)?.certificate)
}

/// All of the above for one word.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub opinions: OpinionTable,
    pub report: InconsistencyReport,
    pub inconsistency_bound: InconsistencyBound,
    pub heavy_cover: HeavyCoverCheck,
    pub s_sets: SSets,
    pub certificate: DistanceCertificate,
}

pub fn analyze(word: &TensorWord, code: &TensorCode) -> Result<Analysis> {
    let opinions = compute_opinions(word, code)?;
    let report = inconsistency(word, code, &opinions)?;
    let inconsistency_bound = check_inconsistency_bound(&report, &opinions);
    let heavy_cover = verify_heavy_cover(&report);
    let s_sets = build_s_sets(&report);
    let certificate = certify(word, code, &opinions, &report, &s_sets)?;
    Ok(Analysis {
        opinions,
        report,
        inconsistency_bound,
        heavy_cover,
        s_sets,
        certificate,
    })
}

impl Analysis {
    /// JSON report. Planes and lines use 1-based axes and coordinates.
    pub fn to_json(&self) -> serde_json::Value {
        let r = &self.report;
        let planes: Vec<[usize; 2]> = r
            .heavy_planes
            .iter()
            .map(|p| [p.axis + 1, p.index + 1])
            .collect();
        let lines: Vec<serde_json::Value> = r
            .heavy_lines
            .iter()
            .map(|l| {
                json!({
                    "axis": l.axis + 1,
                    "fixed": l.fixed.iter().map(|i| i + 1).collect::<Vec<_>>(),
                })
            })
            .collect();
        let to_fix: Vec<Vec<usize>> = r
            .to_fix
            .iter()
            .map(|&p| r.e.point(p).into_iter().map(|c| c + 1).collect())
            .collect();
        json!({
            "schema": 1,
            "m": r.m,
            "n": r.n,
            "wt_E": r.weight_e(),
            "wt_E_relative": r.relative_weight_e().to_string(),
            "num_to_fix": r.num_to_fix(),
            "to_fix": to_fix,
            "heavy_planes": planes,
            "heavy_lines": lines,
            "removed_planes": self.s_sets.removed,
            "s_sets": self.s_sets.sets.iter()
                .map(|s| s.iter().map(|i| i + 1).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "e_vanishes_on_s": self.s_sets.e_vanishes,
            "removal_bound_holds": self.s_sets.removal_bound_holds,
            "heavy_cover_holds": self.heavy_cover.holds,
            "pairwise_bound_holds": r.pairwise_bound_holds(),
            "bound_lhs": self.inconsistency_bound.lhs.to_string(),
            "bound_rhs": self.inconsistency_bound.rhs.to_string(),
            "inconsistency_bound_holds": self.inconsistency_bound.holds,
            "branch": self.certificate.branch,
            "distance_bound": self.certificate.bound.to_string(),
            "witness_distance": self.certificate.witness_distance,
        })
    }
}
