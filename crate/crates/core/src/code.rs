//! Linear `[n, k, d]` codes over GF(p).
//!
//! A [`LinearCode`] keeps a full-rank generator `G` and a parity-check matrix
//! `H` with `G * H^T = 0`. Distance, nearest codeword and bounded-distance
//! decoding are exact and brute force, guarded by the caps in
//! [`crate::search`].

use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{shape, Error, Result};
use crate::field::PrimeField;
use crate::matrix::{Matrix, SolveOutcome};
use crate::search::{self, message_digits};
use crate::Rational;

/// Largest syndrome space for which a coset-leader table is built.
pub const MAX_SYNDROME_TABLE: u64 = 1 << 22;

pub struct LinearCode {
    field: PrimeField,
    generator: Matrix,
    parity_check: Matrix,
    distance: OnceLock<u32>,
    syndromes: Mutex<Option<Arc<SyndromeTable>>>,
}

impl Clone for LinearCode {
    fn clone(&self) -> Self {
        LinearCode {
            field: self.field,
            generator: self.generator.clone(),
            parity_check: self.parity_check.clone(),
            distance: self.distance.clone(),
            syndromes: Mutex::new(self.syndromes.lock().unwrap().clone()),
        }
    }
}

impl fmt::Debug for LinearCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearCode")
            .field("field", &self.field)
            .field("n", &self.n())
            .field("k", &self.k())
            .field("distance", &self.distance.get())
            .finish()
    }
}

/// Same code means same field, length and row space.
impl PartialEq for LinearCode {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.n() == other.n()
            && self.k() == other.k()
            && self.generator.rref().matrix == other.generator.rref().matrix
    }
}

impl Eq for LinearCode {}

/// A word with some positions erased.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialWord {
    entries: Vec<Option<u32>>,
}

impl PartialWord {
    pub fn new(entries: Vec<Option<u32>>) -> Result<Self> {
        if !entries.is_empty() && entries.iter().all(Option::is_none) {
            return Err(shape("partial word has no revealed positions"));
        }
        Ok(PartialWord { entries })
    }

    /// Reveals `word` everywhere except the listed positions.
    pub fn with_erasures(word: &[u32], erased: &[usize]) -> Result<Self> {
        let mut entries: Vec<Option<u32>> = word.iter().copied().map(Some).collect();
        for &i in erased {
            let slot = entries
                .get_mut(i)
                .ok_or_else(|| shape(format!("erasure position {i} out of range")))?;
            *slot = None;
        }
        PartialWord::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Option<u32>] {
        &self.entries
    }

    pub fn erasure_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_none()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErasureOutcome {
    Decoded(Vec<u32>),
    /// More than one codeword agrees with the revealed positions.
    Ambiguous,
    /// No codeword agrees with the revealed positions.
    Inconsistent,
}

/// A code read from the text format, with the rank correction noted.
#[derive(Debug, Clone)]
pub struct ParsedCode {
    pub code: LinearCode,
    pub declared_k: usize,
    pub warning: Option<String>,
}

/// Minimum-weight coset leaders, reachable as a parent chain from syndrome 0.
#[derive(Debug)]
struct SyndromeTable {
    radius: u32,
    // Per syndrome index: parent syndrome (u32::MAX = not reached), the
    // position and value added on the last step, and the leader weight.
    parent: Vec<u32>,
    position: Vec<u32>,
    value: Vec<u32>,
    weight: Vec<u32>,
}

pub fn hamming_distance(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn weight(w: &[u32]) -> usize {
    w.iter().filter(|&&v| v != 0).count()
}

impl LinearCode {
    /// Builds the code spanned by the rows of `g`. A full-rank `g` is kept
    /// as given; otherwise it is replaced by its nonzero RREF rows.
    pub fn from_generator(g: &Matrix) -> Result<Self> {
        if g.cols() == 0 {
            return Err(shape("generator has no columns"));
        }
        let field = g.field();
        let red = g.rref();
        if red.rank == 0 {
            return Err(Error::ZeroCode);
        }
        let generator = if red.rank == g.rows() {
            g.clone()
        } else {
            let rows: Vec<Vec<u32>> = (0..red.rank).map(|r| red.matrix.row(r).to_vec()).collect();
            Matrix::from_rows(field, &rows)?
        };
        let parity_check = parity_check_from_rref(&red.matrix, &red.pivots);
        Ok(LinearCode {
            field,
            generator,
            parity_check,
            distance: OnceLock::new(),
            syndromes: Mutex::new(None),
        })
    }

    pub fn from_rows(field: PrimeField, rows: &[Vec<u32>]) -> Result<Self> {
        LinearCode::from_generator(&Matrix::from_rows(field, rows)?)
    }

    /// The `[n, n-1, 2]` single-parity-check code over GF(2).
    pub fn parity(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(shape("parity code needs n >= 2"));
        }
        let rows: Vec<Vec<u32>> = (0..n - 1)
            .map(|i| {
                let mut r = vec![0; n];
                r[i] = 1;
                r[n - 1] = 1;
                r
            })
            .collect();
        LinearCode::from_rows(PrimeField::binary(), &rows)
    }

    /// The `[n, 1, n]` repetition code over GF(2).
    pub fn repetition(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(shape("repetition code needs n >= 1"));
        }
        LinearCode::from_rows(PrimeField::binary(), &[vec![1; n]])
    }

    /// The binary `[7, 4, 3]` Hamming code in systematic form.
    pub fn hamming74() -> Self {
        LinearCode::from_rows(
            PrimeField::binary(),
            &[
                vec![1, 0, 0, 0, 1, 1, 0],
                vec![0, 1, 0, 0, 1, 0, 1],
                vec![0, 0, 1, 0, 0, 1, 1],
                vec![0, 0, 0, 1, 1, 1, 1],
            ],
        )
        .expect("static generator")
    }

    /// Generator `[I_k | R]` with `R` uniform, seeded by `seed`.
    pub fn random(n: usize, k: usize, p: u32, seed: u64) -> Result<Self> {
        if k > n {
            return Err(shape(format!("dimension {k} exceeds length {n}")));
        }
        if k == 0 {
            return Err(Error::ZeroCode);
        }
        let field = PrimeField::new(p)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = Matrix::zeros(field, k, n);
        for r in 0..k {
            g.set(r, r, 1);
            for c in k..n {
                g.set(r, c, rng.gen_range(0..p));
            }
        }
        LinearCode::from_generator(&g)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn n(&self) -> usize {
        self.generator.cols()
    }

    pub fn k(&self) -> usize {
        self.generator.rows()
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn parity_check(&self) -> &Matrix {
        &self.parity_check
    }

    pub fn rate(&self) -> Rational {
        Rational::new(self.k() as i128, self.n() as i128)
    }

    fn check_len(&self, w: &[u32]) -> Result<()> {
        if w.len() != self.n() {
            return Err(shape(format!(
                "word of length {} for a code of length {}",
                w.len(),
                self.n()
            )));
        }
        self.field.check_word(w)
    }

    pub fn encode(&self, message: &[u32]) -> Result<Vec<u32>> {
        self.field.check_word(message)?;
        self.generator.left_mul(message)
    }

    pub fn syndrome(&self, w: &[u32]) -> Result<Vec<u32>> {
        self.check_len(w)?;
        self.parity_check.right_mul(w)
    }

    pub fn is_codeword(&self, w: &[u32]) -> Result<bool> {
        Ok(self.syndrome(w)?.iter().all(|&s| s == 0))
    }

    /// Exact minimum distance by enumeration, cached after the first call.
    pub fn minimum_distance(&self) -> Result<u32> {
        if let Some(&d) = self.distance.get() {
            return Ok(d);
        }
        let zero = vec![0u32; self.n()];
        let d = search::closest(&self.generator, &zero, true)?.distance;
        Ok(*self.distance.get_or_init(|| d))
    }

    pub fn relative_distance(&self) -> Result<Rational> {
        Ok(Rational::new(
            self.minimum_distance()? as i128,
            self.n() as i128,
        ))
    }

    /// Unique-decoding radius `floor((d - 1) / 2)`.
    pub fn decoding_radius(&self) -> Result<u32> {
        Ok((self.minimum_distance()? - 1) / 2)
    }

    /// The codeword closest to `w` and its distance; ties go to the
    /// lexicographically smallest message.
    pub fn nearest_codeword(&self, w: &[u32]) -> Result<(Vec<u32>, u32)> {
        self.check_len(w)?;
        let best = search::closest(&self.generator, w, false)?;
        let msg = message_digits(self.field.modulus(), self.k(), best.message_index);
        Ok((self.encode(&msg)?, best.distance))
    }

    pub fn distance_to_code(&self, w: &[u32]) -> Result<u32> {
        self.check_len(w)?;
        Ok(search::closest(&self.generator, w, false)?.distance)
    }

    pub fn relative_distance_to_code(&self, w: &[u32]) -> Result<Rational> {
        Ok(Rational::new(
            self.distance_to_code(w)? as i128,
            self.n() as i128,
        ))
    }

    /// `C|_S` for a sorted, duplicate-free index set `S`.
    pub fn restrict(&self, positions: &[usize]) -> Result<LinearCode> {
        if positions.is_empty() {
            return Err(shape("cannot restrict to an empty set"));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(shape("restriction set must be strictly increasing"));
        }
        if positions[positions.len() - 1] >= self.n() {
            return Err(shape("restriction index out of range"));
        }
        LinearCode::from_generator(&self.generator.select_columns(positions))
    }

    pub fn dual(&self) -> Result<LinearCode> {
        if self.k() == self.n() {
            return Err(Error::ZeroCode);
        }
        LinearCode::from_generator(&self.parity_check)
    }

    /// Fills erased positions by solving `x * G = w` on the revealed ones.
    pub fn erasure_decode(&self, w: &PartialWord) -> Result<ErasureOutcome> {
        if w.len() != self.n() {
            return Err(shape(format!(
                "partial word of length {} for a code of length {}",
                w.len(),
                self.n()
            )));
        }
        let (known, values): (Vec<usize>, Vec<u32>) = w
            .entries()
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i, v)))
            .unzip();
        self.field.check_word(&values)?;
        let system = self.generator.select_columns(&known).transpose();
        match system.solve(&values)? {
            SolveOutcome::NoSolution => Ok(ErasureOutcome::Inconsistent),
            SolveOutcome::Solved(s) if !s.is_unique() => Ok(ErasureOutcome::Ambiguous),
            SolveOutcome::Solved(s) => Ok(ErasureOutcome::Decoded(self.encode(&s.particular)?)),
        }
    }

    /// The codeword within distance `t` of `w`, or `None`.
    ///
    /// Uses a coset-leader table when `p^(n-k) <= 2^22`, otherwise the
    /// brute-force nearest codeword. For `t <= floor((d-1)/2)` the answer is
    /// unique.
    pub fn bounded_distance_decode(&self, w: &[u32], t: u32) -> Result<Option<Vec<u32>>> {
        self.check_len(w)?;
        let redundancy = self.n() - self.k();
        let table_fits = search::codebook_size(self.field.modulus(), redundancy)
            .is_some_and(|s| s <= MAX_SYNDROME_TABLE);
        if table_fits {
            let table = self.syndrome_table(t);
            let s = self.syndrome(w)?;
            let idx = syndrome_index(self.field.modulus(), &s);
            if table.parent[idx] == u32::MAX || table.weight[idx] > t {
                return Ok(None);
            }
            let mut out = w.to_vec();
            let mut cur = idx;
            while cur != 0 {
                let pos = table.position[cur] as usize;
                out[pos] = self.field.sub(out[pos], table.value[cur]);
                cur = table.parent[cur] as usize;
            }
            return Ok(Some(out));
        }
        let (c, d) = self.nearest_codeword(w)?;
        Ok((d <= t).then_some(c))
    }

    fn syndrome_table(&self, radius: u32) -> Arc<SyndromeTable> {
        let mut guard = self.syndromes.lock().unwrap();
        if let Some(t) = guard.as_ref() {
            if t.radius >= radius {
                return Arc::clone(t);
            }
        }
        let table = Arc::new(self.build_syndrome_table(radius));
        *guard = Some(Arc::clone(&table));
        table
    }

    // Breadth-first search over syndromes, one added error symbol per layer.
    fn build_syndrome_table(&self, radius: u32) -> SyndromeTable {
        let f = self.field;
        let p = f.modulus();
        let r = self.n() - self.k();
        let size = (p as usize).pow(r as u32);
        let mut table = SyndromeTable {
            radius,
            parent: vec![u32::MAX; size],
            position: vec![0; size],
            value: vec![0; size],
            weight: vec![0; size],
        };
        table.parent[0] = 0;
        let h = &self.parity_check;
        // Syndrome contribution of each (position, value) pair.
        let contributions: Vec<Vec<Vec<u32>>> = (0..self.n())
            .map(|j| {
                (1..p)
                    .map(|a| (0..r).map(|i| f.mul(a, h.get(i, j))).collect())
                    .collect()
            })
            .collect();
        let mut frontier = vec![0usize];
        let mut layer = 0;
        while layer < radius && !frontier.is_empty() {
            let mut next = Vec::new();
            for &s in &frontier {
                let digits = index_digits(p, r, s);
                for (j, per_value) in contributions.iter().enumerate() {
                    for (a_minus_1, add) in per_value.iter().enumerate() {
                        let sum: Vec<u32> =
                            digits.iter().zip(add).map(|(&x, &y)| f.add(x, y)).collect();
                        let t = syndrome_index(p, &sum);
                        if table.parent[t] == u32::MAX {
                            table.parent[t] = s as u32;
                            table.position[t] = j as u32;
                            table.value[t] = a_minus_1 as u32 + 1;
                            table.weight[t] = layer + 1;
                            next.push(t);
                        }
                    }
                }
            }
            frontier = next;
            layer += 1;
        }
        table
    }

    /// Parses the text format: `p n k` then `k` generator rows. `#` starts a comment.
    pub fn parse(text: &str) -> Result<ParsedCode> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty code file".into()))?;
        let head = parse_ints(header)?;
        let [p, n, k] = head[..] else {
            return Err(Error::Parse(format!(
                "header must be `p n k`, got `{header}`"
            )));
        };
        let field = PrimeField::new(p)?;
        let (n, k) = (n as usize, k as usize);
        let mut rows = Vec::with_capacity(k);
        for i in 0..k {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("expected {k} generator rows, found {i}")))?;
            let row = parse_ints(line)?;
            if row.len() != n {
                return Err(Error::Parse(format!(
                    "generator row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            rows.push(row);
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing data after generator rows".into()));
        }
        let code = LinearCode::from_rows(field, &rows).map_err(|e| match e {
            Error::Shape(m) => Error::Parse(m),
            other => other,
        })?;
        let warning = (code.k() != k).then(|| {
            format!(
                "declared dimension {k} but generator has rank {}; using k = {}",
                code.k(),
                code.k()
            )
        });
        Ok(ParsedCode {
            code,
            declared_k: k,
            warning,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.field.modulus(), self.n(), self.k());
        out.push_str(&self.generator.to_string());
        out
    }
}

fn parse_ints(line: &str) -> Result<Vec<u32>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<u32>()
                .map_err(|_| Error::Parse(format!("not a nonnegative integer: `{t}`")))
        })
        .collect()
}

fn syndrome_index(p: u32, s: &[u32]) -> usize {
    s.iter()
        .fold(0usize, |acc, &d| acc * p as usize + d as usize)
}

fn index_digits(p: u32, len: usize, mut idx: usize) -> Vec<u32> {
    let mut out = vec![0u32; len];
    for d in out.iter_mut().rev() {
        *d = (idx % p as usize) as u32;
        idx /= p as usize;
    }
    out
}

// Standard-form complement of an RREF generator: one parity row per
// non-pivot column c, with 1 at c and -A[j][c] at pivot column j.
fn parity_check_from_rref(rref: &Matrix, pivots: &[usize]) -> Matrix {
    let f = rref.field();
    let n = rref.cols();
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut h = Matrix::zeros(f, free.len(), n);
    for (r, &c) in free.iter().enumerate() {
        h.set(r, c, 1);
        for (j, &pc) in pivots.iter().enumerate() {
            h.set(r, pc, f.neg(rref.get(j, c)));
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parity3() -> LinearCode {
        LinearCode::from_rows(PrimeField::binary(), &[vec![1, 0, 1], vec![0, 1, 1]]).unwrap()
    }

    fn orthogonal(c: &LinearCode) -> bool {
        c.generator()
            .mul(&c.parity_check().transpose())
            .unwrap()
            .is_zero()
    }

    #[test]
    fn construction_examples() {
        let c = parity3();
        assert_eq!((c.n(), c.k()), (3, 2));
        assert_eq!(c.parity_check().row_vecs(), vec![vec![1, 1, 1]]);
        assert!(orthogonal(&c));

        let rep = LinearCode::from_rows(PrimeField::binary(), &[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!((rep.n(), rep.k()), (2, 1));

        let f3 = PrimeField::new(3).unwrap();
        let full = LinearCode::from_generator(&Matrix::identity(f3, 3)).unwrap();
        assert_eq!(full.k(), 3);
        assert_eq!(full.parity_check().rows(), 0);
        assert_eq!(full.parity_check().cols(), 3);

        let zero = Matrix::zeros(PrimeField::binary(), 2, 3);
        assert_eq!(
            LinearCode::from_generator(&zero).unwrap_err(),
            Error::ZeroCode
        );
    }

    #[test]
    fn parity_check_for_non_systematic_generator() {
        // Pivots land on columns 1 and 3.
        let f5 = PrimeField::new(5).unwrap();
        let c = LinearCode::from_rows(f5, &[vec![0, 2, 1, 0, 3], vec![0, 1, 4, 1, 1]]).unwrap();
        assert!(orthogonal(&c));
        assert_eq!(c.parity_check().rank(), 3);
    }

    #[test]
    fn encode_and_membership() {
        let c = parity3();
        assert_eq!(c.encode(&[1, 1]).unwrap(), vec![1, 1, 0]);
        assert_eq!(c.encode(&[0, 0]).unwrap(), vec![0, 0, 0]);
        assert_eq!(
            LinearCode::repetition(3).unwrap().encode(&[1]).unwrap(),
            vec![1, 1, 1]
        );
        assert!(c.encode(&[1]).is_err());
        assert!(c.is_codeword(&[1, 1, 0]).unwrap());
        assert!(!c.is_codeword(&[1, 0, 0]).unwrap());
        assert!(c.is_codeword(&[0, 0, 0]).unwrap());
        assert!(c.is_codeword(&[0, 0]).is_err());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(parity3().minimum_distance().unwrap(), 2);
        assert_eq!(
            LinearCode::repetition(5)
                .unwrap()
                .minimum_distance()
                .unwrap(),
            5
        );
        assert_eq!(LinearCode::hamming74().minimum_distance().unwrap(), 3);
        let f7 = PrimeField::new(7).unwrap();
        let rep7 = LinearCode::from_rows(f7, &[vec![3, 3, 3, 3]]).unwrap();
        assert_eq!(rep7.minimum_distance().unwrap(), 4);
    }

    #[test]
    fn distance_capacity_error() {
        let big = LinearCode::random(40, 30, 2, 1).unwrap();
        assert!(matches!(big.minimum_distance(), Err(Error::Capacity(_))));
    }

    #[test]
    fn nearest_codeword_examples() {
        let c = parity3();
        assert_eq!(c.nearest_codeword(&[1, 1, 0]).unwrap(), (vec![1, 1, 0], 0));
        // Candidates at distance 1: 000 (msg 00), 110 (msg 11), 101 (msg 10).
        assert_eq!(c.nearest_codeword(&[1, 0, 0]).unwrap(), (vec![0, 0, 0], 1));
        let h = LinearCode::hamming74();
        let cw = h.encode(&[1, 0, 1, 1]).unwrap();
        for i in 0..7 {
            let mut w = cw.clone();
            w[i] ^= 1;
            assert_eq!(h.nearest_codeword(&w).unwrap(), (cw.clone(), 1));
        }
    }

    #[test]
    fn restriction_examples() {
        let c = parity3();
        let r = c.restrict(&[0, 1]).unwrap();
        assert_eq!((r.n(), r.k()), (2, 2));
        assert_eq!(c.restrict(&[0, 1, 2]).unwrap(), c);
        let rep = LinearCode::repetition(3)
            .unwrap()
            .restrict(&[0, 2])
            .unwrap();
        assert_eq!(rep, LinearCode::repetition(2).unwrap());
        assert!(c.restrict(&[]).is_err());
        assert!(c.restrict(&[1, 0]).is_err());
    }

    #[test]
    fn dual_examples() {
        let c = parity3();
        assert_eq!(c.dual().unwrap(), LinearCode::repetition(3).unwrap());
        assert_eq!(c.dual().unwrap().dual().unwrap(), c);
        let simplex = LinearCode::hamming74().dual().unwrap();
        assert_eq!(simplex.k(), 3);
        for idx in 1..8u64 {
            let cw = simplex.encode(&message_digits(2, 3, idx)).unwrap();
            assert_eq!(weight(&cw), 4);
        }
        let f3 = PrimeField::new(3).unwrap();
        let full = LinearCode::from_generator(&Matrix::identity(f3, 3)).unwrap();
        assert_eq!(full.dual().unwrap_err(), Error::ZeroCode);
    }

    #[test]
    fn erasure_examples() {
        let rep = LinearCode::repetition(3).unwrap();
        let w = PartialWord::new(vec![Some(1), None, None]).unwrap();
        assert_eq!(
            rep.erasure_decode(&w).unwrap(),
            ErasureOutcome::Decoded(vec![1, 1, 1])
        );
        let c = parity3();
        assert_eq!(c.erasure_decode(&w).unwrap(), ErasureOutcome::Ambiguous);
        let full = PartialWord::new(vec![Some(1), Some(1), Some(1)]).unwrap();
        assert_eq!(
            c.erasure_decode(&full).unwrap(),
            ErasureOutcome::Inconsistent
        );
        assert!(PartialWord::new(vec![None, None]).is_err());
    }

    #[test]
    fn bounded_distance_examples() {
        let h = LinearCode::hamming74();
        let cw = h.encode(&[0, 1, 1, 0]).unwrap();
        let mut w = cw.clone();
        w[5] ^= 1;
        assert_eq!(h.bounded_distance_decode(&w, 1).unwrap(), Some(cw));
        let rep5 = LinearCode::repetition(5).unwrap();
        assert_eq!(
            rep5.bounded_distance_decode(&[1, 1, 0, 0, 0], 2).unwrap(),
            Some(vec![0; 5])
        );
        assert_eq!(
            parity3().bounded_distance_decode(&[1, 0, 0], 0).unwrap(),
            None
        );
        // Brute-force path: 2^49 syndromes is beyond the table cap.
        let rep50 = LinearCode::repetition(50).unwrap();
        let mut w = vec![1u32; 50];
        for x in w.iter_mut().take(24) {
            *x = 0;
        }
        assert_eq!(
            rep50.bounded_distance_decode(&w, 24).unwrap(),
            Some(vec![1; 50])
        );
        w[24] = 0;
        assert_eq!(rep50.bounded_distance_decode(&w, 24).unwrap(), None);
    }

    #[test]
    fn syndrome_table_matches_brute_force_over_gf3() {
        let c = LinearCode::random(6, 2, 3, 11).unwrap();
        let t = c.decoding_radius().unwrap();
        for idx in 0..3u64.pow(6) {
            let w = message_digits(3, 6, idx);
            let (near, d) = c.nearest_codeword(&w).unwrap();
            let got = c.bounded_distance_decode(&w, t).unwrap();
            if d <= t {
                assert_eq!(got, Some(near));
            } else {
                assert_eq!(got, None);
            }
        }
    }

    #[test]
    fn random_codes_are_reproducible() {
        let a = LinearCode::random(3, 2, 2, 0).unwrap();
        let b = LinearCode::random(3, 2, 2, 0).unwrap();
        assert_eq!(a.generator(), b.generator());
        let c = LinearCode::random(4, 1, 3, 7).unwrap();
        assert_eq!(c.k(), 1);
        assert!(LinearCode::random(2, 3, 2, 0).is_err());
    }

    #[test]
    fn text_format() {
        let parsed = LinearCode::parse("2 3 2\n1 0 1\n0 1 1\n").unwrap();
        assert_eq!(parsed.code, parity3());
        assert!(parsed.warning.is_none());
        let deficient = LinearCode::parse("# dup rows\n2 2 2\n1 1\n1 1\n").unwrap();
        assert_eq!(deficient.code.k(), 1);
        assert!(deficient.warning.is_some());
        assert!(matches!(
            LinearCode::parse("4 2 1\n1 1\n"),
            Err(Error::InvalidModulus(4))
        ));
        assert!(LinearCode::parse("2 3 1\n1 1\n").is_err());
        assert!(LinearCode::parse("2 2 1\n1 2\n").is_err());
        let round = LinearCode::parse(&LinearCode::hamming74().to_text()).unwrap();
        assert_eq!(round.code, LinearCode::hamming74());
    }

    fn arb_code() -> impl Strategy<Value = LinearCode> {
        (
            prop::sample::select(vec![2u32, 3, 5]),
            2usize..8,
            any::<u64>(),
        )
            .prop_flat_map(|(p, n, seed)| (Just(p), Just(n), 1..=n, Just(seed)))
            .prop_map(|(p, n, k, seed)| LinearCode::random(n, k, p, seed).unwrap())
    }

    proptest! {
        #[test]
        fn code_invariants(c in arb_code(), seed in any::<u64>()) {
            prop_assert!(orthogonal(&c));
            prop_assert_eq!(c.generator().rank(), c.k());
            prop_assert_eq!(c.parity_check().rank(), c.n() - c.k());
            let p = c.field().modulus() as u64;
            let msg: Vec<u32> = (0..c.k()).map(|i| ((seed >> (i * 4)) % p) as u32).collect();
            let cw = c.encode(&msg).unwrap();
            prop_assert!(c.is_codeword(&cw).unwrap());
            let w: Vec<u32> = (0..c.n()).map(|i| ((seed >> (i * 5 + 1)) % p) as u32).collect();
            let (near, d) = c.nearest_codeword(&w).unwrap();
            prop_assert!(c.is_codeword(&near).unwrap());
            prop_assert_eq!(d as usize, hamming_distance(&near, &w));
            prop_assert!(d as usize <= weight(&w));
        }

        #[test]
        fn distance_agrees_with_parity_check_enumeration(c in arb_code()) {
            // Independent route: smallest weight of a nonzero word with zero syndrome.
            let p = c.field().modulus();
            let total = (p as u64).pow(c.n() as u32);
            let by_h = (1..total)
                .map(|i| message_digits(p, c.n(), i))
                .filter(|w| c.is_codeword(w).unwrap())
                .map(|w| weight(&w) as u32)
                .min()
                .unwrap_or(u32::MAX);
            if c.k() == c.n() {
                prop_assert_eq!(c.minimum_distance().unwrap(), 1);
            } else {
                prop_assert_eq!(c.minimum_distance().unwrap(), by_h);
            }
        }

        #[test]
        fn long_restrictions_are_injective(c in arb_code()) {
            let d = c.minimum_distance().unwrap() as usize;
            let n = c.n();
            // Drop the last d-1 coordinates: |S| = n - d + 1 > n - d.
            let s: Vec<usize> = (0..n - d + 1).collect();
            let p = c.field().modulus();
            let mut seen = std::collections::HashSet::new();
            for idx in 0..(p as u64).pow(c.k() as u32) {
                let cw = c.encode(&message_digits(p, c.k(), idx)).unwrap();
                let proj: Vec<u32> = s.iter().map(|&i| cw[i]).collect();
                prop_assert!(seen.insert(proj));
            }
        }

        #[test]
        fn few_erasures_recover_the_codeword(c in arb_code(), seed in any::<u64>()) {
            let d = c.minimum_distance().unwrap() as usize;
            let p = c.field().modulus() as u64;
            let msg: Vec<u32> = (0..c.k()).map(|i| ((seed >> (i * 3)) % p) as u32).collect();
            let cw = c.encode(&msg).unwrap();
            let start = (seed % c.n() as u64) as usize;
            let erased: Vec<usize> = (0..d - 1).map(|i| (start + i) % c.n()).collect();
            let w = PartialWord::with_erasures(&cw, &erased).unwrap();
            prop_assert_eq!(c.erasure_decode(&w).unwrap(), ErasureOutcome::Decoded(cw));
        }
    }
}
