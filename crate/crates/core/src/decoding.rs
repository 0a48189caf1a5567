//! Unique decoder for `C (x) C`.
//!
//! Rows and columns are decoded independently with a bounded-distance
//! decoder for `C`. Entries where the two passes disagree are inconsistent;
//! rows and columns carrying too many of them are dropped, and the rest of
//! the matrix is rebuilt by erasure decoding, rows first and then columns.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::code::{hamming_distance, ErasureOutcome, LinearCode, PartialWord};
use crate::error::{shape, Result};
use crate::tensor::{TensorCode, TensorWord};
use crate::Rational;

#[derive(Debug, Clone)]
pub struct DecoderConfig {
    pub base: LinearCode,
    /// Radius of the per-line bounded-distance decoder.
    pub radius: u32,
    /// `radius / n`.
    pub alpha: Rational,
    /// A line is removed once it has at least `removal_threshold * n`
    /// inconsistent entries.
    pub removal_threshold: Rational,
    /// Denominator `c` of the guaranteed budget `floor(alpha^2 n^2 / c)`.
    pub budget_constant: u32,
}

impl DecoderConfig {
    pub fn new(base: LinearCode) -> Result<Self> {
        let radius = base.decoding_radius()?;
        let alpha = Rational::new(radius as i128, base.n() as i128);
        Ok(DecoderConfig {
            base,
            radius,
            alpha,
            removal_threshold: alpha / 2,
            budget_constant: 100,
        })
    }

    pub fn with_removal_threshold(mut self, threshold: Rational) -> Self {
        self.removal_threshold = threshold;
        self
    }

    pub fn with_budget_constant(mut self, c: u32) -> Self {
        self.budget_constant = c.max(1);
        self
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }
}

/// `floor(alpha^2 n^2 / c)`: the number of errors the decoder is guaranteed
/// to correct.
pub fn error_budget(cfg: &DecoderConfig) -> u64 {
    let n = cfg.n() as i128;
    let v = cfg.alpha * cfg.alpha * Rational::from_integer(n * n)
        / Rational::from_integer(cfg.budget_constant as i128);
    v.floor().to_integer() as u64
}

/// Flags `(i, j)` where the row pass and the column pass disagree, or where
/// either line failed to decode. `rows[i]` is the decoded row `i`;
/// `cols[j]` the decoded column `j`.
pub fn inconsistent_entries(
    rows: &[Option<Vec<u32>>],
    cols: &[Option<Vec<u32>>],
) -> Result<Vec<Vec<bool>>> {
    let (r, c) = (rows.len(), cols.len());
    let bad_len = rows.iter().flatten().any(|row| row.len() != c)
        || cols.iter().flatten().any(|col| col.len() != r);
    if bad_len {
        return Err(shape("row and column decodes do not form a matrix"));
    }
    Ok((0..r)
        .map(|i| {
            (0..c)
                .map(|j| match (&rows[i], &cols[j]) {
                    (Some(row), Some(col)) => row[j] != col[i],
                    _ => true,
                })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Error)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DecodeFailure {
    #[error("row {row} could not be completed ({outcome})")]
    RowErasure { row: usize, outcome: &'static str },
    #[error("column {column} could not be completed ({outcome})")]
    ColumnErasure {
        column: usize,
        outcome: &'static str,
    },
    #[error("reconstruction is not a codeword")]
    NotCodeword,
    #[error(
        "reconstruction is at distance {distance}, beyond the unique-decoding radius {radius}"
    )]
    TooFar { distance: usize, radius: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeTrace {
    pub n: usize,
    pub row_failed: Vec<bool>,
    pub column_failed: Vec<bool>,
    /// Row-major `n x n` inconsistency flags.
    pub inconsistent: Vec<Vec<bool>>,
    pub removed_rows: Vec<usize>,
    pub removed_columns: Vec<usize>,
    /// Lines with at least `alpha * n` inconsistent entries.
    pub bad_rows: usize,
    pub bad_columns: usize,
    pub distance: Option<usize>,
}

impl DecodeTrace {
    pub fn inconsistent_count(&self) -> usize {
        self.inconsistent.iter().flatten().filter(|&&b| b).count()
    }

    /// `bad * alpha n <= alpha^2 n^2 / c` on both axes, i.e. `bad <= alpha n / c`.
    pub fn bad_line_bound_holds(&self, cfg: &DecoderConfig) -> bool {
        let limit = cfg.alpha * Rational::from_integer(self.n as i128)
            / Rational::from_integer(cfg.budget_constant as i128);
        Rational::from_integer(self.bad_rows as i128) <= limit
            && Rational::from_integer(self.bad_columns as i128) <= limit
    }
}

#[derive(Debug, Clone)]
pub struct DecodeReport {
    pub result: std::result::Result<TensorWord, DecodeFailure>,
    pub trace: DecodeTrace,
}

impl DecodeReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "schema": 1,
            "decoded": self.result.is_ok(),
            "failure": self.result.as_ref().err(),
            "trace": self.trace,
        })
    }
}

fn outcome_name(o: &ErasureOutcome) -> &'static str {
    match o {
        ErasureOutcome::Decoded(_) => "decoded",
        ErasureOutcome::Ambiguous => "ambiguous",
        ErasureOutcome::Inconsistent => "inconsistent",
    }
}

// Erasure decoding that reports an all-erased line as ambiguous.
fn complete(code: &LinearCode, entries: Vec<Option<u32>>) -> Result<ErasureOutcome> {
    if entries.iter().all(Option::is_none) {
        return Ok(ErasureOutcome::Ambiguous);
    }
    code.erasure_decode(&PartialWord::new(entries)?)
}

pub fn decode_c2(word: &TensorWord, cfg: &DecoderConfig) -> Result<DecodeReport> {
    let n = cfg.n();
    if word.axes() != 2 || word.side() != n || word.field() != cfg.base.field() {
        return Err(shape("decode_c2 expects an n x n word over the base field"));
    }
    let base = &cfg.base;
    let data = word.data();
    let row = |i: usize| data[i * n..(i + 1) * n].to_vec();
    let col = |j: usize| (0..n).map(|i| data[i * n + j]).collect::<Vec<_>>();

    let rows: Vec<Option<Vec<u32>>> = (0..n)
        .into_par_iter()
        .map(|i| base.bounded_distance_decode(&row(i), cfg.radius))
        .collect::<Result<_>>()?;
    let cols: Vec<Option<Vec<u32>>> = (0..n)
        .into_par_iter()
        .map(|j| base.bounded_distance_decode(&col(j), cfg.radius))
        .collect::<Result<_>>()?;
    let inconsistent = inconsistent_entries(&rows, &cols)?;

    let row_counts: Vec<usize> = inconsistent
        .iter()
        .map(|r| r.iter().filter(|&&b| b).count())
        .collect();
    let col_counts: Vec<usize> = (0..n)
        .map(|j| (0..n).filter(|&i| inconsistent[i][j]).count())
        .collect();
    let n_rat = Rational::from_integer(n as i128);
    // A line with no inconsistent entries is never removed or counted as bad.
    let at_least = |count: usize, frac: Rational| {
        count > 0 && Rational::from_integer(count as i128) >= frac * n_rat
    };
    let removed_rows: Vec<usize> = (0..n)
        .filter(|&i| at_least(row_counts[i], cfg.removal_threshold))
        .collect();
    let removed_columns: Vec<usize> = (0..n)
        .filter(|&j| at_least(col_counts[j], cfg.removal_threshold))
        .collect();
    let mut trace = DecodeTrace {
        n,
        row_failed: rows.iter().map(Option::is_none).collect(),
        column_failed: cols.iter().map(Option::is_none).collect(),
        bad_rows: row_counts
            .iter()
            .filter(|&&c| at_least(c, cfg.alpha))
            .count(),
        bad_columns: col_counts
            .iter()
            .filter(|&&c| at_least(c, cfg.alpha))
            .count(),
        inconsistent,
        removed_rows,
        removed_columns,
        distance: None,
    };

    let mut kept_col = vec![true; n];
    for &j in &trace.removed_columns {
        kept_col[j] = false;
    }
    let mut kept_row = vec![true; n];
    for &i in &trace.removed_rows {
        kept_row[i] = false;
    }

    // Kept rows from their consistent entries in kept columns.
    let mut rebuilt: Vec<Option<Vec<u32>>> = vec![None; n];
    for i in (0..n).filter(|&i| kept_row[i]) {
        let decoded = rows[i].as_ref();
        let entries: Vec<Option<u32>> = (0..n)
            .map(|j| {
                if kept_col[j] && !trace.inconsistent[i][j] {
                    decoded.map(|r| r[j])
                } else {
                    None
                }
            })
            .collect();
        match complete(base, entries)? {
            ErasureOutcome::Decoded(r) => rebuilt[i] = Some(r),
            other => {
                return Ok(DecodeReport {
                    result: Err(DecodeFailure::RowErasure {
                        row: i,
                        outcome: outcome_name(&other),
                    }),
                    trace,
                })
            }
        }
    }

    // Every column from the rebuilt rows.
    let mut out = vec![0u32; n * n];
    for j in 0..n {
        let entries: Vec<Option<u32>> = rebuilt.iter().map(|r| r.as_ref().map(|r| r[j])).collect();
        match complete(base, entries)? {
            ErasureOutcome::Decoded(c) => {
                for (i, v) in c.into_iter().enumerate() {
                    out[i * n + j] = v;
                }
            }
            other => {
                return Ok(DecodeReport {
                    result: Err(DecodeFailure::ColumnErasure {
                        column: j,
                        outcome: outcome_name(&other),
                    }),
                    trace,
                })
            }
        }
    }

    let candidate = TensorWord::new(word.field(), 2, n, out)?;
    let square = TensorCode::new(base.clone(), 2)?;
    if !square.contains(&candidate)? {
        return Ok(DecodeReport {
            result: Err(DecodeFailure::NotCodeword),
            trace,
        });
    }
    let distance = hamming_distance(candidate.data(), data);
    trace.distance = Some(distance);
    let d = base.minimum_distance()? as usize;
    let radius = (d * d - 1) / 2;
    let result = if distance <= radius {
        Ok(candidate)
    } else {
        Err(DecodeFailure::TooFar { distance, radius })
    };
    Ok(DecodeReport { result, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_codeword(code: &TensorCode, rng: &mut ChaCha8Rng) -> TensorWord {
        let p = code.field().modulus();
        let msg: Vec<u32> = (0..code.message_length())
            .map(|_| rng.gen_range(0..p))
            .collect();
        code.encode(&msg).unwrap()
    }

    #[test]
    fn budgets() {
        let rep = DecoderConfig::new(LinearCode::repetition(50).unwrap()).unwrap();
        assert_eq!(rep.radius, 24);
        assert_eq!(rep.alpha, Rational::new(12, 25));
        assert_eq!(error_budget(&rep), 5);
        let ham = DecoderConfig::new(LinearCode::hamming74()).unwrap();
        assert_eq!(ham.alpha, Rational::new(1, 7));
        assert_eq!(error_budget(&ham), 0);
        let whole = LinearCode::from_rows(PrimeField::binary(), &[vec![1, 0], vec![0, 1]]).unwrap();
        let cfg = DecoderConfig::new(whole).unwrap();
        assert_eq!(cfg.alpha, Rational::from_integer(0));
        assert_eq!(error_budget(&cfg), 0);
    }

    #[test]
    fn inconsistency_flags() {
        let a = vec![Some(vec![1, 0, 1]), Some(vec![0, 0, 0])];
        let cols = vec![Some(vec![1, 0]), Some(vec![0, 0]), Some(vec![1, 0])];
        assert!(inconsistent_entries(&a, &cols)
            .unwrap()
            .iter()
            .flatten()
            .all(|b| !b));
        let cols2 = vec![Some(vec![1, 0]), Some(vec![0, 1]), Some(vec![1, 0])];
        let flags = inconsistent_entries(&a, &cols2).unwrap();
        assert_eq!(flags.iter().flatten().filter(|&&b| b).count(), 1);
        assert!(flags[1][1]);
        let failed = vec![None, Some(vec![0, 0, 0])];
        let flags = inconsistent_entries(&failed, &cols).unwrap();
        assert_eq!(flags[0], vec![true; 3]);
        assert_eq!(flags[1], vec![false; 3]);
        assert!(inconsistent_entries(&a, &[Some(vec![1])]).is_err());
    }

    #[test]
    fn codewords_decode_to_themselves() {
        let code = TensorCode::new(LinearCode::hamming74(), 2).unwrap();
        let cfg = DecoderConfig::new(LinearCode::hamming74()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let c = random_codeword(&code, &mut rng);
            let r = decode_c2(&c, &cfg).unwrap();
            assert_eq!(r.result.unwrap(), c);
            assert!(r.trace.removed_rows.is_empty() && r.trace.removed_columns.is_empty());
        }
    }

    #[test]
    fn hamming_single_flip() {
        let code = TensorCode::new(LinearCode::hamming74(), 2).unwrap();
        let cfg = DecoderConfig::new(LinearCode::hamming74()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = random_codeword(&code, &mut rng);
        for pos in 0..49 {
            let mut w = c.clone();
            w.data_mut()[pos] ^= 1;
            assert_eq!(decode_c2(&w, &cfg).unwrap().result.unwrap(), c);
        }
    }

    #[test]
    fn repetition_within_budget() {
        let base = LinearCode::repetition(50).unwrap();
        let code = TensorCode::new(base.clone(), 2).unwrap();
        let cfg = DecoderConfig::new(base).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let c = random_codeword(&code, &mut rng);
            let mut w = c.clone();
            for pos in rand::seq::index::sample(&mut rng, 2500, 5) {
                w.data_mut()[pos] ^= 1;
            }
            let r = decode_c2(&w, &cfg).unwrap();
            assert!(r.trace.bad_line_bound_holds(&cfg));
            assert_eq!(r.result.unwrap(), c);
        }
    }

    #[test]
    fn failures_are_clean() {
        let base = LinearCode::parity(3).unwrap();
        let cfg = DecoderConfig::new(base.clone()).unwrap();
        let code = TensorCode::new(base, 2).unwrap();
        // Radius 0: any non-codeword line fails and is removed wholesale.
        let w =
            TensorWord::new(PrimeField::binary(), 2, 3, vec![1, 0, 0, 0, 0, 0, 0, 0, 0]).unwrap();
        let r = decode_c2(&w, &cfg).unwrap();
        assert!(r.result.is_err());
        assert_eq!(r.trace.removed_rows, vec![0, 1, 2]);
        let c =
            TensorWord::new(PrimeField::binary(), 2, 3, vec![1, 1, 0, 1, 1, 0, 0, 0, 0]).unwrap();
        assert!(code.contains(&c).unwrap());
        assert_eq!(decode_c2(&c, &cfg).unwrap().result.unwrap(), c);
    }
}
