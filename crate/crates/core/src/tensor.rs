//! m-wise tensor-product codes and the geometry of their index space.
//!
//! A [`TensorWord`] over `[n]^m` is stored row-major with axis 0 slowest: the
//! point `(i_0, ..., i_{m-1})` lives at `sum_j i_j * n^(m-1-j)`. Axes and
//! coordinates are 0-based in code and rendered 1-based by `Display`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::code::LinearCode;
use crate::error::{shape, Error, Result};
use crate::field::PrimeField;
use crate::matrix::Matrix;
use crate::Rational;

/// An element of `F^(n^m)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorWord {
    field: PrimeField,
    m: usize,
    n: usize,
    data: Vec<u32>,
}

/// A tensor with some entries erased.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialTensor {
    field: PrimeField,
    m: usize,
    n: usize,
    entries: Vec<Option<u32>>,
}

/// The `(b, i)`-plane: all points whose coordinate on axis `b` equals `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaneIndex {
    pub axis: usize,
    pub index: usize,
}

/// An axis-parallel line: `axis` varies, the other axes are pinned to
/// `fixed` (listed in ascending axis order).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LineIndex {
    pub axis: usize,
    pub fixed: Vec<usize>,
}

impl fmt::Display for PlaneIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.axis + 1, self.index + 1)
    }
}

impl fmt::Display for LineIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fixed: Vec<String> = self.fixed.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "({},({}))", self.axis + 1, fixed.join(","))
    }
}

pub(crate) fn checked_pow(n: usize, m: usize) -> Result<usize> {
    n.checked_pow(m as u32)
        .filter(|&v| v <= 1 << 28)
        .ok_or_else(|| Error::Capacity(format!("{n}^{m} entries is too large")))
}

/// Stride of axis `b` in an m-axis row-major layout.
#[inline]
pub(crate) fn stride(n: usize, m: usize, axis: usize) -> usize {
    n.pow((m - 1 - axis) as u32)
}

impl PlaneIndex {
    pub fn new(axis: usize, index: usize) -> Self {
        PlaneIndex { axis, index }
    }

    pub fn contains_point(&self, point: &[usize]) -> bool {
        point[self.axis] == self.index
    }

    /// A plane contains a line iff the line runs along another axis and is
    /// pinned to this plane's coordinate on the plane's axis.
    pub fn contains_line(&self, line: &LineIndex) -> bool {
        if line.axis == self.axis {
            return false;
        }
        let slot = if self.axis < line.axis {
            self.axis
        } else {
            self.axis - 1
        };
        line.fixed[slot] == self.index
    }

    /// Linear positions of this plane's points in an `[n]^m` tensor, in the
    /// row-major order of the `(m-1)`-axis view.
    pub fn positions(&self, m: usize, n: usize) -> Vec<usize> {
        let s = stride(n, m, self.axis);
        let block = s * n;
        let outer = n.pow(self.axis as u32);
        let mut out = Vec::with_capacity(outer * s);
        for o in 0..outer {
            let base = o * block + self.index * s;
            out.extend(base..base + s);
        }
        out
    }

    /// Position of a tensor point within this plane's view.
    #[inline]
    pub fn local_position(&self, m: usize, n: usize, linear: usize) -> usize {
        let s = stride(n, m, self.axis);
        (linear / (s * n)) * s + linear % s
    }
}

impl LineIndex {
    pub fn new(axis: usize, fixed: Vec<usize>) -> Self {
        LineIndex { axis, fixed }
    }

    /// The line along `axis` through `point`.
    pub fn through(axis: usize, point: &[usize]) -> Self {
        let fixed = point
            .iter()
            .enumerate()
            .filter(|&(a, _)| a != axis)
            .map(|(_, &v)| v)
            .collect();
        LineIndex { axis, fixed }
    }

    pub fn contains_point(&self, point: &[usize]) -> bool {
        point
            .iter()
            .enumerate()
            .filter(|&(a, _)| a != self.axis)
            .map(|(_, &v)| v)
            .eq(self.fixed.iter().copied())
    }

    pub fn positions(&self, m: usize, n: usize) -> Vec<usize> {
        let mut start = 0;
        let mut slot = 0;
        for a in 0..m {
            if a != self.axis {
                start += self.fixed[slot] * stride(n, m, a);
                slot += 1;
            }
        }
        let s = stride(n, m, self.axis);
        (0..n).map(|i| start + i * s).collect()
    }
}

/// All lines along `axis` as (start, step) pairs.
pub(crate) fn line_starts(m: usize, n: usize, axis: usize) -> impl Iterator<Item = (usize, usize)> {
    let s = stride(n, m, axis);
    let outer = n.pow(axis as u32);
    (0..outer).flat_map(move |o| (0..s).map(move |inner| (o * s * n + inner, s)))
}

impl TensorWord {
    pub fn new(field: PrimeField, m: usize, n: usize, data: Vec<u32>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(shape("tensor needs m >= 1 and n >= 1"));
        }
        let len = checked_pow(n, m)?;
        if data.len() != len {
            return Err(shape(format!(
                "[{n}]^{m} tensor needs {len} entries, got {}",
                data.len()
            )));
        }
        field.check_word(&data)?;
        Ok(TensorWord { field, m, n, data })
    }

    pub fn zeros(field: PrimeField, m: usize, n: usize) -> Result<Self> {
        let len = checked_pow(n, m)?;
        TensorWord::new(field, m, n, vec![0; len])
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn axes(&self) -> usize {
        self.m
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u32> {
        self.data
    }

    pub fn linear_index(&self, point: &[usize]) -> Result<usize> {
        if point.len() != self.m || point.iter().any(|&c| c >= self.n) {
            return Err(shape(format!(
                "point {point:?} outside [{}]^{}",
                self.n, self.m
            )));
        }
        Ok(point.iter().fold(0, |acc, &c| acc * self.n + c))
    }

    pub fn point(&self, mut linear: usize) -> Vec<usize> {
        let mut p = vec![0; self.m];
        for c in p.iter_mut().rev() {
            *c = linear % self.n;
            linear /= self.n;
        }
        p
    }

    pub fn get(&self, point: &[usize]) -> Result<u32> {
        Ok(self.data[self.linear_index(point)?])
    }

    pub fn set(&mut self, point: &[usize], value: u32) -> Result<()> {
        self.field.check_word(&[value])?;
        let i = self.linear_index(point)?;
        self.data[i] = value;
        Ok(())
    }

    fn check_plane(&self, plane: PlaneIndex) -> Result<()> {
        if plane.axis >= self.m || plane.index >= self.n {
            return Err(shape(format!(
                "plane {plane} outside [{}]^{}",
                self.n, self.m
            )));
        }
        Ok(())
    }

    /// `M|_(b,i)` as an `(m-1)`-axis tensor.
    pub fn extract_plane(&self, plane: PlaneIndex) -> Result<TensorWord> {
        if self.m < 2 {
            return Err(shape("planes need at least two axes"));
        }
        self.check_plane(plane)?;
        let data = plane
            .positions(self.m, self.n)
            .into_iter()
            .map(|i| self.data[i])
            .collect();
        Ok(TensorWord {
            field: self.field,
            m: self.m - 1,
            n: self.n,
            data,
        })
    }

    pub fn extract_line(&self, line: &LineIndex) -> Result<Vec<u32>> {
        if line.axis >= self.m
            || line.fixed.len() != self.m - 1
            || line.fixed.iter().any(|&c| c >= self.n)
        {
            return Err(shape(format!(
                "line {line} outside [{}]^{}",
                self.n, self.m
            )));
        }
        Ok(line
            .positions(self.m, self.n)
            .into_iter()
            .map(|i| self.data[i])
            .collect())
    }

    pub fn hamming_distance(&self, other: &TensorWord) -> Result<usize> {
        if self.m != other.m || self.n != other.n || self.field != other.field {
            return Err(shape("tensors of different shapes"));
        }
        Ok(crate::code::hamming_distance(&self.data, &other.data))
    }

    /// Parses `p m n` followed by `n^m` whitespace-separated entries.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);
        let mut next_int = |what: &str| -> Result<u64> {
            let t = tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("missing {what}")))?;
            t.parse::<u64>()
                .map_err(|_| Error::Parse(format!("not a nonnegative integer: `{t}`")))
        };
        let p = next_int("modulus")?;
        let m = next_int("axis count")? as usize;
        let n = next_int("side length")? as usize;
        let field =
            PrimeField::new(u32::try_from(p).map_err(|_| Error::InvalidModulus(u32::MAX))?)?;
        if m == 0 || n == 0 {
            return Err(Error::Parse("tensor needs m >= 1 and n >= 1".into()));
        }
        let len = checked_pow(n, m)?;
        let mut data = Vec::with_capacity(len);
        for i in 0..len {
            let v = next_int(&format!("entry {i}"))?;
            if v >= p {
                return Err(Error::Parse(format!(
                    "entry {v} is not a residue modulo {p}"
                )));
            }
            data.push(v as u32);
        }
        if tokens.next().is_some() {
            return Err(Error::Parse(format!("more than {len} entries")));
        }
        TensorWord::new(field, m, n, data)
    }

    /// Text form: header line, then one line per run of the last axis.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.field.modulus(), self.m, self.n);
        for chunk in self.data.chunks(self.n) {
            let row: Vec<String> = chunk.iter().map(u32::to_string).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

impl PartialTensor {
    pub fn new(field: PrimeField, m: usize, n: usize, entries: Vec<Option<u32>>) -> Result<Self> {
        let len = checked_pow(n, m)?;
        if entries.len() != len {
            return Err(shape(format!("[{n}]^{m} tensor needs {len} entries")));
        }
        let values: Vec<u32> = entries.iter().flatten().copied().collect();
        field.check_word(&values)?;
        Ok(PartialTensor {
            field,
            m,
            n,
            entries,
        })
    }

    pub fn from_word(word: &TensorWord) -> Self {
        PartialTensor {
            field: word.field,
            m: word.m,
            n: word.n,
            entries: word.data.iter().copied().map(Some).collect(),
        }
    }

    /// Erases every point on the listed planes.
    pub fn erase_planes(&mut self, planes: &[PlaneIndex]) -> Result<()> {
        for &pl in planes {
            if pl.axis >= self.m || pl.index >= self.n {
                return Err(shape(format!("plane {pl} outside [{}]^{}", self.n, self.m)));
            }
            for i in pl.positions(self.m, self.n) {
                self.entries[i] = None;
            }
        }
        Ok(())
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn axes(&self) -> usize {
        self.m
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Option<u32>] {
        &self.entries
    }

    pub fn erasure_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_none()).count()
    }
}

/// Parameters of `C^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorParams {
    pub blocklength: u128,
    pub dimension: u128,
    pub distance: u128,
    pub rate: Rational,
    pub relative_distance: Rational,
}

impl fmt::Display for TensorParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n^m={} k^m={} d^m={} rate={} delta={}",
            self.blocklength, self.dimension, self.distance, self.rate, self.relative_distance
        )
    }
}

/// Operation counts gathered by [`TensorCode::encode_counted`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EncodeStats {
    pub base_encodes: u64,
    pub field_ops: u64,
}

/// The code `C^m` for a base code `C`.
#[derive(Debug, Clone)]
pub struct TensorCode {
    base: LinearCode,
    m: usize,
    flat: OnceLock<Arc<LinearCode>>,
    lower: OnceLock<Arc<TensorCode>>,
}

impl TensorCode {
    pub fn new(base: LinearCode, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(shape("tensor exponent must be at least 1"));
        }
        checked_pow(base.n(), m)?;
        Ok(TensorCode {
            base,
            m,
            flat: OnceLock::new(),
            lower: OnceLock::new(),
        })
    }

    pub fn base(&self) -> &LinearCode {
        &self.base
    }

    pub fn axes(&self) -> usize {
        self.m
    }

    pub fn side(&self) -> usize {
        self.base.n()
    }

    pub fn field(&self) -> PrimeField {
        self.base.field()
    }

    pub fn blocklength(&self) -> usize {
        self.side().pow(self.m as u32)
    }

    pub fn message_length(&self) -> usize {
        self.base.k().pow(self.m as u32)
    }

    /// `C^(m-1)`, shared by every plane view.
    pub fn lower(&self) -> Result<Arc<TensorCode>> {
        if self.m < 2 {
            return Err(shape("C^1 has no lower tensor power"));
        }
        if let Some(t) = self.lower.get() {
            return Ok(Arc::clone(t));
        }
        let t = Arc::new(TensorCode::new(self.base.clone(), self.m - 1)?);
        Ok(Arc::clone(self.lower.get_or_init(|| t)))
    }

    /// `C^m` as a flat `[n^m, k^m]` code with generator `G^(kron m)`.
    pub fn flat_code(&self) -> Result<Arc<LinearCode>> {
        if let Some(c) = self.flat.get() {
            return Ok(Arc::clone(c));
        }
        let g = self.base.generator();
        let size = (g.rows() * g.cols()).checked_pow(self.m as u32);
        if size.is_none_or(|s| s > 1 << 26) {
            return Err(Error::Capacity(format!(
                "Kronecker generator of C^{} is too large",
                self.m
            )));
        }
        let code = Arc::new(LinearCode::from_generator(&kronecker_power(g, self.m))?);
        Ok(Arc::clone(self.flat.get_or_init(|| code)))
    }

    pub fn params(&self) -> Result<TensorParams> {
        let m = self.m as u32;
        let n = self.base.n() as u128;
        let k = self.base.k() as u128;
        let d = self.base.minimum_distance()? as u128;
        let pow = |x: u128| {
            x.checked_pow(m)
                .ok_or_else(|| Error::Capacity("parameters overflow".into()))
        };
        let (nm, km, dm) = (pow(n)?, pow(k)?, pow(d)?);
        let ratio = |a: u128, b: u128| -> Result<Rational> {
            let a = i128::try_from(a).map_err(|_| Error::Capacity("parameters overflow".into()))?;
            let b = i128::try_from(b).map_err(|_| Error::Capacity("parameters overflow".into()))?;
            Ok(Rational::new(a, b))
        };
        Ok(TensorParams {
            blocklength: nm,
            dimension: km,
            distance: dm,
            rate: ratio(km, nm)?,
            relative_distance: ratio(dm, nm)?,
        })
    }

    fn check_word(&self, word: &TensorWord) -> Result<()> {
        if word.m != self.m || word.n != self.side() || word.field != self.field() {
            return Err(shape(format!(
                "tensor over {} with shape [{}]^{} does not match C^{} over {} with n = {}",
                word.field,
                word.n,
                word.m,
                self.m,
                self.field(),
                self.side()
            )));
        }
        Ok(())
    }

    /// True iff every axis-parallel line lies in the base code.
    pub fn contains(&self, word: &TensorWord) -> Result<bool> {
        self.check_word(word)?;
        let (m, n) = (self.m, self.side());
        let mut line = vec![0u32; n];
        for axis in 0..m {
            for (start, step) in line_starts(m, n, axis) {
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = word.data[start + i * step];
                }
                if !self.base.is_codeword(&line)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn encode(&self, message: &[u32]) -> Result<TensorWord> {
        Ok(self.encode_counted(message)?.0)
    }

    /// Encodes rows with the `C^(m-1)` encoder, then every column with the
    /// base encoder, and reports how much work that took.
    pub fn encode_counted(&self, message: &[u32]) -> Result<(TensorWord, EncodeStats)> {
        if message.len() != self.message_length() {
            return Err(shape(format!(
                "message of length {} for C^{} with k^m = {}",
                message.len(),
                self.m,
                self.message_length()
            )));
        }
        self.field().check_word(message)?;
        let mut stats = EncodeStats::default();
        let data = encode_recursive(&self.base, self.m, message, &mut stats)?;
        Ok((
            TensorWord {
                field: self.field(),
                m: self.m,
                n: self.side(),
                data,
            },
            stats,
        ))
    }

    /// `m * n^(m-1)` base encodes: the budget the recursive encoder stays within.
    pub fn encode_call_bound(&self) -> u64 {
        (self.m as u64) * (self.side() as u64).pow(self.m as u32 - 1)
    }
}

fn encode_recursive(
    base: &LinearCode,
    m: usize,
    message: &[u32],
    stats: &mut EncodeStats,
) -> Result<Vec<u32>> {
    let (k, n) = (base.k(), base.n());
    if m == 1 {
        stats.base_encodes += 1;
        stats.field_ops += (k * n) as u64;
        return base.encode(message);
    }
    let sub_msg = k.pow(m as u32 - 1);
    let sub_len = n.pow(m as u32 - 1);
    let mut rows = Vec::with_capacity(k * sub_len);
    for r in 0..k {
        rows.extend(encode_recursive(
            base,
            m - 1,
            &message[r * sub_msg..(r + 1) * sub_msg],
            stats,
        )?);
    }
    let mut out = vec![0u32; n * sub_len];
    let mut column = vec![0u32; k];
    for c in 0..sub_len {
        for (r, slot) in column.iter_mut().enumerate() {
            *slot = rows[r * sub_len + c];
        }
        stats.base_encodes += 1;
        stats.field_ops += (k * n) as u64;
        for (i, v) in base.encode(&column)?.into_iter().enumerate() {
            out[i * sub_len + c] = v;
        }
    }
    Ok(out)
}

/// `G^(kron m)` built directly from products of generator entries.
pub fn kronecker_power(g: &Matrix, m: usize) -> Matrix {
    let mut out = g.clone();
    for _ in 1..m {
        out = out.kron(g);
    }
    out
}
