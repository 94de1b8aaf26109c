//! The deformed kernel
//! `K(x, y) = sum_{k in Z'} sigma(k) J_{x+k}(t, t') J_{-y-k}(-t, -t')`
//! and its finite windows on `{n + 1/2, n + 3/2, ...}`.
//!
//! Writing `K = sum_k sigma(k) u_k v_k^T` with `u_k = (J_{x+k})_x` and
//! `v_k = (J_{-y-k}(-t, -t'))_y` gives trace-norm bounds
//! `||K||_1 <= sum_k |sigma(k)| ||u_k||_1 ||v_k||_1`; every bound below is of
//! that rank-one form.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fredholm::DetValue;
use crate::linalg::lu_determinant;
use crate::par::Parallelism;
use crate::partitions::HalfInt;
use crate::series::{j_coeffs_times, LaurentWindow, Times};

pub const DEFAULT_DIM: usize = 24;
pub const DEFAULT_CUTOFF: usize = 48;

/// The weight `sigma: Z' -> R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaWeight {
    /// `1` on positive half-integers, `0` elsewhere.
    IndicatorPositive,
    /// `1 / (1 + u^k)`: tends to the indicator as `u -> 0` and to `0` as `k -> -inf`.
    Fermi { u: f64 },
    /// `1 / (1 - u^k)`. Leaves `[0, 1]` on both sides; nonstandard.
    PaperForm { u: f64 },
    /// Explicit values, zero elsewhere.
    Table {
        #[serde(default)]
        values: BTreeMap<HalfInt, f64>,
    },
}

/// Where a weight can be nonzero, seen from below.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowerSupport {
    Empty,
    From(HalfInt),
    Unbounded,
}

impl Default for SigmaWeight {
    fn default() -> Self {
        SigmaWeight::zero()
    }
}

impl SigmaWeight {
    pub fn zero() -> Self {
        SigmaWeight::Table { values: BTreeMap::new() }
    }

    pub fn table<I: IntoIterator<Item = (HalfInt, f64)>>(values: I) -> Self {
        SigmaWeight::Table { values: values.into_iter().collect() }
    }

    /// Deterministic values in `[0, 1)` on `{lo + 1/2, ..., hi - 1/2}`, from
    /// the golden-ratio sequence started at `seed`.
    pub fn quasi_random_table(lo: i64, hi: i64, seed: u64) -> Self {
        const GOLDEN: f64 = 0.618_033_988_749_895;
        SigmaWeight::table((lo..hi).enumerate().map(|(j, i)| {
            let x = ((seed as f64 + 1.0 + j as f64) * GOLDEN).fract();
            (HalfInt::plus_half(i), x)
        }))
    }

    pub fn eval(&self, k: HalfInt) -> f64 {
        match self {
            SigmaWeight::IndicatorPositive => {
                if k.is_positive() {
                    1.0
                } else {
                    0.0
                }
            }
            SigmaWeight::Fermi { u } => 1.0 / (1.0 + u.powf(k.value())),
            SigmaWeight::PaperForm { u } => 1.0 / (1.0 - u.powf(k.value())),
            SigmaWeight::Table { values } => values.get(&k).copied().unwrap_or(0.0),
        }
    }

    pub fn is_nonstandard(&self) -> bool {
        matches!(self, SigmaWeight::PaperForm { .. })
    }

    /// Checks the `[0, 1]` range and summability of the negative tail.
    pub fn validate(&self, allow_nonstandard: bool) -> Result<()> {
        match self {
            SigmaWeight::IndicatorPositive => Ok(()),
            SigmaWeight::Fermi { u } | SigmaWeight::PaperForm { u } => {
                if !(*u > 0.0 && *u < 1.0) {
                    return Err(Error::InvalidSigma(format!("u = {u} is outside (0, 1)")));
                }
                if self.is_nonstandard() && !allow_nonstandard {
                    return Err(Error::InvalidSigma(
                        "paper_form takes values outside [0, 1]; it must be enabled explicitly".into(),
                    ));
                }
                Ok(())
            }
            SigmaWeight::Table { values } => {
                for (k, v) in values {
                    if !v.is_finite() || *v < 0.0 || *v > 1.0 {
                        return Err(Error::InvalidSigma(format!("sigma({k}) = {v} is outside [0, 1]")));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SigmaWeight::Table { values } if values.values().all(|v| *v == 0.0))
    }

    pub fn lower_support(&self) -> LowerSupport {
        match self {
            SigmaWeight::IndicatorPositive => LowerSupport::From(HalfInt::plus_half(0)),
            SigmaWeight::Fermi { .. } | SigmaWeight::PaperForm { .. } => LowerSupport::Unbounded,
            SigmaWeight::Table { values } => {
                values.iter().find(|(_, v)| **v != 0.0).map_or(LowerSupport::Empty, |(k, _)| LowerSupport::From(*k))
            }
        }
    }

    /// Largest half-integer with a nonzero value, if the support is bounded above.
    pub fn upper_support(&self) -> Option<HalfInt> {
        match self {
            SigmaWeight::Table { values } => values.iter().rev().find(|(_, v)| **v != 0.0).map(|(k, _)| *k),
            _ => None,
        }
    }

    /// `sup_k |sigma(k)|`.
    pub fn sup_abs(&self) -> f64 {
        match self {
            SigmaWeight::IndicatorPositive | SigmaWeight::Fermi { .. } => 1.0,
            SigmaWeight::PaperForm { u } => 1.0 / (1.0 - u.sqrt()),
            SigmaWeight::Table { values } => values.values().map(|v| v.abs()).fold(0.0, f64::max),
        }
    }

    /// Upper bound on `sum_{k <= top} |sigma(k)|`.
    pub fn abs_sum_below(&self, top: HalfInt) -> f64 {
        match self {
            SigmaWeight::IndicatorPositive => {
                if top.is_positive() {
                    ((top.twice() + 1) / 2) as f64
                } else {
                    0.0
                }
            }
            SigmaWeight::Table { values } => values.range(..=top).map(|(_, v)| v.abs()).sum(),
            SigmaWeight::Fermi { u } | SigmaWeight::PaperForm { u } => {
                // For k <= -K: fermi <= u^K, |paper_form| <= u^K / (1 - sqrt u).
                let u = *u;
                let scale = if self.is_nonstandard() { 1.0 / (1.0 - u.sqrt()) } else { 1.0 };
                let mut total = 0.0f64;
                let mut k = top;
                loop {
                    if !k.is_positive() {
                        let tail = scale * u.powf(-k.value()) / (1.0 - u);
                        if tail < 1e-18 * total.max(1e-300) || tail < 1e-300 {
                            return total + tail;
                        }
                    }
                    total += self.eval(k).abs();
                    k = k.shift(-1);
                    if k.twice() < -20_000 {
                        return total + scale * u.powf(-k.value()) / (1.0 - u);
                    }
                }
            }
        }
    }
}

/// A single kernel value with the bound on what was left out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelEntry {
    #[serde(with = "crate::cjson")]
    pub value: Complex64,
    pub residual_bound: f64,
}

/// `J(t, t')` and `J(-t, -t')` windows for a kernel with a given k-cutoff.
///
/// The cutoff `c` keeps `k in {-c + 1/2, ..., c - 1/2}`.
#[derive(Clone, Debug)]
pub struct KernelContext {
    pub forward: LaurentWindow,
    pub backward: LaurentWindow,
    pub sigma: SigmaWeight,
    pub cutoff: usize,
    weights: Vec<(HalfInt, f64)>,
}

impl KernelContext {
    /// Windows wide enough for every `x, y` with `|x|, |y| <= reach`.
    pub fn new(t: &Times, t_prime: &Times, sigma: &SigmaWeight, reach: usize, cutoff: usize) -> Result<Self> {
        let order = reach + cutoff + 2;
        let forward = j_coeffs_times(t, t_prime, order)?;
        let backward = j_coeffs_times(&t.neg(), &t_prime.neg(), order)?;
        Ok(Self::from_windows(forward, backward, sigma, cutoff))
    }

    pub fn from_windows(forward: LaurentWindow, backward: LaurentWindow, sigma: &SigmaWeight, cutoff: usize) -> Self {
        let c = cutoff as i64;
        let weights = (-c..c).map(HalfInt::plus_half).map(|k| (k, sigma.eval(k))).filter(|(_, s)| *s != 0.0).collect();
        KernelContext { forward, backward, sigma: sigma.clone(), cutoff, weights }
    }

    /// Nonzero `(k, sigma(k))` inside the cutoff, increasing in `k`.
    pub fn weights(&self) -> &[(HalfInt, f64)] {
        &self.weights
    }

    /// Value and numerical error of the cutoff-truncated sum.
    fn truncated(&self, x: HalfInt, y: HalfInt) -> (Complex64, f64) {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        let mut mag = 0.0;
        for &(k, s) in &self.weights {
            let i = x.add_half(k);
            let j = -(y.add_half(k));
            let (a, b) = (self.forward.get(i), self.backward.get(j));
            let (ea, eb) = (self.forward.error_at(i), self.backward.error_at(j));
            let term = a * b * s;
            acc += term;
            mag += term.norm();
            err += s.abs() * (ea * b.norm() + a.norm() * eb + ea * eb);
        }
        let rounding = 2.0 * (self.weights.len() + 2) as f64 * f64::EPSILON * mag;
        (acc, err + rounding)
    }

    fn upper_tail_active(&self) -> bool {
        let above = HalfInt::plus_half(self.cutoff as i64);
        !(self.sigma.is_zero() || matches!(self.sigma.upper_support(), Some(h) if h < above))
    }

    /// Bound on the `|k| > cutoff` part of a single entry in row `x`.
    fn entry_cutoff_residual(&self, x: HalfInt) -> f64 {
        let c = self.cutoff as i64;
        let bwd = self.backward.abs_total();
        let down = self.sigma.abs_sum_below(HalfInt::minus_half(-c)) * self.forward.abs_total() * bwd;
        if !self.upper_tail_active() {
            return down;
        }
        down + self.sigma.sup_abs() * bwd * self.forward.abs_sum_from(x.add_half(HalfInt::plus_half(c)))
    }

    pub fn entry(&self, x: HalfInt, y: HalfInt) -> KernelEntry {
        let (value, err) = self.truncated(x, y);
        KernelEntry { value, residual_bound: err + self.entry_cutoff_residual(x) }
    }

    /// Trace-norm bound on the `|k| > cutoff` part of `K` on `l^2{n + 1/2, ...}`.
    pub fn cutoff_residual(&self, base: i64) -> f64 {
        let c = self.cutoff as i64;
        let below = HalfInt::minus_half(-c);
        let fwd = self.forward.abs_total();
        let bwd = self.backward.abs_total();
        let up = if self.upper_tail_active() {
            // sum_{k > c} sum_{x > base} |J_{x+k}| = sum_{j >= base+c+1} (j - base - c) |J_j|
            self.sigma.sup_abs() * bwd * self.forward.abs_moment_from(base + c + 1)
        } else {
            0.0
        };
        up + self.sigma.abs_sum_below(below) * fwd * bwd
    }

    /// `||u_k||_2` restricted to `x in [lo, hi]` (half-integers, `hi = None` for `+inf`).
    fn row_norm(&self, k: HalfInt, lo: HalfInt, hi: Option<HalfInt>) -> f64 {
        self.forward.l2_norm(Some(lo.add_half(k)), hi.map(|h| h.add_half(k)))
    }

    /// `||v_k||_2` restricted to `y in [lo, hi]`.
    fn col_norm(&self, k: HalfInt, lo: HalfInt, hi: Option<HalfInt>) -> f64 {
        // indices -y-k run from -lo-k down to -hi-k
        self.backward.l2_norm(hi.map(|h| -(h.add_half(k))), Some(-(lo.add_half(k))))
    }

    /// `(||K||_1 bound, bound on ||K - K_window||_1)` for the window
    /// `{base + 1/2, ..., base + dim - 1/2}`, both within the cutoff.
    pub fn window_norms(&self, base: i64, dim: usize) -> (f64, f64) {
        let lo = HalfInt::plus_half(base);
        let hi = HalfInt::minus_half(base + dim as i64);
        let past = HalfInt::plus_half(base + dim as i64);
        let mut full = 0.0;
        let mut outside = 0.0;
        // each rank-one piece u v^T has trace norm ||u||_2 ||v||_2
        for &(k, s) in &self.weights {
            let s = s.abs();
            let row_all = self.row_norm(k, lo, None);
            let col_all = self.col_norm(k, lo, None);
            full += s * row_all * col_all;
            let row_win = if dim == 0 { 0.0 } else { self.row_norm(k, lo, Some(hi)) };
            let row_out = self.row_norm(k, past, None);
            let col_out = self.col_norm(k, past, None);
            outside += s * (row_out * col_all + row_win * col_out);
        }
        (full, outside)
    }
}

/// `K(x, y)` truncated to `|k| < cutoff`, with a bound on everything dropped.
pub fn kernel_entry(
    t: &Times,
    t_prime: &Times,
    sigma: &SigmaWeight,
    x: HalfInt,
    y: HalfInt,
    cutoff: usize,
) -> Result<KernelEntry> {
    let reach = x.twice().unsigned_abs().max(y.twice().unsigned_abs()) as usize / 2 + 1;
    let ctx = KernelContext::new(t, t_prime, sigma, reach, cutoff)?;
    Ok(ctx.entry(x, y))
}

/// `det[K(x_i, x_j)]` over a finite set, with a bound covering entry residuals
/// and rounding in the factorization.
pub fn correlation_minor(
    t: &Times,
    t_prime: &Times,
    sigma: &SigmaWeight,
    points: &[HalfInt],
    cutoff: usize,
) -> Result<DetValue> {
    let m = points.len();
    if m == 0 {
        return Ok(DetValue { value: Complex64::new(1.0, 0.0), bound: 0.0 });
    }
    let reach = points.iter().map(|x| x.twice().unsigned_abs() as usize / 2 + 1).max().unwrap_or(1);
    let ctx = KernelContext::new(t, t_prime, sigma, reach, cutoff)?;
    let mut a = Vec::with_capacity(m * m);
    let mut err = 0.0;
    for &x in points {
        for &y in points {
            let e = ctx.entry(x, y);
            a.push(e.value);
            err += e.residual_bound;
        }
    }
    let col_norms: Vec<f64> = (0..m).map(|j| (0..m).map(|i| a[i * m + j].norm_sqr()).sum::<f64>().sqrt()).collect();
    let lu = lu_determinant(&mut a, m);
    let gamma = 3.0 * m as f64 * f64::EPSILON / (1.0 - 3.0 * m as f64 * f64::EPSILON);
    let total = err + gamma * lu.abs_lu_sum;
    let cofactor: f64 = col_norms.iter().map(|c| (c + total).max(1.0)).product();
    Ok(DetValue { value: lu.det, bound: total * cofactor })
}

/// `K` restricted to `{base + 1/2, ..., base + dim - 1/2}`.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    pub base: i64,
    pub dim: usize,
    pub cutoff: usize,
    /// Row-major, rows indexed by `x`, columns by `y`.
    pub entries: Vec<Complex64>,
    /// Per-entry bound on the numerical error of the truncated sums.
    pub entry_errors: Vec<f64>,
    /// Trace-norm bound on the operator minus the zero-padded window,
    /// including the `|k| >= cutoff` part.
    pub tail_bound: f64,
    /// Trace-norm bound on the full operator on `l^2{base + 1/2, ...}`.
    pub trace_norm_bound: f64,
}

impl KernelMatrix {
    pub fn point(&self, i: usize) -> HalfInt {
        HalfInt::plus_half(self.base + i as i64)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    /// Value at lattice points, if inside the window.
    pub fn at(&self, x: HalfInt, y: HalfInt) -> Option<Complex64> {
        let i = (x.twice() - 2 * self.base - 1) / 2;
        let j = (y.twice() - 2 * self.base - 1) / 2;
        let d = self.dim as i64;
        (0..d).contains(&i).then_some(())?;
        (0..d).contains(&j).then_some(())?;
        Some(self.get(i as usize, j as usize))
    }

    pub fn max_entry_error(&self) -> f64 {
        self.entry_errors.iter().copied().fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// The principal minor on the given window indices.
    pub fn minor(&self, idx: &[usize]) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(idx.len() * idx.len());
        for &i in idx {
            for &j in idx {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// CSV with rows `x`, header `y`, complex entries as `re+imj`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x\\y");
        for j in 0..self.dim {
            let _ = write!(s, ",{}", self.point(j));
        }
        s.push('\n');
        for i in 0..self.dim {
            let _ = write!(s, "{}", self.point(i));
            for j in 0..self.dim {
                let z = self.get(i, j);
                let sign = if z.im.is_sign_negative() { '-' } else { '+' };
                let _ = write!(s, ",{}{}{}j", z.re, sign, z.im.abs());
            }
            s.push('\n');
        }
        s
    }
}

impl Serialize for KernelMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            base: i64,
            dim: usize,
            cutoff: usize,
            entries: Vec<Vec<[f64; 2]>>,
            tail_bound: f64,
            trace_norm_bound: f64,
            max_entry_error: f64,
        }
        let entries =
            (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j)).map(|z| [z.re, z.im]).collect()).collect();
        Repr {
            base: self.base,
            dim: self.dim,
            cutoff: self.cutoff,
            entries,
            tail_bound: self.tail_bound,
            trace_norm_bound: self.trace_norm_bound,
            max_entry_error: self.max_entry_error(),
        }
        .serialize(s)
    }
}

/// Fills the window from a prepared context.
pub fn kernel_matrix_with(ctx: &KernelContext, base: i64, dim: usize, par: Parallelism) -> KernelMatrix {
    let cells = par.map_range(0..dim * dim, |idx| {
        let (i, j) = (idx / dim, idx % dim);
        ctx.truncated(HalfInt::plus_half(base + i as i64), HalfInt::plus_half(base + j as i64))
    });
    let (entries, entry_errors) = cells.into_iter().unzip();
    let (full, outside) = ctx.window_norms(base, dim);
    let cut = ctx.cutoff_residual(base);
    KernelMatrix {
        base,
        dim,
        cutoff: ctx.cutoff,
        entries,
        entry_errors,
        tail_bound: outside + cut,
        trace_norm_bound: full + cut,
    }
}

/// Window of `K_{t,t',sigma}` on `{base + 1/2, ..., base + dim - 1/2}`.
pub fn kernel_matrix(
    t: &Times,
    t_prime: &Times,
    sigma: &SigmaWeight,
    base: i64,
    dim: usize,
    cutoff: usize,
    par: Parallelism,
) -> Result<KernelMatrix> {
    if dim == 0 {
        return Err(Error::Precondition("kernel window must have at least one row".into()));
    }
    let reach = base.unsigned_abs() as usize + dim;
    let ctx = KernelContext::new(t, t_prime, sigma, reach, cutoff)?;
    Ok(kernel_matrix_with(&ctx, base, dim, par))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::ParamSeq;

    fn h(twice: i64) -> HalfInt {
        HalfInt::from_twice(twice).unwrap()
    }

    fn times(v: &[f64]) -> Times {
        Times::from(ParamSeq::from_real(v))
    }

    #[test]
    fn sigma_families() {
        let ind = SigmaWeight::IndicatorPositive;
        assert_eq!(ind.eval(h(1)), 1.0);
        assert_eq!(ind.eval(h(-1)), 0.0);
        let f = SigmaWeight::Fermi { u: 0.5 };
        assert!((f.eval(h(-1)) - 0.5f64.sqrt() / (1.0 + 0.5f64.sqrt())).abs() < 1e-15);
        for tw in [-9, -3, -1, 1, 5, 11] {
            assert!((f.eval(h(tw)) + f.eval(h(-tw)) - 1.0).abs() < 1e-15);
        }
        let p = SigmaWeight::PaperForm { u: 0.5 };
        assert!(p.eval(h(1)) > 1.0 && p.eval(h(-1)) < 0.0);
        assert!(p.validate(false).is_err());
        assert!(p.validate(true).is_ok());
        assert!(SigmaWeight::Fermi { u: 1.0 }.validate(false).is_err());
        assert!(SigmaWeight::table([(h(1), 1.5)]).validate(false).is_err());
        assert!(SigmaWeight::zero().is_zero());
    }

    #[test]
    fn sigma_tail_sums() {
        let f = SigmaWeight::Fermi { u: 0.4 };
        let direct: f64 = (0..400).map(|i| f.eval(h(-3 - 2 * i))).sum();
        let bound = f.abs_sum_below(h(-3));
        assert!(bound >= direct && bound - direct < 1e-12);
        assert_eq!(SigmaWeight::IndicatorPositive.abs_sum_below(h(-1)), 0.0);
        assert_eq!(SigmaWeight::IndicatorPositive.abs_sum_below(h(5)), 3.0);
        let t = SigmaWeight::table([(h(-5), 0.25), (h(1), 0.5)]);
        assert_eq!(t.abs_sum_below(h(-1)), 0.25);
        assert_eq!(t.lower_support(), LowerSupport::From(h(-5)));
        assert_eq!(t.upper_support(), Some(h(1)));
    }

    #[test]
    fn sigma_json() {
        let t = SigmaWeight::table([(h(-3), 0.25), (h(1), 0.5)]);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"kind":"table","values":{"-3/2":0.25,"1/2":0.5}}"#);
        assert_eq!(serde_json::from_str::<SigmaWeight>(&s).unwrap(), t);
        let f: SigmaWeight = serde_json::from_str(r#"{"kind":"fermi","u":0.4}"#).unwrap();
        assert_eq!(f, SigmaWeight::Fermi { u: 0.4 });
        let z: SigmaWeight = serde_json::from_str(r#"{"kind":"table"}"#).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn zero_times_kernel_is_diagonal() {
        let sigma = SigmaWeight::table([(h(-1), 0.3), (h(-3), 0.7), (h(5), 0.9)]);
        let k = kernel_matrix(&times(&[]), &times(&[]), &sigma, -3, 6, 10, Parallelism::Sequential).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { sigma.eval(-k.point(i)) } else { 0.0 };
                assert_eq!(k.get(i, j), Complex64::new(want, 0.0));
            }
        }
    }

    #[test]
    fn window_blocks_nest() {
        let t = times(&[0.4, 0.1]);
        let tp = times(&[0.3]);
        let s = SigmaWeight::Fermi { u: 0.3 };
        let small = kernel_matrix(&t, &tp, &s, -2, 5, 20, Parallelism::Sequential).unwrap();
        let big = kernel_matrix(&t, &tp, &s, -2, 10, 20, Parallelism::Parallel).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!((small.get(i, j) - big.get(i, j)).norm() < 1e-15);
            }
        }
        assert!(big.tail_bound <= small.tail_bound);
        assert!(small.tail_bound >= 0.0);
    }

    #[test]
    fn t_swap_transposes() {
        let t = Times::from(ParamSeq::from_pairs([(1, Complex64::new(0.3, 0.1)), (2, Complex64::new(-0.2, 0.0))]));
        let tp = Times::from(ParamSeq::from_pairs([(1, Complex64::new(0.1, -0.2)), (3, Complex64::new(0.15, 0.0))]));
        let s = SigmaWeight::table([(h(-1), 0.3), (h(3), 0.6), (h(-5), 0.2)]);
        let a = kernel_matrix(&t, &tp, &s, -3, 8, 24, Parallelism::Sequential).unwrap();
        let b = kernel_matrix(&tp, &t, &s, -3, 8, 24, Parallelism::Sequential).unwrap();
        // swapping t and t' transposes the kernel
        for i in 0..8 {
            for j in 0..8 {
                assert!((a.get(i, j) - b.get(j, i)).norm() < 1e-12);
            }
        }
        assert!((a.get(0, 1) - b.get(0, 1)).norm() > 1e-6);
    }

    #[test]
    fn entry_matches_matrix() {
        let t = times(&[0.5]);
        let s = SigmaWeight::IndicatorPositive;
        let m = kernel_matrix(&t, &t, &s, -2, 6, 30, Parallelism::Sequential).unwrap();
        let e = kernel_entry(&t, &t, &s, h(1), h(-1), 30).unwrap();
        assert!((m.at(h(1), h(-1)).unwrap() - e.value).norm() < 1e-15);
        assert!(e.residual_bound < 1e-12);
    }

    #[test]
    fn csv_and_json_shapes() {
        let m =
            kernel_matrix(&times(&[]), &times(&[]), &SigmaWeight::IndicatorPositive, -1, 2, 4, Parallelism::Sequential)
                .unwrap();
        let csv = m.to_csv();
        assert_eq!(csv, "x\\y,-1/2,1/2\n-1/2,1+0j,0+0j\n1/2,0+0j,0+0j\n");
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(v["entries"][0][0], serde_json::json!([1.0, 0.0]));
        assert_eq!(v["dim"], 2);
    }
}
