//! Fredholm determinants `tau_n(t, t'; sigma) = Z_{t,t'} det(1 - K)` on
//! `l^2{n + 1/2, n + 3/2, ...}`.
//!
//! Two evaluations are provided. The direct one truncates `K` to a window of
//! `dim` points above `n`. The conjugated one uses `det(1 - AB) = det(1 - BA)`
//! to move to the operator `T(x, x') = sigma(x - n) K_1(x', x)` on all of `Z'`,
//! where `K_1` is the kernel with the indicator weight. Rows of `T` vanish off
//! the support of `sigma(. - n)`, so for finitely supported weights the window
//! is that support and no window truncation happens at all.
//!
//! Error bars combine
//! - a Hadamard cofactor bound for entry errors and LU backward error inside
//!   the window, and
//! - `|det(1 - A) - det(1 - B)| <= ||A - B||_1 exp(||A||_1 + ||B||_1 + 1)` for
//!   everything outside the window or beyond the k-cutoff.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kernel_matrix_with, KernelContext, LowerSupport, SigmaWeight, DEFAULT_CUTOFF, DEFAULT_DIM};
use crate::linalg::lu_determinant;
use crate::par::Parallelism;
use crate::partitions::HalfInt;
use crate::series::{z_norm_times, Times};
use crate::symfun::ParamSeq;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TauConfig {
    /// Direct form: window size. Conjugated form: half-width of the window
    /// used when `sigma` has unbounded support.
    pub dim: usize,
    pub cutoff: usize,
    pub parallelism: Parallelism,
}

impl Default for TauConfig {
    fn default() -> Self {
        TauConfig { dim: DEFAULT_DIM, cutoff: DEFAULT_CUTOFF, parallelism: Parallelism::default() }
    }
}

impl TauConfig {
    pub fn doubled(self) -> Self {
        TauConfig { dim: 2 * self.dim, cutoff: 2 * self.cutoff, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauForm {
    Direct,
    Conjugated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauParams {
    pub t: Times,
    pub t_prime: Times,
    pub sigma: SigmaWeight,
    pub n: i64,
    pub dim: usize,
    pub cutoff: usize,
    pub form: TauForm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TauValue {
    pub value: Complex64,
    pub truncation_bound: f64,
    pub params: TauParams,
}

impl TauValue {
    /// JSON record `{value_re, value_im, bound, params}`.
    pub fn to_record(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("tau records serialize")
    }
}

impl Serialize for TauValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TauValue", 4)?;
        st.serialize_field("value_re", &self.value.re)?;
        st.serialize_field("value_im", &self.value.im)?;
        st.serialize_field("bound", &self.truncation_bound)?;
        st.serialize_field("params", &self.params)?;
        st.end()
    }
}

/// A determinant `det(1 - K)` with its error bar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetValue {
    #[serde(with = "crate::cjson")]
    pub value: Complex64,
    pub bound: f64,
}

/// `det(I - K)` for a row-major window, with the two-part error bound.
///
/// `entry_errors` bound the in-window entries; `tail` bounds the trace norm of
/// everything left out, `norm` the trace norm of the full operator.
pub fn window_determinant(kernel: &[Complex64], entry_errors: &[f64], dim: usize, tail: f64, norm: f64) -> DetValue {
    let mut a: Vec<Complex64> = kernel.iter().map(|k| -k).collect();
    for i in 0..dim {
        a[i * dim + i] += 1.0;
    }
    let col_norms: Vec<f64> =
        (0..dim).map(|j| (0..dim).map(|i| a[i * dim + j].norm_sqr()).sum::<f64>().sqrt()).collect();
    let lu = lu_determinant(&mut a, dim);
    let gamma = 3.0 * dim as f64 * f64::EPSILON / (1.0 - 3.0 * dim as f64 * f64::EPSILON);
    let error_total: f64 = entry_errors.iter().sum::<f64>() + gamma * lu.abs_lu_sum;
    // every cofactor along the segment from A to A + E stays below this
    let cofactor: f64 = col_norms.iter().map(|c| (c + error_total).max(1.0)).product();
    let inside = error_total * cofactor;
    let outside = if tail > 0.0 { tail * (2.0 * norm + 1.0).exp() } else { 0.0 };
    DetValue { value: lu.det, bound: inside + outside }
}

fn finish(z: Complex64, det: DetValue, params: TauParams) -> Result<TauValue> {
    let value = z * det.value;
    if !value.re.is_finite() || !value.im.is_finite() || !det.bound.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite tau_{} (Z = {z}, det = {}, bound = {}) with dim {} and cutoff {}",
            params.n, det.value, det.bound, params.dim, params.cutoff
        )));
    }
    Ok(TauValue { value, truncation_bound: z.norm() * det.bound, params })
}

/// `det(1 - K_{t,t',sigma})` on `l^2{n + 1/2, ...}`, direct form.
pub fn fredholm_det(t: &Times, t_prime: &Times, sigma: &SigmaWeight, n: i64, cfg: TauConfig) -> Result<DetValue> {
    if cfg.dim == 0 {
        return Err(Error::Precondition("window dimension must be positive".into()));
    }
    if sigma.is_zero() {
        return Ok(DetValue { value: Complex64::new(1.0, 0.0), bound: 0.0 });
    }
    let reach = n.unsigned_abs() as usize + cfg.dim;
    let ctx = KernelContext::new(t, t_prime, sigma, reach, cfg.cutoff)?;
    let k = kernel_matrix_with(&ctx, n, cfg.dim, cfg.parallelism);
    Ok(window_determinant(&k.entries, &k.entry_errors, k.dim, k.tail_bound, k.trace_norm_bound))
}

/// `tau_n` for shifted Miwa times, direct form.
pub fn tau_n_times(t: &Times, t_prime: &Times, sigma: &SigmaWeight, n: i64, cfg: TauConfig) -> Result<TauValue> {
    let det = fredholm_det(t, t_prime, sigma, n, cfg)?;
    let params = TauParams {
        t: t.clone(),
        t_prime: t_prime.clone(),
        sigma: sigma.clone(),
        n,
        dim: cfg.dim,
        cutoff: cfg.cutoff,
        form: TauForm::Direct,
    };
    finish(z_norm_times(t, t_prime), det, params)
}

/// `tau_n(t, t'; sigma) = Z_{t,t'} det(1 - K_{t,t',sigma})_{l^2{n+1/2,...}}`.
pub fn tau_n(t: &ParamSeq, t_prime: &ParamSeq, sigma: &SigmaWeight, n: i64, cfg: TauConfig) -> Result<TauValue> {
    tau_n_times(&Times::from(t.clone()), &Times::from(t_prime.clone()), sigma, n, cfg)
}

/// Window `[lo, lo + len)` (half-integers, `lo` as its lower end) for the conjugated form.
fn conjugated_window(sigma: &SigmaWeight, n: i64, half_width: usize) -> (HalfInt, usize) {
    match (sigma.lower_support(), sigma.upper_support()) {
        (LowerSupport::From(a), Some(b)) => {
            let len = ((b.twice() - a.twice()) / 2 + 1) as usize;
            (a.shift(n), len)
        }
        (LowerSupport::From(a), None) => (a.shift(n), 2 * half_width),
        _ => (HalfInt::plus_half(n - half_width as i64), 2 * half_width),
    }
}

/// `Z det(1 - T)` with `T(x, x') = sigma(x - n) K_1(x', x)`.
pub fn tau_conjugated_times(
    t: &Times,
    t_prime: &Times,
    sigma: &SigmaWeight,
    n: i64,
    cfg: TauConfig,
) -> Result<TauValue> {
    let params = TauParams {
        t: t.clone(),
        t_prime: t_prime.clone(),
        sigma: sigma.clone(),
        n,
        dim: cfg.dim,
        cutoff: cfg.cutoff,
        form: TauForm::Conjugated,
    };
    let z = z_norm_times(t, t_prime);
    if sigma.is_zero() {
        return finish(z, DetValue { value: Complex64::new(1.0, 0.0), bound: 0.0 }, params);
    }
    let (lo, len) = conjugated_window(sigma, n, cfg.dim.max(1));
    let hi = lo.shift(len as i64 - 1);
    let reach = (lo.twice().unsigned_abs().max(hi.twice().unsigned_abs()) / 2 + 1) as usize;
    // entries K_1(x', x) with x' far below n need correspondingly more terms
    let cutoff = cfg.cutoff + (n - lo.add_half(HalfInt::plus_half(0))).max(0) as usize;
    let ctx = KernelContext::new(t, t_prime, &SigmaWeight::IndicatorPositive, reach, cutoff)?;

    let cells = cfg.parallelism.map_range(0..len * len, |idx| {
        let (i, j) = (idx / len, idx % len);
        let x = lo.shift(i as i64);
        let s = sigma.eval(x.shift(-n));
        if s == 0.0 {
            return (Complex64::new(0.0, 0.0), 0.0);
        }
        let e = ctx.entry(lo.shift(j as i64), x);
        (e.value * s, e.residual_bound * s.abs())
    });
    let (entries, errors): (Vec<_>, Vec<_>) = cells.into_iter().unzip();
    let (tail, norm) = conjugated_tail(&ctx, sigma, n, lo, hi);
    finish(z, window_determinant(&entries, &errors, len, tail, norm), params)
}

/// `(||T_S - P T P||_1, ||T_S||_1)` bounds for the window `P = [lo, hi]`, using
/// `T = sum_{m > 0} a_m b_m^T`, `a_m(x) = sigma(x - n) J~_{-x-m}`, `b_m(x') = J_{x'+m}`.
///
/// `T_S` is `T` compressed to the rows where `sigma(. - n)` can be nonzero; the
/// other rows vanish, so `det(1 - T) = det(1 - T_S)` and columns off `S` never matter.
fn conjugated_tail(ctx: &KernelContext, sigma: &SigmaWeight, n: i64, lo: HalfInt, hi: HalfInt) -> (f64, f64) {
    let covers_support = match (sigma.lower_support(), sigma.upper_support()) {
        (LowerSupport::Empty, _) => true,
        (LowerSupport::From(a), Some(b)) => a.shift(n) >= lo && b.shift(n) <= hi,
        _ => false,
    };
    let fwd = &ctx.forward;
    let bwd = &ctx.backward;
    let below_active = sigma.lower_support() == LowerSupport::Unbounded;
    // ||b_m||_2 over the columns in S
    let b_on_support = |m: HalfInt| {
        if below_active {
            fwd.l2_norm(None, None)
        } else {
            fwd.l2_norm(Some(lo.add_half(m)), None)
        }
    };
    let sup = sigma.sup_abs();
    let c = ctx.cutoff as i64;
    let len = ((hi.twice() - lo.twice()) / 2 + 1) as usize;
    let weights: Vec<f64> = (0..len).map(|i| sigma.eval(lo.shift(i as i64 - n)).abs()).collect();
    // sum_{x < lo} |sigma(x - n)|
    let below_mass = sigma.abs_sum_below(lo.shift(-n - 1));

    // rank-one pieces a b^T have trace norm ||a||_2 ||b||_2
    let mut norm = 0.0;
    let mut tail = 0.0;
    for mi in 0..c {
        let m = HalfInt::plus_half(mi);
        let a_in = weights
            .iter()
            .enumerate()
            .map(|(i, w)| (w * bwd.abs_at(-(lo.shift(i as i64).add_half(m)))).powi(2))
            .sum::<f64>()
            .sqrt();
        // x > hi: indices -x-m <= -hi-m-1
        let a_above = sup * bwd.l2_norm(None, Some(-(hi.add_half(m)) - 1));
        let a_below = if below_active {
            (sup * bwd.l2_norm(Some(-(lo.add_half(m)) + 1), None)).min(below_mass * bwd.abs_total())
        } else {
            0.0
        };
        let a_out = if covers_support { 0.0 } else { a_above + a_below };
        let b_full = b_on_support(m);
        norm += (a_in + a_out) * b_full;
        if !covers_support {
            let b_below = if below_active { fwd.l2_norm(None, Some(lo.add_half(m) - 1)) } else { 0.0 };
            let b_out = b_below + fwd.l2_norm(Some(hi.add_half(m) + 1), None);
            tail += a_out * b_full + a_in * b_out;
        }
    }
    // m > cutoff: sum_x |sigma(x - n)| sum_{m > c} |J~_{-x-m}|, split at x0
    let mut x0 = HalfInt::plus_half(n - c / 2);
    if let LowerSupport::From(a) = sigma.lower_support() {
        x0 = x0.max(a.shift(n));
    }
    let top = -(x0.add_half(HalfInt::plus_half(c)));
    let beyond =
        fwd.abs_total() * (sup * bwd.abs_moment_upto(top) + sigma.abs_sum_below(x0.shift(-n - 1)) * bwd.abs_total());
    if covers_support {
        // inside the exact window the m > cutoff part is in the entry errors
        (0.0, norm + beyond)
    } else {
        (tail + beyond, norm + beyond)
    }
}

pub fn tau_conjugated(
    t: &ParamSeq,
    t_prime: &ParamSeq,
    sigma: &SigmaWeight,
    n: i64,
    cfg: TauConfig,
) -> Result<TauValue> {
    tau_conjugated_times(&Times::from(t.clone()), &Times::from(t_prime.clone()), sigma, n, cfg)
}

/// A real probability with its error bar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Probability {
    pub value: f64,
    pub bound: f64,
}

/// `P(lambda_1 <= n) = det(1 - K_{t,t'})_{l^2{n+1/2,...}}` for real parameters.
pub fn gap_probability(t: &ParamSeq, t_prime: &ParamSeq, n: i64, cfg: TauConfig) -> Result<Probability> {
    if !t.is_real() || !t_prime.is_real() {
        return Err(Error::Precondition("gap probabilities need real parameters".into()));
    }
    let det =
        fredholm_det(&Times::from(t.clone()), &Times::from(t_prime.clone()), &SigmaWeight::IndicatorPositive, n, cfg)?;
    if !det.value.re.is_finite() {
        return Err(Error::Numeric(format!("non-finite gap probability at n = {n}")));
    }
    Ok(Probability { value: det.value.re, bound: det.bound + det.value.im.abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(twice: i64) -> HalfInt {
        HalfInt::from_twice(twice).unwrap()
    }

    fn cfg(dim: usize, cutoff: usize) -> TauConfig {
        TauConfig { dim, cutoff, parallelism: Parallelism::Sequential }
    }

    #[test]
    fn zero_sigma_gives_z() {
        let t = ParamSeq::from_real(&[0.3, 0.1]);
        let tp = ParamSeq::from_real(&[0.2]);
        let v = tau_n(&t, &tp, &SigmaWeight::zero(), 1, TauConfig::default()).unwrap();
        assert_eq!(v.value, crate::symfun::z_norm(&t, &tp));
        assert_eq!(v.truncation_bound, 0.0);
        let c = tau_conjugated(&t, &tp, &SigmaWeight::zero(), 1, TauConfig::default()).unwrap();
        assert_eq!(c.value, v.value);
    }

    #[test]
    fn zero_times_product() {
        let z = ParamSeq::zero();
        let sigma = SigmaWeight::table([(h(-1), 0.3), (h(-3), 0.5), (h(1), 0.9)]);
        for n in -3..=3 {
            let v = tau_n(&z, &z, &sigma, n, cfg(12, 16)).unwrap();
            let want: f64 = (0..40).map(|i| 1.0 - sigma.eval(h(-(2 * n + 1) - 2 * i))).product();
            assert!((v.value - want).norm() < 1e-15, "n = {n}");
        }
        let one = tau_n(&z, &z, &SigmaWeight::IndicatorPositive, 2, cfg(8, 8)).unwrap();
        assert_eq!(one.value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn gap_trivial() {
        let z = ParamSeq::zero();
        assert_eq!(gap_probability(&z, &z, 0, cfg(8, 8)).unwrap().value, 1.0);
        assert_eq!(gap_probability(&z, &z, -1, cfg(8, 8)).unwrap().value, 0.0);
        let t = ParamSeq::from_real(&[0.5]);
        let far = gap_probability(&t, &t, 30, TauConfig::default()).unwrap();
        assert!((far.value - 1.0).abs() <= far.bound.max(1e-15));
        assert!(far.bound < 1e-12);
        let complex = ParamSeq::from_pairs([(1, Complex64::new(0.1, 0.1))]);
        assert!(gap_probability(&complex, &t, 0, cfg(8, 8)).is_err());
    }

    #[test]
    fn conjugated_agrees_with_direct() {
        let t = ParamSeq::from_real(&[0.4, -0.1]);
        let tp = ParamSeq::from_real(&[0.3, 0.05]);
        for sigma in [
            SigmaWeight::table([(h(-3), 0.4), (h(-1), 0.8), (h(1), 0.2), (h(5), 0.6)]),
            SigmaWeight::IndicatorPositive,
            SigmaWeight::Fermi { u: 0.3 },
        ] {
            for n in -2..=2 {
                let a = tau_n(&t, &tp, &sigma, n, cfg(20, 32)).unwrap();
                let b = tau_conjugated(&t, &tp, &sigma, n, cfg(20, 32)).unwrap();
                let tol = a.truncation_bound + b.truncation_bound;
                assert!((a.value - b.value).norm() <= tol, "{sigma:?} n={n}: {} vs {} tol {tol}", a.value, b.value);
                if !matches!(sigma, SigmaWeight::Fermi { .. }) {
                    assert!(tol < 1e-9, "{sigma:?} n={n}: {tol}");
                }
            }
        }
    }

    #[test]
    fn swap_symmetry() {
        let t = ParamSeq::from_pairs([(1, Complex64::new(0.3, 0.1)), (2, Complex64::new(0.1, 0.0))]);
        let tp = ParamSeq::from_real(&[0.2, -0.1]);
        let s = SigmaWeight::table([(h(-1), 0.5), (h(3), 0.7)]);
        let a = tau_n(&t, &tp, &s, 0, cfg(16, 24)).unwrap();
        let b = tau_n(&tp, &t, &s, 0, cfg(16, 24)).unwrap();
        assert!((a.value - b.value).norm() < 1e-10);
    }

    #[test]
    fn doubling_stays_within_bound() {
        let t = ParamSeq::from_real(&[0.5]);
        let s = SigmaWeight::Fermi { u: 0.4 };
        for n in [-2, 0, 3] {
            let small = tau_n(&t, &t, &s, n, cfg(8, 12)).unwrap();
            let big = tau_n(&t, &t, &s, n, cfg(16, 24)).unwrap();
            assert!((small.value - big.value).norm() <= small.truncation_bound);
        }
    }

    #[test]
    fn record_shape() {
        let v = tau_n(&ParamSeq::zero(), &ParamSeq::zero(), &SigmaWeight::zero(), 0, TauConfig::default()).unwrap();
        let r = v.to_record();
        assert_eq!(r["value_re"], 1.0);
        assert_eq!(r["value_im"], 0.0);
        assert_eq!(r["bound"], 0.0);
        assert_eq!(r["params"]["n"], 0);
    }
}
