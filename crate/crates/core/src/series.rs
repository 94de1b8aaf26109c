//! Truncated power and Laurent series on the unit-circle annulus.
//!
//! `J(z; t, t') = gamma(z, t) / gamma(1/z, t') = sum_k J_k z^k` is computed by
//! exact convolution of the two `h`-series. Miwa shifts `t +- {a}` act on
//! `gamma` as multiplication by `(1 - a w)^{-+1}` and are kept symbolically in
//! [`Times`] so that no infinite parameter sequence is ever materialized.
//!
//! Every window carries per-coefficient error bounds and a Cauchy decay
//! envelope obtained from majorant series. They are used for error reporting
//! and tail bounds only, never to alter values.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::par::Parallelism;
use crate::symfun::{h_coeffs, h_coeffs_abs, z_exponent, ParamSeq};

/// Hard cap on any series order.
pub const MAX_ORDER: usize = 4096;
/// Miwa shift points must satisfy `|a| <` this.
pub const MAX_SHIFT_MODULUS: f64 = 0.9;
pub const DEFAULT_ORDER: usize = 64;
pub const DEFAULT_RADIUS: f64 = 0.3;
/// Largest circle used for Cauchy estimates.
const MAJORANT_RADIUS_CAP: f64 = 4.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A single displacement `sign * {at}` of the Miwa times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiwaPoint {
    #[serde(with = "crate::cjson")]
    pub at: Complex64,
    pub sign: i8,
}

/// Miwa times `params + sum_i sign_i {at_i}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Times {
    pub params: ParamSeq,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shifts: Vec<MiwaPoint>,
}

impl From<ParamSeq> for Times {
    fn from(params: ParamSeq) -> Self {
        Times { params, shifts: Vec::new() }
    }
}

impl Times {
    pub fn neg(&self) -> Times {
        Times {
            params: self.params.neg(),
            shifts: self.shifts.iter().map(|p| MiwaPoint { at: p.at, sign: -p.sign }).collect(),
        }
    }

    /// `self + sign * {at}`. A shift at the origin is the identity and is not stored.
    pub fn shifted(&self, at: Complex64, sign: i8) -> Result<Times> {
        check_shift(at)?;
        let mut out = self.clone();
        if at != ZERO {
            out.shifts.push(MiwaPoint { at, sign: sign.signum() });
        }
        Ok(out)
    }

    pub fn with_params(&self, params: ParamSeq) -> Times {
        Times { params, shifts: self.shifts.clone() }
    }

    /// Coefficients `(h_0, ..., h_order)` of `gamma(w, self)`.
    pub fn gamma_series(&self, order: usize) -> Vec<Complex64> {
        let mut h = h_coeffs(&self.params, order);
        for p in &self.shifts {
            h = apply_shift(&h, p.at, p.sign);
        }
        h
    }

    /// Coefficients of a series dominating `gamma(w, self)` termwise.
    pub fn majorant_series(&self, order: usize) -> Vec<f64> {
        let mut h = h_coeffs_abs(&self.params, order);
        for p in &self.shifts {
            let a = p.at.norm();
            if p.sign > 0 {
                for i in 1..h.len() {
                    h[i] += a * h[i - 1];
                }
            } else {
                for i in (1..h.len()).rev() {
                    h[i] += a * h[i - 1];
                }
            }
        }
        h
    }

    /// Value of the majorant series at `rho >= 0`; infinite past its radius.
    pub fn majorant_value(&self, rho: f64) -> f64 {
        let mut v = self.params.abs_exponent(rho).exp();
        for p in &self.shifts {
            let ar = p.at.norm() * rho;
            if p.sign > 0 {
                if ar >= 1.0 {
                    return f64::INFINITY;
                }
                v /= 1.0 - ar;
            } else {
                v *= 1.0 + ar;
            }
        }
        v
    }

    /// Radius used for Cauchy estimates: inside every pole, capped.
    pub fn majorant_radius(&self) -> f64 {
        let max_pole = self.shifts.iter().filter(|p| p.sign > 0).map(|p| p.at.norm()).fold(0.0, f64::max);
        if max_pole == 0.0 {
            MAJORANT_RADIUS_CAP
        } else {
            (0.9 / max_pole).min(MAJORANT_RADIUS_CAP)
        }
    }

    /// `gamma(w, self)` evaluated in closed form.
    pub fn gamma_eval(&self, w: Complex64) -> Complex64 {
        let mut v = self.params.eval_exponent(w).exp();
        for p in &self.shifts {
            let f = ONE - p.at * w;
            v *= if p.sign > 0 { f.inv() } else { f };
        }
        v
    }
}

/// `Z` for shifted times: `exp(sum n t_n t'_n)` extended bilinearly to the
/// shift parts, with `Z_{{a},{b}} = 1/(1 - ab)`.
pub fn z_norm_times(t: &Times, t_prime: &Times) -> Complex64 {
    let mut log = z_exponent(&t.params, &t_prime.params);
    for p in &t.shifts {
        log += f64::from(p.sign) * t_prime.params.eval_exponent(p.at);
    }
    for q in &t_prime.shifts {
        log += f64::from(q.sign) * t.params.eval_exponent(q.at);
    }
    let mut v = log.exp();
    for p in &t.shifts {
        for q in &t_prime.shifts {
            let f = ONE - p.at * q.at;
            v *= if p.sign * q.sign > 0 { f.inv() } else { f };
        }
    }
    v
}

fn check_shift(at: Complex64) -> Result<()> {
    let modulus = at.norm();
    if modulus.is_nan() || modulus >= MAX_SHIFT_MODULUS {
        return Err(Error::Domain { modulus, max: MAX_SHIFT_MODULUS });
    }
    Ok(())
}

fn apply_shift(h: &[Complex64], at: Complex64, sign: i8) -> Vec<Complex64> {
    let mut out = h.to_vec();
    if sign > 0 {
        for i in 1..out.len() {
            let prev = out[i - 1];
            out[i] += at * prev;
        }
    } else {
        for i in (1..out.len()).rev() {
            out[i] -= at * h[i - 1];
        }
    }
    out
}

/// Multiplies a power series by `(1 - z0 w)^{-sign}`, i.e. moves its times by `sign * {z0}`.
pub fn shift_by_braces(series: &[Complex64], z0: Complex64, sign: i8) -> Result<Vec<Complex64>> {
    check_shift(z0)?;
    Ok(apply_shift(series, z0, sign))
}

/// `|c_k| <= c * r^|k|`, separately for `k >= 0` and `k <= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEnvelope {
    pub pos: (f64, f64),
    pub neg: (f64, f64),
}

impl DecayEnvelope {
    pub fn at(&self, k: i64) -> f64 {
        let (c, r) = if k >= 0 { self.pos } else { self.neg };
        c * r.powi(k.unsigned_abs() as i32)
    }

    fn tail(side: (f64, f64), from: i64) -> f64 {
        let (c, r) = side;
        if r >= 1.0 {
            return f64::INFINITY;
        }
        c * r.powi(from as i32) / (1.0 - r)
    }

    /// `sum_{k >= from} (k - lo + 1) c r^k` for `from >= 0`, `from >= lo`.
    fn moment(side: (f64, f64), from: i64, lo: i64) -> f64 {
        let (c, r) = side;
        if r >= 1.0 {
            return f64::INFINITY;
        }
        let a = (from - lo + 1) as f64;
        c * r.powi(from as i32) * (a / (1.0 - r) + r / ((1.0 - r) * (1.0 - r)))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Pos,
    Neg,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Power {
    Abs,
    Sq,
}

/// Coefficients for exponents `-order..=order` with error bounds.
#[derive(Clone, Debug)]
pub struct LaurentWindow {
    order: usize,
    coeffs: Vec<Complex64>,
    error: Vec<f64>,
    envelope: Option<DecayEnvelope>,
    // prefix[i] = sum_{j < i} (|c_j| + err_j), window-index space
    prefix: Vec<f64>,
    // moment_prefix[i] = sum_{j < i} j (|c_j| + err_j)
    moment_prefix: Vec<f64>,
    // sq_prefix[i] = sum_{j < i} (|c_j| + err_j)^2
    sq_prefix: Vec<f64>,
}

impl LaurentWindow {
    pub fn new(order: usize, coeffs: Vec<Complex64>, error: Vec<f64>, envelope: Option<DecayEnvelope>) -> Result<Self> {
        if coeffs.len() != 2 * order + 1 || error.len() != coeffs.len() {
            return Err(Error::Precondition(format!("a window of order {order} needs {} coefficients", 2 * order + 1)));
        }
        let mut prefix = Vec::with_capacity(coeffs.len() + 1);
        let mut moment_prefix = Vec::with_capacity(coeffs.len() + 1);
        let mut sq_prefix = Vec::with_capacity(coeffs.len() + 1);
        prefix.push(0.0);
        moment_prefix.push(0.0);
        sq_prefix.push(0.0);
        for (i, (c, e)) in coeffs.iter().zip(&error).enumerate() {
            let a = c.norm() + e;
            prefix.push(prefix[i] + a);
            moment_prefix.push(moment_prefix[i] + i as f64 * a);
            sq_prefix.push(sq_prefix[i] + a * a);
        }
        Ok(LaurentWindow { order, coeffs, error, envelope, prefix, moment_prefix, sq_prefix })
    }

    /// The constant series 1.
    pub fn unit(order: usize) -> Self {
        Self::monomial(order, 0)
    }

    /// `z^k`, exact.
    pub fn monomial(order: usize, k: i64) -> Self {
        let mut coeffs = vec![ZERO; 2 * order + 1];
        if k.unsigned_abs() as usize <= order {
            coeffs[(k + order as i64) as usize] = ONE;
        }
        let envelope = DecayEnvelope {
            pos: if k >= 0 { (1.0, 1.0) } else { (0.0, 0.0) },
            neg: if k <= 0 { (1.0, 1.0) } else { (0.0, 0.0) },
        };
        let mut w = Self::new(order, coeffs, vec![0.0; 2 * order + 1], Some(envelope)).unwrap();
        // a monomial has no tail at all
        w.envelope = Some(DecayEnvelope { pos: (envelope.pos.0, 0.0), neg: (envelope.neg.0, 0.0) });
        w
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn errors(&self) -> &[f64] {
        &self.error
    }

    pub fn envelope(&self) -> Option<DecayEnvelope> {
        self.envelope
    }

    fn index(&self, k: i64) -> Option<usize> {
        let i = k + self.order as i64;
        (i >= 0 && i <= 2 * self.order as i64).then_some(i as usize)
    }

    /// Coefficient of `z^k`; zero outside the window.
    pub fn get(&self, k: i64) -> Complex64 {
        self.index(k).map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn error_at(&self, k: i64) -> f64 {
        self.index(k).map_or(0.0, |i| self.error[i])
    }

    pub fn max_error(&self) -> f64 {
        self.error.iter().copied().fold(0.0, f64::max)
    }

    /// Bound on the true `|c_k|`, using the envelope outside the window.
    pub fn abs_at(&self, k: i64) -> f64 {
        match self.index(k) {
            Some(i) => self.coeffs[i].norm() + self.error[i],
            None => self.envelope.map_or(f64::INFINITY, |e| e.at(k)),
        }
    }

    // envelope mass of exponents in [from, to] (from > order) on one side
    fn envelope_between(&self, side: Side, power: Power, from: i64, to: Option<i64>) -> f64 {
        let Some(e) = self.envelope else { return f64::INFINITY };
        let (c, r) = if side == Side::Pos { e.pos } else { e.neg };
        let env = if power == Power::Sq { (c * c, r * r) } else { (c, r) };
        let head = DecayEnvelope::tail(env, from);
        match to {
            Some(to) if to < from => 0.0,
            Some(to) if head.is_finite() => (head - DecayEnvelope::tail(env, to + 1)).max(0.0),
            _ => head,
        }
    }

    fn window_sum(&self, power: Power, lo: i64, hi: i64) -> f64 {
        let n = self.order as i64;
        let (lo, hi) = (lo.max(-n), hi.min(n));
        if lo > hi {
            return 0.0;
        }
        let prefix = if power == Power::Sq { &self.sq_prefix } else { &self.prefix };
        prefix[(hi + n) as usize + 1] - prefix[(lo + n) as usize]
    }

    // sum over lo <= k <= hi, either bound may be infinite
    fn sum_between(&self, power: Power, lo: Option<i64>, hi: Option<i64>) -> f64 {
        let n = self.order as i64;
        if let (Some(lo), Some(hi)) = (lo, hi) {
            if lo > hi {
                return 0.0;
            }
        }
        let mut total = self.window_sum(power, lo.unwrap_or(-n), hi.unwrap_or(n));
        if hi.is_none_or(|h| h > n) {
            total += self.envelope_between(Side::Pos, power, lo.map_or(n + 1, |l| l.max(n + 1)), hi);
        }
        if lo.is_none_or(|l| l < -n) {
            total += self.envelope_between(Side::Neg, power, hi.map_or(n + 1, |h| (-h).max(n + 1)), lo.map(|l| -l));
        }
        total
    }

    /// Bound on `sum_{lo <= k <= hi} |c_k|`.
    pub fn abs_sum_range(&self, lo: i64, hi: i64) -> f64 {
        self.sum_between(Power::Abs, Some(lo), Some(hi))
    }

    /// Bound on `sum_{k >= lo} |c_k|`.
    pub fn abs_sum_from(&self, lo: i64) -> f64 {
        self.sum_between(Power::Abs, Some(lo), None)
    }

    /// Bound on `sum_{k <= hi} |c_k|`.
    pub fn abs_sum_upto(&self, hi: i64) -> f64 {
        self.sum_between(Power::Abs, None, Some(hi))
    }

    /// Bound on `sum_k |c_k|` over all of `Z`.
    pub fn abs_total(&self) -> f64 {
        self.sum_between(Power::Abs, None, None)
    }

    /// Bound on `(sum_{lo <= k <= hi} |c_k|^2)^{1/2}`; `None` leaves that end open.
    pub fn l2_norm(&self, lo: Option<i64>, hi: Option<i64>) -> f64 {
        self.sum_between(Power::Sq, lo, hi).sqrt()
    }

    /// Bound on `sum_{k >= lo} (k - lo + 1) |c_k|`.
    pub fn abs_moment_from(&self, lo: i64) -> f64 {
        let n = self.order as i64;
        let mut total = 0.0;
        if lo <= n {
            if lo < -n {
                // negative exponents below the window, weighted
                let e = self.envelope;
                let Some(e) = e else { return f64::INFINITY };
                let (c, r) = e.neg;
                for k in lo..-n {
                    total += (k - lo + 1) as f64 * c * r.powi((-k) as i32);
                }
            }
            let start = lo.max(-n);
            let a = (start + n) as usize;
            let end = 2 * self.order + 1;
            // sum (i - n - lo + 1) |c| over window indices i >= a
            let shift = (-n - lo + 1) as f64;
            total += (self.moment_prefix[end] - self.moment_prefix[a]) + shift * (self.prefix[end] - self.prefix[a]);
        }
        let from = lo.max(n + 1);
        total + self.envelope.map_or(f64::INFINITY, |e| DecayEnvelope::moment(e.pos, from, lo))
    }

    /// Bound on `sum_{k <= hi} (hi - k + 1) |c_k|`.
    pub fn abs_moment_upto(&self, hi: i64) -> f64 {
        let n = self.order as i64;
        let mut total = 0.0;
        if hi >= -n {
            if hi > n {
                let Some(e) = self.envelope else { return f64::INFINITY };
                let (c, r) = e.pos;
                for k in n + 1..=hi {
                    total += (hi - k + 1) as f64 * c * r.powi(k as i32);
                }
            }
            let b = (hi.min(n) + n) as usize;
            total += (hi + n + 1) as f64 * self.prefix[b + 1] - self.moment_prefix[b + 1];
        }
        let from = (-hi).max(n + 1);
        total + self.envelope.map_or(f64::INFINITY, |e| DecayEnvelope::moment(e.neg, from, -hi))
    }

    /// Evaluates the truncated series at `z`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let n = self.order as i64;
        (-n..=n).map(|k| self.get(k) * z.powi(k as i32)).sum()
    }
}

impl Serialize for LaurentWindow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            #[serde(rename = "N")]
            order: usize,
            #[serde(with = "crate::cjson::vec")]
            coeffs: &'a [Complex64],
        }
        Repr { order: self.order, coeffs: &self.coeffs }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentWindow {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            #[serde(rename = "N")]
            order: usize,
            #[serde(with = "crate::cjson::vec")]
            coeffs: Vec<Complex64>,
        }
        let r = Repr::deserialize(d)?;
        let len = r.coeffs.len();
        LaurentWindow::new(r.order, r.coeffs, vec![0.0; len], None).map_err(serde::de::Error::custom)
    }
}

/// `J_k(t, t')` for `|k| <= order`.
pub fn j_coeffs(t: &ParamSeq, t_prime: &ParamSeq, order: usize) -> Result<LaurentWindow> {
    j_coeffs_times(&Times::from(t.clone()), &Times::from(t_prime.clone()), order)
}

/// Inner cutoff and the resulting tail constant for `sum_m a_{k+m} b_m`.
struct InnerCut {
    len: usize,
    tail: f64,
}

fn inner_cut(a_max: f64, b_max: f64, q: f64, scale: f64) -> Result<InnerCut> {
    // tail after `len` terms: a_max * b_max * q^len / (1 - q), relative to `scale`
    let target = 1e-16 * scale.max(f64::MIN_POSITIVE);
    let c = a_max * b_max / (1.0 - q);
    let mut len = 8usize;
    while c * q.powi(len as i32) > target {
        len += 1;
        if len > MAX_ORDER {
            return Err(Error::OrderLimit { requested: len, cap: MAX_ORDER });
        }
    }
    Ok(InnerCut { len, tail: c * q.powi(len as i32) })
}

/// `J_k` for shifted times: the Laurent coefficients of `gamma(z, t) gamma(1/z, -t')`.
pub fn j_coeffs_times(t: &Times, t_prime: &Times, order: usize) -> Result<LaurentWindow> {
    if order > MAX_ORDER {
        return Err(Error::OrderLimit { requested: order, cap: MAX_ORDER });
    }
    let left = t.clone();
    let right = t_prime.neg();
    let (ra, rb) = (left.majorant_radius(), right.majorant_radius());
    let (a_max, b_max) = (left.majorant_value(ra), right.majorant_value(rb));
    let q = 1.0 / (ra * rb);
    if q >= 1.0 {
        let modulus = t.shifts.iter().chain(&t_prime.shifts).map(|p| p.at.norm()).fold(0.0, f64::max);
        return Err(Error::Domain { modulus, max: MAX_SHIFT_MODULUS });
    }
    // Cauchy envelope on |z| = ra for k >= 0 and |z| = 1/rb for k <= 0.
    let pos = (a_max * right.majorant_value(1.0 / ra), 1.0 / ra);
    let neg = (left.majorant_value(1.0 / rb) * b_max, 1.0 / rb);
    let envelope = DecayEnvelope { pos, neg };

    let cut = inner_cut(a_max, b_max, q, pos.0.min(neg.0))?;
    let len = order + cut.len + 1;
    let a = left.gamma_series(len);
    let b = right.gamma_series(len);
    let a_hat = left.majorant_series(len);
    let b_hat = right.majorant_series(len);
    let shifts = 1 + t.shifts.len() + t_prime.shifts.len();
    let rounding = 16.0 * (order + 2 * cut.len + 4) as f64 * shifts as f64 * f64::EPSILON;

    let n = order as i64;
    let mut coeffs = Vec::with_capacity(2 * order + 1);
    let mut error = Vec::with_capacity(2 * order + 1);
    for k in -n..=n {
        let m0 = (-k).max(0) as usize;
        let mut acc = ZERO;
        let mut maj = 0.0;
        for m in m0..m0 + cut.len {
            let i = (k + m as i64) as usize;
            acc += a[i] * b[m];
            maj += a_hat[i] * b_hat[m];
        }
        let tail = if k >= 0 { cut.tail * ra.powi(-(k as i32)) } else { cut.tail * rb.powi(k as i32) };
        coeffs.push(acc);
        error.push(rounding * maj + tail);
    }
    LaurentWindow::new(order, coeffs, error, Some(envelope))
}

fn combine_envelopes(a: DecayEnvelope, b: DecayEnvelope) -> DecayEnvelope {
    let side = |x: (f64, f64), y: (f64, f64), xo: (f64, f64), yo: (f64, f64)| -> (f64, f64) {
        // |c_k| <= sum_j |a_j||b_{k-j}|; bounded with a common rate and a
        // polynomial factor absorbed by taking the square root of the rate.
        let r = x.1.max(y.1).max(xo.1).max(yo.1);
        if r == 0.0 {
            return (x.0 * y.0, 0.0);
        }
        if r >= 1.0 {
            return (f64::INFINITY, 1.0);
        }
        let s = r.sqrt();
        let mut peak: f64 = 1.0;
        let mut k = 0;
        while k < 10_000 {
            let v = (k + 1) as f64 * s.powi(k);
            peak = peak.max(v);
            if k > 2 && v < 1.0 {
                break;
            }
            k += 1;
        }
        let c = x.0.max(xo.0) * y.0.max(yo.0) * (peak + 2.0 * r * r / (1.0 - r * r));
        (c, s)
    };
    DecayEnvelope { pos: side(a.pos, b.pos, a.neg, b.neg), neg: side(a.neg, b.neg, a.pos, b.pos) }
}

/// Product of two windows, truncated to the smaller order.
pub fn multiply(a: &LaurentWindow, b: &LaurentWindow) -> LaurentWindow {
    let order = a.order.min(b.order);
    let n = order as i64;
    let (na, nb) = (a.order as i64, b.order as i64);
    let a_out = a.abs_total() - a.abs_sum_range(-na, na);
    let b_out = b.abs_total() - b.abs_sum_range(-nb, nb);
    let a_max = (-na..=na).map(|k| a.abs_at(k)).fold(0.0, f64::max);
    let b_max = (-nb..=nb).map(|k| b.abs_at(k)).fold(0.0, f64::max);
    let b_err_max = b.max_error();
    let a_err_max = a.max_error();
    let terms = (a.coeffs.len() + b.coeffs.len()) as f64;

    let mut coeffs = Vec::with_capacity(2 * order + 1);
    let mut error = Vec::with_capacity(2 * order + 1);
    for k in -n..=n {
        let mut acc = ZERO;
        let mut mag = 0.0;
        let lo = (k - nb).max(-na);
        let hi = (k + nb).min(na);
        for j in lo..=hi {
            let p = a.get(j) * b.get(k - j);
            acc += p;
            mag += p.norm();
        }
        let propagated = a.abs_total() * b_err_max + a_err_max * b.abs_total();
        let outside = a_out.max(0.0) * b_max.max(b.abs_total()) + b_out.max(0.0) * a_max.max(a.abs_total());
        coeffs.push(acc);
        error.push(propagated + outside + 2.0 * terms * f64::EPSILON * mag);
    }
    let envelope = match (a.envelope, b.envelope) {
        (Some(x), Some(y)) => Some(combine_envelopes(x, y)),
        _ => None,
    };
    LaurentWindow::new(order, coeffs, error, envelope).expect("consistent lengths")
}

/// A Laurent coefficient recovered from samples on a circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DftCoefficient {
    #[serde(with = "crate::cjson")]
    pub value: Complex64,
    /// `|value - value from every other sample|`.
    pub aliasing_estimate: f64,
    pub samples: usize,
}

fn unit_root(j: usize, p: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * j as f64 / p as f64)
}

/// Sample points `rho * omega^j`, `j < p`.
pub fn circle_points(rho: f64, p: usize) -> Vec<Complex64> {
    (0..p).map(|j| rho * unit_root(j, p)).collect()
}

/// `[z^k]` from samples `f(rho omega^j)`, summed in index order.
pub fn coeff_from_samples(samples: &[Complex64], k: i64, rho: f64) -> Complex64 {
    let p = samples.len();
    let kk = k.rem_euclid(p as i64) as usize;
    let mut acc = ZERO;
    for (j, f) in samples.iter().enumerate() {
        acc += f * unit_root(p - (j * kk) % p, p);
    }
    acc / p as f64 * rho.powi(-(k as i32))
}

fn check_samples(k: i64, p: usize) -> Result<()> {
    if p < 4 * (k.unsigned_abs() as usize + 1) {
        return Err(Error::Precondition(format!("{p} samples are too few for the coefficient of z^{k}")));
    }
    Ok(())
}

fn with_aliasing(samples: &[Complex64], k: i64, rho: f64) -> DftCoefficient {
    let value = coeff_from_samples(samples, k, rho);
    let half: Vec<Complex64> = samples.iter().step_by(2).copied().collect();
    let coarse = coeff_from_samples(&half, k, rho);
    DftCoefficient { value, aliasing_estimate: (value - coarse).norm(), samples: samples.len() }
}

/// `(1/P) sum_j f(rho omega^j) rho^{-k} omega^{-jk}`.
pub fn coeff_extract_dft<F>(f: F, k: i64, rho: f64, p: usize, par: Parallelism) -> Result<DftCoefficient>
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    check_samples(k, p)?;
    let pts = circle_points(rho, p);
    let samples = par.map(&pts, |z| f(*z));
    Ok(with_aliasing(&samples, k, rho))
}

/// Adaptive extraction: doubles the sample count, reusing old samples as the
/// even ones, until two successive values agree within `tol` or `max_p` is hit.
pub fn coeff_extract_adaptive<F>(
    f: F,
    k: i64,
    rho: f64,
    p0: usize,
    max_p: usize,
    tol: f64,
    par: Parallelism,
) -> Result<DftCoefficient>
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    check_samples(k, p0)?;
    let mut p = p0;
    let pts = circle_points(rho, p);
    let mut samples = par.map(&pts, |z| f(*z));
    let mut current = with_aliasing(&samples, k, rho);
    while current.aliasing_estimate > tol && 2 * p <= max_p {
        let odd: Vec<Complex64> = (0..p).map(|j| rho * unit_root(2 * j + 1, 2 * p)).collect();
        let new = par.map(&odd, |z| f(*z));
        let mut merged = Vec::with_capacity(2 * p);
        for (e, o) in samples.iter().zip(&new) {
            merged.push(*e);
            merged.push(*o);
        }
        samples = merged;
        p *= 2;
        current = with_aliasing(&samples, k, rho);
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bessel(k: i64, x: f64) -> f64 {
        // independent power series; J_{-k} = (-1)^k J_k
        let n = k.unsigned_abs() as i32;
        let mut term = (x / 2.0).powi(n) / (1..=n).map(f64::from).product::<f64>();
        let mut sum = 0.0;
        for m in 0..60 {
            sum += term;
            term *= -(x / 2.0) * (x / 2.0) / (((m + 1) * (m + 1 + n)) as f64);
        }
        if k < 0 && n % 2 == 1 {
            -sum
        } else {
            sum
        }
    }

    #[test]
    fn j_trivial_and_bessel() {
        let w = j_coeffs(&ParamSeq::zero(), &ParamSeq::zero(), 10).unwrap();
        for k in -10..=10 {
            assert_eq!(w.get(k), if k == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        }
        let t = ParamSeq::from_real(&[0.5]);
        let w = j_coeffs(&t, &t, 20).unwrap();
        assert!((w.get(0).re - 0.7651976866).abs() < 1e-10);
        for k in -10..=10 {
            assert!((w.get(k) - c(bessel(k, 1.0), 0.0)).norm() < 1e-13, "k = {k}");
            assert!(w.get(k).norm() <= w.envelope().unwrap().at(k));
        }
    }

    #[test]
    fn j_symmetry() {
        let t = ParamSeq::from_pairs([(1, c(0.3, 0.1)), (2, c(-0.2, 0.0)), (3, c(0.1, 0.05))]);
        let tp = ParamSeq::from_pairs([(1, c(0.25, -0.2)), (4, c(0.3, 0.0))]);
        let a = j_coeffs(&t.neg(), &tp.neg(), 30).unwrap();
        let b = j_coeffs(&tp, &t, 30).unwrap();
        for k in -30..=30 {
            assert!((a.get(-k) - b.get(k)).norm() < 1e-13);
        }
    }

    #[test]
    fn j_times_inverse_is_unit() {
        let t = ParamSeq::from_real(&[0.4, -0.1]);
        let tp = ParamSeq::from_real(&[0.2, 0.3]);
        let a = j_coeffs(&t, &tp, 40).unwrap();
        let b = j_coeffs(&t.neg(), &tp.neg(), 40).unwrap();
        let p = multiply(&a, &b);
        for k in -20..=20 {
            let want = if k == 0 { 1.0 } else { 0.0 };
            assert!((p.get(k) - c(want, 0.0)).norm() < 1e-10);
            assert!((p.get(k) - c(want, 0.0)).norm() <= p.error_at(k) + 1e-15);
        }
    }

    #[test]
    fn monomials_multiply() {
        let p = multiply(&LaurentWindow::monomial(5, 1), &LaurentWindow::monomial(5, -1));
        for k in -5..=5 {
            assert_eq!(p.get(k), if k == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        }
        let t = ParamSeq::from_real(&[0.3]);
        let a = j_coeffs(&t, &t, 12).unwrap();
        let same = multiply(&a, &LaurentWindow::unit(12));
        for k in -12..=12 {
            assert_eq!(same.get(k), a.get(k));
        }
    }

    #[test]
    fn shifted_gamma_matches_closed_form() {
        let t = Times::from(ParamSeq::from_real(&[0.3, 0.2]));
        let z0 = c(0.25, 0.1);
        let s = t.shifted(z0, 1).unwrap().shifted(c(-0.2, 0.0), -1).unwrap();
        let w = c(0.3, -0.2);
        let series: Complex64 = s.gamma_series(80).iter().enumerate().map(|(i, h)| h * w.powi(i as i32)).sum();
        assert!((series - s.gamma_eval(w)).norm() < 1e-14);
        // the symbolic shift agrees with a long Miwa parameter vector
        let long = t.params.add(&ParamSeq::miwa(z0, 1.0, 60)).add(&ParamSeq::miwa(c(-0.2, 0.0), -1.0, 60));
        let direct = crate::symfun::h_coeffs(&long, 20);
        for (x, y) in direct.iter().zip(s.gamma_series(20)) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn shift_by_braces_examples() {
        let one = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert_eq!(shift_by_braces(&one, c(0.0, 0.0), 1).unwrap(), one);
        let z0 = c(0.5, 0.0);
        let g = shift_by_braces(&one, z0, 1).unwrap();
        assert_eq!(g, vec![c(1.0, 0.0), z0, z0 * z0, z0 * z0 * z0]);
        let back = shift_by_braces(&g, z0, -1).unwrap();
        for (x, y) in back.iter().zip(&one) {
            assert!((x - y).norm() < 1e-12);
        }
        assert!(matches!(shift_by_braces(&one, c(0.95, 0.0), 1), Err(Error::Domain { .. })));
    }

    #[test]
    fn z_norm_with_shifts() {
        let t = Times::from(ParamSeq::from_real(&[0.3, 0.1]));
        let tp = Times::from(ParamSeq::from_real(&[0.2]));
        let z0 = c(0.2, 0.1);
        let plain = z_norm_times(&t, &tp);
        let shifted = z_norm_times(&t, &tp.shifted(z0, 1).unwrap());
        assert!((shifted - plain * t.gamma_eval(z0)).norm() < 1e-14);
        let a = c(0.1, 0.0);
        let b = c(0.3, 0.2);
        let both = z_norm_times(&Times::default().shifted(a, 1).unwrap(), &Times::default().shifted(b, -1).unwrap());
        assert!((both - (c(1.0, 0.0) - a * b)).norm() < 1e-15);
    }

    #[test]
    fn dft_examples() {
        let par = Parallelism::Sequential;
        let one = |_: Complex64| c(1.0, 0.0);
        assert!((coeff_extract_dft(one, 0, 0.3, 16, par).unwrap().value - 1.0).norm() < 1e-14);
        assert!(coeff_extract_dft(one, 2, 0.3, 16, par).unwrap().value.norm() < 1e-14);
        let e = coeff_extract_dft(|z: Complex64| z.exp(), 2, 0.5, 64, par).unwrap();
        assert!((e.value - 0.5).norm() < 1e-12);
        let g = coeff_extract_dft(|z: Complex64| (c(1.0, 0.0) - 0.3 * z).inv(), 3, 0.3, 64, par).unwrap();
        assert!((g.value - 0.027).norm() < 1e-12);
        let poly = |z: Complex64| z.powi(-5) * 2.0 + z.powi(7) * c(0.0, 3.0) + 1.0;
        for (k, want) in [(-5, c(2.0, 0.0)), (7, c(0.0, 3.0)), (0, c(1.0, 0.0)), (1, c(0.0, 0.0))] {
            let v = coeff_extract_dft(poly, k, 0.8, 32, par).unwrap().value;
            assert!((v - want).norm() < 1e-13, "k = {k}");
        }
        assert!(coeff_extract_dft(one, 10, 0.3, 16, par).is_err());
    }

    #[test]
    fn adaptive_doubling_reuses_samples() {
        let f = |z: Complex64| (c(1.0, 0.0) - 0.28 * z).inv() * (c(1.0, 0.0) - 0.05 / z).inv();
        let a = coeff_extract_adaptive(f, 1, 1.0, 8, 1024, 1e-12, Parallelism::Parallel).unwrap();
        assert!(a.samples > 8);
        let direct = coeff_extract_dft(f, 1, 1.0, a.samples, Parallelism::Sequential).unwrap();
        assert!((a.value - direct.value).norm() < 1e-15);
    }

    #[test]
    fn window_sums() {
        let t = ParamSeq::from_real(&[0.5]);
        let w = j_coeffs(&t, &t, 10).unwrap();
        let total: f64 = (-10..=10).map(|k| w.abs_at(k)).sum();
        assert!(w.abs_total() >= total);
        assert!((w.abs_sum_range(-10, 10) - total).abs() < 1e-14);
        assert!((w.abs_sum_from(-3) + w.abs_sum_upto(-4) - w.abs_total()).abs() < 1e-12);
        assert!(w.abs_sum_from(40) < 1e-15);
        let m: f64 = (2..=10).map(|k| (k - 1) as f64 * w.abs_at(k)).sum();
        assert!(w.abs_moment_from(2) >= m);
        assert!(w.abs_moment_from(2) - m < 1e-4);
        let m: f64 = (-10..=-3).map(|k| (-3 - k + 1) as f64 * w.abs_at(k)).sum();
        assert!(w.abs_moment_upto(-3) >= m);
        assert!(w.abs_moment_upto(-3) - m < 1e-4);
        let m: f64 = (-10..=10).map(|k| (12 - k + 1) as f64 * w.abs_at(k)).sum();
        assert!(w.abs_moment_upto(12) >= m && w.abs_moment_upto(12) - m < 1e-3);
    }

    #[test]
    fn window_json() {
        let w = LaurentWindow::monomial(1, -1);
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"N":1,"coeffs":[[1.0,0.0],[0.0,0.0],[0.0,0.0]]}"#);
        let back: LaurentWindow = serde_json::from_str(&s).unwrap();
        assert_eq!(back.coeffs(), w.coeffs());
        assert!(serde_json::from_str::<LaurentWindow>(r#"{"N":2,"coeffs":[[1.0,0.0]]}"#).is_err());
    }
}
