//! Symmetric functions specialized at Miwa times.
//!
//! The specialization is fixed through the complete homogeneous functions:
//! `sum_k h_k z^k = gamma(z, t) = exp(sum_k t_k z^k)`. Schur values follow from
//! Jacobi-Trudi, and `Z_{t,t'} = exp(sum_n n t_n t'_n)` is the matching Cauchy
//! normalization.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg;
use crate::partitions::{contains, Partition};

/// A finitely supported sequence `(t_1, t_2, ...)`; absent indices are zero.
#[derive(Clone, PartialEq, Default)]
pub struct ParamSeq {
    entries: BTreeMap<usize, Complex64>,
}

impl ParamSeq {
    pub fn zero() -> Self {
        ParamSeq::default()
    }

    /// `(values[0], values[1], ...)` at indices `1, 2, ...`.
    pub fn from_real(values: &[f64]) -> Self {
        ParamSeq::from_pairs(values.iter().enumerate().map(|(i, &v)| (i + 1, Complex64::new(v, 0.0))))
    }

    /// Zero values and index 0 are dropped.
    pub fn from_pairs<I: IntoIterator<Item = (usize, Complex64)>>(pairs: I) -> Self {
        let mut entries = BTreeMap::new();
        for (k, v) in pairs {
            if k == 0 {
                continue;
            }
            let slot = entries.entry(k).or_insert(Complex64::new(0.0, 0.0));
            *slot += v;
        }
        entries.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        ParamSeq { entries }
    }

    /// The truncated Miwa shift `c * {z} = (c z, c z^2/2, ..., c z^order/order)`.
    pub fn miwa(z: Complex64, coefficient: f64, order: usize) -> Self {
        ParamSeq::from_pairs((1..=order).map(|k| (k, coefficient * z.powu(k as u32) / k as f64)))
    }

    pub fn get(&self, k: usize) -> Complex64 {
        self.entries.get(&k).copied().unwrap_or_default()
    }

    /// Largest index with a nonzero value; 0 for the zero sequence.
    pub fn support(&self) -> usize {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.entries.values().all(|v| v.im == 0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn scale(&self, c: f64) -> Self {
        ParamSeq::from_pairs(self.iter().map(|(k, v)| (k, v * c)))
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn add(&self, other: &ParamSeq) -> Self {
        ParamSeq::from_pairs(self.iter().chain(other.iter()))
    }

    pub fn sub(&self, other: &ParamSeq) -> Self {
        self.add(&other.neg())
    }

    /// `sum_k |t_k| rho^k`, the exponent of the majorant of `gamma(., t)` on `|w| = rho`.
    pub fn abs_exponent(&self, rho: f64) -> f64 {
        self.iter().map(|(k, v)| v.norm() * rho.powi(k as i32)).sum()
    }

    /// `sum_k t_k z^k`.
    pub fn eval_exponent(&self, z: Complex64) -> Complex64 {
        self.iter().map(|(k, v)| v * z.powu(k as u32)).sum()
    }
}

impl fmt::Debug for ParamSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

impl Serialize for ParamSeq {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        // keys in numeric order ("2" before "10")
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.entries.len()))?;
        for (k, v) in &self.entries {
            m.serialize_entry(&k.to_string(), &[v.re, v.im])?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for ParamSeq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = <BTreeMap<String, [f64; 2]>>::deserialize(d)?;
        let mut pairs = Vec::with_capacity(raw.len());
        for (k, [re, im]) in raw {
            let idx: usize =
                k.parse().map_err(|_| D::Error::custom(format!("parameter index {k:?} is not an integer")))?;
            if idx == 0 {
                return Err(D::Error::custom("parameter indices start at 1"));
            }
            pairs.push((idx, Complex64::new(re, im)));
        }
        Ok(ParamSeq::from_pairs(pairs))
    }
}

/// `(h_0, ..., h_order)` of `exp(sum t_k z^k)`, via `n h_n = sum_k k t_k h_{n-k}`.
pub fn h_coeffs(t: &ParamSeq, order: usize) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); order + 1];
    h[0] = Complex64::new(1.0, 0.0);
    for n in 1..=order {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, tk) in t.iter() {
            if k > n {
                break;
            }
            acc += tk * (k as f64) * h[n - k];
        }
        h[n] = acc / n as f64;
    }
    h
}

/// Majorant coefficients: `h_coeffs` of `(|t_1|, |t_2|, ...)`.
pub fn h_coeffs_abs(t: &ParamSeq, order: usize) -> Vec<f64> {
    let abs = ParamSeq::from_pairs(t.iter().map(|(k, v)| (k, Complex64::new(v.norm(), 0.0))));
    h_coeffs(&abs, order).into_iter().map(|c| c.re).collect()
}

fn jacobi_trudi(lambda: &Partition, mu: &Partition, h: &[Complex64], order: usize) -> Complex64 {
    let hk = |k: i64| -> Complex64 {
        if k < 0 {
            Complex64::new(0.0, 0.0)
        } else {
            h[k as usize]
        }
    };
    let mut m = Vec::with_capacity(order * order);
    for i in 1..=order {
        for j in 1..=order {
            let idx = lambda.part(i) as i64 - i as i64 - mu.part(j) as i64 + j as i64;
            m.push(hk(idx));
        }
    }
    linalg::determinant(&m, order)
}

/// `s_lambda(t) = det(h_{lambda_i - i + j})` with matrix order `length(lambda)`.
pub fn schur_value(lambda: &Partition, t: &ParamSeq) -> Complex64 {
    schur_value_with_order(lambda, t, lambda.length())
}

/// Jacobi-Trudi with an explicit matrix order `>= length(lambda)`.
pub fn schur_value_with_order(lambda: &Partition, t: &ParamSeq, order: usize) -> Complex64 {
    let order = order.max(lambda.length());
    let h = h_coeffs(t, lambda.size() + order);
    jacobi_trudi(lambda, &Partition::empty(), &h, order)
}

/// `s_{lambda/mu}(t) = det(h_{lambda_i - i - mu_j + j})`; zero unless `mu ⊂ lambda`.
pub fn skew_schur_value(lambda: &Partition, mu: &Partition, t: &ParamSeq) -> Complex64 {
    if !contains(lambda, mu) {
        return Complex64::new(0.0, 0.0);
    }
    let order = lambda.length();
    let h = h_coeffs(t, lambda.size() + order);
    jacobi_trudi(lambda, mu, &h, order)
}

/// `Z_{t,t'} = exp(sum_n n t_n t'_n)`.
pub fn z_norm(t: &ParamSeq, t_prime: &ParamSeq) -> Complex64 {
    z_exponent(t, t_prime).exp()
}

pub(crate) fn z_exponent(t: &ParamSeq, t_prime: &ParamSeq) -> Complex64 {
    t.iter().map(|(k, v)| v * t_prime.get(k) * k as f64).sum()
}
