//! Residuals of the bilinear Hirota equations
//!
//! ```text
//! [z^{l-m}]  gamma(1/z, -2s') tau_{m+1}(t+s, t'+s'+{z}) tau_l(t-s, t'-s'-{z})
//!   = [z^{m-l}] gamma(1/z, 2s) tau_m(t+s-{z}, t'+s') tau_{l+1}(t-s+{z}, t'-s')
//! ```
//!
//! Both sides are sampled on `|z| = rho` and the coefficients come from a DFT
//! that doubles its sample count until two successive values agree.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::hash::{DefaultHasher, Hash, Hasher};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fredholm::{tau_n_times, TauConfig, TauValue};
use crate::kernel::SigmaWeight;
use crate::par::Parallelism;
use crate::series::{circle_points, coeff_from_samples, Times, DEFAULT_RADIUS};
use crate::symfun::ParamSeq;

/// Which charge index the identity is evaluated at.
///
/// `Reflected` uses `f_n = tau_{-n}`, the matrix coefficient
/// `<Gamma_+(-t) A_sigma Gamma_-(-t') v_n, v_n>`; `Unreflected` uses `tau_n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeConvention {
    #[default]
    Reflected,
    Unreflected,
}

impl ChargeConvention {
    pub fn index(self, n: i64) -> i64 {
        match self {
            ChargeConvention::Reflected => -n,
            ChargeConvention::Unreflected => n,
        }
    }
}

/// Which argument receives a `±{z0}` shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shift {
    None,
    TPlus,
    TMinus,
    TprimePlus,
    TprimeMinus,
}

/// `tau_n` with `t` or `t'` replaced by its `±{z0}` shift.
pub fn tau_shifted_times(
    t: &Times,
    t_prime: &Times,
    sigma: &SigmaWeight,
    n: i64,
    z0: Complex64,
    which: Shift,
    cfg: TauConfig,
) -> Result<TauValue> {
    let (t, tp) = match which {
        Shift::None => (t.clone(), t_prime.clone()),
        Shift::TPlus => (t.shifted(z0, 1)?, t_prime.clone()),
        Shift::TMinus => (t.shifted(z0, -1)?, t_prime.clone()),
        Shift::TprimePlus => (t.clone(), t_prime.shifted(z0, 1)?),
        Shift::TprimeMinus => (t.clone(), t_prime.shifted(z0, -1)?),
    };
    tau_n_times(&t, &tp, sigma, n, cfg)
}

pub fn tau_shifted(
    t: &ParamSeq,
    t_prime: &ParamSeq,
    sigma: &SigmaWeight,
    n: i64,
    z0: Complex64,
    which: Shift,
    cfg: TauConfig,
) -> Result<TauValue> {
    tau_shifted_times(&Times::from(t.clone()), &Times::from(t_prime.clone()), sigma, n, z0, which, cfg)
}

/// Inputs of one residual evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HirotaSpec {
    pub m: i64,
    pub l: i64,
    pub t: ParamSeq,
    pub t_prime: ParamSeq,
    pub s: ParamSeq,
    pub s_prime: ParamSeq,
    pub sigma: SigmaWeight,
    /// Short name of `sigma` for summaries.
    pub sigma_label: String,
}

impl HirotaSpec {
    /// Stable hash of every parameter except `m, l`.
    pub fn params_hash(&self) -> String {
        let json = serde_json::to_string(&(&self.t, &self.t_prime, &self.s, &self.s_prime, &self.sigma))
            .expect("parameters serialize");
        let mut h = DefaultHasher::new();
        json.hash(&mut h);
        format!("{:016x}", h.finish())
    }
}

/// Numerical knobs shared by a suite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HirotaConfig {
    pub radius: f64,
    pub samples: usize,
    pub max_samples: usize,
    /// Doubling stops when two successive extractions agree within this.
    pub tol: f64,
    pub tau: TauConfig,
    pub convention: ChargeConvention,
}

impl Default for HirotaConfig {
    fn default() -> Self {
        HirotaConfig {
            radius: DEFAULT_RADIUS,
            samples: 64,
            max_samples: 1024,
            tol: 1e-9,
            tau: TauConfig { parallelism: Parallelism::Sequential, ..TauConfig::default() },
            convention: ChargeConvention::Reflected,
        }
    }
}

/// One evaluated case.
#[derive(Clone, Debug, Serialize)]
pub struct HirotaCase {
    #[serde(flatten)]
    pub spec: HirotaSpec,
    pub radius: f64,
    pub samples: usize,
    pub convention: ChargeConvention,
    #[serde(with = "crate::cjson")]
    pub lhs: Complex64,
    #[serde(with = "crate::cjson")]
    pub rhs: Complex64,
    pub residual: f64,
    /// Aliasing estimates plus propagated tau truncation bounds, both sides.
    pub bound: f64,
}

/// A Laurent coefficient with what is known about its error.
#[derive(Clone, Copy, Debug)]
struct Extracted {
    value: Complex64,
    aliasing: f64,
    truncation: f64,
    samples: usize,
}

/// `[z^k] f` with `f` returning `(value, bound)` at each sample.
fn extract<F>(f: F, k: i64, cfg: &HirotaConfig, par: Parallelism) -> Result<Extracted>
where
    F: Fn(Complex64) -> Result<(Complex64, f64)> + Sync + Send,
{
    let rho = cfg.radius;
    let mut p = cfg.samples;
    if p < 4 * (k.unsigned_abs() as usize + 1) {
        return Err(Error::Precondition(format!("{p} samples are too few for the coefficient of z^{k}")));
    }
    let first = par.map(&circle_points(rho, p), |z| f(*z));
    let mut samples = first.into_iter().collect::<Result<Vec<_>>>()?;
    loop {
        let values: Vec<Complex64> = samples.iter().map(|s| s.0).collect();
        let value = coeff_from_samples(&values, k, rho);
        let coarse: Vec<Complex64> = values.iter().step_by(2).copied().collect();
        let aliasing = (value - coeff_from_samples(&coarse, k, rho)).norm();
        if aliasing <= cfg.tol || 2 * p > cfg.max_samples {
            if aliasing > 1e3 * cfg.tol {
                return Err(Error::Numeric(format!(
                    "coefficient of z^{k} did not settle at {p} samples on |z| = {rho} \
                     (successive values differ by {aliasing:.3e}); the radius is probably too large"
                )));
            }
            let truncation = samples.iter().map(|s| s.1).fold(0.0, f64::max) * rho.powi(-(k as i32));
            return Ok(Extracted { value, aliasing, truncation, samples: p });
        }
        let odd: Vec<Complex64> =
            (0..p).map(|j| Complex64::from_polar(rho, 2.0 * PI * (2 * j + 1) as f64 / (2 * p) as f64)).collect();
        let new = par.map(&odd, |z| f(*z)).into_iter().collect::<Result<Vec<_>>>()?;
        samples = samples.into_iter().zip(new).flat_map(|(e, o)| [e, o]).collect();
        p *= 2;
    }
}

/// `|a b|` bound from bounds on the factors.
fn product_bound(a: &TauValue, b: &TauValue) -> f64 {
    let (ea, eb) = (a.truncation_bound, b.truncation_bound);
    a.value.norm() * eb + b.value.norm() * ea + ea * eb
}

pub fn hirota_residual(spec: &HirotaSpec, cfg: &HirotaConfig, par: Parallelism) -> Result<HirotaCase> {
    let HirotaSpec { m, l, t, t_prime, s, s_prime, sigma, .. } = spec;
    let (m, l) = (*m, *l);
    let idx = |n: i64| cfg.convention.index(n);
    let plus = Times::from(t.add(s));
    let minus = Times::from(t.sub(s));
    let plus_p = Times::from(t_prime.add(s_prime));
    let minus_p = Times::from(t_prime.sub(s_prime));
    let tau = cfg.tau;

    let lhs = extract(
        |z| {
            let g = s_prime.scale(-2.0).eval_exponent(z.inv()).exp();
            let a = tau_n_times(&plus, &plus_p.shifted(z, 1)?, sigma, idx(m + 1), tau)?;
            let b = tau_n_times(&minus, &minus_p.shifted(z, -1)?, sigma, idx(l), tau)?;
            Ok((g * a.value * b.value, g.norm() * product_bound(&a, &b)))
        },
        l - m,
        cfg,
        par,
    )?;
    let rhs = extract(
        |z| {
            let g = s.scale(2.0).eval_exponent(z.inv()).exp();
            let a = tau_n_times(&plus.shifted(z, -1)?, &plus_p, sigma, idx(m), tau)?;
            let b = tau_n_times(&minus.shifted(z, 1)?, &minus_p, sigma, idx(l + 1), tau)?;
            Ok((g * a.value * b.value, g.norm() * product_bound(&a, &b)))
        },
        m - l,
        cfg,
        par,
    )?;
    Ok(HirotaCase {
        spec: spec.clone(),
        radius: cfg.radius,
        samples: lhs.samples.max(rhs.samples),
        convention: cfg.convention,
        lhs: lhs.value,
        rhs: rhs.value,
        residual: (lhs.value - rhs.value).norm(),
        bound: lhs.aliasing + rhs.aliasing + lhs.truncation + rhs.truncation,
    })
}

/// The 27-case grid: `t = t' = (1/2)`, `s = (0.05, -0.02)`, `s' = (-0.03, 0.02)`,
/// `sigma` in {zero, indicator, table on {-7/2, ..., 7/2}}, `m, l` in {-1, 0, 1}.
pub fn default_grid() -> Vec<HirotaSpec> {
    let t = ParamSeq::from_real(&[0.5]);
    let s = ParamSeq::from_real(&[0.05, -0.02]);
    let sp = ParamSeq::from_real(&[-0.03, 0.02]);
    let sigmas = [
        ("zero", SigmaWeight::zero()),
        ("indicator", SigmaWeight::IndicatorPositive),
        ("table", SigmaWeight::quasi_random_table(-4, 4, 7)),
    ];
    let mut out = Vec::new();
    for (label, sigma) in &sigmas {
        for m in -1..=1 {
            for l in -1..=1 {
                out.push(HirotaSpec {
                    m,
                    l,
                    t: t.clone(),
                    t_prime: t.clone(),
                    s: s.clone(),
                    s_prime: sp.clone(),
                    sigma: sigma.clone(),
                    sigma_label: label.to_string(),
                });
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct HirotaSummary {
    pub cases: usize,
    pub max_residual: f64,
    pub max_bound: f64,
    /// `(m, l, sigma_label)` of the largest residual.
    pub worst: Option<(i64, i64, String)>,
    pub convention: ChargeConvention,
}

pub fn summarize(cases: &[HirotaCase], convention: ChargeConvention) -> HirotaSummary {
    let worst = cases.iter().max_by(|a, b| a.residual.total_cmp(&b.residual));
    HirotaSummary {
        cases: cases.len(),
        max_residual: worst.map_or(0.0, |c| c.residual),
        max_bound: cases.iter().map(|c| c.bound).fold(0.0, f64::max),
        worst: worst.map(|c| (c.spec.m, c.spec.l, c.spec.sigma_label.clone())),
        convention,
    }
}

pub fn hirota_suite(
    grid: &[HirotaSpec],
    cfg: &HirotaConfig,
    par: Parallelism,
) -> Result<(Vec<HirotaCase>, HirotaSummary)> {
    let cases = grid.iter().map(|spec| hirota_residual(spec, cfg, par)).collect::<Result<Vec<_>>>()?;
    let summary = summarize(&cases, cfg.convention);
    Ok((cases, summary))
}

/// `m,l,sigma,params_hash,residual,bound` per case.
pub fn suite_csv(cases: &[HirotaCase]) -> String {
    let mut out = String::from("m,l,sigma,params_hash,lhs_re,lhs_im,rhs_re,rhs_im,residual,bound\n");
    for c in cases {
        let _ = writeln!(
            out,
            "{},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
            c.spec.m,
            c.spec.l,
            c.spec.sigma_label,
            c.spec.params_hash(),
            c.lhs.re,
            c.lhs.im,
            c.rhs.re,
            c.rhs.im,
            c.residual,
            c.bound
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fredholm::tau_n;
    use crate::symfun::z_norm;

    const SEQ: Parallelism = Parallelism::Sequential;

    fn small_tau() -> TauConfig {
        TauConfig { dim: 12, cutoff: 24, parallelism: SEQ }
    }

    #[test]
    fn zero_shift_is_plain_tau() {
        let t = ParamSeq::from_real(&[0.5]);
        let sigma = SigmaWeight::IndicatorPositive;
        let base = tau_n(&t, &t, &sigma, 1, small_tau()).unwrap().value;
        for which in [Shift::None, Shift::TPlus, Shift::TMinus, Shift::TprimePlus, Shift::TprimeMinus] {
            let v = tau_shifted(&t, &t, &sigma, 1, Complex64::new(0.0, 0.0), which, small_tau()).unwrap().value;
            assert_eq!(v, base);
        }
    }

    #[test]
    fn shifted_normalization() {
        let t = ParamSeq::from_real(&[0.3, 0.1]);
        let tp = ParamSeq::from_real(&[0.2]);
        let z0 = Complex64::new(0.2, 0.1);
        let v = tau_shifted(&t, &tp, &SigmaWeight::zero(), 0, z0, Shift::TprimePlus, small_tau()).unwrap().value;
        let expect = z_norm(&t, &tp) * t.eval_exponent(z0).exp();
        assert!((v - expect).norm() < 1e-13);
        assert!(tau_shifted(&t, &tp, &SigmaWeight::zero(), 0, Complex64::new(0.95, 0.0), Shift::TPlus, small_tau())
            .is_err());
    }

    #[test]
    fn trivial_case_and_determinism() {
        let zero = ParamSeq::zero();
        let spec = HirotaSpec {
            m: 0,
            l: 0,
            t: zero.clone(),
            t_prime: zero.clone(),
            s: zero.clone(),
            s_prime: zero,
            sigma: SigmaWeight::zero(),
            sigma_label: "zero".into(),
        };
        let cfg = HirotaConfig { tau: small_tau(), ..HirotaConfig::default() };
        let a = hirota_residual(&spec, &cfg, SEQ).unwrap();
        assert!(a.residual <= 1e-10, "{a:?}");
        let (cases, summary) = hirota_suite(&[spec.clone(), spec], &cfg, Parallelism::Parallel).unwrap();
        assert_eq!(cases[0].residual, cases[1].residual);
        assert_eq!(summary.cases, 2);
        let (empty, summary) = hirota_suite(&[], &cfg, SEQ).unwrap();
        assert!(empty.is_empty() && summary.worst.is_none());
    }

    #[test]
    fn table_case_both_conventions() {
        let spec = HirotaSpec {
            m: 0,
            l: 1,
            t: ParamSeq::from_real(&[0.5]),
            t_prime: ParamSeq::from_real(&[0.5]),
            s: ParamSeq::from_real(&[0.05]),
            s_prime: ParamSeq::from_real(&[-0.03, 0.02]),
            sigma: SigmaWeight::quasi_random_table(-4, 4, 7),
            sigma_label: "table".into(),
        };
        let cfg = HirotaConfig::default();
        let c = hirota_residual(&spec, &cfg, Parallelism::Parallel).unwrap();
        assert!(c.residual <= 1e-6, "{c:?}");
        assert!(c.lhs.im.abs() < 1e-10 && c.rhs.im.abs() < 1e-10);
        let unreflected = HirotaConfig { convention: ChargeConvention::Unreflected, ..cfg };
        let p = hirota_residual(&spec, &unreflected, Parallelism::Parallel).unwrap();
        // the unreflected charge index misses by a fixed fraction of the coefficients
        assert!(p.residual > 1e-2 * p.lhs.norm().max(p.rhs.norm()), "{p:?}");
    }

    #[test]
    fn csv_has_a_row_per_case() {
        let grid = default_grid();
        assert_eq!(grid.len(), 27);
        assert_eq!(grid[0].params_hash(), grid[1].params_hash());
        assert_ne!(grid[0].params_hash(), grid[9].params_hash());
    }
}
