//! Brute-force oracles over explicitly enumerated partitions.
//!
//! Nothing here touches the kernel side except [`adjudicate_sigma`], which
//! compares an enumeration against kernel minors.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{correlation_minor, LowerSupport, SigmaWeight};
use crate::par::Parallelism;
use crate::partitions::{enumerate_partitions, HalfInt, Partition};
use crate::series::Times;
use crate::symfun::{schur_value, skew_schur_value, z_norm, ParamSeq};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Weights `P(lambda)` for every `|lambda| <= max_size`.
#[derive(Clone, Debug, Serialize)]
pub struct MeasureTable {
    pub max_size: usize,
    #[serde(with = "crate::cjson")]
    pub mass: Complex64,
    pub entries: Vec<MeasureEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureEntry {
    pub partition: Partition,
    #[serde(with = "crate::cjson")]
    pub weight: Complex64,
}

impl MeasureTable {
    /// `sum` of `weight * f(lambda)` in enumeration order.
    pub fn expectation<F>(&self, f: F, par: Parallelism) -> Complex64
    where
        F: Fn(&Partition) -> Complex64 + Sync + Send,
    {
        par.map(&self.entries, |e| e.weight * f(&e.partition)).into_iter().sum()
    }

    /// Masses of each size stratum `|lambda| = 0, 1, ...`.
    pub fn strata(&self) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.max_size + 1];
        for e in &self.entries {
            out[e.partition.size()] += e.weight;
        }
        out
    }
}

/// `P_{t,t'}(lambda) = s_lambda(t) s_lambda(t') / Z_{t,t'}`.
pub fn schur_weight(lambda: &Partition, t: &ParamSeq, t_prime: &ParamSeq) -> Complex64 {
    schur_value(lambda, t) * schur_value(lambda, t_prime) / z_norm(t, t_prime)
}

pub fn schur_measure_table(
    t: &ParamSeq,
    t_prime: &ParamSeq,
    max_size: usize,
    par: Parallelism,
) -> Result<MeasureTable> {
    let parts = enumerate_partitions(max_size)?;
    let z = z_norm(t, t_prime);
    let weights = par.map(&parts, |l| schur_value(l, t) * schur_value(l, t_prime) / z);
    let mass = weights.iter().sum();
    let entries =
        parts.into_iter().zip(weights).map(|(partition, weight)| MeasureEntry { partition, weight }).collect();
    Ok(MeasureTable { max_size, mass, entries })
}

/// All `mu ⊂ lambda`.
pub fn subdiagrams(lambda: &Partition) -> Vec<Partition> {
    fn rec(lambda: &Partition, i: usize, cap: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        out.push(Partition::new(prefix.clone()).expect("decreasing by construction"));
        if i > lambda.length() {
            return;
        }
        for p in 1..=lambda.part(i).min(cap) {
            prefix.push(p);
            rec(lambda, i + 1, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(lambda, 1, usize::MAX, &mut Vec::new(), &mut out);
    out
}

/// Unnormalized weight `sum_{mu ⊂ lambda} u^{|mu|} s_{lambda/mu}(t) s_{lambda/mu}(t')`.
pub fn finite_temp_weight(lambda: &Partition, u: f64, t: &ParamSeq, t_prime: &ParamSeq) -> f64 {
    subdiagrams(lambda)
        .iter()
        .map(|mu| {
            let s = skew_schur_value(lambda, mu, t) * skew_schur_value(lambda, mu, t_prime);
            u.powi(mu.size() as i32) * s.re
        })
        .sum()
}

/// Finite-temperature weights normalized by their own enumeration.
#[derive(Clone, Debug, Serialize)]
pub struct FiniteTempTable {
    pub u: f64,
    pub max_size: usize,
    /// `Z_{u,t,t'}` summed over `|lambda| <= max_size`.
    pub norm: f64,
    /// Geometric extrapolation of the strata beyond `max_size`, relative to `norm`.
    pub tail_estimate: f64,
    pub partitions: Vec<Partition>,
    pub weights: Vec<f64>,
}

pub fn finite_temp_table(
    u: f64,
    t: &ParamSeq,
    t_prime: &ParamSeq,
    max_size: usize,
    par: Parallelism,
) -> Result<FiniteTempTable> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Precondition(format!("u = {u} must lie in [0, 1)")));
    }
    if !t.is_real() || !t_prime.is_real() {
        return Err(Error::Precondition("finite-temperature weights need real parameters".into()));
    }
    let partitions = enumerate_partitions(max_size)?;
    let weights = par.map(&partitions, |l| finite_temp_weight(l, u, t, t_prime));
    let norm: f64 = weights.iter().sum();
    let mut strata = vec![0.0; max_size + 1];
    for (l, w) in partitions.iter().zip(&weights) {
        strata[l.size()] += w;
    }
    let tail_estimate = match strata.as_slice() {
        [.., a, b] if *a > 0.0 && *b > 0.0 && b < a => {
            let r = b / a;
            b * r / (1.0 - r) / norm
        }
        _ => f64::INFINITY,
    };
    Ok(FiniteTempTable { u, max_size, norm, tail_estimate, partitions, weights })
}

fn check_set(x: &[HalfInt], max: usize) -> Result<()> {
    if x.len() > max {
        return Err(Error::Precondition(format!("at most {max} points are supported, got {}", x.len())));
    }
    Ok(())
}

/// `sum_{|lambda| <= N, X ⊂ S_0(lambda)} P(lambda)`.
pub fn correlation_bruteforce(
    x: &[HalfInt],
    t: &ParamSeq,
    t_prime: &ParamSeq,
    max_size: usize,
    par: Parallelism,
) -> Result<Complex64> {
    check_set(x, 4)?;
    let table = schur_measure_table(t, t_prime, max_size, par)?;
    Ok(correlation_from_table(&table, x, par))
}

pub fn correlation_from_table(table: &MeasureTable, x: &[HalfInt], par: Parallelism) -> Complex64 {
    table.expectation(
        |l| {
            if x.iter().all(|p| l.has_point(0, *p)) {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        },
        par,
    )
}

/// An expectation with the bound on its depth truncation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Expectation {
    #[serde(with = "crate::cjson")]
    pub value: Complex64,
    /// Bound on the error from truncating infinite products at `depth`.
    pub depth_bound: f64,
    /// Total enumerated mass.
    #[serde(with = "crate::cjson")]
    pub mass: Complex64,
}

/// `prod_{x in S_0(lambda)} (1 - sigma(x - n))` and the bound on the omitted factors.
pub fn multiplicative_factor(
    lambda: &Partition,
    sigma: &SigmaWeight,
    n: i64,
    depth: Option<usize>,
) -> Result<(f64, f64)> {
    match sigma.lower_support() {
        LowerSupport::Empty => Ok((1.0, 0.0)),
        LowerSupport::From(a) => {
            // points decrease; stop once x - n < a
            let mut prod = 1.0;
            let mut i = 1;
            loop {
                let x = lambda.point(i, 0);
                if x.shift(-n) < a {
                    return Ok((prod, 0.0));
                }
                prod *= 1.0 - sigma.eval(x.shift(-n));
                i += 1;
            }
        }
        LowerSupport::Unbounded => {
            let depth = depth.ok_or_else(|| {
                Error::Precondition("sigma has unbounded support below; an explicit depth is required".into())
            })?;
            if depth < lambda.length() {
                return Err(Error::Truncation { depth, length: lambda.length() });
            }
            let mut prod = 1.0f64;
            for i in 1..=depth {
                prod *= 1.0 - sigma.eval(lambda.point(i, 0).shift(-n));
            }
            let rest = sigma.abs_sum_below(lambda.point(depth + 1, 0).shift(-n));
            // |prod_{rest}(1 - s) - 1| <= exp(sum |s|) - 1
            Ok((prod, prod.abs() * rest.exp_m1()))
        }
    }
}

/// `E[prod_{x in S_0(lambda)} (1 - sigma(x - n))]` under the Schur measure, `|lambda| <= N`.
pub fn mult_stat_expectation(
    sigma: &SigmaWeight,
    n: i64,
    t: &ParamSeq,
    t_prime: &ParamSeq,
    max_size: usize,
    depth: Option<usize>,
    par: Parallelism,
) -> Result<Expectation> {
    let table = schur_measure_table(t, t_prime, max_size, par)?;
    mult_stat_from_table(&table, sigma, n, depth, par)
}

pub fn mult_stat_from_table(
    table: &MeasureTable,
    sigma: &SigmaWeight,
    n: i64,
    depth: Option<usize>,
    par: Parallelism,
) -> Result<Expectation> {
    let factors = par.map(&table.entries, |e| {
        multiplicative_factor(&e.partition, sigma, n, depth).map(|(f, b)| (e.weight * f, e.weight.norm() * b))
    });
    let mut value = ZERO;
    let mut depth_bound = 0.0;
    for f in factors {
        let (v, b) = f?;
        value += v;
        depth_bound += b;
    }
    Ok(Expectation { value, depth_bound, mass: table.mass })
}

/// `theta_3(1, u) = sum_{m in Z} u^{m^2/2}`, summed until the tail is below `1e-16`.
pub fn theta3(u: f64) -> f64 {
    let mut sum = 1.0;
    let mut m = 1i64;
    loop {
        let term = u.powf((m * m) as f64 / 2.0);
        sum += 2.0 * term;
        // remaining terms are bounded by a geometric series in u^{m + 1/2}
        let ratio = u.powf(m as f64 + 0.5);
        if 2.0 * term * ratio / (1.0 - ratio) < 1e-16 || m > 10_000 {
            return sum;
        }
        m += 1;
    }
}

/// `P(c) = u^{c^2/2} / theta_3(1, u)`.
pub fn theta_shift_pmf(u: f64, c: i64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Precondition(format!("u = {u} must lie in (0, 1)")));
    }
    Ok(u.powf((c * c) as f64 / 2.0) / theta3(u))
}

/// `sum_{|c| <= c_max} P(c) sum_{|lambda| <= N, X ⊂ S_c(lambda)} w(lambda) / Z_u`.
pub fn finite_temp_correlation_bruteforce(
    x: &[HalfInt],
    u: f64,
    t: &ParamSeq,
    t_prime: &ParamSeq,
    max_size: usize,
    c_max: i64,
    par: Parallelism,
) -> Result<f64> {
    check_set(x, 3)?;
    if max_size > 12 {
        return Err(Error::SizeLimit { requested: max_size, cap: 12 });
    }
    let table = finite_temp_table(u, t, t_prime, max_size, par)?;
    finite_temp_correlation_from_table(&table, x, c_max)
}

pub fn finite_temp_correlation_from_table(table: &FiniteTempTable, x: &[HalfInt], c_max: i64) -> Result<f64> {
    let u = table.u;
    if u == 0.0 {
        let inside: f64 = table
            .partitions
            .iter()
            .zip(&table.weights)
            .filter(|(l, _)| x.iter().all(|p| l.has_point(0, *p)))
            .map(|(_, w)| w)
            .sum();
        return Ok(inside / table.norm);
    }
    let mut total = 0.0;
    for c in -c_max..=c_max {
        let inside: f64 = table
            .partitions
            .iter()
            .zip(&table.weights)
            .filter(|(l, _)| x.iter().all(|p| l.has_point(c, *p)))
            .map(|(_, w)| w)
            .sum();
        total += theta_shift_pmf(u, c)? * inside / table.norm;
    }
    Ok(total)
}

/// One set `X` in the finite-temperature adjudication.
#[derive(Clone, Debug, Serialize)]
pub struct SigmaCase {
    pub points: Vec<HalfInt>,
    pub brute_force: f64,
    pub fermi: f64,
    pub paper_form: f64,
    pub fermi_diff: f64,
    pub paper_form_diff: f64,
    pub kernel_bound: f64,
}

/// Which weight family reproduces the shift-mixed finite-temperature measure.
#[derive(Clone, Debug, Serialize)]
pub struct SigmaVerdict {
    pub u: f64,
    pub max_size: usize,
    pub c_max: i64,
    pub tolerance: f64,
    pub cases: Vec<SigmaCase>,
    /// `"fermi"` or `"paper_form"` when exactly one matches every case.
    pub matching: Option<String>,
    pub normalization_tail_estimate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SigmaAdjudication {
    pub u: f64,
    pub max_size: usize,
    pub c_max: i64,
    pub cutoff: usize,
    pub tolerance: f64,
}

impl Default for SigmaAdjudication {
    fn default() -> Self {
        SigmaAdjudication { u: 0.4, max_size: 10, c_max: 6, cutoff: 48, tolerance: 1e-4 }
    }
}

/// Compares the brute force at `t~, t~'` with `det K_{t,t',sigma}(x_i, x_j)`,
/// `t = t~ / (1 - u)`, for both weight families.
pub fn adjudicate_sigma(
    sets: &[Vec<HalfInt>],
    t_tilde: &ParamSeq,
    t_tilde_prime: &ParamSeq,
    cfg: SigmaAdjudication,
    par: Parallelism,
) -> Result<SigmaVerdict> {
    let u = cfg.u;
    let table = finite_temp_table(u, t_tilde, t_tilde_prime, cfg.max_size, par)?;
    let t = Times::from(t_tilde.scale(1.0 / (1.0 - u)));
    let tp = Times::from(t_tilde_prime.scale(1.0 / (1.0 - u)));
    let fermi = SigmaWeight::Fermi { u };
    let paper = SigmaWeight::PaperForm { u };
    let mut cases = Vec::new();
    for x in sets {
        check_set(x, 3)?;
        let bf = finite_temp_correlation_from_table(&table, x, cfg.c_max)?;
        let f = correlation_minor(&t, &tp, &fermi, x, cfg.cutoff)?;
        let p = correlation_minor(&t, &tp, &paper, x, cfg.cutoff)?;
        cases.push(SigmaCase {
            points: x.clone(),
            brute_force: bf,
            fermi: f.value.re,
            paper_form: p.value.re,
            fermi_diff: (f.value - bf).norm(),
            paper_form_diff: (p.value - bf).norm(),
            kernel_bound: f.bound.max(p.bound),
        });
    }
    let fermi_ok = cases.iter().all(|c| c.fermi_diff <= cfg.tolerance);
    let paper_ok = cases.iter().all(|c| c.paper_form_diff <= cfg.tolerance);
    let matching = match (fermi_ok, paper_ok) {
        (true, false) => Some("fermi".to_string()),
        (false, true) => Some("paper_form".to_string()),
        _ => None,
    };
    Ok(SigmaVerdict {
        u,
        max_size: cfg.max_size,
        c_max: cfg.c_max,
        tolerance: cfg.tolerance,
        cases,
        matching,
        normalization_tail_estimate: table.tail_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn h(twice: i64) -> HalfInt {
        HalfInt::from_twice(twice).unwrap()
    }

    const SEQ: Parallelism = Parallelism::Sequential;

    #[test]
    fn schur_weight_examples() {
        let t = ParamSeq::from_real(&[0.4, 0.1]);
        let tp = ParamSeq::from_real(&[0.2]);
        assert!((schur_weight(&p(&[]), &t, &tp) - z_norm(&t, &tp).inv()).norm() < 1e-15);
        let theta: f64 = 0.25;
        let pl = ParamSeq::from_real(&[theta.sqrt()]);
        let w = schur_weight(&p(&[1]), &pl, &pl);
        assert!((w.re - (-theta).exp() * theta).abs() < 1e-15);
        let c = ParamSeq::from_real(&[0.3, 0.1]);
        let table = schur_measure_table(&c, &c, 12, Parallelism::Parallel).unwrap();
        assert!((table.mass - 1.0).norm() < 1e-8);
    }

    #[test]
    fn mass_is_monotone() {
        let t = ParamSeq::from_real(&[0.5]);
        let mut last = 0.0;
        for n in 0..=10 {
            let m = schur_measure_table(&t, &t, n, SEQ).unwrap().mass.re;
            assert!(m >= last && m <= 1.0 + 1e-12);
            last = m;
        }
    }

    #[test]
    fn subdiagram_counts() {
        assert_eq!(subdiagrams(&p(&[])).len(), 1);
        assert_eq!(subdiagrams(&p(&[1])).len(), 2);
        // (2,1) contains {}, (1), (2), (1,1), (2,1)
        assert_eq!(subdiagrams(&p(&[2, 1])).len(), 5);
        for mu in subdiagrams(&p(&[3, 2, 2])) {
            assert!(crate::partitions::contains(&p(&[3, 2, 2]), &mu));
        }
    }

    #[test]
    fn finite_temp_examples() {
        let a = 0.3;
        let t = ParamSeq::from_real(&[a]);
        assert_eq!(finite_temp_weight(&p(&[]), 0.4, &t, &t), 1.0);
        assert!((finite_temp_weight(&p(&[1]), 0.4, &t, &t) - (a * a + 0.4)).abs() < 1e-15);
        let tp = ParamSeq::from_real(&[0.2, 0.1]);
        for l in enumerate_partitions(6).unwrap() {
            let s = (schur_value(&l, &t) * schur_value(&l, &tp)).re;
            assert_eq!(finite_temp_weight(&l, 0.0, &t, &tp), s);
        }
    }

    #[test]
    fn correlation_examples() {
        let z = ParamSeq::zero();
        assert_eq!(correlation_bruteforce(&[h(-1)], &z, &z, 4, SEQ).unwrap(), Complex64::new(1.0, 0.0));
        let t = ParamSeq::from_real(&[0.5]);
        let all = correlation_bruteforce(&[], &t, &t, 10, SEQ).unwrap();
        assert!((all - 1.0).norm() < 1e-10);
        assert!(correlation_bruteforce(&[h(1), h(3), h(5), h(7), h(9)], &t, &t, 4, SEQ).is_err());
    }

    #[test]
    fn multiplicative_examples() {
        let t = ParamSeq::from_real(&[0.5]);
        let e = mult_stat_expectation(&SigmaWeight::zero(), 0, &t, &t, 10, None, SEQ).unwrap();
        assert!((e.value - 1.0).norm() < 1e-10);
        let window = SigmaWeight::table((-12..12).map(|i| (HalfInt::plus_half(i), 1.0)));
        let e = mult_stat_expectation(&window, 0, &t, &t, 10, None, SEQ).unwrap();
        assert_eq!(e.value, Complex64::new(0.0, 0.0));
        assert!(mult_stat_expectation(&SigmaWeight::Fermi { u: 0.3 }, 0, &t, &t, 4, None, SEQ).is_err());
        let f = mult_stat_expectation(&SigmaWeight::Fermi { u: 0.3 }, 0, &t, &t, 8, Some(40), SEQ).unwrap();
        assert!(f.depth_bound < 1e-12);
    }

    #[test]
    fn theta_examples() {
        let th = theta3(0.5);
        let direct: f64 = (-12i64..=12).map(|n| 0.5f64.powf((n * n) as f64 / 2.0)).sum();
        assert!((th - direct).abs() < 1e-15);
        assert!((th - 3.010_767_391_159_592).abs() < 1e-14);
        assert_eq!(theta_shift_pmf(0.5, 3).unwrap(), theta_shift_pmf(0.5, -3).unwrap());
        assert!((theta_shift_pmf(1e-12, 0).unwrap() - 1.0).abs() < 1e-5);
        assert!(theta_shift_pmf(1.0, 0).is_err());
    }

    #[test]
    fn finite_temp_correlation_reduces_at_zero() {
        let t = ParamSeq::from_real(&[0.3]);
        let ft = finite_temp_correlation_bruteforce(&[h(1)], 0.0, &t, &t, 8, 6, SEQ).unwrap();
        let table = schur_measure_table(&t, &t, 8, SEQ).unwrap();
        let plain = correlation_from_table(&table, &[h(1)], SEQ) / table.mass;
        assert!((ft - plain.re).abs() < 1e-14);
        let empty = finite_temp_correlation_bruteforce(&[], 0.4, &t, &t, 8, 6, SEQ).unwrap();
        let mass: f64 = (-6..=6).map(|c| theta_shift_pmf(0.4, c).unwrap()).sum();
        assert!((empty - mass).abs() < 1e-12);
    }
}
