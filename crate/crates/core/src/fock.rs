//! A truncated semi-infinite wedge.
//!
//! Basis vectors are `v_S` for `S = S_n(lambda)`, stored as the pair
//! `(n, lambda)`. Everything outside the energy window `|lambda| <= e_max` and
//! the charge window `|n| <= charge_max` is dropped and counted.
//!
//! Fermion signs: `psi_k` inserts `k` with sign `(-1)^{#{s in S : s > k}}`,
//! `psi*_k` removes the `i`-th largest element with sign `(-1)^{i-1}`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fredholm::{tau_n, TauConfig};
use crate::kernel::SigmaWeight;
use crate::measures::multiplicative_factor;
use crate::par::Parallelism;
use crate::partitions::{enumerate_partitions, HalfInt, Partition};
use crate::series::coeff_extract_dft;
use crate::symfun::{z_norm, ParamSeq};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn half(twice: i64) -> HalfInt {
    HalfInt::from_twice(twice).expect("odd by construction")
}

/// `v_{S_n(lambda)}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FockBasisVector {
    pub charge: i64,
    pub partition: Partition,
}

impl FockBasisVector {
    pub fn new(charge: i64, partition: Partition) -> Self {
        FockBasisVector { charge, partition }
    }

    pub fn vacuum(charge: i64) -> Self {
        FockBasisVector { charge, partition: Partition::empty() }
    }

    pub fn energy(&self) -> usize {
        self.partition.size()
    }

    /// Twice the largest element of the sea: every `x <= sea_top` is in `S`.
    fn sea_top_twice(&self) -> i64 {
        2 * (self.charge - self.partition.length() as i64) - 1
    }

    pub fn occupied(&self, k: HalfInt) -> bool {
        self.partition.has_point(self.charge, k)
    }

    /// The `depth` largest elements of `S`, decreasing.
    pub fn points(&self, depth: usize) -> Vec<HalfInt> {
        (1..=depth).map(|i| self.partition.point(i, self.charge)).collect()
    }

    /// `|S^+| - |S^-|` read off the first `depth` elements, `None` when they
    /// do not reach below zero.
    pub fn charge_from_points(&self, depth: usize) -> Option<i64> {
        let pts = self.points(depth);
        let last = pts.last()?.twice();
        if last > 0 {
            return None;
        }
        let pos = pts.iter().filter(|x| x.is_positive()).count() as i64;
        let holes = (last..0).step_by(2).filter(|&t| !pts.iter().any(|x| x.twice() == t)).count() as i64;
        Some(pos - holes)
    }

    /// Re-encodes the set `points ∪ sea`, where the sea continues directly
    /// below the last listed point.
    fn from_points(points: &[HalfInt], charge: i64) -> Self {
        let parts = points
            .iter()
            .enumerate()
            .map(|(j, x)| {
                let p = (x.twice() + 2 * (j as i64 + 1) - 1) / 2 - charge;
                debug_assert!(p >= 0, "points do not describe a charge-{charge} state");
                p as usize
            })
            .collect();
        FockBasisVector { charge, partition: Partition::new(parts).expect("decreasing by construction") }
    }

    /// `psi_k v_S` as `(basis, sign)`, `None` when `k in S`.
    pub fn psi(&self, k: HalfInt) -> Option<(FockBasisVector, f64)> {
        if k.twice() <= self.sea_top_twice() {
            return None;
        }
        let mut pts = self.points(self.partition.length());
        if pts.contains(&k) {
            return None;
        }
        let above = pts.iter().filter(|x| **x > k).count();
        pts.insert(above, k);
        let sign = if above % 2 == 0 { 1.0 } else { -1.0 };
        Some((FockBasisVector::from_points(&pts, self.charge + 1), sign))
    }

    /// `psi*_k v_S` as `(basis, sign)`, `None` when `k` is not in `S`.
    pub fn psi_star(&self, k: HalfInt) -> Option<(FockBasisVector, f64)> {
        let len = self.partition.length();
        let index = if k.twice() <= self.sea_top_twice() {
            // sea element n - i + 1/2
            (self.charge - (k.twice() - 1) / 2) as usize
        } else {
            1 + self.points(len).iter().position(|x| *x == k)?
        };
        let mut pts = self.points(len.max(index));
        pts.remove(index - 1);
        let sign = if index % 2 == 1 { 1.0 } else { -1.0 };
        Some((FockBasisVector::from_points(&pts, self.charge - 1), sign))
    }

    /// `alpha_m v_S = sum_k psi_{k-m} psi*_k v_S` as a list of `(basis, sign)`.
    pub fn alpha(&self, m: i64) -> Vec<(FockBasisVector, f64)> {
        assert!(m != 0, "alpha_0 is not part of the audited algebra");
        // contributing k satisfy k in S and k - m above the sea
        let top = self.partition.point(1, self.charge).twice();
        let lo = self.sea_top_twice() + 2 * m + 2;
        let mut out = Vec::new();
        let mut k = lo;
        while k <= top {
            if let Some((mid, s1)) = self.psi_star(half(k)) {
                if let Some((res, s2)) = mid.psi(half(k - 2 * m)) {
                    out.push((res, s1 * s2));
                }
            }
            k += 2;
        }
        out
    }
}

/// Energy and charge windows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Cutoffs {
    pub e_max: usize,
    pub charge_max: i64,
}

impl Default for Cutoffs {
    fn default() -> Self {
        Cutoffs { e_max: 12, charge_max: 4 }
    }
}

impl Cutoffs {
    pub fn contains(&self, b: &FockBasisVector) -> bool {
        b.energy() <= self.e_max && b.charge.abs() <= self.charge_max
    }

    /// All basis vectors with energy `<= e` and `|charge| <= c`, clipped to the window.
    pub fn basis(&self, e: usize, c: i64) -> Vec<FockBasisVector> {
        let parts = enumerate_partitions(e.min(self.e_max)).expect("energy window below the enumeration cap");
        let c = c.min(self.charge_max);
        (-c..=c).flat_map(|n| parts.iter().map(move |l| FockBasisVector::new(n, l.clone()))).collect()
    }
}

/// A finite combination of basis vectors inside the cutoffs.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    terms: BTreeMap<FockBasisVector, Complex64>,
    pub cutoffs: Cutoffs,
    /// Number of terms discarded so far because they left the window.
    pub dropped: usize,
}

impl FockVector {
    pub fn zero(cutoffs: Cutoffs) -> Self {
        FockVector { terms: BTreeMap::new(), cutoffs, dropped: 0 }
    }

    pub fn basis(b: FockBasisVector, cutoffs: Cutoffs) -> Self {
        let mut v = FockVector::zero(cutoffs);
        v.add_term(b, ONE);
        v
    }

    pub fn vacuum(charge: i64, cutoffs: Cutoffs) -> Self {
        FockVector::basis(FockBasisVector::vacuum(charge), cutoffs)
    }

    pub fn add_term(&mut self, b: FockBasisVector, amp: Complex64) {
        if amp == ZERO {
            return;
        }
        if !self.cutoffs.contains(&b) {
            self.dropped += 1;
            return;
        }
        match self.terms.entry(b) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += amp;
                if *e.get() == ZERO {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(amp);
            }
        }
    }

    pub fn amplitude(&self, b: &FockBasisVector) -> Complex64 {
        self.terms.get(b).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FockBasisVector, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: Complex64) -> FockVector {
        let mut out = FockVector::zero(self.cutoffs);
        out.dropped = self.dropped;
        for (b, a) in &self.terms {
            out.add_term(b.clone(), a * c);
        }
        out
    }

    pub fn add(&self, other: &FockVector) -> FockVector {
        let mut out = self.clone();
        out.dropped += other.dropped;
        for (b, a) in &other.terms {
            out.add_term(b.clone(), *a);
        }
        out
    }

    pub fn sub(&self, other: &FockVector) -> FockVector {
        self.add(&other.scale(-ONE))
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest amplitude among terms with energy `<= e`.
    pub fn max_abs_upto(&self, e: usize) -> f64 {
        self.terms.iter().filter(|(b, _)| b.energy() <= e).map(|(_, a)| a.norm()).fold(0.0, f64::max)
    }

    /// Applies a basis-level linear map; terms outside the window are dropped.
    pub fn map_basis<F>(&self, f: F) -> FockVector
    where
        F: Fn(&FockBasisVector) -> Vec<(FockBasisVector, Complex64)>,
    {
        let mut out = FockVector::zero(self.cutoffs);
        out.dropped = self.dropped;
        for (b, a) in &self.terms {
            for (nb, c) in f(b) {
                out.add_term(nb, a * c);
            }
        }
        out
    }
}

/// `<u, v> = sum_b u_b conj(v_b)`.
pub fn inner(u: &FockVector, v: &FockVector) -> Complex64 {
    u.iter().map(|(b, a)| a * v.amplitude(b).conj()).sum()
}

fn lift(r: Option<(FockBasisVector, f64)>) -> Vec<(FockBasisVector, Complex64)> {
    r.map(|(b, s)| vec![(b, Complex64::new(s, 0.0))]).unwrap_or_default()
}

pub fn psi(k: HalfInt, v: &FockVector) -> FockVector {
    v.map_basis(|b| lift(b.psi(k)))
}

pub fn psi_star(k: HalfInt, v: &FockVector) -> FockVector {
    v.map_basis(|b| lift(b.psi_star(k)))
}

pub fn alpha(m: i64, v: &FockVector) -> FockVector {
    v.map_basis(|b| b.alpha(m).into_iter().map(|(nb, s)| (nb, Complex64::new(s, 0.0))).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexSign {
    /// `Gamma_+(t) = exp(sum t_n alpha_n)`, lowers energy.
    Plus,
    /// `Gamma_-(t) = exp(sum t_n alpha_{-n})`, raises energy.
    Minus,
}

/// `Gamma_±(t) v`. The modes commute, so this is `prod_n exp(t_n alpha_{±n})`,
/// each factor summed until its terms vanish in the window.
pub fn gamma(sign: VertexSign, t: &ParamSeq, v: &FockVector) -> FockVector {
    let e_max = v.cutoffs.e_max;
    let mut out = v.clone();
    for (n, c) in t.iter().filter(|(n, _)| *n <= e_max) {
        let m = if sign == VertexSign::Plus { n as i64 } else { -(n as i64) };
        out = exp_mode(m, c, &out);
    }
    out
}

/// `exp(c alpha_m) v`.
fn exp_mode(m: i64, c: Complex64, v: &FockVector) -> FockVector {
    let mut out = v.clone();
    let mut term = FockVector { dropped: 0, ..v.clone() };
    let mut j = 1.0;
    while !term.is_empty() {
        let mut next = FockVector::zero(v.cutoffs);
        for (b, a) in term.iter() {
            for (nb, s) in b.alpha(m) {
                next.add_term(nb, a * c * s / j);
            }
        }
        out.dropped += next.dropped;
        for (b, a) in next.iter() {
            out.add_term(b.clone(), *a);
        }
        term = next;
        j += 1.0;
    }
    out
}

/// `C v`.
pub fn charge(v: &FockVector) -> FockVector {
    v.map_basis(|b| vec![(b.clone(), Complex64::new(b.charge as f64, 0.0))])
}

/// `R^p v`: `S -> S + p`.
pub fn shift(p: i64, v: &FockVector) -> FockVector {
    v.map_basis(|b| vec![(FockBasisVector::new(b.charge + p, b.partition.clone()), ONE)])
}

/// `A_sigma v`: each `v_S` scaled by `prod_{k in S} (1 - sigma(k))`.
///
/// Returns the vector and a bound on the omitted factors below `depth`
/// (zero for `sigma` bounded below).
pub fn a_sigma(sigma: &SigmaWeight, v: &FockVector, depth: Option<usize>) -> Result<(FockVector, f64)> {
    let mut out = FockVector::zero(v.cutoffs);
    out.dropped = v.dropped;
    let mut bound = 0.0;
    for (b, a) in v.iter() {
        let depth = depth.map(|d| d.max(b.partition.length()));
        let (f, e) = multiplicative_factor(&b.partition, sigma, -b.charge, depth)?;
        out.add_term(b.clone(), a * f);
        bound += a.norm() * e;
    }
    Ok((out, bound))
}

/// A Fock-space matrix coefficient with its truncation diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FockValue {
    #[serde(with = "crate::cjson")]
    pub value: Complex64,
    pub dropped_terms: usize,
    pub depth_bound: f64,
}

/// `<Gamma_+(t) psi_{x1} psi*_{x1} ... psi_{xm} psi*_{xm} Gamma_-(t') v_0, v_0>`.
pub fn fock_correlation(x: &[HalfInt], t: &ParamSeq, t_prime: &ParamSeq, cutoffs: Cutoffs) -> FockValue {
    let mut w = gamma(VertexSign::Minus, t_prime, &FockVector::vacuum(0, cutoffs));
    for &p in x.iter().rev() {
        w = psi(p, &psi_star(p, &w));
    }
    let w = gamma(VertexSign::Plus, t, &w);
    FockValue { value: w.amplitude(&FockBasisVector::vacuum(0)), dropped_terms: w.dropped, depth_bound: 0.0 }
}

/// `<Gamma_+(-t) A_sigma Gamma_-(-t') v_n, v_n>`.
pub fn fock_tau(
    t: &ParamSeq,
    t_prime: &ParamSeq,
    sigma: &SigmaWeight,
    n: i64,
    cutoffs: Cutoffs,
    depth: Option<usize>,
) -> Result<FockValue> {
    if n.abs() > cutoffs.charge_max {
        return Err(Error::Precondition(format!("charge {n} outside the window |n| <= {}", cutoffs.charge_max)));
    }
    let w = gamma(VertexSign::Minus, &t_prime.neg(), &FockVector::vacuum(n, cutoffs));
    let (w, depth_bound) = a_sigma(sigma, &w, depth)?;
    let w = gamma(VertexSign::Plus, &t.neg(), &w);
    Ok(FockValue { value: w.amplitude(&FockBasisVector::vacuum(n)), dropped_terms: w.dropped, depth_bound })
}

/// One point of the charge-sign comparison.
#[derive(Clone, Debug, Serialize)]
pub struct ChargeSignCase {
    pub sigma_index: usize,
    pub n: i64,
    #[serde(with = "crate::cjson")]
    pub fock: Complex64,
    #[serde(with = "crate::cjson")]
    pub tau_n: Complex64,
    #[serde(with = "crate::cjson")]
    pub tau_minus_n: Complex64,
    pub diff_plus: f64,
    pub diff_minus: f64,
    pub bound: f64,
}

/// Which charge index the matrix coefficient reproduces across a grid.
#[derive(Clone, Debug, Serialize)]
pub struct ChargeSignVerdict {
    pub cases: Vec<ChargeSignCase>,
    pub max_diff_plus: f64,
    pub max_diff_minus: f64,
    pub tolerance: f64,
    /// `"plus_n"` or `"minus_n"` when exactly one holds uniformly.
    pub sign: Option<String>,
}

/// Compares `fock_tau(t, t', sigma, n)` with `tau_n(t, t'; sigma)` and
/// `tau_{-n}(t, t'; sigma)` for every `sigma` and `n`.
#[allow(clippy::too_many_arguments)]
pub fn adjudicate_charge_sign(
    t: &ParamSeq,
    t_prime: &ParamSeq,
    sigmas: &[SigmaWeight],
    charges: &[i64],
    cutoffs: Cutoffs,
    tau_cfg: TauConfig,
    tolerance: f64,
    par: Parallelism,
) -> Result<ChargeSignVerdict> {
    let grid: Vec<(usize, i64)> = (0..sigmas.len()).flat_map(|i| charges.iter().map(move |&n| (i, n))).collect();
    let cfg = TauConfig { parallelism: Parallelism::Sequential, ..tau_cfg };
    let results = par.map(&grid, |&(i, n)| -> Result<ChargeSignCase> {
        let sigma = &sigmas[i];
        let fock = fock_tau(t, t_prime, sigma, n, cutoffs, None)?;
        let plus = tau_n(t, t_prime, sigma, n, cfg)?;
        let minus = tau_n(t, t_prime, sigma, -n, cfg)?;
        Ok(ChargeSignCase {
            sigma_index: i,
            n,
            fock: fock.value,
            tau_n: plus.value,
            tau_minus_n: minus.value,
            diff_plus: (fock.value - plus.value).norm(),
            diff_minus: (fock.value - minus.value).norm(),
            bound: plus.truncation_bound.max(minus.truncation_bound),
        })
    });
    let cases = results.into_iter().collect::<Result<Vec<_>>>()?;
    let max_diff_plus = cases.iter().map(|c| c.diff_plus).fold(0.0, f64::max);
    let max_diff_minus = cases.iter().map(|c| c.diff_minus).fold(0.0, f64::max);
    let sign = match (max_diff_plus <= tolerance, max_diff_minus <= tolerance) {
        (true, false) => Some("plus_n".to_string()),
        (false, true) => Some("minus_n".to_string()),
        _ => None,
    };
    Ok(ChargeSignVerdict { cases, max_diff_plus, max_diff_minus, tolerance, sign })
}

/// Result of one operator identity checked over many cases.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorAudit {
    pub name: String,
    pub max_residual: f64,
    pub cases_checked: usize,
    /// Cases skipped because an intermediate state left the window.
    pub cases_skipped: usize,
}

impl OperatorAudit {
    fn new(name: &str) -> Self {
        OperatorAudit { name: name.to_string(), max_residual: 0.0, cases_checked: 0, cases_skipped: 0 }
    }

    fn record(&mut self, residual: Option<f64>) {
        match residual {
            Some(r) => {
                self.max_residual = self.max_residual.max(r);
                self.cases_checked += 1;
            }
            None => self.cases_skipped += 1,
        }
    }

    fn merge(mut self, parts: Vec<Vec<Option<f64>>>) -> Self {
        for r in parts.into_iter().flatten() {
            self.record(r);
        }
        self
    }
}

/// Which states and modes the audits sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditConfig {
    pub cutoffs: Cutoffs,
    /// Energy of the probe states.
    pub probe_energy: usize,
    /// Charge window of the probe states.
    pub probe_charge: i64,
    /// Fermion modes `|k| <= mode_range - 1/2`.
    pub mode_range: i64,
    /// Boson modes `1 <= |n| <= boson_range`.
    pub boson_range: i64,
    /// Sample radius for the generating series.
    pub radius: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            cutoffs: Cutoffs::default(),
            probe_energy: 5,
            probe_charge: 2,
            mode_range: 5,
            boson_range: 3,
            radius: 0.3,
        }
    }
}

impl AuditConfig {
    fn probes(&self) -> Vec<FockBasisVector> {
        self.cutoffs.basis(self.probe_energy, self.probe_charge)
    }

    fn modes(&self) -> Vec<HalfInt> {
        (-self.mode_range..self.mode_range).map(HalfInt::plus_half).collect()
    }

    fn bosons(&self) -> Vec<i64> {
        (-self.boson_range..=self.boson_range).filter(|&n| n != 0).collect()
    }
}

/// `Some(max |r|)` when nothing was dropped along the way.
fn residual(r: &FockVector) -> Option<f64> {
    (r.dropped == 0).then(|| r.max_abs())
}

/// `{psi_k, psi*_l} = delta_kl`, `{psi_k, psi_l} = 0`, `{psi*_k, psi*_l} = 0`.
pub fn audit_anticommutation(cfg: &AuditConfig, par: Parallelism) -> OperatorAudit {
    let modes = cfg.modes();
    let parts = par.map(&cfg.probes(), |b| {
        let v = FockVector::basis(b.clone(), cfg.cutoffs);
        let mut out = Vec::new();
        for &k in &modes {
            for &l in &modes {
                let mut mixed = psi(k, &psi_star(l, &v)).add(&psi_star(l, &psi(k, &v)));
                if k == l {
                    mixed = mixed.sub(&v);
                }
                out.push(residual(&mixed));
                out.push(residual(&psi(k, &psi(l, &v)).add(&psi(l, &psi(k, &v)))));
                out.push(residual(&psi_star(k, &psi_star(l, &v)).add(&psi_star(l, &psi_star(k, &v)))));
            }
        }
        out
    });
    OperatorAudit::new("anticommutation").merge(parts)
}

/// `psi_k psi*_k v_S = [k in S] v_S` and `psi*_k psi_k v_S = [k not in S] v_S`.
pub fn audit_projectors(cfg: &AuditConfig, par: Parallelism) -> OperatorAudit {
    let modes = cfg.modes();
    let parts = par.map(&cfg.probes(), |b| {
        let v = FockVector::basis(b.clone(), cfg.cutoffs);
        let mut out = Vec::new();
        for &k in &modes {
            let (inside, outside) = if b.occupied(k) { (ONE, ZERO) } else { (ZERO, ONE) };
            out.push(residual(&psi(k, &psi_star(k, &v)).sub(&v.scale(inside))));
            out.push(residual(&psi_star(k, &psi(k, &v)).sub(&v.scale(outside))));
        }
        out
    });
    OperatorAudit::new("projectors").merge(parts)
}

/// `<psi_k u, v> = <u, psi*_k v>` over all basis pairs of adjacent charge.
pub fn audit_psi_adjoint(cfg: &AuditConfig, par: Parallelism) -> OperatorAudit {
    let modes = cfg.modes();
    let probes = cfg.probes();
    let targets = cfg.cutoffs.basis(cfg.probe_energy + 2 * cfg.mode_range as usize, cfg.probe_charge + 1);
    let parts = par.map(&probes, |u| {
        let fu = FockVector::basis(u.clone(), cfg.cutoffs);
        let mut out = Vec::new();
        for &k in &modes {
            let left = psi(k, &fu);
            for v in targets.iter().filter(|v| v.charge == u.charge + 1) {
                let fv = FockVector::basis(v.clone(), cfg.cutoffs);
                let right = psi_star(k, &fv);
                let r = inner(&left, &fv) - inner(&fu, &right);
                out.push((left.dropped == 0 && right.dropped == 0).then(|| r.norm()));
            }
        }
        out
    });
    OperatorAudit::new("psi_adjoint").merge(parts)
}

/// `[alpha_n, alpha_m] = n delta_{n,-m}` on states with room for both modes.
pub fn audit_alpha_commutator(cfg: &AuditConfig, par: Parallelism) -> OperatorAudit {
    let bosons = cfg.bosons();
    let room = cfg.cutoffs.e_max.saturating_sub(2 * cfg.boson_range as usize);
    let states = cfg.cutoffs.basis(room.min(cfg.probe_energy + 3), cfg.probe_charge);
    let parts = par.map(&states, |b| {
        let v = FockVector::basis(b.clone(), cfg.cutoffs);
        let mut out = Vec::new();
        for &n in &bosons {
            for &m in &bosons {
                let mut c = alpha(n, &alpha(m, &v)).sub(&alpha(m, &alpha(n, &v)));
                if n == -m {
                    c = c.sub(&v.scale(Complex64::new(n as f64, 0.0)));
                }
                out.push(residual(&c));
            }
        }
        out
    });
    OperatorAudit::new("alpha_commutator").merge(parts)
}

/// `C v_S = n v_S` on every basis vector of the window.
pub fn audit_charge(cfg: &AuditConfig, par: Parallelism) -> OperatorAudit {
    let states = cfg.cutoffs.basis(cfg.cutoffs.e_max, cfg.cutoffs.charge_max);
    let parts = par.map(&states, |b| {
        let v = FockVector::basis(b.clone(), cfg.cutoffs);
        let r = charge(&v).sub(&v.scale(Complex64::new(b.charge as f64, 0.0)));
        vec![residual(&r)]
    });
    OperatorAudit::new("charge_kernel").merge(parts)
}

fn vertex_params() -> Vec<(ParamSeq, ParamSeq)> {
    vec![
        (ParamSeq::from_real(&[0.3, 0.1]), ParamSeq::from_real(&[0.2, -0.1])),
        (ParamSeq::from_real(&[0.5]), ParamSeq::from_real(&[0.5])),
        (
            ParamSeq::from_pairs([(1, Complex64::new(0.2, 0.1)), (3, Complex64::new(0.05, 0.0))]),
            ParamSeq::from_pairs([(1, Complex64::new(0.1, -0.2)), (2, Complex64::new(0.0, 0.1))]),
        ),
    ]
}

/// `Gamma_+(t) Gamma_-(t') = Z_{t,t'} Gamma_-(t') Gamma_+(t)`, compared on
/// low-energy matrix elements of low-energy states.
pub fn audit_vertex_commutation(cfg: &AuditConfig, par: Parallelism) -> OperatorAudit {
    let low = 2.min(cfg.cutoffs.e_max);
    let states = cfg.cutoffs.basis(low, 1);
    let params = vertex_params();
    let parts = par.map(&params, |(t, tp)| {
        let z = z_norm(t, tp);
        states
            .iter()
            .map(|b| {
                let v = FockVector::basis(b.clone(), cfg.cutoffs);
                let lhs = gamma(VertexSign::Plus, t, &gamma(VertexSign::Minus, tp, &v));
                let rhs = gamma(VertexSign::Minus, tp, &gamma(VertexSign::Plus, t, &v)).scale(z);
                Some(lhs.sub(&rhs).max_abs_upto(low))
            })
            .collect()
    });
    OperatorAudit::new("vertex_commutation").merge(parts)
}

/// `<Gamma_-(t) u, v> = <u, Gamma_+(t) v>` for real `t`.
pub fn audit_gamma_adjoint(cfg: &AuditConfig, par: Parallelism) -> OperatorAudit {
    let t = ParamSeq::from_real(&[0.4, -0.2, 0.1]);
    let us = cfg.cutoffs.basis(cfg.probe_energy, 0);
    let vs: Vec<FockVector> =
        cfg.cutoffs.basis(cfg.cutoffs.e_max, 0).into_iter().map(|b| FockVector::basis(b, cfg.cutoffs)).collect();
    let gv: Vec<FockVector> = par.map(&vs, |v| gamma(VertexSign::Plus, &t, v));
    let parts = par.map(&us, |u| {
        let fu = FockVector::basis(u.clone(), cfg.cutoffs);
        let gu = gamma(VertexSign::Minus, &t, &fu);
        vs.iter().zip(&gv).map(|(v, g)| Some((inner(&gu, v) - inner(&fu, g)).norm())).collect()
    });
    OperatorAudit::new("gamma_adjoint").merge(parts)
}

/// `(A_sigma ⊗ A_sigma) Psi = Psi (A_sigma ⊗ A_sigma)` for `Psi = sum_k psi_k ⊗ psi*_k`,
/// term by term on basis pairs.
pub fn check_psi_commutation(
    sigma: &SigmaWeight,
    cfg: &AuditConfig,
    depth: Option<usize>,
    par: Parallelism,
) -> Result<OperatorAudit> {
    let states = cfg.cutoffs.basis(cfg.probe_energy.min(4), 1);
    let pairs: Vec<(&FockBasisVector, &FockBasisVector)> =
        states.iter().flat_map(|u| states.iter().map(move |w| (u, w))).collect();
    let eig = |b: &FockBasisVector| -> Result<f64> {
        let d = depth.map(|d| d.max(b.partition.length()));
        Ok(multiplicative_factor(&b.partition, sigma, -b.charge, d)?.0)
    };
    let parts = par.map(&pairs, |(u, w)| -> Result<Vec<Option<f64>>> {
        let before = eig(u)? * eig(w)?;
        let mut out = Vec::new();
        // k in S(w) \ S(u); S(u) contains everything up to its sea top
        let floor = u.sea_top_twice();
        let mut i = 1;
        loop {
            let k = w.partition.point(i, w.charge);
            if k.twice() <= floor {
                break;
            }
            i += 1;
            let (Some((a, s1)), Some((b, s2))) = (u.psi(k), w.psi_star(k)) else {
                continue;
            };
            if !cfg.cutoffs.contains(&a) || !cfg.cutoffs.contains(&b) {
                out.push(None);
                continue;
            }
            let after = eig(&a)? * eig(&b)?;
            out.push(Some((s1 * s2 * (after - before)).abs()));
        }
        Ok(out)
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(OperatorAudit::new("psi_tensor_commutation").merge(parts))
}

/// `psi(z) v = sum_i z^{i + 1/2} psi_i v` summed over every `i` that stays in the window.
pub fn psi_field(z: Complex64, v: &FockVector) -> FockVector {
    v.map_basis(|b| {
        let lo = b.sea_top_twice() + 2;
        let hi = 2 * (b.charge + v.cutoffs.e_max as i64 + 1) + 1;
        (lo..=hi)
            .step_by(2)
            .filter_map(|k| {
                let (nb, s) = b.psi(half(k))?;
                Some((nb, s * z.powi(((k + 1) / 2) as i32)))
            })
            .collect()
    })
}

/// `psi*(w) v = sum_j w^{-j - 1/2} psi*_j v`.
pub fn psi_star_field(w: Complex64, v: &FockVector) -> FockVector {
    v.map_basis(|b| {
        let top = b.partition.point(1, b.charge).twice();
        let lo = 2 * (b.charge - v.cutoffs.e_max as i64 - 1) - 1;
        (lo..=top)
            .rev()
            .step_by(2)
            .filter_map(|j| {
                let (nb, s) = b.psi_star(half(j))?;
                Some((nb, s * w.powi(-((j + 1) / 2) as i32)))
            })
            .collect()
    })
}

fn z_power_charge(z: Complex64, v: &FockVector, sign: i32) -> FockVector {
    v.map_basis(|b| vec![(b.clone(), z.powi(sign * b.charge as i32))])
}

/// `z^C R Gamma_-({z}) Gamma_+(-{1/z}) v`.
pub fn vertex_psi(z: Complex64, v: &FockVector) -> FockVector {
    let e = v.cutoffs.e_max;
    let w = gamma(VertexSign::Plus, &ParamSeq::miwa(z.inv(), -1.0, e), v);
    let w = gamma(VertexSign::Minus, &ParamSeq::miwa(z, 1.0, e), &w);
    z_power_charge(z, &shift(1, &w), 1)
}

/// `R^{-1} w^{-C} Gamma_-(-{w}) Gamma_+({1/w}) v`.
pub fn vertex_psi_star(w: Complex64, v: &FockVector) -> FockVector {
    let e = v.cutoffs.e_max;
    let x = gamma(VertexSign::Plus, &ParamSeq::miwa(w.inv(), 1.0, e), v);
    let x = gamma(VertexSign::Minus, &ParamSeq::miwa(w, -1.0, e), &x);
    shift(-1, &z_power_charge(w, &x, -1))
}

fn sample_points(radius: f64) -> Vec<Complex64> {
    (0..5).map(|j| Complex64::from_polar(radius, 0.3 + 1.1 * j as f64)).collect()
}

/// Fermion fields against their vertex-operator forms, the `z^{1/2}`-offset
/// coefficient extraction, and `[alpha_n, psi(z)] = z^n psi(z)`.
pub fn check_boson_fermion(z_samples: &[Complex64], cfg: &AuditConfig, par: Parallelism) -> Result<OperatorAudit> {
    let states = cfg.cutoffs.basis(cfg.probe_energy.min(3), 1);
    let e = cfg.cutoffs.e_max;
    let parts = par.map(&states, |b| -> Result<Vec<Option<f64>>> {
        let v = FockVector::basis(b.clone(), cfg.cutoffs);
        let mut out = Vec::new();
        for &z in z_samples {
            let scale = 1.0 + z.norm().powi(-(e as i32));
            out.push(Some(psi_field(z, &v).sub(&vertex_psi(z, &v)).max_abs_upto(e) / scale));
            out.push(Some(psi_star_field(z, &v).sub(&vertex_psi_star(z, &v)).max_abs_upto(e) / scale));
            let field = psi_field(z, &v);
            for n in [-2i64, -1, 1, 2] {
                let lhs = alpha(n, &field).sub(&psi_field(z, &alpha(n, &v)));
                let rhs = field.scale(z.powi(n as i32));
                out.push(Some(lhs.sub(&rhs).max_abs_upto(e - n.unsigned_abs() as usize)));
            }
        }
        // [z^{k + 1/2}] <psi(z) u, v> = <psi_k u, v>
        for k in (-3..3).map(HalfInt::plus_half) {
            if let Some((target, s)) = b.psi(k) {
                if !cfg.cutoffs.contains(&target) {
                    continue;
                }
                // a matrix element at energy E only sees states of energy <= E
                let narrow = Cutoffs { e_max: target.energy().max(b.energy()), ..cfg.cutoffs };
                let vn = FockVector::basis(b.clone(), narrow);
                let f = |z: Complex64| vertex_psi(z, &vn).amplitude(&target);
                let c = coeff_extract_dft(f, (k.twice() + 1) / 2, cfg.radius, 32, Parallelism::Sequential)?;
                out.push(Some((c.value - s).norm()));
            }
        }
        Ok(out)
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(OperatorAudit::new("boson_fermion").merge(parts))
}

/// The table sigma used by the audits, on `{-7/2, ..., 7/2}`.
pub fn audit_sigma_table() -> SigmaWeight {
    SigmaWeight::quasi_random_table(-4, 4, 4)
}

/// Every audit in a fixed order.
pub fn run_audit_suite(cfg: &AuditConfig, par: Parallelism) -> Result<Vec<OperatorAudit>> {
    let mut out = vec![
        audit_anticommutation(cfg, par),
        audit_projectors(cfg, par),
        audit_psi_adjoint(cfg, par),
        audit_alpha_commutator(cfg, par),
        audit_charge(cfg, par),
        audit_vertex_commutation(cfg, par),
        audit_gamma_adjoint(cfg, par),
    ];
    let sigmas =
        [("zero", SigmaWeight::zero()), ("indicator", SigmaWeight::IndicatorPositive), ("table", audit_sigma_table())];
    for (name, sigma) in sigmas {
        let mut a = check_psi_commutation(&sigma, cfg, None, par)?;
        a.name = format!("{}_{name}", a.name);
        out.push(a);
    }
    out.push(check_boson_fermion(&sample_points(cfg.radius), cfg, par)?);
    Ok(out)
}
