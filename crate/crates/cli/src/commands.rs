//! One runner per subcommand. Each returns its records and an optional CSV body.

use std::fmt::Write as _;

use serde_json::{json, Value};
use toda_tau::fock::{self, AuditConfig, Cutoffs};
use toda_tau::fredholm::{gap_probability, tau_n, TauConfig};
use toda_tau::hirota::{default_grid, hirota_suite, suite_csv, HirotaConfig, HirotaSpec};
use toda_tau::kernel::{kernel_matrix, SigmaWeight};
use toda_tau::measures::{
    adjudicate_sigma, correlation_from_table, mult_stat_from_table, schur_measure_table, SigmaAdjudication,
};
use toda_tau::series::Times;
use toda_tau::symfun::z_norm;
use toda_tau::{Complex64, Result};

use crate::config::{Adjudication, BruteKind, Grid, RunConfig};

pub struct Report {
    pub records: Vec<Value>,
    pub csv: Option<String>,
    /// Set when an identity or adjudication failed beyond its tolerance.
    pub mismatch: Option<String>,
}

impl Report {
    fn new(records: Vec<Value>, csv: Option<String>) -> Self {
        Report { records, csv, mismatch: None }
    }
}

fn c(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn tau_config(cfg: &RunConfig) -> TauConfig {
    TauConfig { dim: cfg.dim, cutoff: cfg.cutoff, parallelism: cfg.parallelism() }
}

pub fn kernel(cfg: &RunConfig) -> Result<Report> {
    let t = Times::from(cfg.t.seq());
    let tp = Times::from(cfg.t_prime.seq());
    let k = kernel_matrix(&t, &tp, &cfg.sigma, cfg.base, cfg.dim, cfg.cutoff, cfg.parallelism())?;
    let record = json!({
        "command": "kernel",
        "matrix": k,
        "bound": k.max_entry_error(),
    });
    Ok(Report::new(vec![record], Some(k.to_csv())))
}

pub fn tau(cfg: &RunConfig) -> Result<Report> {
    let (t, tp) = (cfg.t.seq(), cfg.t_prime.seq());
    let mut records = Vec::new();
    let mut csv = String::from("n,value_re,value_im,bound\n");
    for n in cfg.charges_swept() {
        let v = tau_n(&t, &tp, &cfg.sigma, n, tau_config(cfg))?;
        let _ = writeln!(csv, "{n},{:e},{:e},{:e}", v.value.re, v.value.im, v.truncation_bound);
        let mut r = v.to_record();
        r["command"] = json!("tau");
        r["value"] = c(v.value);
        records.push(r);
    }
    Ok(Report::new(records, Some(csv)))
}

pub fn gap(cfg: &RunConfig) -> Result<Report> {
    let (t, tp) = (cfg.t.seq(), cfg.t_prime.seq());
    let mut records = Vec::new();
    let mut csv = String::from("n,value,bound\n");
    for n in cfg.charges_swept() {
        let p = gap_probability(&t, &tp, n, tau_config(cfg))?;
        let _ = writeln!(csv, "{n},{:e},{:e}", p.value, p.bound);
        records.push(json!({ "command": "gap", "n": n, "value": p.value, "bound": p.bound }));
    }
    Ok(Report::new(records, Some(csv)))
}

pub fn bruteforce(cfg: &RunConfig) -> Result<Report> {
    let (t, tp) = (cfg.t.seq(), cfg.t_prime.seq());
    let par = cfg.parallelism();
    let table = schur_measure_table(&t, &tp, cfg.max_size, par)?;
    // every statistic below is bounded by 1, so the missing mass bounds the truncation
    let missing = (Complex64::new(1.0, 0.0) - table.mass).norm();
    let base =
        |kind: &str| json!({ "command": "bruteforce", "kind": kind, "max_size": cfg.max_size, "mass": c(table.mass) });
    let mut records = Vec::new();
    let mut csv = String::new();
    match cfg.kind {
        BruteKind::Correlation => {
            let v = correlation_from_table(&table, &cfg.points, par);
            let mut r = base("correlation");
            r["points"] = json!(cfg.points);
            r["value"] = c(v);
            r["bound"] = json!(missing);
            records.push(r);
        }
        BruteKind::Gap => {
            csv.push_str("n,value,bound\n");
            for n in cfg.charges_swept() {
                let v: Complex64 =
                    table.entries.iter().filter(|e| e.partition.part(1) as i64 <= n).map(|e| e.weight).sum();
                let _ = writeln!(csv, "{n},{:e},{missing:e}", v.re);
                let mut r = base("gap");
                r["n"] = json!(n);
                r["value"] = json!(v.re);
                r["bound"] = json!(missing);
                records.push(r);
            }
        }
        BruteKind::Multiplicative => {
            let z = z_norm(&t, &tp);
            csv.push_str("n,tau_re,tau_im,bound\n");
            for n in cfg.charges_swept() {
                let e = mult_stat_from_table(&table, &cfg.sigma, n, cfg.depth, par)?;
                let bound = missing + e.depth_bound;
                let tau = z * e.value;
                let _ = writeln!(csv, "{n},{:e},{:e},{:e}", tau.re, tau.im, z.norm() * bound);
                let mut r = base("multiplicative");
                r["n"] = json!(n);
                r["value"] = c(e.value);
                r["bound"] = json!(bound);
                r["tau_estimate"] = c(tau);
                r["tau_bound"] = json!(z.norm() * bound);
                records.push(r);
            }
        }
        BruteKind::Cauchy => {
            let z = z_norm(&t, &tp);
            let sum = table.mass * z;
            let mut r = base("cauchy");
            r["sum"] = c(sum);
            r["z"] = c(z);
            r["value"] = json!((sum - z).norm());
            r["bound"] = json!(missing * z.norm());
            records.push(r);
        }
    }
    Ok(Report::new(records, (!csv.is_empty()).then_some(csv)))
}

/// Tolerance each audit is held to.
fn audit_tolerance(name: &str) -> f64 {
    match name {
        "alpha_commutator" => 1e-12,
        "boson_fermion" => 1e-9,
        n if n.starts_with("vertex") || n.starts_with("gamma") || n.starts_with("psi_tensor") => 1e-10,
        _ => 1e-13,
    }
}

pub fn fock_check(cfg: &RunConfig) -> Result<Report> {
    let audit = AuditConfig {
        cutoffs: Cutoffs { e_max: cfg.e_max, charge_max: cfg.charge_max },
        radius: cfg.radius,
        ..AuditConfig::default()
    };
    let suite = fock::run_audit_suite(&audit, cfg.parallelism())?;
    let mut records = Vec::new();
    let mut csv = String::from("name,max_residual,tolerance,cases_checked,cases_skipped\n");
    let mut failed = Vec::new();
    for a in &suite {
        let tol = audit_tolerance(&a.name);
        let pass = a.max_residual <= tol && a.cases_checked > 0;
        if !pass {
            failed.push(a.name.clone());
        }
        let _ = writeln!(csv, "{},{:e},{:e},{},{}", a.name, a.max_residual, tol, a.cases_checked, a.cases_skipped);
        let mut r = serde_json::to_value(a).expect("audits serialize");
        r["command"] = json!("fock-check");
        r["tolerance"] = json!(tol);
        r["pass"] = json!(pass);
        records.push(r);
    }
    let mut report = Report::new(records, Some(csv));
    if !failed.is_empty() {
        report.mismatch = Some(format!("audits above tolerance: {}", failed.join(", ")));
    }
    Ok(report)
}

pub fn hirota(cfg: &RunConfig) -> Result<Report> {
    let grid = match cfg.grid {
        Grid::Default => default_grid(),
        Grid::Single => vec![HirotaSpec {
            m: cfg.m,
            l: cfg.l,
            t: cfg.t.seq(),
            t_prime: cfg.t_prime.seq(),
            s: cfg.s.seq(),
            s_prime: cfg.s_prime.seq(),
            sigma: cfg.sigma.clone(),
            sigma_label: "config".into(),
        }],
    };
    let hc = HirotaConfig {
        radius: cfg.radius,
        samples: cfg.samples,
        max_samples: cfg.max_samples,
        tol: cfg.tol,
        tau: TauConfig { parallelism: toda_tau::Parallelism::Sequential, ..tau_config(cfg) },
        convention: cfg.convention,
    };
    let (cases, summary) = hirota_suite(&grid, &hc, cfg.parallelism())?;
    let mut records: Vec<Value> = cases
        .iter()
        .map(|case| {
            let mut r = serde_json::to_value(case).expect("cases serialize");
            r["command"] = json!("hirota");
            r["params_hash"] = json!(case.spec.params_hash());
            r
        })
        .collect();
    let mut s = serde_json::to_value(&summary).expect("summary serializes");
    s["command"] = json!("hirota-summary");
    s["residual_tol"] = json!(cfg.residual_tol);
    s["bound"] = json!(summary.max_bound);
    records.push(s);
    let mut report = Report::new(records, Some(suite_csv(&cases)));
    if summary.max_residual > cfg.residual_tol {
        report.mismatch =
            Some(format!("max Hirota residual {:.3e} exceeds {:.1e}", summary.max_residual, cfg.residual_tol));
    }
    Ok(report)
}

pub fn adjudicate(cfg: &RunConfig) -> Result<Report> {
    let par = cfg.parallelism();
    let mut records = Vec::new();
    let mut problems = Vec::new();
    if matches!(cfg.adjudicate, Adjudication::Sigma | Adjudication::Both) {
        let t = cfg.t_tilde.seq();
        let settings = SigmaAdjudication {
            u: cfg.u,
            max_size: cfg.sigma_max_size,
            c_max: cfg.c_max,
            cutoff: cfg.cutoff,
            tolerance: cfg.sigma_tolerance,
        };
        let v = adjudicate_sigma(&cfg.sets, &t, &t, settings, par)?;
        if v.matching.is_none() {
            problems.push("no sigma family matches the finite-temperature brute force".to_string());
        }
        let mut r = serde_json::to_value(&v).expect("verdicts serialize");
        r["command"] = json!("adjudicate");
        r["kind"] = json!("sigma");
        r["bound"] = json!(v.cases.iter().map(|c| c.kernel_bound).fold(0.0, f64::max));
        records.push(r);
    }
    if matches!(cfg.adjudicate, Adjudication::ChargeSign | Adjudication::Both) {
        let sigmas: Vec<SigmaWeight> =
            (0..cfg.sigma_count as u64).map(|i| SigmaWeight::quasi_random_table(-4, 4, cfg.sigma_seed + i)).collect();
        let v = fock::adjudicate_charge_sign(
            &cfg.t.seq(),
            &cfg.t_prime.seq(),
            &sigmas,
            &cfg.charges,
            Cutoffs { e_max: cfg.e_max, charge_max: cfg.charge_max },
            TauConfig { parallelism: toda_tau::Parallelism::Sequential, ..tau_config(cfg) },
            cfg.charge_sign_tolerance,
            par,
        )?;
        if v.sign.is_none() {
            problems.push("neither charge sign matches uniformly".to_string());
        }
        let mut r = serde_json::to_value(&v).expect("verdicts serialize");
        r["command"] = json!("adjudicate");
        r["kind"] = json!("charge_sign");
        r["bound"] = json!(v.cases.iter().map(|c| c.bound).fold(0.0, f64::max));
        records.push(r);
    }
    let mut report = Report::new(records, None);
    if !problems.is_empty() {
        report.mismatch = Some(problems.join("; "));
    }
    Ok(report)
}
