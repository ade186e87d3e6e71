//! Parameter sweeps comparing the true ESS with its closed-form approximations.
//!
//! Each sweep turns an [`ExperimentConfig`] into a [`Table`] of rows. The
//! `ratio` column is `ESS^ / ESS` with the variance-ratio ESS; `ratio_star`
//! uses the MSE form `ESS*` instead, which also charges the self-normalized
//! estimator for its bias. Every
//! grid point gets its own seed, `derive_seed(master, [experiment id, ...])`,
//! so tables are bit-identical across runs and thread counts.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::diagnostics::DeltaChain;
use crate::distributions::{Density, Gaussian1D};
use crate::error::{Error, Result};
use crate::estimators::Integrand;
use crate::ground_truth::{rrmse, run_replication, GroundTruth, ReplicationPlan, SamplingRule};
use crate::mis::{ess_mis, scenario, MisKind, MisScheme};
use crate::numeric::two_sided_tail;
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    MeanMismatch,
    VarMismatch,
    RareEvent,
    MisScenario,
}

impl ExperimentKind {
    pub fn id(&self) -> u64 {
        match self {
            ExperimentKind::MeanMismatch => 1,
            ExperimentKind::VarMismatch => 2,
            ExperimentKind::RareEvent => 3,
            ExperimentKind::MisScenario => 4,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::MeanMismatch => "mean-mismatch",
            ExperimentKind::VarMismatch => "var-mismatch",
            ExperimentKind::RareEvent => "rare-event",
            ExperimentKind::MisScenario => "mis-scenario",
        }
    }
}

/// Inclusive arithmetic grid `lo, lo + step, ..., <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() || hi < lo {
            return Err(Error::InvalidParameter(format!(
                "bad grid {lo}:{hi}:{step}"
            )));
        }
        Ok(Self { lo, hi, step })
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidParameter(format!("grid `{s}` is not lo:hi:step"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        Grid::new(v[0], v[1], v[2])
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// `μ_q`, `σ_q` or `α` grid; unused by the MIS sweep.
    pub grid: Grid,
    pub n_values: Vec<usize>,
    pub replicates: usize,
    pub master_seed: u64,
    /// MIS scenario 1–3.
    pub scenario: u8,
}

pub const DEFAULT_SEED: u64 = 20_180_924;

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let (grid, n_values) = match kind {
            ExperimentKind::MeanMismatch => (
                Grid {
                    lo: 0.0,
                    hi: 3.0,
                    step: 0.1,
                },
                vec![4, 16, 256],
            ),
            ExperimentKind::VarMismatch => (
                Grid {
                    lo: 0.6,
                    hi: 3.6,
                    step: 0.1,
                },
                vec![4, 16, 256],
            ),
            ExperimentKind::RareEvent => (
                Grid {
                    lo: 0.5,
                    hi: 3.5,
                    step: 0.25,
                },
                vec![10, 100, 1000],
            ),
            ExperimentKind::MisScenario => (
                Grid {
                    lo: 0.0,
                    hi: 0.0,
                    step: 1.0,
                },
                (0..=9).map(|k| 3 << k).collect(),
            ),
        };
        Self {
            kind,
            grid,
            n_values,
            replicates: 10_000,
            master_seed: DEFAULT_SEED,
            scenario: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Grid::new(self.grid.lo, self.grid.hi, self.grid.step)?;
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(Error::InvalidParameter(
                "sample sizes must be a non-empty list of positive counts".into(),
            ));
        }
        if self.replicates < 2 {
            return Err(Error::InvalidParameter("need at least 2 replicates".into()));
        }
        if self.kind == ExperimentKind::MisScenario {
            if !(1..=3).contains(&self.scenario) {
                return Err(Error::InvalidParameter(format!(
                    "scenario must be 1, 2 or 3, got {}",
                    self.scenario
                )));
            }
            if let Some(n) = self.n_values.iter().find(|n| *n % 3 != 0) {
                return Err(Error::InvalidParameter(format!(
                    "MIS totals must be multiples of 3, got {n}"
                )));
            }
        }
        Ok(())
    }

    fn comment_lines(&self) -> Vec<String> {
        let n: Vec<String> = self.n_values.iter().map(|n| n.to_string()).collect();
        let mut lines = vec![
            format!("experiment={}", self.kind.name()),
            format!("n={}", n.join(",")),
            format!("replicates={}", self.replicates),
            format!("seed={}", self.master_seed),
        ];
        if self.kind == ExperimentKind::MisScenario {
            lines.push(format!("scenario={}", self.scenario));
        } else {
            lines.push(format!("grid={}", self.grid));
        }
        lines
    }
}

/// A CSV table with `#` comment preamble.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric values of one column; blanks become NaN.
    pub fn values(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .map(|r| r[i].parse().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for c in &self.comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii csv")
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

const MISMATCH_COLUMNS: [&str; 13] = [
    "n",
    "param",
    "ess_norm",
    "se_ess_norm",
    "ess_star_norm",
    "se_ess_star_norm",
    "ess_hat_norm",
    "ess_hat_norm_sd",
    "ratio",
    "ratio_star",
    "delta_chain_norm",
    "divergent",
    "var_snis",
];

fn mismatch_sweep(
    cfg: &ExperimentConfig,
    param_name: &str,
    proposal_at: impl Fn(f64) -> Result<Gaussian1D>,
) -> Result<Table> {
    cfg.validate()?;
    let target = Gaussian1D::standard();
    let mut rows = Vec::new();
    for (ni, &n) in cfg.n_values.iter().enumerate() {
        for (gi, p) in cfg.grid.points().into_iter().enumerate() {
            let q = proposal_at(p)?;
            let plan = ReplicationPlan {
                target: Density::from(target),
                rule: SamplingRule::Proposal(Density::from(q)),
                integrand: Integrand::Identity,
                n_per_run: n,
                replicates: cfg.replicates,
                true_value: 0.0,
                master_seed: derive_seed(cfg.master_seed, &[cfg.kind.id(), ni as u64, gi as u64]),
            };
            let gt = run_replication(&plan)?;
            let chain = DeltaChain::gaussian(n, &target, &q).ok();
            rows.push(mismatch_row(n, p, &gt, chain));
        }
    }
    let mut header: Vec<String> = MISMATCH_COLUMNS.iter().map(|s| s.to_string()).collect();
    header[1] = param_name.to_string();
    Ok(Table {
        comments: cfg.comment_lines(),
        header,
        rows,
    })
}

fn mismatch_row(n: usize, param: f64, gt: &GroundTruth, chain: Option<DeltaChain>) -> Vec<String> {
    let nf = n as f64;
    vec![
        n.to_string(),
        num(param),
        num(gt.ess / nf),
        num(gt.std_errors.ess / nf),
        num(gt.ess_star / nf),
        num(gt.std_errors.ess_star / nf),
        num(gt.mean_ess_hat / nf),
        num(gt.sd_ess_hat / nf),
        num(gt.mean_ess_hat / gt.ess),
        num(gt.mean_ess_hat / gt.ess_star),
        opt(chain.map(|c| c.ess_kong / nf)),
        if chain.is_none() { "1" } else { "0" }.to_string(),
        num(gt.var_snis),
    ]
}

/// Target `N(0,1)`, proposal `N(μ_q, 1)`, integrand `h(x) = x`.
pub fn run_mean_mismatch(cfg: &ExperimentConfig) -> Result<Table> {
    mismatch_sweep(cfg, "mu_q", |mu| Gaussian1D::new(mu, 1.0))
}

/// Target `N(0,1)`, proposal `N(0, σ_q²)`, integrand `h(x) = x`. Rows with
/// `2σ_q² <= 1` have infinite-variance weights and are flagged `divergent`.
pub fn run_var_mismatch(cfg: &ExperimentConfig) -> Result<Table> {
    mismatch_sweep(cfg, "sigma_q", |s| Gaussian1D::new(0.0, s * s))
}

/// Target = proposal = `N(0,1)` and `h = 1{|x| > α}`.
pub fn run_rare_event(cfg: &ExperimentConfig) -> Result<Table> {
    cfg.validate()?;
    let n01 = Density::from(Gaussian1D::standard());
    let mut rows = Vec::new();
    for (ni, &n) in cfg.n_values.iter().enumerate() {
        let nf = n as f64;
        for (gi, alpha) in cfg.grid.points().into_iter().enumerate() {
            let p = two_sided_tail(alpha);
            let plan = ReplicationPlan {
                target: n01.clone(),
                rule: SamplingRule::Proposal(n01.clone()),
                integrand: Integrand::IndicatorAbsGt(alpha),
                n_per_run: n,
                replicates: cfg.replicates,
                true_value: p,
                master_seed: derive_seed(cfg.master_seed, &[cfg.kind.id(), ni as u64, gi as u64]),
            };
            let gt = run_replication(&plan)?;
            rows.push(vec![
                n.to_string(),
                num(alpha),
                num(p),
                num(p * (1.0 - p) / nf),
                num(gt.var_raw),
                num(gt.std_errors.var_raw),
                num(gt.var_snis),
                num(gt.std_errors.var_snis),
                num(gt.mse_snis),
                num(rrmse(&gt, p)?),
                num(((1.0 - p) / (nf * p)).sqrt()),
                num(gt.var_snis / p),
                num(gt.ess / nf),
                num(gt.mean_ess_hat / nf),
            ]);
        }
    }
    Ok(Table {
        comments: cfg.comment_lines(),
        header: [
            "n",
            "alpha",
            "true_value",
            "var_analytic",
            "var_raw",
            "se_var_raw",
            "var_snis",
            "se_var_snis",
            "mse_snis",
            "rrmse",
            "rrmse_analytic",
            "rrmse_caption",
            "ess_norm",
            "ess_hat_norm",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
        rows,
    })
}

/// Three-mode mixture target, three Gaussian proposals, `h(x) = x`, for
/// each of the N1, N3 and R3 schemes.
pub fn run_mis_scenario(cfg: &ExperimentConfig) -> Result<Table> {
    cfg.validate()?;
    let (target, proposals) = scenario(cfg.scenario)?;
    let true_mean = target.mean();
    let mut rows = Vec::new();
    for (si, kind) in MisKind::ALL.into_iter().enumerate() {
        let scheme = MisScheme::new(kind, proposals.clone())?;
        for (ni, &n) in cfg.n_values.iter().enumerate() {
            let nf = n as f64;
            let plan = ReplicationPlan {
                target: target.clone(),
                rule: SamplingRule::Mis(scheme.clone()),
                integrand: Integrand::Identity,
                n_per_run: n,
                replicates: cfg.replicates,
                true_value: true_mean,
                master_seed: derive_seed(
                    cfg.master_seed,
                    &[cfg.kind.id(), cfg.scenario as u64, si as u64, ni as u64],
                ),
            };
            let gt = run_replication(&plan)?;
            rows.push(vec![
                cfg.scenario.to_string(),
                kind.to_string(),
                n.to_string(),
                num(gt.ess / nf),
                num(gt.std_errors.ess / nf),
                num(gt.ess_star / nf),
                num(gt.std_errors.ess_star / nf),
                num(gt.mean_ess_hat / nf),
                num(gt.sd_ess_hat / nf),
                num(gt.mean_ess_hat / gt.ess),
                num(gt.mean_ess_hat / gt.ess_star),
                num(gt.var_zhat),
                num(ess_mis(n, gt.var_zhat)? / nf),
            ]);
        }
    }
    Ok(Table {
        comments: cfg.comment_lines(),
        header: [
            "scenario",
            "scheme",
            "n",
            "ess_norm",
            "se_ess_norm",
            "ess_star_norm",
            "se_ess_star_norm",
            "ess_hat_norm",
            "ess_hat_norm_sd",
            "ratio",
            "ratio_star",
            "var_zhat",
            "ess_mis_norm",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
        rows,
    })
}

pub fn run(cfg: &ExperimentConfig) -> Result<Table> {
    match cfg.kind {
        ExperimentKind::MeanMismatch => run_mean_mismatch(cfg),
        ExperimentKind::VarMismatch => run_var_mismatch(cfg),
        ExperimentKind::RareEvent => run_rare_event(cfg),
        ExperimentKind::MisScenario => run_mis_scenario(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ExperimentKind) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::defaults(kind);
        cfg.replicates = 2000;
        cfg
    }

    #[test]
    fn grid_parsing_and_points() {
        let g: Grid = "0:3:0.1".parse().unwrap();
        let p = g.points();
        assert_eq!(p.len(), 31);
        assert!((p[30] - 3.0).abs() < 1e-12);
        assert_eq!("0.5:3.5:0.25".parse::<Grid>().unwrap().points().len(), 13);
        assert_eq!("1:1:1".parse::<Grid>().unwrap().points(), vec![1.0]);
        assert!("1:0:1".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
        assert!("0:1".parse::<Grid>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::MisScenario);
        assert!(cfg.validate().is_ok());
        cfg.scenario = 4;
        assert!(cfg.validate().is_err());
        cfg.scenario = 2;
        cfg.n_values = vec![4];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::RareEvent);
        cfg.n_values.clear();
        assert!(cfg.validate().is_err());
        cfg.n_values = vec![10];
        cfg.replicates = 1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn mean_mismatch_rows() {
        let mut cfg = small(ExperimentKind::MeanMismatch);
        cfg.grid = Grid::new(0.0, 1.0, 1.0).unwrap();
        cfg.n_values = vec![16];
        let t = run_mean_mismatch(&cfg).unwrap();
        assert_eq!(t.rows.len(), 2);
        let ess = t.values("ess_norm");
        let se = t.values("se_ess_norm");
        let hat = t.values("ess_hat_norm");
        let delta = t.values("delta_chain_norm");
        assert!((ess[0] - 1.0).abs() < 3.0 * se[0]);
        assert_eq!(hat[0], 1.0);
        assert_eq!(delta[0], 1.0);
        assert!((delta[1] - (-1.0f64).exp()).abs() < 1e-12);
        for h in hat {
            assert!((1.0 / 16.0..=1.0).contains(&h));
        }
    }

    #[test]
    fn var_mismatch_flags_divergence() {
        let mut cfg = small(ExperimentKind::VarMismatch);
        cfg.grid = Grid::new(0.6, 1.0, 0.4).unwrap();
        cfg.n_values = vec![8];
        let t = run_var_mismatch(&cfg).unwrap();
        let flag = t.column("divergent").unwrap();
        assert_eq!(t.rows[0][flag], "1");
        assert_eq!(t.rows[0][t.column("delta_chain_norm").unwrap()], "");
        assert_eq!(t.rows[1][flag], "0");
        assert_eq!(t.values("delta_chain_norm")[1], 1.0);
    }

    #[test]
    fn var_mismatch_delta_chain_at_sigma_sqrt2() {
        let mut cfg = small(ExperimentKind::VarMismatch);
        cfg.grid = Grid::new(2f64.sqrt(), 2f64.sqrt(), 1.0).unwrap();
        cfg.n_values = vec![4];
        cfg.replicates = 100;
        let t = run_var_mismatch(&cfg).unwrap();
        let var_w = 2.0 / 3f64.sqrt() - 1.0;
        assert!((t.values("delta_chain_norm")[0] - 1.0 / (1.0 + var_w)).abs() < 1e-12);
    }

    #[test]
    fn rare_event_rows() {
        let mut cfg = small(ExperimentKind::RareEvent);
        cfg.n_values = vec![100];
        let t = run_rare_event(&cfg).unwrap();
        assert_eq!(t.rows.len(), 13);
        assert!(t.values("ess_hat_norm").iter().all(|&v| v == 1.0));
        let rr = t.values("rrmse_analytic");
        assert!(rr.windows(2).all(|w| w[1] > w[0]));
        let va = t.values("var_analytic");
        let peak = va.iter().cloned().fold(f64::MIN, f64::max);
        assert!(peak > va[0] && peak > *va.last().unwrap());
    }

    #[test]
    fn mis_table_shape_and_blindness() {
        let mut cfg = small(ExperimentKind::MisScenario);
        cfg.n_values = vec![3, 96];
        let t = run_mis_scenario(&cfg).unwrap();
        assert_eq!(t.rows.len(), 6);
        let scheme = t.column("scheme").unwrap();
        let hat = t.values("ess_hat_norm");
        for (row, h) in t.rows.iter().zip(hat) {
            if row[scheme] != "N1" {
                assert_eq!(h, 1.0);
            }
        }
        let mis = t.values("ess_mis_norm");
        assert!(mis.iter().all(|v| *v > 0.0 && *v <= 1.0));
    }

    #[test]
    fn tables_are_reproducible() {
        let mut cfg = small(ExperimentKind::MeanMismatch);
        cfg.grid = Grid::new(0.5, 1.5, 0.5).unwrap();
        cfg.n_values = vec![4];
        let a = run(&cfg).unwrap().to_csv_string();
        let b = run(&cfg).unwrap().to_csv_string();
        assert_eq!(a, b);
        assert!(a.starts_with("# experiment=mean-mismatch\n"));
        cfg.master_seed += 1;
        assert_ne!(a, run(&cfg).unwrap().to_csv_string());
    }
}
