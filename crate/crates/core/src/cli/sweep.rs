//! Threshold sweeps over a scenario and CSV emission.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use super::config::ScenarioConfig;
use crate::delay::{self, DelayParams};
use crate::geometry::mean_distance;
use crate::linkmodel::{LinkTier, TierModel};
use crate::montecarlo::{
    estimate_success_z_grid, simulate_spatial_tier_grid, McEstimate, SpatialParams, SpatialTier,
};

/// Noise power used by the spatial simulator. Only the ratio to the transmit
/// power matters.
pub const SPATIAL_NOISE_POWER: f64 = 1.0;

/// Column order of the sweep CSV.
pub const CSV_HEADER: [&str; 17] = [
    "scenario",
    "method",
    "theta",
    "p_us",
    "p_vs",
    "p_bs",
    "p_s",
    "t_u_s",
    "t_v_s",
    "t_bs_s",
    "t_total_s",
    "stderr_us",
    "stderr_vs",
    "stderr_bs",
    "seed",
    "trials",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Analytic,
    McSpatial,
    McZ,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Analytic, Method::McSpatial, Method::McZ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::McSpatial => "mc-spatial",
            Method::McZ => "mc-z",
        }
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method `{s}` (expected analytic, mc-z or mc-spatial)"))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("no methods selected")]
    NoMethods,
    #[error(transparent)]
    Config(#[from] super::config::ConfigError),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("output failed: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    pub trials: u64,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 1,
        }
    }
}

/// Monte Carlo provenance of a row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McInfo {
    pub stderr: [f64; 3],
    pub seed: u64,
    pub trials: u64,
}

/// One output line. Probabilities are absent only when the tier computation
/// itself failed; delays are absent when any hop is unreachable.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: String,
    pub method: Method,
    pub theta: f64,
    pub p: Option<[f64; 3]>,
    pub p_s: Option<f64>,
    pub t: Option<[f64; 3]>,
    pub t_total: Option<f64>,
    pub mc: Option<McInfo>,
    pub error: Option<String>,
}

impl SweepRow {
    fn new(
        cfg: &ScenarioConfig,
        method: Method,
        theta: f64,
        probs: Result<[f64; 3], String>,
        mc: Option<McInfo>,
    ) -> Self {
        let mut row = SweepRow {
            scenario: cfg.name.clone(),
            method,
            theta,
            p: None,
            p_s: None,
            t: None,
            t_total: None,
            mc,
            error: None,
        };
        match probs {
            Err(e) => row.error = Some(e),
            Ok(p) => {
                row.p = Some(p);
                row.p_s = Some(p[0] * p[1] * p[2]);
                let d = cfg_delays(cfg);
                match delay::end_to_end(p[0], p[1], p[2], &d[0], &d[1], &d[2]) {
                    Ok(c) => {
                        row.t = Some([c.t_u, c.t_v, c.t_bs]);
                        row.t_total = Some(c.t_total);
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
            }
        }
        row
    }

    pub fn to_record(&self) -> Vec<String> {
        let num = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let tri = |v: Option<[f64; 3]>, i: usize| num(v.map(|a| a[i]));
        let stderr = self.mc.map(|m| m.stderr);
        vec![
            self.scenario.clone(),
            self.method.to_string(),
            format!("{:e}", self.theta),
            tri(self.p, 0),
            tri(self.p, 1),
            tri(self.p, 2),
            num(self.p_s),
            tri(self.t, 0),
            tri(self.t, 1),
            tri(self.t, 2),
            num(self.t_total),
            tri(stderr, 0),
            tri(stderr, 1),
            tri(stderr, 2),
            self.mc.map(|m| m.seed.to_string()).unwrap_or_default(),
            self.mc.map(|m| m.trials.to_string()).unwrap_or_default(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

fn cfg_delays(cfg: &ScenarioConfig) -> [DelayParams; 3] {
    [cfg.delay_ped, cfg.delay_veh, cfg.delay_bs]
}

/// Seed of tier `k` (0 = pedestrian, 1 = vehicle, 2 = base station).
pub fn tier_seed(base: u64, k: usize) -> u64 {
    base.wrapping_add(k as u64)
}

/// Transmit power that makes `snr` the received SNR of an unfaded link at the
/// mean in-disk distance.
pub fn spatial_params(tier: &LinkTier) -> SpatialParams {
    let d_ref = mean_distance(&tier.region);
    SpatialParams {
        tx_power: tier.snr * SPATIAL_NOISE_POWER * d_ref.powf(tier.path_loss_exp),
        noise_power: SPATIAL_NOISE_POWER,
    }
}

fn analytic_rows(cfg: &ScenarioConfig, tiers: &[LinkTier; 3]) -> Vec<SweepRow> {
    let models: Vec<Result<TierModel, String>> = tiers
        .par_iter()
        .map(|t| TierModel::new(*t).map_err(|e| e.to_string()))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cfg.theta_grid.len())
        .flat_map(|i| (0..3).map(move |k| (i, k)))
        .collect();
    let values: Vec<Result<f64, String>> = jobs
        .par_iter()
        .map(|&(i, k)| {
            let model = models[k].as_ref().map_err(Clone::clone)?;
            model
                .success_probability(cfg.theta_grid[i], cfg.digits)
                .map_err(|e| e.to_string())
        })
        .collect();
    values
        .chunks(3)
        .zip(&cfg.theta_grid)
        .map(|(v, &theta)| {
            let probs = (|| Ok([v[0].clone()?, v[1].clone()?, v[2].clone()?]))();
            SweepRow::new(cfg, Method::Analytic, theta, probs, None)
        })
        .collect()
}

fn mc_rows<F>(
    cfg: &ScenarioConfig,
    method: Method,
    opts: &SweepOptions,
    estimate: F,
) -> Vec<SweepRow>
where
    F: Fn(usize, u64) -> Result<Vec<McEstimate>, String> + Sync,
{
    let per_tier: Vec<Result<Vec<McEstimate>, String>> = (0..3usize)
        .into_par_iter()
        .map(|k| estimate(k, tier_seed(opts.seed, k)))
        .collect();
    cfg.theta_grid
        .iter()
        .enumerate()
        .map(|(i, &theta)| {
            let mut first_err = None;
            let mut est = [None; 3];
            for (k, r) in per_tier.iter().enumerate() {
                match r {
                    Ok(v) => est[k] = Some(v[i]),
                    Err(e) => {
                        first_err.get_or_insert_with(|| e.clone());
                    }
                }
            }
            match first_err {
                Some(e) => SweepRow::new(cfg, method, theta, Err(e), None),
                None => {
                    let e = est.map(|x| x.expect("all tiers succeeded"));
                    let info = McInfo {
                        stderr: e.map(|x| x.stderr),
                        seed: opts.seed,
                        trials: opts.trials,
                    };
                    let p = e.map(|x| x.estimate);
                    SweepRow::new(cfg, method, theta, Ok(p), Some(info))
                }
            }
        })
        .collect()
}

/// Computes every `(theta, method)` point of the scenario. Rows come back
/// sorted by threshold, then by method name.
pub fn compute_sweep(
    cfg: &ScenarioConfig,
    methods: &[Method],
    opts: &SweepOptions,
) -> Result<Vec<SweepRow>, SweepError> {
    cfg.validate()?;
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();
    if methods.is_empty() {
        return Err(SweepError::NoMethods);
    }
    if cfg.theta_grid.is_empty() {
        return Ok(Vec::new());
    }
    let tiers = cfg.tiers()?.as_array();

    let mut rows = Vec::new();
    for &m in &methods {
        let block = match m {
            Method::Analytic => analytic_rows(cfg, &tiers),
            Method::McZ => mc_rows(cfg, m, opts, |k, seed| {
                estimate_success_z_grid(&tiers[k], &cfg.theta_grid, opts.trials, seed)
                    .map_err(|e| e.to_string())
            }),
            Method::McSpatial => mc_rows(cfg, m, opts, |k, seed| {
                let t = &tiers[k];
                let spatial = SpatialTier {
                    region: t.region,
                    node_count: t.total_nodes,
                    spatial: spatial_params(t),
                    path_loss_exp: t.path_loss_exp,
                    fading_rate: t.fading_rate,
                };
                simulate_spatial_tier_grid(&spatial, &cfg.theta_grid, opts.trials, seed)
                    .map_err(|e| e.to_string())
            }),
        };
        rows.extend(block.into_iter().enumerate());
    }
    // Stable sort on grid index keeps the method order within a threshold.
    rows.sort_by_key(|(i, _)| *i);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.to_record())?;
    }
    w.flush()?;
    Ok(())
}

/// Outcome of [`run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSummary {
    pub rows: usize,
    pub failed_rows: usize,
}

impl SweepSummary {
    pub fn exit_code(&self) -> u8 {
        u8::from(self.failed_rows > 0)
    }
}

/// Computes the sweep and writes header plus rows to `out`.
pub fn run_sweep<W: Write>(
    cfg: &ScenarioConfig,
    methods: &[Method],
    opts: &SweepOptions,
    out: W,
) -> Result<SweepSummary, SweepError> {
    let rows = compute_sweep(cfg, methods, opts)?;
    write_csv(&rows, out)?;
    Ok(SweepSummary {
        rows: rows.len(),
        failed_rows: rows.iter().filter(|r| r.error.is_some()).count(),
    })
}
