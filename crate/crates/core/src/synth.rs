//! Seeded synthetic microdata with a controlled QI/confidential correlation.
//!
//! Quasi-identifiers are independent Gaussians. The confidential attribute is
//! `rho * mix + sqrt(1 - rho^2) * noise`, where `mix` is the standardized sum
//! of the standardized QIs and `noise` is Gaussian noise made orthogonal to
//! `mix` within the sample, so the sample correlation equals `rho` up to
//! rounding. Every column is finally mapped affinely onto its configured range.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeSpec, Table};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    pub qi_count: usize,
    pub correlation: f64,
    pub seed: u64,
    /// Output range of each QI; must hold `qi_count` entries.
    pub qi_ranges: Vec<(f64, f64)>,
    pub confidential_range: (f64, f64),
}

impl SynthConfig {
    /// QIs on [0, 100] and the confidential attribute on [0, 10000].
    pub fn new(n: usize, qi_count: usize, correlation: f64, seed: u64) -> Self {
        SynthConfig {
            n,
            qi_count,
            correlation,
            seed,
            qi_ranges: vec![(0.0, 100.0); qi_count],
            confidential_range: (0.0, 10_000.0),
        }
    }

    /// Moderately correlated surrogate: 1080 records, 2 QIs, correlation 0.52.
    pub fn mcd(seed: u64) -> Self {
        Self::new(1080, 2, 0.52, seed)
    }

    /// Highly correlated surrogate: 1080 records, 2 QIs, correlation 0.92.
    pub fn hcd(seed: u64) -> Self {
        Self::new(1080, 2, 0.92, seed)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::param("n", "at least 2 records are required"));
        }
        if self.qi_count == 0 {
            return Err(Error::param("qi_count", "at least one quasi-identifier is required"));
        }
        if !(-1.0..=1.0).contains(&self.correlation) {
            return Err(Error::param(
                "correlation",
                format!("{} is outside [-1, 1]", self.correlation),
            ));
        }
        if self.qi_ranges.len() != self.qi_count {
            return Err(Error::param(
                "qi_ranges",
                format!("expected {} ranges, got {}", self.qi_count, self.qi_ranges.len()),
            ));
        }
        for &(lo, hi) in self.qi_ranges.iter().chain(std::iter::once(&self.confidential_range)) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::param("range", format!("[{lo}, {hi}] is not a proper interval")));
            }
        }
        Ok(())
    }
}

fn standardize(xs: &mut [f64]) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter_mut().for_each(|x| *x -= mean);
    let sd = (xs.iter().map(|x| x * x).sum::<f64>() / n).sqrt();
    if sd > 0.0 {
        xs.iter_mut().for_each(|x| *x /= sd);
    }
}

fn map_to_range(xs: &[f64], (lo, hi): (f64, f64)) -> Vec<f64> {
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    xs.iter()
        .map(|&x| {
            if span > 0.0 {
                lo + (x - min) / span * (hi - lo)
            } else {
                (lo + hi) / 2.0
            }
        })
        .collect()
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Equal-weight sum of the standardized QI columns, itself standardized.
fn qi_mix(columns: &[Vec<f64>]) -> Vec<f64> {
    let n = columns[0].len();
    let mut mix = vec![0.0; n];
    for col in columns {
        let mut z = col.clone();
        standardize(&mut z);
        mix.iter_mut().zip(&z).for_each(|(m, v)| *m += v);
    }
    standardize(&mut mix);
    mix
}

/// Pearson correlation between the confidential attribute and the QI mix.
pub fn achieved_correlation(table: &Table) -> f64 {
    let columns: Vec<Vec<f64>> = table.qi_columns().iter().map(|&c| table.column(c)).collect();
    pearson(&qi_mix(&columns), &table.confidential_values())
}

pub fn synth_generate(cfg: &SynthConfig) -> Result<Table> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n;
    let raw_qis: Vec<Vec<f64>> = (0..cfg.qi_count)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let mix = qi_mix(&raw_qis);

    let mut noise: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    standardize(&mut noise);
    let proj = noise.iter().zip(&mix).map(|(a, b)| a * b).sum::<f64>() / mix.iter().map(|m| m * m).sum::<f64>();
    noise.iter_mut().zip(&mix).for_each(|(e, m)| *e -= proj * m);
    let residual = (noise.iter().map(|e| e * e).sum::<f64>() / n as f64).sqrt();
    if residual > 1e-12 {
        noise.iter_mut().for_each(|e| *e /= residual);
    } else {
        noise.iter_mut().for_each(|e| *e = 0.0);
    }

    let rho = cfg.correlation;
    let conf: Vec<f64> = mix
        .iter()
        .zip(&noise)
        .map(|(m, e)| rho * m + (1.0 - rho * rho).sqrt() * e)
        .collect();

    let mut columns: Vec<Vec<f64>> = raw_qis
        .iter()
        .zip(&cfg.qi_ranges)
        .map(|(col, &range)| map_to_range(col, range))
        .collect();
    columns.push(map_to_range(&conf, cfg.confidential_range));

    let mut specs: Vec<AttributeSpec> = (1..=cfg.qi_count)
        .map(|j| AttributeSpec::qi(format!("qi{j}")))
        .collect();
    specs.push(AttributeSpec::confidential("conf"));
    let rows = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    Table::new(specs, rows)
}
