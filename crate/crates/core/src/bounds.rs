//! Distances between the exact law and its approximants, the bound shapes
//! they are compared against, parameter sweeps and log-log rate fits.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::chain::ChainParams;
use crate::components::{expansion_approx, skellam_power, theorem1_approx};
use crate::error::{Error, Result};
use crate::markov::exact_distributions;
use crate::measure::{LatticeMeasure, NormKind, TruncationBudget};

/// Absolute tolerance on the mass difference for partial-sum distances.
pub const MASS_MATCH_TOL: f64 = 1e-9;

/// Approximant and bound family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremId {
    /// `E * K * G^{*n}` against `min(n^{-1}, β)`-type shapes.
    Ekg,
    /// `D^{*n}` against `1/n (1 + |α-β|/β)`-type shapes.
    Skellam,
    /// `D^{*n} * (I + A1 + nA2)` against `1/n² (1 + (α-β)²/β²)`-type shapes.
    Expansion,
    /// `D^{*n}` against the explicit leading terms.
    Explicit,
    /// `D^{*n}` in `ℓ_r` / `L_r` norms.
    LrInterp,
}

impl TheoremId {
    pub const ALL: [TheoremId; 5] = [
        TheoremId::Ekg,
        TheoremId::Skellam,
        TheoremId::Expansion,
        TheoremId::Explicit,
        TheoremId::LrInterp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::Ekg => "ekg",
            TheoremId::Skellam => "skellam",
            TheoremId::Expansion => "expansion",
            TheoremId::Explicit => "explicit",
            TheoremId::LrInterp => "lrinterp",
        }
    }

    /// Builds the approximant this theorem compares `F_n` with.
    pub fn approximant(
        self,
        cp: &ChainParams,
        n: u64,
        tb: &mut TruncationBudget,
    ) -> Result<LatticeMeasure> {
        match self {
            TheoremId::Ekg => theorem1_approx(cp, n, tb),
            TheoremId::Expansion => expansion_approx(cp, n, tb),
            TheoremId::Skellam | TheoremId::Explicit | TheoremId::LrInterp => {
                skellam_power(cp, n, tb)
            }
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown approximant `{s}`")))
    }
}

/// `‖F - G‖` in the requested norm.
pub fn distance(f: &LatticeMeasure, g: &LatticeMeasure, kind: NormKind) -> Result<f64> {
    if kind.needs_zero_mass() {
        let (left, right) = (f.mass(), g.mass());
        if (left - right).abs() > MASS_MATCH_TOL {
            return Err(Error::MassMismatch {
                kind: kind.label(),
                left,
                right,
            });
        }
    }
    (f - g).norm(kind)
}

/// Total variation metric, half the total variation norm.
pub fn d_tv(f: &LatticeMeasure, g: &LatticeMeasure) -> f64 {
    0.5 * (f - g).norm(NormKind::TotalVariation).unwrap()
}

/// Local (point) metric.
pub fn d_loc(f: &LatticeMeasure, g: &LatticeMeasure) -> f64 {
    (f - g).norm(NormKind::Local).unwrap()
}

/// Wasserstein metric between measures of equal mass.
pub fn d_w(f: &LatticeMeasure, g: &LatticeMeasure) -> Result<f64> {
    distance(f, g, NormKind::Wasserstein)
}

fn unsupported(id: TheoremId, kind: NormKind) -> Error {
    Error::Unsupported(format!("no {id} bound for the {kind} norm"))
}

/// The bound with every unspecified absolute constant set to 1, or the
/// printed leading term for [`TheoremId::Explicit`]. For
/// [`TheoremId::LrInterp`] the exponent comes from `kind`
/// (`TotalVariation` and `Wasserstein` are the `r = 1` cases).
pub fn bound_shape(id: TheoremId, kind: NormKind, cp: &ChainParams, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("bound shapes need n >= 1".into()));
    }
    let (a, b) = (cp.alpha, cp.beta);
    let n = n as f64;
    let rel = (a - b).abs() / b;
    let shape = match (id, kind) {
        (TheoremId::Ekg, NormKind::TotalVariation) => (1.0 / n).min(b),
        (TheoremId::Ekg, NormKind::Local) => (1.0 / (n * (n * b).sqrt())).min(b),
        (TheoremId::Ekg, NormKind::Wasserstein) => (b / n).sqrt().min(b),

        (TheoremId::Skellam, NormKind::TotalVariation) => (1.0 + rel) / n,
        (TheoremId::Skellam, NormKind::Local) => (1.0 + rel) / (n * (n * b).sqrt()),
        (TheoremId::Skellam, NormKind::Wasserstein) => (1.0 + rel) * (b / n).sqrt(),

        (TheoremId::Expansion, NormKind::TotalVariation) => (1.0 + rel * rel) / (n * n),
        (TheoremId::Expansion, NormKind::Local) => (1.0 + rel * rel) / (n * n * (n * b).sqrt()),
        (TheoremId::Expansion, NormKind::Wasserstein) => (1.0 + rel * rel) * (b / n).sqrt() / n,

        (TheoremId::Explicit, NormKind::TotalVariation) => 0.61 / n * (1.0 + 3.21 * rel),
        (TheoremId::Explicit, NormKind::Local) => 0.6 / (n * (n * b).sqrt()) * (1.0 + 3.0 * rel),
        (TheoremId::Explicit, NormKind::Wasserstein) => 0.5 * (b / n).sqrt() * (1.0 + 3.9 * rel),

        (TheoremId::LrInterp, NormKind::TotalVariation) => lr_shape(1.0, n, b, rel),
        (TheoremId::LrInterp, NormKind::Lr(r)) => lr_shape(r, n, b, rel),
        (TheoremId::LrInterp, NormKind::Wasserstein) => cap_lr_shape(1.0, n, b, rel),
        (TheoremId::LrInterp, NormKind::CapLr(r)) => cap_lr_shape(r, n, b, rel),

        _ => return Err(unsupported(id, kind)),
    };
    Ok(shape)
}

/// `n^{-(3r-1)/2r} β^{-(r-1)/2r} (1 + |α-β|/β)`
fn lr_shape(r: f64, n: f64, b: f64, rel: f64) -> f64 {
    n.powf(-(3.0 * r - 1.0) / (2.0 * r)) * b.powf(-(r - 1.0) / (2.0 * r)) * (1.0 + rel)
}

/// `n^{-(2r-1)/2r} β^{1/2r} (1 + |α-β|/β)`; the exponent of `n` is negative,
/// as interpolating between the TV and Wasserstein bounds gives.
fn cap_lr_shape(r: f64, n: f64, b: f64, rel: f64) -> f64 {
    n.powf(-(2.0 * r - 1.0) / (2.0 * r)) * b.powf(1.0 / (2.0 * r)) * (1.0 + rel)
}

/// `lhs / min(4nβ², 4/n)`, the empirical constant of the i.i.d. shape
/// `C min(np², 1/n)`. Reported only; no threshold applies.
pub fn iid_shape_constant(cp: &ChainParams, n: u64, lhs: f64) -> f64 {
    let n = n as f64;
    lhs / (4.0 * n * cp.beta * cp.beta).min(4.0 / n)
}

/// One `(grid point, metric)` result of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub n: u64,
    pub metric: NormKind,
    pub approximant: TheoremId,
    pub lhs: f64,
    pub shape: f64,
    pub ratio: f64,
    pub truncation: f64,
    /// Set when the row could not be computed; numeric fields are NaN then.
    pub error: Option<String>,
}

pub const CSV_HEADER: [&str; 12] = [
    "alpha",
    "beta",
    "p1",
    "p2",
    "p3",
    "n",
    "metric",
    "approximant",
    "lhs",
    "shape",
    "ratio",
    "truncation",
];

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

impl SweepRow {
    fn csv_fields(&self) -> [String; 12] {
        [
            fmt_f64(self.alpha),
            fmt_f64(self.beta),
            fmt_f64(self.p1),
            fmt_f64(self.p2),
            fmt_f64(self.p3),
            self.n.to_string(),
            self.metric.to_string(),
            self.approximant.to_string(),
            fmt_f64(self.lhs),
            fmt_f64(self.shape),
            fmt_f64(self.ratio),
            fmt_f64(self.truncation),
        ]
    }
}

fn json_number<S: SerializeStruct>(
    s: &mut S,
    key: &'static str,
    x: f64,
) -> std::result::Result<(), S::Error> {
    if x.is_finite() {
        s.serialize_field(key, &x)
    } else {
        s.serialize_field(key, &Option::<f64>::None)
    }
}

impl Serialize for SweepRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SweepRow", 13)?;
        json_number(&mut s, "alpha", self.alpha)?;
        json_number(&mut s, "beta", self.beta)?;
        json_number(&mut s, "p1", self.p1)?;
        json_number(&mut s, "p2", self.p2)?;
        json_number(&mut s, "p3", self.p3)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("metric", &self.metric.to_string())?;
        s.serialize_field("approximant", self.approximant.as_str())?;
        json_number(&mut s, "lhs", self.lhs)?;
        json_number(&mut s, "shape", self.shape)?;
        json_number(&mut s, "ratio", self.ratio)?;
        json_number(&mut s, "truncation", self.truncation)?;
        s.serialize_field("error", &self.error)?;
        s.end()
    }
}

/// Writes rows as CSV with the fixed header.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.csv_fields())?;
    }
    w.flush()
}

/// Writes rows as a JSON array; non-finite numbers become `null`.
pub fn write_json<W: Write>(rows: &[SweepRow], out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(out, rows).map_err(std::io::Error::other)
}

/// A sweep row parsed back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub alpha: f64,
    pub beta: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub n: u64,
    pub metric: String,
    pub approximant: String,
    pub lhs: f64,
    pub shape: f64,
    pub ratio: f64,
    pub truncation: f64,
}

/// Reads rows written by [`write_csv`].
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::InvalidInput(e.to_string()))?
        .clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::InvalidInput(format!(
            "unexpected sweep header `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidInput(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            record[i].parse().map_err(|_| {
                Error::InvalidInput(format!(
                    "row {}: bad {} `{}`",
                    line + 1,
                    CSV_HEADER[i],
                    &record[i]
                ))
            })
        };
        rows.push(CsvRow {
            alpha: num(0)?,
            beta: num(1)?,
            p1: num(2)?,
            p2: num(3)?,
            p3: num(4)?,
            n: record[5].parse().map_err(|_| {
                Error::InvalidInput(format!("row {}: bad n `{}`", line + 1, &record[5]))
            })?,
            metric: record[6].to_string(),
            approximant: record[7].to_string(),
            lhs: num(8)?,
            shape: num(9)?,
            ratio: num(10)?,
            truncation: num(11)?,
        });
    }
    Ok(rows)
}

/// Settings for [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Per-operation truncation budget.
    pub budget: f64,
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            budget: 1e-12,
            jobs: 0,
        }
    }
}

fn error_row(
    cp: &ChainParams,
    n: u64,
    metric: NormKind,
    id: TheoremId,
    truncation: f64,
    err: &Error,
) -> SweepRow {
    SweepRow {
        alpha: cp.alpha,
        beta: cp.beta,
        p1: cp.p1,
        p2: cp.p2,
        p3: cp.p3,
        n,
        metric,
        approximant: id,
        lhs: f64::NAN,
        shape: f64::NAN,
        ratio: f64::NAN,
        truncation,
        error: Some(err.to_string()),
    }
}

fn point_rows(
    cp: &ChainParams,
    n: u64,
    exact: &LatticeMeasure,
    id: TheoremId,
    metrics: &[NormKind],
    budget: f64,
) -> Vec<SweepRow> {
    let mut tb = TruncationBudget::new(budget);
    let approx = match id.approximant(cp, n, &mut tb) {
        Ok(a) => a,
        Err(e) => {
            return metrics
                .iter()
                .map(|&m| error_row(cp, n, m, id, tb.accumulated(), &e))
                .collect()
        }
    };
    metrics
        .iter()
        .map(|&metric| {
            let measured = distance(exact, &approx, metric)
                .and_then(|lhs| bound_shape(id, metric, cp, n).map(|shape| (lhs, shape)));
            match measured {
                Ok((lhs, shape)) => SweepRow {
                    alpha: cp.alpha,
                    beta: cp.beta,
                    p1: cp.p1,
                    p2: cp.p2,
                    p3: cp.p3,
                    n,
                    metric,
                    approximant: id,
                    lhs,
                    shape,
                    ratio: lhs / shape,
                    truncation: tb.accumulated(),
                    error: None,
                },
                Err(e) => error_row(cp, n, metric, id, tb.accumulated(), &e),
            }
        })
        .collect()
}

/// Evaluates `‖F_n - approximant‖` and its bound shape for every grid point
/// and metric. Rows come in grid order, then metric order; failures are
/// recorded in the affected rows.
pub fn sweep(
    grid: &[(ChainParams, u64)],
    approximant: TheoremId,
    metrics: &[NormKind],
    opts: SweepOptions,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("sweep grid is empty".into()));
    }
    if metrics.is_empty() {
        return Err(Error::InvalidInput(
            "sweep needs at least one metric".into(),
        ));
    }
    // one DP pass per distinct chain, snapshotting every requested n
    let mut chains: Vec<(ChainParams, Vec<u64>)> = Vec::new();
    for (cp, n) in grid {
        match chains.iter_mut().find(|(c, _)| c == cp) {
            Some((_, ns)) => ns.push(*n),
            None => chains.push((*cp, vec![*n])),
        }
    }
    let run = || -> Vec<SweepRow> {
        let exact: Vec<(ChainParams, Vec<u64>, Vec<LatticeMeasure>)> = chains
            .par_iter()
            .map(|(cp, ns)| (*cp, ns.clone(), exact_distributions(cp, ns)))
            .collect();
        grid.par_iter()
            .map(|(cp, n)| {
                let (_, ns, fs) = exact.iter().find(|(c, _, _)| c == cp).unwrap();
                let f = &fs[ns.iter().position(|m| m == n).unwrap()];
                point_rows(cp, *n, f, approximant, metrics, opts.budget)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    if opts.jobs == 0 {
        return Ok(run());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(pool.install(run))
}

/// Least-squares fit of `ln(value) = intercept + slope ln(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "rate fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(n, v)) = points.iter().find(|&&(n, v)| !(n > 0.0 && v > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "rate fit needs positive n and values, got ({n}, {v})"
        )));
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput(
            "rate fit needs at least two distinct n".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
    })
}
