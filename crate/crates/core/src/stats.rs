//! Rank and correlation statistics over scored windows.
//!
//! Three primitives (Pearson, Spearman on mid-ranks, Mann-Whitney U with
//! tie-corrected normal approximation) plus report builders that slice a
//! labeled corpus by scenario, mass, and top-decile stress regime.

use crate::physics::PhysicsProxies;
use crate::telemetry::Label;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;
// backs float math in pure no_std builds; shadowed once std is linked
#[allow(unused_imports)]
use num_traits::Float;

/// Minimum corpus size for [`correlation_report`].
pub const MIN_REPORT_WINDOWS: usize = 500;
/// Minimum group size for the Mann-Whitney normal approximation.
pub const MIN_GROUP: usize = 8;

/// Proxy channels in canonical report order.
pub const PROXY_NAMES: [&str; 4] = ["e_susp", "e_lat", "w_drive", "e_brake"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsError {
    LengthMismatch { a: usize, b: usize },
    /// Correlations need at least 3 paired points.
    TooShort { len: usize },
    /// A constant series has no defined correlation.
    DegenerateInput,
    /// Mann-Whitney groups below [`MIN_GROUP`] (exact method not provided).
    SmallSample { len: usize },
    InsufficientData { got: usize, need: usize },
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::LengthMismatch { a, b } => {
                write!(f, "series lengths differ: {} vs {}", a, b)
            }
            StatsError::TooShort { len } => {
                write!(f, "need at least 3 paired points, got {}", len)
            }
            StatsError::DegenerateInput => f.write_str("constant series has no correlation"),
            StatsError::SmallSample { len } => {
                write!(f, "group of {} is below the normal-approximation minimum of {}", len, MIN_GROUP)
            }
            StatsError::InsufficientData { got, need } => {
                write!(f, "need {} labeled windows, got {}", need, got)
            }
        }
    }
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { a: x.len(), b: y.len() });
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooShort { len: n });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Mid-ranks (1-based; ties get the average of their rank block).
pub fn midranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let rank = (i + j + 2) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Rank correlation: Pearson of mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { a: x.len(), b: y.len() });
    }
    pearson(&midranks(x), &midranks(y))
}

/// Mann-Whitney result for group a against group b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwuTest {
    pub u_a: f64,
    pub u_b: f64,
    pub z: f64,
    /// Two-sided p from the tie-corrected normal approximation with
    /// continuity correction.
    pub p: f64,
}

/// Rank-sum Mann-Whitney U test.
///
/// `U_a = R_a - n_a(n_a+1)/2` over the pooled mid-ranks, which equals the
/// pair count `#{a_i > b_j} + half the ties`. When the tie-corrected
/// variance collapses to zero (all pooled values identical) the test is
/// uninformative and `p = 1`.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MwuTest, StatsError> {
    let (na, nb) = (a.len(), b.len());
    if na < MIN_GROUP {
        return Err(StatsError::SmallSample { len: na });
    }
    if nb < MIN_GROUP {
        return Err(StatsError::SmallSample { len: nb });
    }
    let mut pooled = Vec::with_capacity(na + nb);
    pooled.extend_from_slice(a);
    pooled.extend_from_slice(b);
    let ranks = midranks(&pooled);
    let r_a: f64 = ranks[..na].iter().sum();
    let naf = na as f64;
    let nbf = nb as f64;
    let u_a = r_a - naf * (naf + 1.0) / 2.0;
    let u_b = naf * nbf - u_a;

    let n = na + nb;
    let mut sorted = pooled;
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite values"));
    let mut tie_sum = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_sum += t * t * t - t;
        i = j + 1;
    }
    let nf = n as f64;
    let var = naf * nbf / 12.0 * ((nf + 1.0) - tie_sum / (nf * (nf - 1.0)));
    if var <= 0.0 {
        return Ok(MwuTest { u_a, u_b, z: 0.0, p: 1.0 });
    }
    let mu = naf * nbf / 2.0;
    let diff = u_a - mu;
    let shifted = (diff.abs() - 0.5).max(0.0);
    let z = if diff < 0.0 { -shifted } else { shifted } / var.sqrt();
    let p = libm::erfc(z.abs() / core::f64::consts::SQRT_2);
    Ok(MwuTest { u_a, u_b, z, p })
}

/// One scored window with its provenance, the unit of the report builders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledWindow {
    pub a_ml: f64,
    pub proxies: PhysicsProxies,
    pub label: Label,
    pub mass: f64,
}

fn proxy_value(p: &PhysicsProxies, name: &str) -> f64 {
    match name {
        "e_susp" => p.e_susp,
        "e_lat" => p.e_lat,
        "w_drive" => p.w_drive,
        "e_brake" => p.e_brake,
        _ => unreachable!("unknown proxy channel"),
    }
}

/// One row of the correlation report: an (a_ml, proxy) pair within a scope.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub pair: String,
    pub scope: String,
    pub n: usize,
    pub pearson_r: f64,
    pub spearman_rho: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrelationReport {
    pub rows: Vec<CorrelationRow>,
}

impl CorrelationReport {
    /// CSV with header `pair,scope,n,pearson_r,spearman_rho`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pair,scope,n,pearson_r,spearman_rho\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.pair, r.scope, r.n, r.pearson_r, r.spearman_rho
            );
        }
        out
    }
}

fn push_pairs(rows: &mut Vec<CorrelationRow>, scope: &str, windows: &[&LabeledWindow]) {
    let a_ml: Vec<f64> = windows.iter().map(|w| w.a_ml).collect();
    for name in PROXY_NAMES {
        let proxy: Vec<f64> = windows.iter().map(|w| proxy_value(&w.proxies, name)).collect();
        // constant slices (e.g. w_drive identically zero in a scope) carry
        // no correlation; those rows are omitted rather than written as NaN
        let (r, rho) = match (pearson(&a_ml, &proxy), spearman(&a_ml, &proxy)) {
            (Ok(r), Ok(rho)) => (r, rho),
            _ => continue,
        };
        rows.push(CorrelationRow {
            pair: format!("a_ml:{}", name),
            scope: String::from(scope),
            n: windows.len(),
            pearson_r: r,
            spearman_rho: rho,
        });
    }
}

/// Top-decile subset: the `max(1, n/10)` largest values of `key`, realized
/// as everything at or above the (n-k)-th order statistic (ties included).
fn top_decile<'a>(windows: &[&'a LabeledWindow], key: &str) -> Vec<&'a LabeledWindow> {
    let mut values: Vec<f64> = windows.iter().map(|w| proxy_value(&w.proxies, key)).collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let k = (windows.len() / 10).max(1);
    let threshold = values[windows.len() - k];
    windows
        .iter()
        .copied()
        .filter(|w| proxy_value(&w.proxies, key) >= threshold)
        .collect()
}

/// Correlation tables for the full corpus and its scenario, mass, and
/// top-decile slices.
pub fn correlation_report(windows: &[LabeledWindow]) -> Result<CorrelationReport, StatsError> {
    if windows.len() < MIN_REPORT_WINDOWS {
        return Err(StatsError::InsufficientData {
            got: windows.len(),
            need: MIN_REPORT_WINDOWS,
        });
    }
    let all: Vec<&LabeledWindow> = windows.iter().collect();
    let mut rows = Vec::new();
    push_pairs(&mut rows, "global", &all);

    let mut by_label: BTreeMap<Label, Vec<&LabeledWindow>> = BTreeMap::new();
    for w in windows {
        by_label.entry(w.label).or_default().push(w);
    }
    for (label, group) in &by_label {
        push_pairs(&mut rows, &format!("scenario:{}", label.as_str()), group);
    }

    // mass is per-mission and drawn from a small grid, so exact bit equality
    // is the right grouping key
    let mut by_mass: BTreeMap<u64, (f64, Vec<&LabeledWindow>)> = BTreeMap::new();
    for w in windows {
        by_mass.entry(w.mass.to_bits()).or_insert_with(|| (w.mass, Vec::new())).1.push(w);
    }
    for (_, (mass, group)) in &by_mass {
        push_pairs(&mut rows, &format!("mass:{}", mass), group);
    }

    for name in PROXY_NAMES {
        let subset = top_decile(&all, name);
        push_pairs(&mut rows, &format!("top10:{}", name), &subset);
    }
    Ok(CorrelationReport { rows })
}

/// One pairwise context comparison for one proxy channel.
#[derive(Debug, Clone, PartialEq)]
pub struct MwuRow {
    pub proxy: &'static str,
    pub group_a: Label,
    pub group_b: Label,
    pub u: f64,
    pub p: f64,
}

/// Mann-Whitney comparisons of every proxy across every pair of labels with
/// enough windows on both sides; undersized pairings are skipped.
pub fn mwu_battery(windows: &[LabeledWindow]) -> Vec<MwuRow> {
    let mut by_label: BTreeMap<Label, Vec<&LabeledWindow>> = BTreeMap::new();
    for w in windows {
        by_label.entry(w.label).or_default().push(w);
    }
    let labels: Vec<Label> = by_label.keys().copied().collect();
    let mut rows = Vec::new();
    for name in PROXY_NAMES {
        for i in 0..labels.len() {
            for j in i + 1..labels.len() {
                let a: Vec<f64> = by_label[&labels[i]]
                    .iter()
                    .map(|w| proxy_value(&w.proxies, name))
                    .collect();
                let b: Vec<f64> = by_label[&labels[j]]
                    .iter()
                    .map(|w| proxy_value(&w.proxies, name))
                    .collect();
                if let Ok(t) = mann_whitney_u(&a, &b) {
                    rows.push(MwuRow {
                        proxy: name,
                        group_a: labels[i],
                        group_b: labels[j],
                        u: t.u_a,
                        p: t.p,
                    });
                }
            }
        }
    }
    rows
}

/// CSV with header `proxy,group_a,group_b,U,p`.
pub fn mwu_to_csv(rows: &[MwuRow]) -> String {
    let mut out = String::from("proxy,group_a,group_b,U,p\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.proxy,
            r.group_a.as_str(),
            r.group_b.as_str(),
            r.u,
            r.p
        );
    }
    out
}
