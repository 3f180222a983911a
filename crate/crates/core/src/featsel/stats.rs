//! Correlation and mutual-information scores.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Equal-frequency bin count for mutual information.
pub const MI_BINS: usize = 10;

fn check_pair(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < min {
        return Err(Error::TooFewSamples {
            needed: min,
            got: x.len(),
        });
    }
    Ok(())
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample Pearson correlation; 0 when either vector is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    if is_constant(x) || is_constant(y) {
        return Ok(0.0);
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the average of their positions.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Maps values to bin labels. At most `bins` distinct values keep one bin
/// each; otherwise edges are the order statistics at multiples of n/bins,
/// with duplicate edges merged. Labels depend only on the ordering of values.
pub fn discretize(v: &[f64], bins: usize) -> Vec<usize> {
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() <= bins {
        return v
            .iter()
            .map(|a| distinct.partition_point(|d| d.total_cmp(a).is_lt()))
            .collect();
    }
    let n = sorted.len();
    let mut edges: Vec<f64> = (1..bins).map(|b| sorted[b * n / bins]).collect();
    edges.dedup();
    v.iter()
        .map(|a| edges.partition_point(|e| e.total_cmp(a).is_le()))
        .collect()
}

/// Plug-in mutual information (nats) of the discretized variables.
pub fn mutual_information(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    let bx = discretize(x, MI_BINS);
    let by = discretize(y, MI_BINS);
    Ok(plug_in_mi(&bx, &by))
}

fn plug_in_mi(bx: &[usize], by: &[usize]) -> f64 {
    let n = bx.len() as f64;
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut px: BTreeMap<usize, usize> = BTreeMap::new();
    let mut py: BTreeMap<usize, usize> = BTreeMap::new();
    for (&a, &b) in bx.iter().zip(by) {
        *joint.entry((a, b)).or_default() += 1;
        *px.entry(a).or_default() += 1;
        *py.entry(b).or_default() += 1;
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(a, b), &c)| {
            let pab = c as f64 / n;
            let pa = px[&a] as f64 / n;
            let pb = py[&b] as f64 / n;
            pab * (pab / (pa * pb)).ln()
        })
        .sum();
    mi.max(0.0)
}
