#![allow(dead_code)]

//! Independent oracles shared by the integration suites.

pub mod checks;

/// Dip of a sample with distinct values, by direct optimisation.
///
/// Any continuous unimodal c.d.f. within sup-distance `d` of the e.c.d.f. can
/// be replaced by its linear interpolation through the data points, whose
/// slopes rise and then fall. So for each choice of the peak segment the dip
/// is the optimum of a small linear program over the knot heights `g_i`:
///
///   minimise d  s.t.  (i+1)/n - d <= g_i <= i/n + d,  slopes >= 0,
///                     slopes nondecreasing up to the peak, nonincreasing after.
///
/// The answer is the minimum over peak positions.
pub fn dip_lp_oracle(sample: &[f64]) -> f64 {
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len();
    assert!(n >= 2);
    assert!(x.windows(2).all(|w| w[1] > w[0]), "oracle needs distinct values");
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let nf = n as f64;
    // Variable 0 is d, variables 1..=n are the knot heights.
    let nv = n + 1;
    let unit = |i: usize, v: f64| {
        let mut row = vec![0.0; nv];
        row[i] = v;
        row
    };

    (0..n - 1)
        .map(|peak| {
            let mut rows: Vec<(Vec<f64>, Cmp, f64)> = Vec::new();
            rows.push((unit(0, 1.0), Cmp::Le, 1.0));
            for i in 0..n {
                let mut lo = unit(1 + i, 1.0);
                lo[0] = 1.0;
                rows.push((lo, Cmp::Ge, (i + 1) as f64 / nf));
                let mut hi = unit(1 + i, 1.0);
                hi[0] = -1.0;
                rows.push((hi, Cmp::Le, i as f64 / nf));
                rows.push((unit(1 + i, 1.0), Cmp::Le, 1.0));
            }
            for k in 0..n - 1 {
                let mut r = unit(2 + k, 1.0);
                r[1 + k] = -1.0;
                rows.push((r, Cmp::Ge, 0.0));
            }
            for k in 0..n.saturating_sub(2) {
                // slope_k - slope_{k+1}
                let mut r = vec![0.0; nv];
                r[1 + k] = -1.0 / h[k];
                r[2 + k] = 1.0 / h[k] + 1.0 / h[k + 1];
                r[3 + k] = -1.0 / h[k + 1];
                let op = if k < peak { Cmp::Le } else { Cmp::Ge };
                rows.push((r, op, 0.0));
            }
            let mut cost = vec![0.0; nv];
            cost[0] = 1.0;
            simplex_min(&cost, &rows).expect("dip LP is always feasible")
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, PartialEq)]
pub enum Cmp {
    Le,
    Ge,
}

/// Minimises `cost . x` over `x >= 0` subject to `rows`, by a dense two-phase
/// tableau simplex with Bland's rule. Returns `None` when infeasible.
pub fn simplex_min(cost: &[f64], rows: &[(Vec<f64>, Cmp, f64)]) -> Option<f64> {
    const EPS: f64 = 1e-11;
    let nv = cost.len();
    let m = rows.len();
    // Normalise to nonnegative right-hand sides.
    let norm: Vec<(Vec<f64>, Cmp, f64)> = rows
        .iter()
        .map(|(a, op, b)| {
            if *b < 0.0 {
                let flipped = if *op == Cmp::Le { Cmp::Ge } else { Cmp::Le };
                (a.iter().map(|v| -v).collect(), flipped, -b)
            } else {
                (a.clone(), *op, *b)
            }
        })
        .collect();
    let n_art = norm.iter().filter(|r| r.1 == Cmp::Ge).count();
    let slack0 = nv;
    let art0 = nv + m;
    let width = nv + m + n_art + 1;
    let rhs = width - 1;
    let mut t = vec![vec![0.0f64; width]; m];
    let mut basis = vec![0usize; m];
    let mut a = art0;
    for (i, (coef, op, b)) in norm.iter().enumerate() {
        t[i][..nv].copy_from_slice(coef);
        t[i][rhs] = *b;
        match op {
            Cmp::Le => {
                t[i][slack0 + i] = 1.0;
                basis[i] = slack0 + i;
            }
            Cmp::Ge => {
                t[i][slack0 + i] = -1.0;
                t[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
        }
    }

    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, obj: &[f64], allowed: usize| {
        loop {
            // Reduced costs.
            let mut enter = None;
            for j in 0..allowed {
                if basis.contains(&j) {
                    continue;
                }
                let z: f64 = (0..m).map(|i| obj[basis[i]] * t[i][j]).sum();
                if obj[j] - z < -EPS {
                    enter = Some(j);
                    break;
                }
            }
            let Some(j) = enter else { return };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if t[i][j] > EPS {
                    let ratio = t[i][rhs] / t[i][j];
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - EPS || (ratio <= lr + EPS && basis[i] < basis[li]) {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let (r, _) = leave.expect("LP unbounded");
            let piv = t[r][j];
            t[r].iter_mut().for_each(|v| *v /= piv);
            let pivot_row = t[r].clone();
            for (i, row) in t.iter_mut().enumerate() {
                if i != r && row[j] != 0.0 {
                    let f = row[j];
                    row.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
                }
            }
            basis[r] = j;
        }
    };

    let mut phase1 = vec![0.0; width - 1];
    phase1[art0..art0 + n_art].iter_mut().for_each(|v| *v = 1.0);
    run(&mut t, &mut basis, &phase1, width - 1);
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= art0).map(|i| t[i][rhs]).sum();
    if infeas > 1e-9 {
        return None;
    }
    // Drive remaining (zero-valued) artificials out of the basis.
    for i in 0..m {
        if basis[i] >= art0 {
            if let Some(j) = (0..art0).find(|&j| !basis.contains(&j) && t[i][j].abs() > 1e-9) {
                let piv = t[i][j];
                t[i].iter_mut().for_each(|v| *v /= piv);
                let pivot_row = t[i].clone();
                for (k, row) in t.iter_mut().enumerate() {
                    if k != i && row[j] != 0.0 {
                        let f = row[j];
                        row.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
                    }
                }
                basis[i] = j;
            }
        }
    }
    let mut phase2 = vec![0.0; width - 1];
    phase2[..nv].copy_from_slice(cost);
    run(&mut t, &mut basis, &phase2, art0);
    Some((0..m).map(|i| phase2[basis[i]] * t[i][rhs]).sum())
}

/// Two-pass sample covariance, denominator n - 1.
pub fn covariance_two_pass(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for r in rows {
        for j in 0..d {
            mean[j] += r[j];
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in 0..d {
            let s: f64 = rows.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum();
            cov[a][b] = s / (n - 1) as f64;
        }
    }
    cov
}

/// NMI straight from the contingency-table definition with arithmetic-mean
/// normalisation.
pub fn nmi_by_table(truth: &[usize], pred: &[usize]) -> f64 {
    let n = truth.len() as f64;
    let kt = truth.iter().max().unwrap() + 1;
    let kp = pred.iter().max().unwrap() + 1;
    let mut table = vec![vec![0.0f64; kp]; kt];
    for (&t, &p) in truth.iter().zip(pred) {
        table[t][p] += 1.0;
    }
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..kp).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let entropy = |m: &[f64]| -> f64 {
        m.iter().filter(|&&c| c > 0.0).map(|&c| -(c / n) * (c / n).ln()).sum()
    };
    let mut mi = 0.0;
    for i in 0..kt {
        for j in 0..kp {
            let c = table[i][j];
            if c > 0.0 {
                mi += (c / n) * ((c * n) / (rows[i] * cols[j])).ln();
            }
        }
    }
    let (ht, hp) = (entropy(&rows), entropy(&cols));
    if ht == 0.0 && hp == 0.0 {
        return 1.0;
    }
    mi / (0.5 * (ht + hp))
}
