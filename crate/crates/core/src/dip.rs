//! Hartigan's dip statistic and its bootstrap p-value.
//!
//! The dip of a sample is the smallest sup-distance between its empirical
//! c.d.f. and any continuous unimodal c.d.f. It is computed exactly by the
//! greatest-convex-minorant / least-concave-majorant iteration of Hartigan &
//! Hartigan (1985), which runs in linear time on sorted input.
//!
//! P-values come from a parametric bootstrap against the uniform null:
//! `p = (1 + #{b : dip(U_b) >= dip}) / (B + 1)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

/// Smallest sample the dip machinery accepts.
pub const MIN_SAMPLE: usize = 4;

/// Default number of bootstrap replicates.
pub const DEFAULT_BOOTSTRAP: usize = 1000;

/// A validated, ascending, finite unidimensional sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample(Vec<f64>);

impl SortedSample {
    /// Validates an already sorted sample.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_len(values.len())?;
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if let Some(index) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::NotSorted { index: index + 1 });
        }
        Ok(Self(values))
    }

    /// Sorts and validates an arbitrary sample.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        check_len(values.len())?;
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

fn check_len(got: usize) -> Result<()> {
    if got < MIN_SAMPLE {
        return Err(Error::SampleTooSmall {
            min: MIN_SAMPLE,
            got,
        });
    }
    Ok(())
}

/// The dip and the modal interval it was attained on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipResult {
    pub dip: f64,
    /// Inclusive `(lo, hi)` indices into the sorted sample.
    pub modal_interval: (usize, usize),
}

/// A dip together with its bootstrap p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipTest {
    pub dip: f64,
    pub p_value: f64,
    pub n_bootstrap: usize,
}

/// Exact dip statistic of a sorted sample.
pub fn dip_statistic(sample: &SortedSample) -> DipResult {
    hartigan_dip(sample.values())
}

/// Dip of a sorted slice. Callers guarantee `x` is sorted, finite and has at
/// least one element.
pub(crate) fn hartigan_dip(x: &[f64]) -> DipResult {
    let n = x.len();
    let mut low = 1usize;
    let mut high = n;
    // Work in units of 1/(2n) until the very end.
    let mut dip = 1.0f64;
    if n < 2 || x[n - 1] == x[0] {
        return DipResult {
            dip: dip / (2 * n) as f64,
            modal_interval: (0, n - 1),
        };
    }

    // 1-based views: xs(i) == x[i - 1].
    let xs = |i: usize| x[i - 1];

    // Change points of the convex minorant, right to left.
    let mut mn = vec![0usize; n + 1];
    mn[1] = 1;
    for j in 2..=n {
        mn[j] = j - 1;
        loop {
            let mnj = mn[j];
            let mnmnj = mn[mnj];
            if mnj == 1
                || (xs(j) - xs(mnj)) * ((mnj - mnmnj) as f64)
                    < (xs(mnj) - xs(mnmnj)) * (j - mnj) as f64
            {
                break;
            }
            mn[j] = mnmnj;
        }
    }

    // Change points of the concave majorant, left to right.
    let mut mj = vec![0usize; n + 1];
    mj[n] = n;
    for k in (1..n).rev() {
        mj[k] = k + 1;
        loop {
            let mjk = mj[k];
            let mjmjk = mj[mjk];
            if mjk == n
                || (xs(k) - xs(mjk)) * (mjk as f64 - mjmjk as f64)
                    < (xs(mjk) - xs(mjmjk)) * (k as f64 - mjk as f64)
            {
                break;
            }
            mj[k] = mjmjk;
        }
    }

    let mut gcm = vec![0usize; n + 2];
    let mut lcm = vec![0usize; n + 2];

    loop {
        gcm[1] = high;
        let mut i = 1;
        while gcm[i] > low {
            gcm[i + 1] = mn[gcm[i]];
            i += 1;
        }
        let l_gcm = i;
        let mut ig = l_gcm;
        let mut ix = ig - 1;

        lcm[1] = low;
        let mut i = 1;
        while lcm[i] < high {
            lcm[i + 1] = mj[lcm[i]];
            i += 1;
        }
        let l_lcm = i;
        let mut ih = l_lcm;
        let mut iv = 2;

        // Largest distance between the minorant and the majorant on [low, high].
        let mut d = 0.0f64;
        if l_gcm != 2 || l_lcm != 2 {
            loop {
                let gcmix = gcm[ix];
                let lcmiv = lcm[iv];
                if gcmix > lcmiv {
                    let gcmi1 = gcm[ix + 1];
                    let dx = (lcmiv as f64 - gcmi1 as f64 + 1.0)
                        - (xs(lcmiv) - xs(gcmi1)) * (gcmix - gcmi1) as f64
                            / (xs(gcmix) - xs(gcmi1));
                    iv += 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv - 1;
                    }
                } else {
                    let lcmiv1 = lcm[iv - 1];
                    let dx = (xs(gcmix) - xs(lcmiv1)) * (lcmiv - lcmiv1) as f64
                        / (xs(lcmiv) - xs(lcmiv1))
                        - (gcmix as f64 - lcmiv1 as f64 - 1.0);
                    ix -= 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv;
                    }
                }
                if ix < 1 {
                    ix = 1;
                }
                if iv > l_lcm {
                    iv = l_lcm;
                }
                if gcm[ix] == lcm[iv] {
                    break;
                }
            }
        } else {
            d = 1.0;
        }

        if d < dip {
            break;
        }

        // Dip of the convex minorant on [gcm[ig], low].
        let mut dip_l = 0.0f64;
        for j in ig..l_gcm {
            let mut max_t = 1.0f64;
            let jb = gcm[j + 1];
            let je = gcm[j];
            if je - jb > 1 && xs(je) != xs(jb) {
                let c = (je - jb) as f64 / (xs(je) - xs(jb));
                for jj in jb..=je {
                    let t = (jj - jb + 1) as f64 - (xs(jj) - xs(jb)) * c;
                    if max_t < t {
                        max_t = t;
                    }
                }
            }
            if dip_l < max_t {
                dip_l = max_t;
            }
        }

        // Dip of the concave majorant on [high, lcm[ih]].
        let mut dip_u = 0.0f64;
        for j in ih..l_lcm {
            let mut max_t = 1.0f64;
            let jb = lcm[j];
            let je = lcm[j + 1];
            if je - jb > 1 && xs(je) != xs(jb) {
                let c = (je - jb) as f64 / (xs(je) - xs(jb));
                for jj in jb..=je {
                    let t = (xs(jj) - xs(jb)) * c - (jj as f64 - jb as f64 - 1.0);
                    if max_t < t {
                        max_t = t;
                    }
                }
            }
            if dip_u < max_t {
                dip_u = max_t;
            }
        }

        let dip_new = dip_u.max(dip_l);
        if dip < dip_new {
            dip = dip_new;
        }

        // Without this check the iteration can cycle forever.
        if low == gcm[ig] && high == lcm[ih] {
            break;
        }
        low = gcm[ig];
        high = lcm[ih];
    }

    DipResult {
        dip: dip / (2 * n) as f64,
        modal_interval: (low - 1, high - 1),
    }
}

/// Sorted bootstrap dips of `B` uniform samples of a fixed size.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    sample_size: usize,
    dips: Vec<f64>,
}

impl NullDistribution {
    /// Draws `n_bootstrap` uniform(0,1) samples of size `sample_size` from
    /// `rng` and records their dips.
    pub fn sample<R: Rng + ?Sized>(sample_size: usize, n_bootstrap: usize, rng: &mut R) -> Self {
        assert!(sample_size >= 1, "null sample size must be positive");
        let mut buf = vec![0.0f64; sample_size];
        let mut dips: Vec<f64> = (0..n_bootstrap)
            .map(|_| {
                buf.iter_mut().for_each(|v| *v = rng.random::<f64>());
                buf.sort_unstable_by(f64::total_cmp);
                hartigan_dip(&buf).dip
            })
            .collect();
        dips.sort_unstable_by(f64::total_cmp);
        Self { sample_size, dips }
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    pub fn n_bootstrap(&self) -> usize {
        self.dips.len()
    }

    pub fn dips(&self) -> &[f64] {
        &self.dips
    }

    /// `(1 + #{null dips >= dip}) / (B + 1)`.
    pub fn p_value(&self, dip: f64) -> f64 {
        let below = self.dips.partition_point(|&d| d < dip);
        let at_least = self.dips.len() - below;
        (1 + at_least) as f64 / (self.dips.len() + 1) as f64
    }
}

/// Dip of `sample` with a bootstrap p-value drawn from `rng`.
pub fn dip_pvalue<R: Rng + ?Sized>(
    sample: &SortedSample,
    n_bootstrap: usize,
    rng: &mut R,
) -> Result<DipTest> {
    if n_bootstrap == 0 {
        return Err(crate::error::invalid("n_bootstrap", "must be at least 1"));
    }
    let dip = dip_statistic(sample).dip;
    let null = NullDistribution::sample(sample.len(), n_bootstrap, rng);
    Ok(DipTest {
        dip,
        p_value: null.p_value(dip),
        n_bootstrap,
    })
}

type NullKey = (usize, usize, u64);

fn null_cache() -> &'static Mutex<HashMap<NullKey, Arc<NullDistribution>>> {
    static CACHE: OnceLock<Mutex<HashMap<NullKey, Arc<NullDistribution>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Process-wide memoized null distribution for `(sample_size, n_bootstrap,
/// seed)`. The stream is derived from `seed` and `sample_size` only, so the
/// result does not depend on which caller populated the cache first.
pub fn cached_null(sample_size: usize, n_bootstrap: usize, seed: u64) -> Arc<NullDistribution> {
    let key = (sample_size, n_bootstrap, seed);
    if let Some(hit) = null_cache().lock().expect("null cache poisoned").get(&key) {
        return Arc::clone(hit);
    }
    let mut rng = seed::substream(seed, &[sample_size as u64, n_bootstrap as u64]);
    let fresh = Arc::new(NullDistribution::sample(sample_size, n_bootstrap, &mut rng));
    let mut cache = null_cache().lock().expect("null cache poisoned");
    Arc::clone(cache.entry(key).or_insert(fresh))
}
