use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PackingInstance;
use crate::error::{structural, Result};
use crate::rational::{int, ratio, zero, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    MultiUnit,
    Gap,
    SparseRandom,
}

impl std::str::FromStr for InstanceKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multi-unit" => Ok(InstanceKind::MultiUnit),
            "gap" => Ok(InstanceKind::Gap),
            "sparse-random" => Ok(InstanceKind::SparseRandom),
            _ => Err(crate::Error::Parse(format!("unknown instance kind {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackingGenParams {
    pub n: usize,
    /// Options per player (services for GAP).
    pub k: usize,
    /// Units for multi-unit instances.
    pub m: usize,
    /// Rows for sparse-random instances.
    pub l: usize,
    /// Column sparsity for sparse-random instances.
    pub d: usize,
}

impl Default for PackingGenParams {
    fn default() -> Self {
        Self { n: 3, k: 2, m: 2, l: 3, d: 2 }
    }
}

/// Random instance from one of the standard families; deterministic in `seed`.
pub fn gen_instance(kind: InstanceKind, p: &PackingGenParams, seed: u64) -> Result<PackingInstance> {
    if p.n == 0 {
        return Err(structural("need at least one player"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        InstanceKind::MultiUnit => {
            if p.m == 0 {
                return Err(structural("multi-unit instances need m >= 1"));
            }
            let values = (0..p.n)
                .map(|_| {
                    let mut acc = 0;
                    (0..p.m)
                        .map(|_| {
                            acc += rng.gen_range(0..=5);
                            int(acc)
                        })
                        .collect()
                })
                .collect();
            let row: Vec<Rational> = (1..=p.m as i64).map(int).collect();
            PackingInstance::new(values, vec![vec![row; p.n]], vec![int(p.m as i64)])
        }
        InstanceKind::Gap => {
            if p.k == 0 {
                return Err(structural("GAP instances need k >= 1"));
            }
            let values = random_values(&mut rng, p.n, p.k);
            let mut a = vec![vec![vec![zero(); p.k]; p.n]; p.k];
            for i in 0..p.n {
                for s in 0..p.k {
                    a[s][i][s] = int(rng.gen_range(1..=4));
                }
            }
            let c = (0..p.k).map(|_| int(rng.gen_range(4..=3 + 2 * p.n as i64))).collect();
            PackingInstance::new(values, a, c)
        }
        InstanceKind::SparseRandom => {
            if p.k == 0 || p.d == 0 || p.d > p.l {
                return Err(structural("sparse-random instances need k >= 1 and 1 <= d <= L"));
            }
            let values = random_values(&mut rng, p.n, p.k);
            let mut a = vec![vec![vec![zero(); p.k]; p.n]; p.l];
            let mut rows: Vec<usize> = (0..p.l).collect();
            for i in 0..p.n {
                for opt in 0..p.k {
                    rows.shuffle(&mut rng);
                    for &row in &rows[..p.d] {
                        a[row][i][opt] = int(rng.gen_range(1..=3));
                    }
                }
            }
            let c = (0..p.l).map(|_| int(rng.gen_range(2..=6))).collect();
            PackingInstance::new(values, a, c)
        }
    }
}

fn random_values(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<Rational>> {
    (0..n).map(|_| (0..k).map(|_| int(rng.gen_range(0..=10))).collect()).collect()
}

#[derive(Clone, Debug)]
pub struct MultiunitCounterexample {
    pub instance: PackingInstance,
    pub bids: Vec<Vec<Rational>>,
    pub optimum: Rational,
    pub equilibrium_welfare: Rational,
    pub ratio: Rational,
}

/// `m` units and `m + 2` bidders. Bidders `0..m` value any nonzero number of
/// units at 1; the last two value exactly all `m` units at 2. Option `k`
/// means `k + 1` units. In the equilibrium profile the small bidders bid 0
/// and the two big bidders bid truthfully.
pub fn gen_multiunit_counterexample(m: usize) -> Result<MultiunitCounterexample> {
    if m < 2 {
        return Err(structural("counterexample needs m >= 2"));
    }
    let n = m + 2;
    let mut values = vec![vec![int(1); m]; m];
    let mut big = vec![zero(); m];
    big[m - 1] = int(2);
    values.push(big.clone());
    values.push(big);
    let row: Vec<Rational> = (1..=m as i64).map(int).collect();
    let instance = PackingInstance::new(values.clone(), vec![vec![row; n]], vec![int(m as i64)])?;
    let mut bids = vec![vec![zero(); m]; m];
    bids.push(values[m].clone());
    bids.push(values[m + 1].clone());
    Ok(MultiunitCounterexample {
        instance,
        bids,
        optimum: int(m as i64),
        equilibrium_welfare: int(2),
        ratio: ratio(m as i64, 2),
    })
}
