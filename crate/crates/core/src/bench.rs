//! Accuracy experiment: max-norm error of each algorithm against an exact
//! product, on seeded standard-normal matrices.
//!
//! Matrices come from ChaCha8 seeded with a 64-bit stream seed, sampled with
//! `rand_distr::StandardNormal` in row-major order. The cell seed for
//! `(n, trial)` is `splitmix64` applied to the master seed mixed with `n` and
//! `trial`; `A` and `B` use the cell seed split again with tags 0 and 1.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_bigint::{BigInt, BigUint, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{resolve, SchemeBundle};
use crate::dyadic::{decompose_f64, Dyadic};
use crate::error::{FmmError, Result};
use crate::matrix::{classical_multiply, Matrix};
use crate::recursion::{multiply, multiply_alt, RecursionPlan};

pub const CLASSICAL: &str = "classical";

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of one `(n, trial)` cell.
pub fn cell_seed(master: u64, n: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ n as u64) ^ trial as u64)
}

pub fn random_matrix(n: usize, stream_seed: u64) -> Matrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
    Matrix::from_fn(n, n, |_, _| rng.sample(StandardNormal))
}

pub fn cell_operands(master: u64, n: usize, trial: usize) -> (Matrix<f64>, Matrix<f64>) {
    let s = cell_seed(master, n, trial);
    (random_matrix(n, splitmix64(s)), random_matrix(n, splitmix64(s ^ 1)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceMode {
    #[default]
    Exact,
    DoubleDouble,
}

/// Unpacked float: `(-1)^neg * mag * 2^exp`, `mag == 0` for zero.
#[derive(Clone, Copy)]
struct Unpacked {
    mag: u64,
    exp: i32,
    neg: bool,
}

fn unpack(x: f64) -> Result<Unpacked> {
    if !x.is_finite() {
        return Err(FmmError::NonFinite);
    }
    if x == 0.0 {
        return Ok(Unpacked { mag: 0, exp: 0, neg: false });
    }
    let (m, e) = decompose_f64(x);
    Ok(Unpacked {
        mag: m.unsigned_abs(),
        exp: e,
        neg: m < 0,
    })
}

/// Bit 0 of limb 0 has weight `2^-OFFSET`, the smallest product of two floats.
const OFFSET: i32 = 2148;
const LIMBS: usize = 136;
const RENORMALIZE_EVERY: u32 = 1 << 19;

/// Fixed-point accumulator wide enough to hold any sum of float products
/// exactly. Limbs carry 32 bits each but are kept in `i64` so carries can be
/// deferred.
struct Accumulator {
    limbs: [i64; LIMBS],
    lo: usize,
    hi: usize,
    pending: u32,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            limbs: [0; LIMBS],
            lo: LIMBS,
            hi: 0,
            pending: 0,
        }
    }

    fn clear(&mut self) {
        if self.lo < LIMBS {
            self.limbs[self.lo..=self.hi].fill(0);
        }
        self.lo = LIMBS;
        self.hi = 0;
        self.pending = 0;
    }

    fn add_product(&mut self, x: Unpacked, y: Unpacked) {
        if x.mag == 0 || y.mag == 0 {
            return;
        }
        let p = x.mag as u128 * y.mag as u128;
        let shift = (x.exp + y.exp + OFFSET) as usize;
        let (idx, off) = (shift / 32, shift % 32);
        let low = (p & ((1u128 << 96) - 1)) << off;
        let high = ((p >> 96) as i64) << off;
        let sign = if x.neg != y.neg { -1 } else { 1 };
        for j in 0..4 {
            self.limbs[idx + j] += sign * ((low >> (32 * j)) as u32 as i64);
        }
        self.limbs[idx + 3] += sign * high;
        self.lo = self.lo.min(idx);
        self.hi = self.hi.max(idx + 4);
        self.pending += 1;
        if self.pending == RENORMALIZE_EVERY {
            self.propagate();
        }
    }

    /// Carries into two's-complement form; the top limb keeps the sign.
    fn propagate(&mut self) -> bool {
        if self.lo < LIMBS {
            let mut carry = 0i64;
            for limb in &mut self.limbs[self.lo..LIMBS - 1] {
                let v = *limb + carry;
                carry = v >> 32;
                *limb = v & 0xffff_ffff;
            }
            self.limbs[LIMBS - 1] += carry;
            self.hi = LIMBS - 1;
        }
        self.pending = 0;
        debug_assert!((-1..=0).contains(&self.limbs[LIMBS - 1]));
        self.limbs[LIMBS - 1] < 0
    }

    fn value(&mut self) -> Dyadic {
        if self.lo == LIMBS {
            return Dyadic::zero();
        }
        let negative = self.propagate();
        let mut digits: Vec<u32> = self.limbs[self.lo..LIMBS - 1].iter().map(|&l| l as u32).collect();
        if negative {
            // two's complement of the digit string
            let mut carry = 1u64;
            for d in &mut digits {
                let v = (!*d) as u64 + carry;
                *d = v as u32;
                carry = v >> 32;
            }
        }
        let mag = BigUint::from_slice(&digits);
        let sign = if negative { Sign::Minus } else { Sign::Plus };
        Dyadic::normalize(BigInt::from_biguint(sign, mag), 32 * self.lo as i64 - OFFSET as i64)
    }
}

fn unpack_all(m: &Matrix<f64>) -> Result<Vec<Unpacked>> {
    m.as_slice().iter().map(|&x| unpack(x)).collect()
}

/// The exact product of two float matrices.
pub fn exact_product(a: &Matrix<f64>, b: &Matrix<f64>) -> Result<Matrix<Dyadic>> {
    if a.cols() != b.rows() {
        return Err(FmmError::Shape("inner dimensions differ".into()));
    }
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let ua = unpack_all(a)?;
    let ubt = unpack_all(&b.transpose())?;
    let data: Vec<Dyadic> = (0..m)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut acc = Accumulator::new();
            let arow = &ua[i * k..(i + 1) * k];
            (0..n)
                .map(|j| {
                    acc.clear();
                    for (x, y) in arow.iter().zip(&ubt[j * k..(j + 1) * k]) {
                        acc.add_product(*x, *y);
                    }
                    acc.value()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Matrix::from_vec(m, n, data)
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Compensated dot products: each entry as an unevaluated sum `hi + lo`
/// carrying about twice the working precision.
pub fn double_double_product(a: &Matrix<f64>, b: &Matrix<f64>) -> Result<Matrix<(f64, f64)>> {
    if a.cols() != b.rows() {
        return Err(FmmError::Shape("inner dimensions differ".into()));
    }
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let bt = b.transpose();
    let data: Vec<(f64, f64)> = (0..m)
        .into_par_iter()
        .flat_map_iter(|i| {
            let arow = a.row(i);
            let bt = &bt;
            (0..n).map(move |j| {
                let (mut s, mut c) = (0.0f64, 0.0f64);
                for (x, y) in arow.iter().zip(&bt.as_slice()[j * k..(j + 1) * k]) {
                    let p = x * y;
                    let e = x.mul_add(*y, -p);
                    let (t, sigma) = two_sum(s, p);
                    s = t;
                    c += e + sigma;
                }
                let hi = s + c;
                (hi, c - (hi - s))
            })
        })
        .collect();
    Matrix::from_vec(m, n, data)
}

/// Reference product rounded once to floats.
pub fn reference_product(a: &Matrix<f64>, b: &Matrix<f64>, mode: ReferenceMode) -> Result<Matrix<f64>> {
    match mode {
        ReferenceMode::Exact => Ok(exact_product(a, b)?.map(Dyadic::to_f64_rounded)),
        ReferenceMode::DoubleDouble => Ok(double_double_product(a, b)?.map(|&(hi, lo)| hi + lo)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    /// Bundle ids, plus `classical` for the plain triple loop. Bundles with
    /// an alternative basis run in that basis.
    pub schemes: Vec<String>,
    pub seed: u64,
    pub trials: usize,
    pub reference: ReferenceMode,
    /// Base-case threshold; `None` uses 16 for 4x4 blocks and 8 for 2x2.
    pub threshold: Option<usize>,
    /// Levels forced on top of the automatic depth.
    pub extra_levels: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![32, 45, 64, 90, 128, 181, 256, 362, 512],
            schemes: [CLASSICAL, "winograd", "strassen", "acc-4x4x4", "acc-4x4x4-alt"]
                .map(String::from)
                .to_vec(),
            seed: 2025,
            trials: 5,
            reference: ReferenceMode::Exact,
            threshold: None,
            extra_levels: 0,
        }
    }
}

impl BenchConfig {
    pub fn check(&self) -> Result<()> {
        if self.trials == 0 || self.sizes.is_empty() || self.sizes.contains(&0) || self.schemes.is_empty() {
            return Err(FmmError::Invalid("need sizes >= 1, trials >= 1 and at least one scheme".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub scheme: String,
    pub n: usize,
    pub seed: u64,
    pub trial: usize,
    pub max_err: f64,
    pub elapsed: f64,
}

enum Algorithm {
    Classical,
    Dense(SchemeBundle),
    Alt(SchemeBundle),
}

impl Algorithm {
    fn resolve(id: &str, dirs: &[std::path::PathBuf]) -> Result<Self> {
        if id == CLASSICAL {
            return Ok(Algorithm::Classical);
        }
        let b = resolve(id, dirs)?;
        Ok(if b.alt.is_some() { Algorithm::Alt(b) } else { Algorithm::Dense(b) })
    }

    fn run(&self, a: &Matrix<f64>, b: &Matrix<f64>, cfg: &BenchConfig) -> Result<Matrix<f64>> {
        let plan = |bundle: &SchemeBundle| {
            let dims = bundle.scheme.dims();
            let auto = match cfg.threshold {
                Some(t) => RecursionPlan::auto(t),
                None => RecursionPlan::default_for(dims),
            };
            let levels = auto.layout(dims, (a.rows(), a.cols(), b.cols())).levels;
            RecursionPlan {
                levels: Some(levels + cfg.extra_levels),
                ..auto
            }
        };
        match self {
            Algorithm::Classical => classical_multiply(a, b),
            Algorithm::Dense(bundle) => multiply(bundle, a, b, &plan(bundle)),
            Algorithm::Alt(bundle) => multiply_alt(bundle, a, b, &plan(bundle)),
        }
    }
}

pub fn run_bench(cfg: &BenchConfig, scheme_dirs: &[std::path::PathBuf]) -> Result<Vec<BenchRecord>> {
    cfg.check()?;
    let algos: Vec<(String, Algorithm)> = cfg
        .schemes
        .iter()
        .map(|id| Ok((id.clone(), Algorithm::resolve(id, scheme_dirs)?)))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = cfg
        .sizes
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    let per_cell: Vec<Vec<BenchRecord>> = cells
        .par_iter()
        .map(|&(n, trial)| {
            let (a, b) = cell_operands(cfg.seed, n, trial);
            let reference = reference_product(&a, &b, cfg.reference)?;
            algos
                .iter()
                .map(|(id, algo)| {
                    let start = Instant::now();
                    let c = algo.run(&a, &b, cfg)?;
                    let elapsed = start.elapsed().as_secs_f64();
                    Ok(BenchRecord {
                        scheme: id.clone(),
                        n,
                        seed: cell_seed(cfg.seed, n, trial),
                        trial,
                        max_err: c.max_abs_diff(&reference),
                        elapsed,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut records: Vec<BenchRecord> = per_cell.into_iter().flatten().collect();
    records.sort_by(|x, y| (&x.scheme, x.n, x.trial).cmp(&(&y.scheme, y.n, y.trial)));
    Ok(records)
}

pub fn write_csv<W: Write>(records: &[BenchRecord], mut w: W) -> Result<()> {
    writeln!(w, "scheme,n,seed,trial,max_err,elapsed")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{:.16e},{:.16e}",
            r.scheme, r.n, r.seed, r.trial, r.max_err, r.elapsed
        )?;
    }
    Ok(())
}

pub fn write_json<W: Write>(records: &[BenchRecord], w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, records).map_err(|e| FmmError::Io(e.into()))
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median error per `(scheme, n)`.
pub fn median_errors(records: &[BenchRecord]) -> BTreeMap<(String, usize), f64> {
    let mut groups: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry((r.scheme.clone(), r.n)).or_default().push(r.max_err);
    }
    groups.into_iter().map(|(k, mut v)| (k, median(&mut v))).collect()
}

/// Gnuplot script with the medians inlined: log-log error against size.
pub fn write_plot_script(records: &[BenchRecord], path: &Path) -> Result<()> {
    let medians = median_errors(records);
    let mut schemes: Vec<&str> = records.iter().map(|r| r.scheme.as_str()).collect();
    schemes.dedup();
    schemes.sort();
    schemes.dedup();
    let mut s = String::new();
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str("set output 'accuracy.png'\n");
    s.push_str("set logscale xy\nset format y '10^{%L}'\n");
    s.push_str("set xlabel 'n'\nset ylabel 'max-norm error'\n");
    s.push_str("set title 'Numerical accuracy vs size (normal distribution)'\n");
    s.push_str("set key left top\n");
    for (i, id) in schemes.iter().enumerate() {
        s.push_str(&format!("$d{i} << EOD\n"));
        for ((_, n), m) in medians.range((id.to_string(), 0)..=(id.to_string(), usize::MAX)) {
            s.push_str(&format!("{n} {m:.16e}\n"));
        }
        s.push_str("EOD\n");
    }
    let curves: Vec<String> = schemes
        .iter()
        .enumerate()
        .map(|(i, id)| format!("$d{i} using 1:2 with linespoints title '{id}'"))
        .collect();
    s.push_str(&format!("plot {}\n", curves.join(", \\\n     ")));
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps() -> f64 {
        f64::EPSILON / 2.0
    }

    #[test]
    fn random_matrices_are_deterministic() {
        assert_eq!(random_matrix(20, 9), random_matrix(20, 9));
        let (x, y) = (random_matrix(50, 1), random_matrix(50, 2));
        let same = x.as_slice().iter().zip(y.as_slice()).filter(|(a, b)| a == b).count();
        assert!(same * 100 <= 2500);
    }

    #[test]
    fn sample_mean_is_near_zero() {
        let m = random_matrix(512, 77);
        let mean: f64 = m.as_slice().iter().sum::<f64>() / m.as_slice().len() as f64;
        assert!(mean.abs() < 0.02, "{mean}");
    }

    #[test]
    fn accumulator_matches_dyadic_product() {
        let (a, b) = cell_operands(5, 24, 0);
        let exact = classical_multiply(&a.map(|&x| Dyadic::from_f64(x).unwrap()), &b.map(|&x| Dyadic::from_f64(x).unwrap()))
            .unwrap();
        assert_eq!(exact_product(&a, &b).unwrap(), exact);
    }

    #[test]
    fn accumulator_extreme_magnitudes() {
        let tiny = f64::from_bits(1);
        let a = Matrix::from_vec(1, 4, vec![tiny, f64::MAX, -f64::MAX, 3.0]).unwrap();
        let b = Matrix::from_vec(4, 1, vec![tiny, 1.0, 1.0, 0.5]).unwrap();
        let c = exact_product(&a, &b).unwrap();
        assert_eq!(c.get(0, 0), &(&Dyadic::normalize(1, -2148) + &Dyadic::normalize(3, -1)));
        assert_eq!(c.get(0, 0).to_f64_rounded(), 1.5);
        let nan = Matrix::from_vec(1, 1, vec![f64::NAN]).unwrap();
        assert!(matches!(exact_product(&nan, &nan), Err(FmmError::NonFinite)));
    }

    #[test]
    fn accumulator_many_terms_and_negative_sums() {
        let n = 1 << 20;
        let a = Matrix::from_vec(1, n, vec![-1.5; n]).unwrap();
        let b = Matrix::from_vec(n, 1, vec![3.0; n]).unwrap();
        let c = exact_product(&a, &b).unwrap();
        assert_eq!(c.get(0, 0), &Dyadic::from(-(9 * (1i64 << 19))));
    }

    #[test]
    fn integer_inputs_give_integer_product() {
        let a = Matrix::from_fn(4, 4, |i, j| (i as f64) - (j as f64) * 2.0);
        let b = Matrix::from_fn(4, 4, |i, j| (i * j) as f64 + 1.0);
        let want = classical_multiply(&a, &b).unwrap();
        for mode in [ReferenceMode::Exact, ReferenceMode::DoubleDouble] {
            assert_eq!(reference_product(&a, &b, mode).unwrap(), want);
        }
    }

    #[test]
    fn reference_within_classical_bound() {
        let (a, b) = cell_operands(11, 48, 0);
        let r = reference_product(&a, &b, ReferenceMode::Exact).unwrap();
        let c = classical_multiply(&a, &b).unwrap();
        let bound = 48.0 * eps() * a.norm_inf() * b.norm_inf();
        assert!(c.max_abs_diff(&r) <= bound);
    }

    #[test]
    fn exact_and_double_double_agree() {
        let (a, b) = cell_operands(3, 32, 0);
        let exact = exact_product(&a, &b).unwrap();
        let dd = double_double_product(&a, &b).unwrap();
        let mut worst = Dyadic::zero();
        let mut scale = Dyadic::zero();
        for (e, &(hi, lo)) in exact.as_slice().iter().zip(dd.as_slice()) {
            let approx = &Dyadic::from_f64(hi).unwrap() + &Dyadic::from_f64(lo).unwrap();
            worst = worst.max((e - &approx).abs());
            scale = scale.max(e.abs());
        }
        assert!(worst <= scale.shift(-90), "{worst} vs {scale}");
    }

    #[test]
    fn csv_format() {
        let r = BenchRecord {
            scheme: "strassen".into(),
            n: 8,
            seed: 1,
            trial: 0,
            max_err: 1.25e-15,
            elapsed: 0.5,
        };
        let mut out = Vec::new();
        write_csv(&[r], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "scheme,n,seed,trial,max_err,elapsed\nstrassen,8,1,0,1.2500000000000000e-15,5.0000000000000000e-1\n"
        );
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn small_bench_is_sorted_and_complete() {
        let cfg = BenchConfig {
            sizes: vec![20, 8],
            schemes: vec!["strassen".into(), CLASSICAL.into()],
            trials: 2,
            ..BenchConfig::default()
        };
        let recs = run_bench(&cfg, &[]).unwrap();
        assert_eq!(recs.len(), 8);
        assert_eq!(recs[0].scheme, CLASSICAL);
        assert_eq!((recs[0].n, recs[0].trial), (8, 0));
        for r in recs.iter().filter(|r| r.scheme == CLASSICAL) {
            let (a, b) = cell_operands(cfg.seed, r.n, r.trial);
            assert!(r.max_err <= r.n as f64 * eps() * a.norm_inf() * b.norm_inf());
        }
    }
}
