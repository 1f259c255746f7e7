//! Acceptance checks shared by `qcm selftest` and the `acceptance` test target.
//!
//! Each check is deterministic: random operands come from ChaCha8 streams
//! seeded from [`SELFTEST_SEED`].

use std::fmt;
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{self, Real1, Real4};
use crate::densop::{
    gate_cnot, gate_mean_unitary, gate_not, gate_sigma2, random_qubit, unitarity_defect,
    DensityMatrix, Operator, PermutationGate, RegisterIndex,
};
use crate::error::Result;
use crate::estimate::{self, derive_seed, wilson_interval, z_for_level};
use crate::expr::{self, EvalOptions};
use crate::qcm::{EnsembleStore, EventFilter};
use crate::scalar::{Scalar, Wide};

pub const SELFTEST_SEED: u64 = 0x51_6d_5e_ed;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub millis: u128,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{:>2}] {}: {} ({} ms)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.millis
        )
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(u8, &str, Check); 11] = [
    (1, "gate algebra", gate_algebra),
    (
        2,
        "diagonalization keeps both marginal diagonals",
        diagonalization,
    ),
    (3, "single-ensemble circuits", real1_circuits),
    (4, "balanced-pair circuits", real2_circuits),
    (5, "four-ensemble field operations", real4_field),
    (6, "fixed circuits", fixed_circuits),
    (7, "powering", powering),
    (
        8,
        "negative control without diagonalization",
        negative_control,
    ),
    (9, "statistical readout", statistical_readout),
    (10, "decomposability", decomposability),
    (11, "degradation without renormalization", renorm_off_chain),
];

/// Runs one criterion by number.
pub fn run(id: u8) -> Option<CriterionResult> {
    CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|&(id, name, check)| {
            let start = Instant::now();
            let (passed, detail) = match check() {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CriterionResult {
                id,
                name,
                passed,
                detail,
                millis: start.elapsed().as_millis(),
            }
        })
}

/// Runs every criterion, one thread each, and returns results in order.
pub fn run_all() -> Vec<CriterionResult> {
    std::thread::scope(|s| {
        let handles: Vec<_> = CRITERIA
            .iter()
            .map(|c| s.spawn(move || run(c.0).expect("listed criterion")))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("criterion thread"))
            .collect()
    })
}

fn rng_for(criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(SELFTEST_SEED, criterion))
}

fn is_permutation_matrix<T: Scalar>(m: &[Complex<T>], dim: usize) -> bool {
    let exact = m
        .iter()
        .all(|z| z.im == T::zero() && (z.re == T::zero() || z.re == T::one()));
    let ones =
        |it: &mut dyn Iterator<Item = &Complex<T>>| it.filter(|z| z.re == T::one()).count() == 1;
    exact
        && (0..dim).all(|r| ones(&mut m[r * dim..(r + 1) * dim].iter()))
        && (0..dim).all(|c| ones(&mut m.iter().skip(c).step_by(dim)))
}

fn gate_algebra() -> Result<(bool, String)> {
    let classical = [
        gate_not(),
        gate_cnot(),
        gate_sigma2(),
        PermutationGate::identity(1),
        PermutationGate::identity(2),
    ];
    let mut worst = 0.0f64;
    let mut ok = true;
    for g in &classical {
        let m = Operator::<f64>::matrix(g);
        worst = worst.max(unitarity_defect(&m, Operator::<f64>::arity(g)));
        ok &= is_permutation_matrix(&m, 1 << Operator::<f64>::arity(g));
    }
    let mean = gate_mean_unitary::<f64>();
    worst = worst.max(unitarity_defect(&mean.matrix(), 2));
    let mean_wide = gate_mean_unitary::<Wide>();
    worst = worst.max(unitarity_defect(&mean_wide.matrix(), 2));
    let passed = ok && worst <= 1e-12;
    Ok((
        passed,
        format!("max ‖U†U−I‖ = {worst:.2e}; classical gates are 0/1 permutations: {ok}"),
    ))
}

fn diagonalization() -> Result<(bool, String)> {
    let mut rng = rng_for(2);
    let mut store = EnsembleStore::<f64>::new();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let s = random_qubit(&mut rng);
        let expected = DensityMatrix::from_diagonal(&[s.probability(0), s.probability(1)])?;
        let a = store.load(s)?;
        let b = store.fresh_zero();
        let (oa, ob) = store.apply2(&gate_cnot(), a, b)?;
        worst = worst
            .max(store.state(oa)?.max_abs_diff(&expected))
            .max(store.state(ob)?.max_abs_diff(&expected));
    }
    Ok((
        worst <= 1e-12,
        format!("1000 states, max deviation {worst:.2e}"),
    ))
}

fn real1_circuits() -> Result<(bool, String)> {
    let mut rng = rng_for(3);
    let mut store = EnsembleStore::<f64>::new();
    let mut worst = [0.0f64; 3];
    for _ in 0..1000 {
        let (x, y): (f64, f64) = (rng.gen(), rng.gen());
        let want = [
            (x + y) / 2.0,
            1.0 - (x + y) + 2.0 * x * y,
            x * y / 2.0 + 0.25,
        ];
        type Op = fn(&mut EnsembleStore<f64>, Real1, Real1) -> Result<Real1>;
        let ops: [Op; 3] = [arith::sigma1, arith::sigma2, arith::mu1];
        for (k, op) in ops.iter().enumerate() {
            let a = arith::prepare_r1(&mut store, x)?;
            let b = arith::prepare_r1(&mut store, y)?;
            let out = op(&mut store, a, b)?;
            let got = arith::r1(&store, out)?;
            worst[k] = worst[k].max((got - want[k]).abs());
        }
    }
    let passed = worst.iter().all(|&w| w <= 1e-12);
    Ok((
        passed,
        format!(
            "1000 pairs, max error σ1 {:.2e}, σ2 {:.2e}, μ1 {:.2e}",
            worst[0], worst[1], worst[2]
        ),
    ))
}

fn real2_circuits() -> Result<(bool, String)> {
    let mut rng = rng_for(4);
    let mut store = EnsembleStore::<f64>::new();
    let (mut w_mean, mut w_mul) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let x = rng.gen_range(-1.0..=1.0);
        let y = rng.gen_range(-1.0..=1.0);
        let (a, b) = (
            arith::encode_real2(&mut store, x)?,
            arith::encode_real2(&mut store, y)?,
        );
        let m = arith::sigma_r2(&mut store, a, b)?;
        w_mean = w_mean.max((arith::r2(&store, m)? - (x + y) / 2.0).abs());
        let (a, b) = (
            arith::encode_real2(&mut store, x)?,
            arith::encode_real2(&mut store, y)?,
        );
        let p = arith::mu2(&mut store, a, b)?;
        w_mul = w_mul.max((arith::r2(&store, p)? - x * y / 4.0).abs());
    }
    Ok((
        w_mean <= 1e-12 && w_mul <= 1e-12,
        format!("1000 pairs, max error σ {w_mean:.2e}, μ2 {w_mul:.2e}"),
    ))
}

type BinOp = fn(&mut EnsembleStore<f64>, Real4, Real4) -> Result<Real4>;

type Oracle = fn(f64, f64) -> f64;

const FIELD_OPS: [(&str, BinOp, Oracle); 4] = [
    ("add", arith::add_r4, |x, y| x + y),
    ("sub", arith::sub_r4, |x, y| x - y),
    ("mul", arith::mul_r4, |x, y| x * y),
    ("div", arith::div_r4, |x, y| x / y),
];

fn real4_field() -> Result<(bool, String)> {
    let mut rng = rng_for(5);
    let mut store = EnsembleStore::<f64>::new();
    let mut worst = [0.0f64; 4];
    for _ in 0..1000 {
        let x = rng.gen_range(-10.0..=10.0);
        let mut y: f64 = rng.gen_range(-10.0..=10.0);
        while y.abs() < 1e-3 {
            y = rng.gen_range(-10.0..=10.0);
        }
        for (k, (_, op, oracle)) in FIELD_OPS.iter().enumerate() {
            let a = arith::encode_real4(&mut store, x)?;
            let b = arith::encode_real4(&mut store, y)?;
            let out = op(&mut store, a, b)?;
            let got = arith::r4(&store, out)?;
            let want = oracle(x, y);
            worst[k] = worst[k].max((got - want).abs() / want.abs().max(f64::MIN_POSITIVE));
        }
    }
    let passed = worst.iter().all(|&w| w <= 1e-9);
    let detail = FIELD_OPS
        .iter()
        .zip(worst)
        .map(|((name, ..), w)| format!("{name} {w:.2e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((passed, format!("1000 pairs, max relative error {detail}")))
}

fn fixed_circuits() -> Result<(bool, String)> {
    type Probe = fn(&mut EnsembleStore<f64>, f64, f64) -> Result<usize>;
    let probes: [(&str, Probe); 12] = [
        ("sigma1", |s, x, y| {
            let (a, b) = (
                arith::prepare_r1(s, x.abs() / 10.0)?,
                arith::prepare_r1(s, y.abs() / 10.0)?,
            );
            let count = s.gate_count(&EventFilter::physical());
            arith::sigma1(s, a, b)?;
            Ok(s.gate_count(&EventFilter::physical()) - count)
        }),
        ("sigma2", |s, x, y| {
            let (a, b) = (
                arith::prepare_r1(s, x.abs() / 10.0)?,
                arith::prepare_r1(s, y.abs() / 10.0)?,
            );
            let count = s.gate_count(&EventFilter::physical());
            arith::sigma2(s, a, b)?;
            Ok(s.gate_count(&EventFilter::physical()) - count)
        }),
        ("mu1", |s, x, y| {
            let (a, b) = (
                arith::prepare_r1(s, x.abs() / 10.0)?,
                arith::prepare_r1(s, y.abs() / 10.0)?,
            );
            let count = s.gate_count(&EventFilter::physical());
            arith::mu1(s, a, b)?;
            Ok(s.gate_count(&EventFilter::physical()) - count)
        }),
        ("sigma_r2", |s, x, y| {
            let (a, b) = (
                arith::encode_real2(s, x / 10.0)?,
                arith::encode_real2(s, y / 10.0)?,
            );
            let count = s.gate_count(&EventFilter::physical());
            arith::sigma_r2(s, a, b)?;
            Ok(s.gate_count(&EventFilter::physical()) - count)
        }),
        ("mu2", |s, x, y| {
            let (a, b) = (
                arith::encode_real2(s, x / 10.0)?,
                arith::encode_real2(s, y / 10.0)?,
            );
            let count = s.gate_count(&EventFilter::physical());
            arith::mu2(s, a, b)?;
            Ok(s.gate_count(&EventFilter::physical()) - count)
        }),
        ("mean_r4", |s, x, y| real4_probe(s, x, y, arith::mean_r4)),
        ("add_r4", |s, x, y| real4_probe(s, x, y, arith::add_r4)),
        ("sub_r4", |s, x, y| real4_probe(s, x, y, arith::sub_r4)),
        ("mul_r4", |s, x, y| real4_probe(s, x, y, arith::mul_r4)),
        ("div_r4", |s, x, y| real4_probe(s, x, y, arith::div_r4)),
        ("neg_r4", |s, x, y| {
            real4_probe(s, x, y, |_, a, _| Ok(arith::neg_r4(a)))
        }),
        ("pow_r4(·, 5)", |s, x, y| {
            real4_probe(s, x, y, |s, a, _| arith::pow_r4(s, a, 5, false))
        }),
    ];

    let mut rng = rng_for(6);
    let mut failures = Vec::new();
    let mut counts = Vec::new();
    for (name, probe) in probes {
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..100 {
            let x = rng.gen_range(-10.0..=10.0);
            let mut y: f64 = rng.gen_range(-10.0..=10.0);
            while y.abs() < 1e-3 {
                y = rng.gen_range(-10.0..=10.0);
            }
            let mut store = EnsembleStore::<f64>::new();
            seen.insert(probe(&mut store, x, y)?);
        }
        if seen.len() != 1 {
            failures.push(format!("{name} {seen:?}"));
        }
        counts.push(format!(
            "{name}={}",
            seen.iter().next().copied().unwrap_or_default()
        ));
    }
    let detail = if failures.is_empty() {
        format!("100 operand pairs each: {}", counts.join(" "))
    } else {
        format!("varying counts: {}", failures.join("; "))
    };
    Ok((failures.is_empty(), detail))
}

fn real4_probe(store: &mut EnsembleStore<f64>, x: f64, y: f64, op: BinOp) -> Result<usize> {
    let a = arith::encode_real4(store, x)?;
    let b = arith::encode_real4(store, y)?;
    let count = store.gate_count(&EventFilter::physical());
    op(store, a, b)?;
    Ok(store.gate_count(&EventFilter::physical()) - count)
}

fn powering() -> Result<(bool, String)> {
    let mut store = EnsembleStore::<Wide>::with_den_floor(1e-60)?;
    let x = arith::encode_real4(&mut store, 1.1)?;
    let y = arith::pow_r4(&mut store, x, 1024, true)?;
    let muls = store.op_count("mul_r4");
    let got = arith::r4(&store, y)?;
    let want = 1.1f64.powi(1024);
    let rel = (got - want).abs() / want;
    Ok((
        muls <= 11 && rel <= 1e-6,
        format!(
            "{muls} mul_r4 calls, 1.1^1024 = {got:.6e}, relative error {rel:.2e} ({} scalar)",
            Wide::NAME
        ),
    ))
}

fn negative_control() -> Result<(bool, String)> {
    let mut store = EnsembleStore::<f64>::new();
    let mean = gate_mean_unitary::<f64>();
    let mut outcomes = Vec::new();
    let mut control_ok = true;
    for (p, q) in [(0.5, 0.5), (0.3, 0.7), (0.2, 0.9)] {
        let a = store.prepare(p)?;
        let b = store.prepare(q)?;
        let (out, rest) = store.apply2(&mean, a, b)?;
        store.discard(rest)?;
        let got = store.r1(out)?;
        outcomes.push((p, q, got, (got - (p + q) / 2.0).abs()));

        let (a, b) = (
            arith::prepare_r1(&mut store, p)?,
            arith::prepare_r1(&mut store, q)?,
        );
        let out = arith::sigma1(&mut store, a, b)?;
        let diag = arith::r1(&store, out)?;
        control_ok &= (diag - (p + q) / 2.0).abs() <= 1e-12;
    }
    let deviates = outcomes.iter().any(|o| o.3 > 1e-6);
    let detail = outcomes
        .iter()
        .map(|(p, q, got, dev)| format!("({p}, {q}) → {got:.6} (off by {dev:.3})"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((
        deviates && control_ok,
        format!("{detail}; diagonalized circuit exact: {control_ok}"),
    ))
}

fn statistical_readout() -> Result<(bool, String)> {
    const TRIALS: u64 = 10_000;
    const N: u64 = 1000;
    let mut store = EnsembleStore::<f64>::new();
    let a = store.prepare(0.3)?;
    let z = z_for_level(0.95)?;
    let mut covered = 0u64;
    for t in 0..TRIALS {
        let s = estimate::sample(&store, a, N, derive_seed(SELFTEST_SEED ^ 9, t))?;
        let (lo, hi) = wilson_interval(s.ones, s.shots, z);
        covered += u64::from(lo <= 0.3 && 0.3 <= hi);
    }
    let coverage = covered as f64 / TRIALS as f64;
    let coverage_ok = (0.935..=0.965).contains(&coverage);

    let shots = 1_000_000;
    let x = arith::encode_real4(&mut store, 2.0)?;
    let mut p = [0.0; 4];
    for (slot, id) in p.iter_mut().zip(x.ids()) {
        *slot = store.r1(id)?;
    }
    let (_, true_se, _) = estimate::delta_ratio(p, shots);
    let est = estimate::estimate_real4(&store, x, shots, derive_seed(SELFTEST_SEED, 90), 0.95)?;
    let k = (est.point - 2.0).abs() / true_se;
    Ok((
        coverage_ok && k <= 3.0,
        format!(
            "Wilson coverage {:.2}% over {TRIALS} trials; real4 estimate {:.5} is {k:.2} SE (SE {true_se:.2e}) from 2",
            coverage * 100.0,
            est.point
        ),
    ))
}

fn decomposability() -> Result<(bool, String)> {
    let mut rng = rng_for(10);
    let mut products_ok = true;
    for _ in 0..100 {
        let (a, b, c) = (
            random_qubit(&mut rng),
            random_qubit(&mut rng),
            random_qubit(&mut rng),
        );
        let pair = a.tensor(&b)?;
        products_ok &=
            pair.is_decomposable(&[RegisterIndex::new([0])?, RegisterIndex::new([1])?], 1e-12)?;
        let triple = pair.tensor(&c)?;
        products_ok &= triple.is_decomposable(
            &[RegisterIndex::new([0, 1])?, RegisterIndex::new([2])?],
            1e-12,
        )?;
        products_ok &= triple.is_decomposable(
            &[
                RegisterIndex::new([0])?,
                RegisterIndex::new([1])?,
                RegisterIndex::new([2])?,
            ],
            1e-12,
        )?;
    }
    let bell = DensityMatrix::<f64>::pure_qubit(0.5)?
        .tensor(&DensityMatrix::classical(&[false])?)?
        .conjugate(&gate_cnot(), &RegisterIndex::all(2))?;
    let split = bell.decompose(&[RegisterIndex::new([0])?, RegisterIndex::new([1])?], 1e-3)?;
    Ok((
        products_ok && !split.decomposable,
        format!(
            "300 product states decomposable: {products_ok}; Bell state deviation {:.3} (rejected: {})",
            split.max_deviation, !split.decomposable
        ),
    ))
}

fn renorm_off_chain() -> Result<(bool, String)> {
    let literals: Vec<String> = (0..9)
        .map(|i| if i % 2 == 0 { "1.5" } else { "0.75" }.to_string())
        .collect();
    let text = literals.join(" * ");
    let e = expr::parse(&text)?;
    let mut store = EnsembleStore::<f64>::new();
    let initial = literals
        .iter()
        .map(|l| {
            let x = arith::encode_real4(&mut store, l.parse().expect("literal"))?;
            let (n, d) = arith::component_magnitudes(&store, x)?;
            Ok(n.max(d))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let report = expr::evaluate(
        &e,
        &mut store,
        &EvalOptions {
            renorm: false,
            ..EvalOptions::default()
        },
    )?;
    let bound = initial * 4f64.powi(-8);
    let shrunk = report.num_magnitude < bound && report.den_magnitude < bound;
    Ok((
        shrunk && report.rel_err <= 1e-6 && report.renorms == 0,
        format!(
            "depth {}: |num| {:.3e}, |den| {:.3e} vs bound {bound:.3e}; value {:.9} relative error {:.2e}",
            e.depth(),
            report.num_magnitude,
            report.den_magnitude,
            report.circuit,
            report.rel_err
        ),
    ))
}
