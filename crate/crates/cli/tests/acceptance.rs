//! Acceptance criteria, one line of output per criterion.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use virtsub::algebra::{
    block_algebra_generators, check_bipartition, close_algebra, commutant, is_factor, structure_decompose,
    OperatorAlgebra,
};
use virtsub::bosonic::{build_fock, ccr_residual, mode_entanglement, single_excitation_state, transform_modes};
use virtsub::holonomy::{
    holonomy_algebra_span, holonomy_nonabelian_witness, loop_holonomy, refinement_ladder, LoopPath,
};
use virtsub::io::{read_json, HolonomySpec};
use virtsub::numerics::{hermitian_matrix_basis, identity, kron, max_abs};
use virtsub::ops::{cnot, collective_spin, pauli, pauli_string, swap};
use virtsub::parity::{syndrome_decompose, validate_parity_set};
use virtsub::random::random_unitary;
use virtsub::tps::{entanglement, entangling_power, multiplicative_partitions, tps_distance, EntanglementMeasure, Tps};
use virtsub::{ComplexMatrix, Tolerance, C64};

struct Checks {
    items: Vec<(String, bool)>,
}

impl Checks {
    fn new() -> Self {
        Self { items: Vec::new() }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.items.push((what.into(), ok));
    }

    fn passed(&self) -> bool {
        self.items.iter().all(|(_, ok)| *ok)
    }
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn diag(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |r, c| if r == c { C64::new(values[r], 0.0) } else { C64::new(0.0, 0.0) })
}

fn bell(sign: f64) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = ComplexMatrix::zeros(4, 1);
    v[0] = C64::new(s, 0.0);
    v[3] = C64::new(sign * s, 0.0);
    v
}

fn fixture_algebras() -> Vec<(&'static str, OperatorAlgebra)> {
    let x = pauli('X').unwrap();
    let z = pauli('Z').unwrap();
    let id2 = identity(2);
    vec![
        ("full M_4", close_algebra(4, &hermitian_matrix_basis(4), &tol()).unwrap()),
        ("diagonal on C^4", close_algebra(4, &[diag(&[1.0, 2.0, 3.0, 4.0])], &tol()).unwrap()),
        ("M_2 (x) 1", close_algebra(4, &[kron(&x, &id2), kron(&z, &id2)], &tol()).unwrap()),
        ("collective spin", close_algebra(8, &collective_spin(3), &tol()).unwrap()),
    ]
}

const SHAPES: &[&[(usize, usize)]] = &[
    &[(1, 2)],
    &[(2, 2)],
    &[(1, 3)],
    &[(3, 1)],
    &[(2, 3)],
    &[(1, 1), (1, 1)],
    &[(1, 2), (1, 1)],
    &[(2, 1), (1, 2)],
    &[(1, 2), (2, 1), (1, 1)],
    &[(2, 2), (1, 2)],
    &[(1, 4), (2, 2)],
    &[(1, 1), (1, 1), (1, 1), (1, 1)],
];

/// Random algebra of prescribed shape in a random basis.
fn random_algebra(rng: &mut ChaCha8Rng) -> (Vec<(usize, usize)>, OperatorAlgebra) {
    let shape = SHAPES[rng.random_range(0..SHAPES.len())].to_vec();
    let dim: usize = shape.iter().map(|(n, d)| n * d).sum();
    let u = random_unitary(dim, rng);
    let gens = block_algebra_generators(&shape, &u, rng);
    (shape, close_algebra(dim, &gens, &tol()).unwrap())
}

/// Expected shape in the decomposition's canonical order.
fn canonical(shape: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut s = shape.to_vec();
    s.sort_by(|a, b| (b.0 * b.1, b.1).cmp(&(a.0 * a.1, a.1)));
    s
}

fn criterion_1() -> Checks {
    let mut c = Checks::new();
    let expected: [&[(usize, usize)]; 4] = [&[(1, 4)], &[(1, 1); 4], &[(2, 2)], &[(1, 4), (2, 2)]];
    for ((name, alg), shape) in fixture_algebras().iter().zip(expected) {
        let dec = structure_decompose(alg, &tol(), 7).unwrap();
        c.check(format!("{name}: shape {:?}", dec.shape()), dec.shape() == shape);
        c.check(format!("{name}: residual {:e}", dec.residual), dec.residual < 1e-8);
        let total: usize = dec.shape().iter().map(|(n, d)| n * d).sum();
        c.check(format!("{name}: sum n d = {total}"), total == alg.dim());
    }
    let x = pauli('X').unwrap();
    let z = pauli('Z').unwrap();
    let slot = close_algebra(4, &[kron(&x, &identity(2)), kron(&z, &identity(2))], &tol()).unwrap();
    let other = close_algebra(4, &[kron(&identity(2), &x), kron(&identity(2), &z)], &tol()).unwrap();
    let comm = commutant(&slot, &tol());
    c.check(
        format!("commutant of M_2 (x) 1 is 1 (x) M_2 (residual {:e})", comm.span_residual(&other)),
        comm.same_span(&other, &tol()) && comm.span_residual(&other) < 1e-8,
    );
    c
}

fn criterion_2() -> Checks {
    let mut c = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let mut factor_agree = 0;
    let mut verdict_agree = 0;
    let trials = 24;
    for t in 0..trials {
        let (shape, a) = random_algebra(&mut rng);
        let dec = structure_decompose(&a, &tol(), t).unwrap();
        let f = is_factor(&a, &tol());
        if f.is_factor == (dec.blocks.len() == 1) && dec.shape() == canonical(&shape) {
            factor_agree += 1;
        }
        let single = shape.len() == 1;
        let mut ok = true;
        for (partner, expect) in [(commutant(&a, &tol()), single), (a.clone(), false)] {
            let cert = check_bipartition(&a, &partner, &tol()).unwrap();
            let conj = cert.commuting && cert.join_is_full && cert.a1_is_factor;
            ok &= cert.verdict == conj && cert.verdict == expect;
        }
        if ok {
            verdict_agree += 1;
        }
    }
    c.check(format!("is_factor matches block count on {factor_agree}/{trials}"), factor_agree == trials);
    c.check(format!("bipartition verdict matches its conditions on {verdict_agree}/{trials}"), verdict_agree == trials);
    c
}

fn criterion_3() -> Checks {
    let mut c = Checks::new();
    let mut algebras: Vec<(String, OperatorAlgebra)> =
        fixture_algebras().into_iter().map(|(n, a)| (n.to_string(), a)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    for k in 0..20 {
        let (shape, a) = random_algebra(&mut rng);
        algebras.push((format!("random #{k} {shape:?}"), a));
    }
    let mut worst: f64 = 0.0;
    let mut counts_ok = 0;
    let mut double_ok = 0;
    for (k, (_, a)) in algebras.iter().enumerate() {
        let comm = commutant(a, &tol());
        let back = commutant(&comm, &tol());
        let r = a.span_residual(&back);
        worst = worst.max(r);
        if r < 1e-8 && back.dimension() == a.dimension() {
            double_ok += 1;
        }
        let dec = structure_decompose(a, &tol(), k as u64).unwrap();
        let sum_d2: usize = dec.shape().iter().map(|(_, d)| d * d).sum();
        let sum_n2: usize = dec.shape().iter().map(|(n, _)| n * n).sum();
        if a.dimension() == sum_d2 && comm.dimension() == sum_n2 {
            counts_ok += 1;
        }
    }
    let n = algebras.len();
    c.check(format!("A'' = A on {double_ok}/{n} (worst residual {worst:e})"), double_ok == n);
    c.check(format!("dim A = sum d^2 and dim A' = sum n^2 on {counts_ok}/{n}"), counts_ok == n);
    c
}

fn criterion_4() -> Checks {
    let mut c = Checks::new();
    let t = tol();
    let ps = validate_parity_set(&[pauli_string("XX").unwrap()], &t).unwrap();
    let sd = syndrome_decompose(&ps, &t).unwrap();
    c.check(format!("XX parity dims {:?}", sd.tps.dims()), sd.tps.dims() == [2, 2]);
    let natural = Tps::natural(vec![2, 2]).unwrap();
    let m = EntanglementMeasure::von_neumann(vec![0]);
    for sign in [1.0, -1.0] {
        let e_par = entanglement(&bell(sign), &sd.tps, &m).unwrap();
        let e_nat = entanglement(&bell(sign), &natural, &m).unwrap();
        c.check(format!("Bell({sign:+}) parity TPS {e_par:e} bits"), e_par < 1e-8);
        c.check(format!("Bell({sign:+}) natural TPS {e_nat} bits"), (e_nat - 1.0).abs() <= 1e-8);
    }
    let rep = validate_parity_set(&[pauli_string("ZZI").unwrap(), pauli_string("IZZ").unwrap()], &t).unwrap();
    let sd = syndrome_decompose(&rep, &t).unwrap();
    let dims: Vec<usize> = sd.sectors.iter().map(|s| s.basis.ncols()).collect();
    c.check(format!("ZZI, IZZ sector dims {dims:?}"), dims == [2, 2, 2, 2]);
    c
}

/// Average von Neumann entropy produced by CNOT on Haar product states, by
/// midpoint quadrature over the control weight p and the target's Bloch
/// x-component.
fn cnot_quadrature(points: usize) -> f64 {
    let h = |l: f64| if l > 0.0 { -l * l.log2() } else { 0.0 };
    let mut acc = 0.0;
    for a in 0..points {
        let p = (a as f64 + 0.5) / points as f64;
        for b in 0..points {
            let x = -1.0 + 2.0 * (b as f64 + 0.5) / points as f64;
            let disc = (1.0 - 4.0 * p * (1.0 - p) * (1.0 - x * x)).max(0.0).sqrt();
            acc += h(0.5 * (1.0 + disc)) + h(0.5 * (1.0 - disc));
        }
    }
    acc / (points * points) as f64
}

fn criterion_5() -> Checks {
    let mut c = Checks::new();
    let t = tol();
    let tps = Tps::natural(vec![2, 2]).unwrap();
    let m = EntanglementMeasure::von_neumann(vec![0]);
    for (name, u) in [("identity", identity(4)), ("SWAP", swap())] {
        let e = entangling_power(&u, &tps, &m, 2000, 5, &t).unwrap();
        c.check(format!("e({name}) = {} with stderr {}", e.mean, e.stderr), e.mean == 0.0 && e.stderr == 0.0);
    }
    let oracle = cnot_quadrature(2000);
    let e = entangling_power(&cnot(), &tps, &m, 20_000, 11, &t).unwrap();
    let diff = (e.mean - oracle).abs();
    c.check(
        format!("e(CNOT) = {:.5} +- {:.5} vs quadrature {oracle:.5}", e.mean, e.stderr),
        diff <= 3.0 * e.stderr,
    );
    let d = tps_distance(&cnot(), &tps, &m, 20_000, 11, &t).unwrap();
    c.check(format!("tps_distance {d} = sqrt(mean)"), d == e.mean.sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    let mut invariant = 0;
    for k in 0..5 {
        let u = random_unitary(4, &mut rng);
        let left = kron(&random_unitary(2, &mut rng), &random_unitary(2, &mut rng));
        let right = kron(&random_unitary(2, &mut rng), &random_unitary(2, &mut rng));
        let v = &left * &u * &right;
        let e1 = entangling_power(&u, &tps, &m, 20_000, 100 + k, &t).unwrap();
        let e2 = entangling_power(&v, &tps, &m, 20_000, 200 + k, &t).unwrap();
        let combined = (e1.stderr.powi(2) + e2.stderr.powi(2)).sqrt();
        if (e1.mean - e2.mean).abs() <= 3.0 * combined {
            invariant += 1;
        }
    }
    c.check(format!("multi-local invariance on {invariant}/5"), invariant == 5);
    c
}

/// Every factor list by trying each divisor at each position, deduplicated
/// after sorting.
fn partitions_brute_force(n: u64) -> Vec<Vec<u64>> {
    fn walk(rest: u64, prefix: &mut Vec<u64>, out: &mut std::collections::BTreeSet<Vec<u64>>) {
        if rest == 1 {
            let mut p = prefix.clone();
            p.sort_unstable();
            out.insert(p);
            return;
        }
        for f in 2..=rest {
            if rest % f == 0 {
                prefix.push(f);
                walk(rest / f, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut set = std::collections::BTreeSet::new();
    walk(n, &mut Vec::new(), &mut set);
    let mut out: Vec<Vec<u64>> = set.into_iter().collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn criterion_6() -> Checks {
    let mut c = Checks::new();
    let count = |n| multiplicative_partitions(n).unwrap().len();
    c.check(format!("|P(8)| = {}", count(8)), count(8) == 3);
    c.check(format!("|P(12)| = {}", count(12)), count(12) == 4);
    for p in [2, 3, 5, 7, 11, 13] {
        c.check(format!("|P({p})| = {}", count(p)), count(p) == 1);
    }
    let mismatches: Vec<u64> = (2..=96)
        .filter(|&n| multiplicative_partitions(n).unwrap() != partitions_brute_force(n))
        .collect();
    c.check(format!("brute-force oracle up to 96, mismatches {mismatches:?}"), mismatches.is_empty());
    c
}

fn criterion_7() -> Checks {
    let mut c = Checks::new();
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(7007);
    let fock = build_fock(3, 2).unwrap();
    let vacuum = fock.vacuum();
    let mut exact = 0;
    for _ in 0..10 {
        let ms = transform_modes(&fock, &random_unitary(3, &mut rng), &t).unwrap();
        if ms.transformed().iter().all(|a| (a * &vacuum).iter().all(|z| z.re == 0.0 && z.im == 0.0)) {
            exact += 1;
        }
    }
    c.check(format!("vacuum annihilated exactly for {exact}/10 unitaries"), exact == 10);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bs = ComplexMatrix::from_row_slice(
        2,
        2,
        &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)],
    );
    let fock = build_fock(2, 2).unwrap();
    let rotated = transform_modes(&fock, &bs, &t).unwrap();
    let reference = transform_modes(&fock, &identity(2), &t).unwrap();
    let psi = single_excitation_state(&rotated, 0).unwrap();
    let m = EntanglementMeasure::von_neumann(vec![0]);
    let e_ref = mode_entanglement(&psi, &reference, &m, &t).unwrap();
    let e_rot = mode_entanglement(&psi, &rotated, &m, &t).unwrap();
    c.check(format!("beamsplitter photon, reference cut {e_ref} bits"), (e_ref - 1.0).abs() <= 1e-8);
    c.check(format!("beamsplitter photon, rotated modes {e_rot:e} bits"), e_rot < 1e-8);
    let mut worst: f64 = 0.0;
    for modes in 1..=4 {
        for cutoff in 1..=3 {
            let fock = build_fock(modes, cutoff).unwrap();
            worst = worst.max(ccr_residual(&fock, fock.annihilators()));
            for _ in 0..3 {
                let ms = transform_modes(&fock, &random_unitary(modes, &mut rng), &t).unwrap();
                worst = worst.max(ms.ccr_residual());
            }
        }
    }
    c.check(format!("CCR residual on safe sectors {worst:e}"), worst < 1e-12);
    c
}

fn criterion_8() -> Checks {
    let mut c = Checks::new();
    let t = tol();
    let spec: HolonomySpec = read_json(&fixture("holonomy_n2d2.json")).unwrap();
    let fam = spec.family.build(&t).unwrap();
    let fam = fam.as_ref();
    let loops = spec.loops().unwrap();
    let (i, n) = (spec.eigenspace, spec.n);
    let id = identity(n);
    let still = LoopPath::degenerate(loops[0].base().to_vec(), 8).unwrap();
    let dev = max_abs(&(loop_holonomy(fam, &still, i, n, &t).unwrap() - &id));
    c.check(format!("degenerate loop deviation {dev:e}"), dev < 1e-8);
    for (k, lp) in loops.iter().enumerate() {
        let back = loop_holonomy(fam, &lp.then(&lp.reversed()).unwrap(), i, n, &t).unwrap();
        let prod = loop_holonomy(fam, &lp.reversed(), i, n, &t).unwrap() * loop_holonomy(fam, lp, i, n, &t).unwrap();
        let dev = max_abs(&(back - &id)).max(max_abs(&(prod - &id)));
        c.check(format!("loop {k} forward then backward deviation {dev:e}"), dev < 1e-8);
    }
    let ladder = refinement_ladder(fam, &loops[0], i, n, &spec.refinements, &t).unwrap();
    let worst_unitary = ladder.iter().map(|s| s.unitarity_defect).fold(0.0, f64::max);
    c.check(format!("unitarity defect over ladder {worst_unitary:e}"), worst_unitary < 1e-8);
    let defects: Vec<f64> = ladder.iter().filter_map(|s| s.defect_to_next).collect();
    let monotone = defects.windows(2).all(|w| w[1] < w[0]);
    c.check(format!("refinement defects {defects:.3?} strictly decreasing"), monotone && !defects.is_empty());
    let w = holonomy_nonabelian_witness(fam, &loops[0], &loops[1], i, n, &t).unwrap();
    c.check(format!("non-abelian witness {w:.4}"), w > 0.1);
    let span = holonomy_algebra_span(fam, &loops, i, n, &t).unwrap();
    c.check(format!("Lie span dimension {} with {} loops", span.dimension, loops.len()), span.dimension == n * n);
    c
}

fn criterion_9() -> Checks {
    let mut c = Checks::new();
    let runs: &[&[&str]] = &[
        &["decompose", "slot_algebra.json"],
        &["decompose", "diagonal.json"],
        &["decompose", "collective_spin.json", "--emit-basis"],
        &["bipartition", "bipartition_slots.json"],
        &["bipartition", "bipartition_abelian.json"],
        &["bipartition", "bipartition_exchange.json"],
        &["tps", "distance", "distance_cnot.json", "--samples", "20000"],
        &["tps", "equivalent", "equivalent_swap.json"],
        &["tps", "entangle", "entangle_bell_parity.json"],
        &["tps", "entangle", "entangle_bell_natural.json"],
        &["tps", "parity", "parity_repetition.json"],
        &["tps", "bosonic", "bosonic_beamsplitter.json"],
        &["tps", "holonomy", "holonomy_n2d2.json"],
    ];
    let start = Instant::now();
    let mut identical = 0;
    let mut succeeded = 0;
    for args in runs {
        let argv: Vec<String> = args
            .iter()
            .map(|a| if a.ends_with(".json") { fixture(a).display().to_string() } else { a.to_string() })
            .chain(["--seed".to_string(), "20240611".to_string()])
            .collect();
        let run = || Command::new(env!("CARGO_BIN_EXE_virtsub")).args(&argv).output().unwrap();
        let (a, b) = (run(), run());
        if a.status.success() && b.status.success() {
            succeeded += 1;
        }
        if a.stdout == b.stdout && !a.stdout.is_empty() {
            identical += 1;
        }
    }
    let partitions = Command::new(env!("CARGO_BIN_EXE_virtsub")).args(["tps", "partitions", "8"]).output().unwrap();
    let report: serde_json::Value = serde_json::from_slice(&partitions.stdout).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    c.check(format!("{succeeded}/{} fixture commands exit 0", runs.len()), succeeded == runs.len());
    c.check(format!("{identical}/{} byte-identical repeat runs", runs.len()), identical == runs.len());
    c.check(format!("partitions 8 lists {} entries", report["results"]["count"]), report["results"]["count"] == 3);
    c.check(format!("fixture commands took {elapsed:.2} s"), elapsed < 60.0);
    c
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Checks); 9] = [
        ("structure decomposition fixtures", criterion_1),
        ("factor criterion and bipartition verdicts on random algebras", criterion_2),
        ("double commutant and block dimension counts", criterion_3),
        ("parity structures and Bell states", criterion_4),
        ("entangling power", criterion_5),
        ("multiplicative partitions", criterion_6),
        ("bosonic modes", criterion_7),
        ("holonomy", criterion_8),
        ("CLI determinism", criterion_9),
    ];
    let mut failed = 0;
    for (k, (title, run)) in criteria.iter().enumerate() {
        let checks = run();
        let status = if checks.passed() { "PASS" } else { "FAIL" };
        println!("criterion {}: {status}  {title}", k + 1);
        for (what, ok) in &checks.items {
            println!("    [{}] {what}", if *ok { "ok" } else { "FAILED" });
        }
        if !checks.passed() {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
