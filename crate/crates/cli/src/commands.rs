use std::path::Path;

use serde_json::{json, Value};
use virtsub::algebra::{
    check_bipartition_seeded, close_algebra, commutant, is_factor, structure_decompose, WitnessKind,
};
use virtsub::bosonic::{build_fock, mode_entanglement, single_excitation_state, transform_modes};
use virtsub::holonomy::{holonomy_algebra_span, holonomy_nonabelian_witness, loop_holonomy, refinement_ladder};
use virtsub::io::{
    read_json, BosonicSpec, DistanceSpec, EntangleSpec, EquivalenceSpec, HolonomySpec, OperatorBody,
    OperatorSpecFile, ParitySpec,
};
use virtsub::numerics::{identity, unitarity_defect};
use virtsub::parity::{
    classify_operator, syndrome_decompose, syndrome_decompose_aligned, validate_parity_set, OperatorClass,
};
use virtsub::tps::{entanglement, entangling_power, multiplicative_partitions, tps_equivalent, EntanglementMeasure, MeasureKind};
use virtsub::{Error, Result, Tolerance};

use crate::report::matrix;

pub struct Settings {
    pub tol: Tolerance,
    pub seed: u64,
    pub samples: usize,
    pub emit_basis: bool,
    pub measure: MeasureKind,
}

/// Command-specific results and residuals.
pub type Outcome = (Value, Value);

fn measure_name(kind: MeasureKind) -> &'static str {
    match kind {
        MeasureKind::VonNeumann => "von-neumann",
        MeasureKind::Linear => "linear",
    }
}

pub fn decompose(path: &Path, s: &Settings) -> Result<Outcome> {
    let spec: OperatorSpecFile = read_json(path)?;
    let alg = close_algebra(spec.dim, &spec.matrices()?, &s.tol)?;
    let dec = structure_decompose(&alg, &s.tol, s.seed)?;
    let factor = is_factor(&alg, &s.tol);
    let blocks: Vec<Value> = dec
        .blocks
        .iter()
        .map(|b| json!({"label": b.label, "multiplicity": b.multiplicity, "irrep_dim": b.irrep_dim}))
        .collect();
    let (unit, adjoint, product) = alg.closure_defects();
    let mut results = json!({
        "dim": spec.dim,
        "algebra_dimension": alg.dimension(),
        "commutant_dimension": commutant(&alg, &s.tol).dimension(),
        "center_dimension": factor.center_dimension,
        "is_factor": factor.is_factor,
        "blocks": blocks,
    });
    if s.emit_basis {
        results["basis_change"] = matrix(&dec.basis_change);
    }
    let residuals = json!({
        "block_form": dec.residual,
        "closure": unit.max(adjoint).max(product),
    });
    Ok((results, residuals))
}

pub fn bipartition(path: &Path, s: &Settings) -> Result<Outcome> {
    let spec: OperatorSpecFile = read_json(path)?;
    let groups = spec
        .groups
        .as_ref()
        .ok_or_else(|| Error::Parse("bipartition needs a `groups` entry with `a1` and `a2`".into()))?;
    let a1 = close_algebra(spec.dim, &spec.named(&groups.a1)?, &s.tol)?;
    let a2 = close_algebra(spec.dim, &spec.named(&groups.a2)?, &s.tol)?;
    let cert = check_bipartition_seeded(&a1, &a2, &s.tol, s.seed)?;
    let mut reasons = Vec::new();
    if !cert.commuting {
        reasons.push("a1 and a2 do not commute");
    }
    if !cert.join_is_full {
        reasons.push("a1 and a2 do not generate the full operator algebra");
    }
    if !cert.a1_is_factor {
        reasons.push("a1 has a nontrivial center");
    }
    let witness = cert.witness.as_ref().map(|w| {
        let kind = match w.kind {
            WitnessKind::Commutator => "commutator",
            WitnessKind::Central => "central",
            WitnessKind::JoinCommutant => "join-commutant",
        };
        let mut v = json!({"kind": kind, "norm": w.matrix.norm()});
        if s.emit_basis {
            v["matrix"] = matrix(&w.matrix);
        }
        v
    });
    let results = json!({
        "verdict": cert.verdict,
        "commuting": cert.commuting,
        "join_is_full": cert.join_is_full,
        "a1_is_factor": cert.a1_is_factor,
        "reasons": reasons,
        "a1_dimension": a1.dimension(),
        "a2_dimension": a2.dimension(),
        "join_dimension": cert.join_dimension,
        "center_dimension": cert.center_dimension,
        "structure": cert.structure.map(|((n, d), _)| json!({"multiplicity": n, "irrep_dim": d})),
        "witness": witness,
    });
    let residuals = json!({
        "commutator_norm": cert.commutator_norm,
        "block_form": cert.structure.map(|(_, r)| r),
    });
    Ok((results, residuals))
}

pub fn partitions(n: u64) -> Result<Outcome> {
    let parts = multiplicative_partitions(n)?;
    Ok((json!({"n": n, "count": parts.len(), "partitions": parts}), json!({})))
}

fn cut_or_first(cut: &Option<Vec<usize>>) -> Vec<usize> {
    cut.clone().unwrap_or_else(|| vec![0])
}

pub fn distance(path: &Path, s: &Settings) -> Result<Outcome> {
    let spec: DistanceSpec = read_json(path)?;
    let tps = spec.tps.build(&s.tol)?;
    let u = spec.unitary.to_matrix_of_dim(tps.dim())?;
    let measure = EntanglementMeasure::new(s.measure, cut_or_first(&spec.cut));
    let est = entangling_power(&u, &tps, &measure, s.samples, s.seed, &s.tol)?;
    let results = json!({
        "measure": measure_name(s.measure),
        "cut": measure.cut,
        "mean": est.mean,
        "stderr": est.stderr,
        "samples": est.samples,
        "seed": est.seed,
        "distance": est.mean.sqrt(),
    });
    Ok((results, json!({"unitarity": unitarity_defect(&u)})))
}

pub fn equivalent(path: &Path, s: &Settings) -> Result<Outcome> {
    let spec: EquivalenceSpec = read_json(path)?;
    let t1 = spec.first.build(&s.tol)?;
    let t2 = spec.second.build(&s.tol)?;
    let perm = tps_equivalent(&t1, &t2, &s.tol)?;
    Ok((
        json!({"equivalent": perm.is_some(), "permutation": perm}),
        json!({}),
    ))
}

fn parity_matrices(ops: &[OperatorBody]) -> Result<Vec<virtsub::ComplexMatrix>> {
    ops.iter().map(OperatorBody::to_matrix).collect()
}

pub fn entangle(path: &Path, s: &Settings) -> Result<Outcome> {
    let spec: EntangleSpec = read_json(path)?;
    let (tps, source) = match (&spec.tps, &spec.parity) {
        (Some(t), None) => (t.build(&s.tol)?, "explicit"),
        (None, Some(p)) => {
            let ps = validate_parity_set(&parity_matrices(p)?, &s.tol)?;
            (syndrome_decompose(&ps, &s.tol)?.tps, "parity")
        }
        _ => {
            return Err(Error::Parse(
                "entangle needs exactly one of `tps` and `parity`".into(),
            ))
        }
    };
    let state = virtsub::io::state_from_json(&spec.state);
    let measure = EntanglementMeasure::new(s.measure, cut_or_first(&spec.cut));
    let value = entanglement(&state, &tps, &measure)?;
    let results = json!({
        "tps_source": source,
        "tps_dims": tps.dims(),
        "measure": measure_name(s.measure),
        "cut": measure.cut,
        "entanglement": value,
    });
    Ok((results, json!({"state_norm_defect": (state.norm() - 1.0).abs()})))
}

pub fn parity(path: &Path, s: &Settings) -> Result<Outcome> {
    let spec: ParitySpec = read_json(path)?;
    let ps = validate_parity_set(&parity_matrices(&spec.parities)?, &s.tol)?;
    let sd = match &spec.flips {
        Some(f) => syndrome_decompose_aligned(&ps, &parity_matrices(f)?, &s.tol)?,
        None => syndrome_decompose(&ps, &s.tol)?,
    };
    let sectors: Vec<Value> = sd
        .sectors
        .iter()
        .map(|sec| {
            let mut v = json!({"syndrome": sec.syndrome, "index": sec.index(), "dimension": sec.basis.ncols()});
            if s.emit_basis {
                v["basis"] = matrix(&sec.basis);
            }
            v
        })
        .collect();
    let mut worst_overlap: f64 = 0.0;
    for (a, x) in sd.sectors.iter().enumerate() {
        for y in &sd.sectors[a + 1..] {
            worst_overlap = worst_overlap.max((x.basis.adjoint() * &y.basis).norm());
        }
    }
    let classes = spec
        .classify
        .iter()
        .map(|op| {
            let c = classify_operator(&op.body.to_matrix_of_dim(ps.dim())?, &sd, &s.tol)?;
            let class = match c.class {
                OperatorClass::CodeLocal => "code-local",
                OperatorClass::SyndromeLocal => "syndrome-local",
                OperatorClass::Mixed => "mixed",
            };
            Ok(json!({
                "name": op.name,
                "class": class,
                "code_residual": c.code_residual,
                "syndrome_residual": c.syndrome_residual,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let results = json!({
        "qubits": ps.qubits(),
        "k": ps.k(),
        "identification": if spec.flips.is_some() { "flip-aligned" } else { "eigensolver" },
        "tps_dims": sd.tps.dims(),
        "sectors": sectors,
        "classification": classes,
    });
    Ok((results, json!({"sector_overlap": worst_overlap})))
}

pub fn bosonic(path: &Path, s: &Settings) -> Result<Outcome> {
    let spec: BosonicSpec = read_json(path)?;
    let fock = build_fock(spec.modes, spec.cutoff)?;
    let rotated = transform_modes(&fock, &spec.unitary.to_matrix()?, &s.tol)?;
    let reference = transform_modes(&fock, &identity(spec.modes), &s.tol)?;
    let vacuum = fock.vacuum();
    let vacuum_exact = rotated
        .transformed()
        .iter()
        .all(|a| (a * &vacuum).iter().all(|z| z.re == 0.0 && z.im == 0.0));
    let state = single_excitation_state(&rotated, spec.excite)?;
    let measure = EntanglementMeasure::new(s.measure, spec.cut.clone());
    let results = json!({
        "modes": spec.modes,
        "cutoff": spec.cutoff,
        "fock_dimension": fock.dim(),
        "vacuum_annihilated_exactly": vacuum_exact,
        "excited_mode": spec.excite,
        "measure": measure_name(s.measure),
        "cut": spec.cut,
        "entanglement_reference_modes": mode_entanglement(&state, &reference, &measure, &s.tol)?,
        "entanglement_rotated_modes": mode_entanglement(&state, &rotated, &measure, &s.tol)?,
    });
    Ok((results, json!({"ccr": rotated.ccr_residual()})))
}

pub fn holonomy(path: &Path, s: &Settings) -> Result<Outcome> {
    let spec: HolonomySpec = read_json(path)?;
    let x = spec.operator()?;
    let fam = spec.family.build(&s.tol)?;
    if fam.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: fam.dim(),
        });
    }
    let loops = spec.loops()?;
    let first = loops
        .first()
        .ok_or_else(|| Error::Parse("holonomy needs at least one loop".into()))?;
    let (i, n) = (spec.eigenspace, spec.n);
    let h = loop_holonomy(fam.as_ref(), first, i, n, &s.tol)?;
    let ladder: Vec<Value> = refinement_ladder(fam.as_ref(), first, i, n, &spec.refinements, &s.tol)?
        .iter()
        .map(|step| {
            json!({
                "refinement": step.refinement,
                "unitarity_defect": step.unitarity_defect,
                "defect_to_next": step.defect_to_next,
            })
        })
        .collect();
    let witness = match loops.get(1) {
        Some(second) => Some(holonomy_nonabelian_witness(fam.as_ref(), first, second, i, n, &s.tol)?),
        None => None,
    };
    let span = holonomy_algebra_span(fam.as_ref(), &loops, i, n, &s.tol)?;
    let results = json!({
        "n": n,
        "eigenspace": i,
        "loops": loops.len(),
        "holonomy": matrix(&h),
        "refinement_ladder": ladder,
        "nonabelian_witness": witness,
        "span_dimension": span.dimension,
        "log_rank": span.log_rank,
        "branch_splits": span.splits,
        "universal": span.is_universal(n),
    });
    Ok((results, json!({"unitarity": unitarity_defect(&h)})))
}
