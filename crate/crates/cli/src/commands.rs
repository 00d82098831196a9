use std::path::{Path, PathBuf};

use ptsym_core::bender::{critical_sweep, expansion_coefficients, s0_eta, stokes_vector};
use ptsym_core::canonical::{pt_canonical_form, Block, BlockKind, CanonicalDecomposition, Warning};
use ptsym_core::config::Tolerances;
use ptsym_core::dilation::{embedded_evolution_check, uniform_bound};
use ptsym_core::dynamics::{coefficient_name, evolve_density, invariant_report, normalize};
use ptsym_core::metric::{build_metric, eta_inner, verify_metric, Inertia, SignCharacteristic};
use ptsym_core::pt::{is_pt_symmetric, validate_pt_pair, PTPair};
use ptsym_core::superposition::{
    is_incoherent, is_superposition_free, kraus_defect, verify_free_evolution, FreeBasis, DEFAULT_LIN_TOL,
};
use ptsym_core::{CMatrix, Error};
use serde_json::{json, Map, Value};

use crate::config::{self, RunConfig};
use crate::error::CliError;
use crate::io::{complex_json, csv_text, emit, fmt_f64, matrix_json, read_matrix, read_state, read_vector, render_json};
use crate::{Cli, Command, OptionalSystem, SystemArgs};

struct Context {
    cfg: RunConfig,
    tols: Tolerances,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let tols = cli.tols.merge(cfg.tolerances)?;
    let ctx = Context { cfg, tols };
    match cli.command {
        Command::Classify { system, output } => classify(&ctx, &system, output.as_deref()),
        Command::Canonical { system, output } => canonical(&ctx, &system, output.as_deref()),
        Command::Metric { system, signs, output } => metric(&ctx, &system, signs.as_deref(), output.as_deref()),
        Command::Inner { phi1, phi2, eta, system, signs, output } => {
            inner(&ctx, &phi1, &phi2, eta.as_deref(), &system, signs.as_deref(), output.as_deref())
        }
        Command::Evolve { hamiltonian, state, t, normalize, output } => {
            evolve(&hamiltonian, &state, t, normalize, output.as_deref())
        }
        Command::Invariants { system, state, grid, signs, output, summary } => {
            let grid = grid.merge(&ctx.cfg.grid)?;
            invariants(&ctx, &system, &state, &grid, signs.as_deref(), output, summary)
        }
        Command::BenderSweep { r, s, theta_min, theta_max, steps, probe_x, probe_y, output } => {
            let probe = config::probe(probe_x, probe_y, &ctx.cfg);
            bender_sweep(&ctx, r, s, theta_min, theta_max, steps, probe, output.as_deref())
        }
        Command::Stokes { ex, ey, alpha, output } => stokes(&ctx, ex, ey, alpha, output.as_deref()),
        Command::Dilate { system, state, grid, output } => {
            let grid = grid.merge(&ctx.cfg.grid)?;
            dilate(&ctx, &system, &state, &grid, output.as_deref())
        }
        Command::FreeCheck { system, basis, orthonormal, state, kraus, scale, tol, grid, output } => {
            let grid = grid.merge(&ctx.cfg.grid)?;
            let req = FreeRequest { basis, orthonormal, state, kraus, scale, tol };
            free_check(&ctx, &system, &req, &grid, output.as_deref())
        }
    }
}

fn load_system(sys: &SystemArgs, tols: &Tolerances) -> Result<(CMatrix, PTPair), CliError> {
    let h = read_matrix(&sys.hamiltonian)?;
    let p = read_matrix(&sys.parity)?;
    let t = read_matrix(&sys.time_reversal)?;
    let pair = validate_pt_pair(&p, &t, tols.val_tol)?;
    if pair.dim() != h.nrows() {
        return Err(Error::DimensionMismatch { expected: pair.dim(), found: h.nrows() }.into());
    }
    Ok((h, pair))
}

fn load_optional(sys: &OptionalSystem, tols: &Tolerances) -> Result<Option<(CMatrix, PTPair)>, CliError> {
    let Some(hamiltonian) = &sys.hamiltonian else {
        return Ok(None);
    };
    let (Some(parity), Some(time_reversal)) = (&sys.parity, &sys.time_reversal) else {
        return Err(CliError::Argument("--hamiltonian needs --parity and --time-reversal".into()));
    };
    let full = SystemArgs { hamiltonian: hamiltonian.clone(), parity: parity.clone(), time_reversal: time_reversal.clone() };
    load_system(&full, tols).map(Some)
}

fn kind_name(kind: BlockKind) -> &'static str {
    match kind {
        BlockKind::RealSimple => "RealSimple",
        BlockKind::RealJordan(_) => "RealJordan",
        BlockKind::ComplexConjugatePair(_) => "ComplexConjugatePair",
    }
}

fn block_json(b: &Block) -> Value {
    json!({
        "kind": kind_name(b.kind),
        "order": b.order,
        "offset": b.offset,
        "eigenvalue": complex_json(b.eigenvalue),
    })
}

fn warnings_json(warnings: &[Warning]) -> Value {
    warnings
        .iter()
        .map(|w| match w {
            Warning::NearExceptionalPoint { eigenvalue, spread, condition } => json!({
                "kind": "NearExceptionalPoint",
                "eigenvalue": complex_json(*eigenvalue),
                "spread": spread,
                "condition": condition,
            }),
        })
        .collect()
}

fn inertia_json(i: Inertia) -> Value {
    json!({ "positive": i.positive, "negative": i.negative, "zero": i.zero })
}

fn classify(ctx: &Context, sys: &SystemArgs, out: Option<&Path>) -> Result<(), CliError> {
    let (h, pair) = load_system(sys, &ctx.tols)?;
    let sym = is_pt_symmetric(&h, &pair, ctx.tols.val_tol)?;
    let decomp = pt_canonical_form(&h, &pair, &ctx.tols)?;
    let class = decomp.spectral_class();
    let report = json!({
        "pt_symmetric": sym.symmetric,
        "residual": sym.residual,
        "class": class.label(),
        "unbroken": class.is_unbroken(),
        "blocks": decomp.blocks.iter().map(block_json).collect::<Vec<_>>(),
        "eigenvalues": decomp.column_eigenvalues().into_iter().map(complex_json).collect::<Vec<_>>(),
        "warnings": warnings_json(&decomp.warnings),
    });
    emit(out, &render_json(&report))
}

fn canonical(ctx: &Context, sys: &SystemArgs, out: Option<&Path>) -> Result<(), CliError> {
    let (h, pair) = load_system(sys, &ctx.tols)?;
    let d = pt_canonical_form(&h, &pair, &ctx.tols)?;
    let report = json!({
        "class": d.spectral_class().label(),
        "psi": matrix_json(&d.psi),
        "psi_inv": matrix_json(&d.psi_inv),
        "j": matrix_json(&d.j),
        "k": matrix_json(&d.k),
        "blocks": d.blocks.iter().map(block_json).collect::<Vec<_>>(),
        "similarity_residual": d.similarity_residual,
        "structure_residual": d.structure_residual,
        "condition": d.condition,
        "warnings": warnings_json(&d.warnings),
    });
    emit(out, &render_json(&report))
}

fn resolve_signs(flag: Option<&[i8]>, cfg: &RunConfig, d: &CanonicalDecomposition) -> Result<SignCharacteristic, CliError> {
    Ok(config::signs(flag, cfg)?.unwrap_or_else(|| SignCharacteristic::default_for(d)))
}

fn metric(ctx: &Context, sys: &SystemArgs, signs: Option<&[i8]>, out: Option<&Path>) -> Result<(), CliError> {
    let (h, pair) = load_system(sys, &ctx.tols)?;
    let d = pt_canonical_form(&h, &pair, &ctx.tols)?;
    let signs = resolve_signs(signs, &ctx.cfg, &d)?;
    let m = build_metric(&d, &signs)?;
    let residual = verify_metric(&h, &m.eta)?;
    let report = json!({
        "class": d.spectral_class().label(),
        "signs": m.signs.epsilons(),
        "eta": matrix_json(&m.eta),
        "positive_definite": m.positive_definite,
        "inertia": inertia_json(m.inertia()),
        "residual": residual,
    });
    emit(out, &render_json(&report))
}

fn inner(
    ctx: &Context,
    phi1: &Path,
    phi2: &Path,
    eta: Option<&Path>,
    sys: &OptionalSystem,
    signs: Option<&[i8]>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let v1 = read_vector(phi1)?;
    let v2 = read_vector(phi2)?;
    let eta = match (eta, load_optional(sys, &ctx.tols)?) {
        (Some(path), _) => read_matrix(path)?,
        (None, Some((h, pair))) => {
            let d = pt_canonical_form(&h, &pair, &ctx.tols)?;
            let signs = resolve_signs(signs, &ctx.cfg, &d)?;
            build_metric(&d, &signs)?.eta
        }
        (None, None) => return Err(CliError::Argument("inner needs --eta or --hamiltonian".into())),
    };
    let value = eta_inner(&v1, &v2, &eta)?;
    emit(out, &render_json(&json!({ "value": complex_json(value) })))
}

fn evolve(hamiltonian: &Path, state: &Path, t: f64, renormalize: bool, out: Option<&Path>) -> Result<(), CliError> {
    if !t.is_finite() {
        return Err(CliError::Argument(format!("time must be finite, got {t}")));
    }
    let h = read_matrix(hamiltonian)?;
    let rho = read_state(state)?;
    let mut rho_t = evolve_density(&rho, &h, t)?;
    let trace = rho_t.trace().re;
    if renormalize {
        rho_t = normalize(&rho_t)?;
    }
    let report = json!({ "t": t, "trace": trace, "normalized": renormalize, "rho": matrix_json(&rho_t) });
    emit(out, &render_json(&report))
}

fn invariants(
    ctx: &Context,
    sys: &SystemArgs,
    state: &Path,
    grid: &ptsym_core::dynamics::TimeGrid,
    signs: Option<&[i8]>,
    output: Option<PathBuf>,
    summary: Option<PathBuf>,
) -> Result<(), CliError> {
    let (h, pair) = load_system(sys, &ctx.tols)?;
    let rho = read_state(state)?;
    let signs = config::signs(signs, &ctx.cfg)?;
    let report = invariant_report(&h, &pair, &rho, grid, signs.as_ref(), &ctx.tols)?;

    let d = h.nrows();
    let mut header = vec!["t".to_string()];
    for i in 0..d {
        for j in 0..d {
            let name = coefficient_name(i, j);
            header.push(format!("{name}_re"));
            header.push(format!("{name}_im"));
        }
    }
    header.push("eta_trace_re".into());
    header.push("eta_trace_im".into());

    let rows: Vec<Vec<String>> = report
        .times
        .iter()
        .zip(&report.coefficient_series)
        .zip(&report.eta_trace_series)
        .map(|((&t, coeffs), tr)| {
            let mut row = vec![fmt_f64(t)];
            for i in 0..d {
                for j in 0..d {
                    let z = coeffs.get(i, j);
                    row.push(fmt_f64(z.re));
                    row.push(fmt_f64(z.im));
                }
            }
            row.push(fmt_f64(tr.re));
            row.push(fmt_f64(tr.im));
            row
        })
        .collect();
    let csv = csv_text(&header, &rows)?;

    let tracked: Vec<Value> = report
        .invariants
        .iter()
        .map(|inv| {
            json!({
                "name": inv.name,
                "initial": complex_json(inv.values[0]),
                "final": complex_json(*inv.values.last().expect("nonempty grid")),
                "drift": inv.drift,
            })
        })
        .collect();
    let summary_json = json!({
        "class": report.class.label(),
        "signs": report.metric.signs.epsilons(),
        "num_points": report.times.len(),
        "invariants": tracked,
        "eta_trace_drift": report.eta_trace_drift(),
        "overflow_risk": report.overflow_risk,
        "usable_horizon": report.usable_horizon,
    });
    let summary_text = render_json(&summary_json);

    let to_stdout = output.as_deref().is_none_or(|p| p == Path::new("-"));
    let summary_path = summary.or_else(|| {
        output.as_ref().filter(|_| !to_stdout).map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".summary.json");
            PathBuf::from(s)
        })
    });
    emit(output.as_deref(), &csv)?;
    match summary_path {
        Some(p) => emit(Some(&p), &summary_text),
        None => {
            eprint!("{summary_text}");
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn bender_sweep(
    ctx: &Context,
    r: f64,
    s: f64,
    theta_min: f64,
    theta_max: f64,
    steps: usize,
    probe: (ptsym_core::Complex64, ptsym_core::Complex64),
    out: Option<&Path>,
) -> Result<(), CliError> {
    if steps < 2 {
        return Err(CliError::Argument(format!("steps must be at least 2, got {steps}")));
    }
    if !(theta_min.is_finite() && theta_max.is_finite() && theta_max > theta_min) {
        return Err(CliError::Argument(format!("bad theta range [{theta_min}, {theta_max}]")));
    }
    if !(r.is_finite() && s.is_finite() && r >= 0.0) {
        return Err(CliError::Argument(format!("bad parameters r={r}, s={s}")));
    }
    let step = (theta_max - theta_min) / (steps - 1) as f64;
    let thetas: Vec<f64> = (0..steps).map(|k| if k + 1 == steps { theta_max } else { theta_min + k as f64 * step }).collect();
    let rows = critical_sweep(r, s, &thetas, probe, &ctx.tols)?;

    let cell = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let header: Vec<String> =
        ["theta", "class", "alpha", "S0", "S0_times_cos_alpha", "eigvec_overlap"].iter().map(|s| s.to_string()).collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            vec![
                fmt_f64(row.theta),
                row.class.unwrap_or("").to_string(),
                cell(row.alpha),
                cell(row.s0),
                cell(row.s0_times_cos_alpha),
                cell(row.eigvec_overlap),
            ]
        })
        .collect();
    emit(out, &csv_text(&header, &body)?)
}

fn stokes(
    ctx: &Context,
    ex: ptsym_core::Complex64,
    ey: ptsym_core::Complex64,
    alpha: Option<f64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let sv = stokes_vector(ex, ey);
    let mut report = Map::new();
    report.insert("S0".into(), json!(sv.s0));
    report.insert("S1".into(), json!(sv.s1));
    report.insert("S2".into(), json!(sv.s2));
    report.insert("S3".into(), json!(sv.s3));
    report.insert("defect".into(), json!(sv.defect()));
    if let Some(alpha) = alpha {
        let (c1, c2) = expansion_coefficients(ex, ey, alpha, ctx.tols.crit_tol)?;
        report.insert("alpha".into(), json!(alpha));
        report.insert("c1".into(), complex_json(c1));
        report.insert("c2".into(), complex_json(c2));
        report.insert("S0_eta".into(), json!(s0_eta(ex, ey, alpha, ctx.tols.crit_tol)?));
    }
    emit(out, &render_json(&Value::Object(report)))
}

fn dilate(
    ctx: &Context,
    sys: &SystemArgs,
    state: &Path,
    grid: &ptsym_core::dynamics::TimeGrid,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (h, pair) = load_system(sys, &ctx.tols)?;
    let rho = read_state(state)?;
    let d = pt_canonical_form(&h, &pair, &ctx.tols)?;
    if !d.spectral_class().is_unbroken() {
        return Err(Error::BrokenHamiltonian.into());
    }
    let report = embedded_evolution_check(&h, &pair, &rho, grid, &ctx.tols)?;
    let json = json!({
        "c": report.c,
        "max_deviation": report.max_deviation,
        "max_unitarity_residual": report.max_unitarity_residual,
        "times": report.times,
        "success_probability": report.success_probability,
    });
    emit(out, &render_json(&json))
}

struct FreeRequest {
    basis: Option<PathBuf>,
    orthonormal: bool,
    state: Option<PathBuf>,
    kraus: Option<PathBuf>,
    scale: Option<f64>,
    tol: f64,
}

fn free_check(
    ctx: &Context,
    sys: &OptionalSystem,
    req: &FreeRequest,
    grid: &ptsym_core::dynamics::TimeGrid,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if !(req.tol.is_finite() && req.tol > 0.0) {
        return Err(CliError::Argument(format!("tol must be positive, got {}", req.tol)));
    }
    let system = load_optional(sys, &ctx.tols)?;
    let state = req.state.as_deref().map(read_state).transpose()?;
    let kraus = req.kraus.as_deref().map(read_matrix).transpose()?;
    if system.is_none() && state.is_none() && kraus.is_none() {
        return Err(CliError::Argument("free-check needs --state, --kraus or --hamiltonian".into()));
    }

    let decomp = match &system {
        Some((h, pair)) => Some(pt_canonical_form(h, pair, &ctx.tols)?),
        None => None,
    };
    let basis = match (&req.basis, &decomp) {
        (Some(path), _) => Some(FreeBasis::from_columns(&read_matrix(path)?, DEFAULT_LIN_TOL)?),
        (None, Some(d)) => Some(FreeBasis::from_decomposition(d)?),
        (None, None) => None,
    };
    let basis_for = |dim: usize| basis.clone().unwrap_or_else(|| FreeBasis::computational(dim));

    let mut report = Map::new();
    if let Some(rho) = &state {
        let b = basis_for(rho.nrows());
        let (free, dec) = if req.orthonormal {
            is_incoherent(rho, &b, req.tol)?
        } else {
            is_superposition_free(rho, &b, req.tol)?
        };
        report.insert(
            "state".into(),
            json!({ "free": free, "weights": dec.weights, "residual": dec.residual }),
        );
    }
    if let Some(k) = &kraus {
        let b = basis_for(k.nrows());
        let defect = kraus_defect(k, &b, req.tol)?;
        let contraction = ptsym_core::linalg::operator_norm(k)?;
        report.insert(
            "kraus".into(),
            json!({ "free": defect <= req.tol, "defect": defect, "operator_norm": contraction }),
        );
    }
    if let (Some((h, pair)), Some(d)) = (&system, &decomp) {
        if !d.spectral_class().is_unbroken() {
            return Err(Error::BrokenHamiltonian.into());
        }
        let scale = match req.scale {
            Some(c) => c,
            None => uniform_bound(d)?,
        };
        let ev = verify_free_evolution(h, pair, scale, grid, req.tol, &ctx.tols)?;
        report.insert(
            "evolution".into(),
            json!({
                "scale": scale,
                "free": ev.free,
                "trace_nonincreasing": ev.trace_nonincreasing,
                "worst_defect": ev.worst_defect,
                "worst_contraction": ev.worst_contraction,
            }),
        );
    }
    emit(out, &render_json(&Value::Object(report)))
}
