use std::collections::HashMap;

use magscat::boundary::{assemble_far_field, assemble_near_field, NearFieldMatrix};
use magscat::cgo::{boundary_densities, build_probe, generic_frame, salo_identity, ProbeOptions};
use magscat::field::curl;
use magscat::forward::{far_field, ScatteringProblem};
use magscat::io;
use magscat::potentials::{ElectricPotential, MagneticPotential, PotentialDescriptor};
use magscat::reconstruct::{add_noise, reconstruct_curl, reconstruct_q, stability_sweep, ProbeContext, SweepPair};
use magscat::sphere::SphereGrid;
use magscat::spherical::{f_norm, far_coefficients, FarFieldCoefficients, FarFieldData};
use serde::Serialize;

use crate::artifacts::RunDir;
use crate::config::{RunConfig, Setup};
use crate::error::{CliError, Stage};

pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub setup: &'a Setup,
    pub seed: u64,
    pub verbose: bool,
}

impl Ctx<'_> {
    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("[magscat] {}", msg.as_ref());
        }
    }

    fn problem(&self, a: &MagneticPotential, q: &ElectricPotential, stage: &str) -> Result<ScatteringProblem, CliError> {
        ScatteringProblem::new(&self.cfg.physics, a, q, self.cfg.solver.options()).stage(stage)
    }

    fn near_field(&self, list: &[PotentialDescriptor], stage: &str) -> Result<NearFieldMatrix, CliError> {
        let (a, q) = self.cfg.media(&self.setup.grid, list)?;
        self.log(format!("{stage}: assembling {} point-source solves", self.setup.sphere.len()));
        assemble_near_field(&self.problem(&a, &q, stage)?, &self.setup.sphere).stage(stage)
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let err = |e: csv::Error| CliError::numerical("output", e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::numerical("output", e.to_string()))
}

fn num(x: f64) -> String {
    format!("{x:.15e}")
}

pub fn forward(ctx: &Ctx, run: &mut RunDir) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let (a, q) = cfg.media(&ctx.setup.grid, &cfg.potentials)?;
    let prob = ctx.problem(&a, &q, "forward")?;
    let dirs = SphereGrid::new(1.0, cfg.forward.far_directions.n_theta, cfg.forward.far_directions.n_phi).stage("forward")?;
    let mut rows = Vec::new();
    for (i, spec) in cfg.forward.incidents.iter().enumerate() {
        ctx.log(format!("forward: incidence {i}"));
        let t = prob.solve(&spec.field().stage("forward")?).stage("forward")?;
        run.tolerance("forward.gmres_residual", t.stats.residual);
        if cfg.forward.write_fields {
            let files = io::write_fields(&run.path(&format!("total_{i}")), &[&t.u], Some("total field u")).stage("output")?;
            run.track(files);
        }
        for (x, v) in dirs.directions().iter().zip(far_field(&t, dirs.directions()).stage("forward")?) {
            rows.push(vec![i.to_string(), num(x[0]), num(x[1]), num(x[2]), num(v.re), num(v.im)]);
        }
    }
    run.write("far_field.csv", &csv_bytes(&["incident", "xhat_x", "xhat_y", "xhat_z", "re", "im"], rows)?)?;
    Ok(())
}

pub fn nearfield(ctx: &Ctx, run: &mut RunDir) -> Result<(), CliError> {
    let n = ctx.near_field(&ctx.cfg.potentials, "nearfield")?;
    run.tolerance("nearfield.gmres_tol", ctx.cfg.solver.tol);
    let files = io::write_near_field(&run.path("near_field"), &n).stage("output")?;
    run.track(files);
    Ok(())
}

fn far_pair(ctx: &Ctx, a: &MagneticPotential, q: &ElectricPotential, dirs: &SphereGrid, l_max: usize, stage: &str) -> Result<(FarFieldCoefficients, FarFieldData), CliError> {
    let data = assemble_far_field(&ctx.problem(a, q, stage)?, dirs).stage(stage)?;
    let p = &ctx.cfg.physics;
    Ok((far_coefficients(&data, l_max, p.k, p.a).stage(stage)?, data))
}

pub fn farfield(ctx: &Ctx, run: &mut RunDir) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let (a, q) = cfg.media(&ctx.setup.grid, &cfg.potentials)?;
    let d = cfg.farfield.directions;
    let dirs = SphereGrid::new(1.0, d.n_theta, d.n_phi).stage("farfield")?;
    let (c, data) = far_pair(ctx, &a, &q, &dirs, cfg.farfield.l_max, "farfield")?;
    run.write("far_field.csv", io::far_field_csv(&data).as_bytes())?;
    run.write("far_coefficients.csv", io::far_coefficients_csv(&c).as_bytes())?;
    let partial: Vec<f64> = (0..=c.l_max()).map(|l| f_norm(&c.truncated(l))).collect();
    run.write("f_norm.csv", &csv_bytes(&["l_max", "f_norm"], partial.iter().enumerate().map(|(l, v)| vec![l.to_string(), num(*v)]))?)?;
    let total = *partial.last().expect("l = 0 always present");
    let prev = partial[partial.len().saturating_sub(3)];
    #[derive(Serialize)]
    struct Summary {
        l_max: usize,
        f_norm: f64,
        /// relative change over the last two degrees
        saturation: f64,
    }
    let saturation = if total > 0.0 { (total - prev) / total } else { 0.0 };
    run.tolerance("farfield.saturation", saturation);
    run.write_json("f_norm.json", &Summary { l_max: c.l_max(), f_norm: total, saturation })?;
    Ok(())
}

#[derive(Serialize)]
struct CgoSummary {
    rho_defect: f64,
    transport_residual: f64,
    frame_defect: f64,
    salo_gaps: Vec<Option<f64>>,
    gates: crate::config::CgoGates,
    pass: bool,
}

pub fn cgo_check(ctx: &Ctx, run: &mut RunDir) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let block = &cfg.cgo_check;
    let (a, _) = cfg.media(&ctx.setup.grid, &cfg.potentials)?;
    let opts = ProbeOptions {
        k: cfg.physics.k,
        kind: block.probe_kind,
        transport_tol: block.gates.transport,
        ..Default::default()
    };
    let (mut rho, mut transport, mut frame_defect): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut rows = Vec::new();
    for (i, spec) in block.probes.iter().enumerate() {
        ctx.log(format!("cgo-check: probe {i}"));
        let frame = spec.frame().stage("cgo-check").map_err(|e| e.or_parameter("cgo_check.probes"))?;
        let p = build_probe(&a, &a, &frame, spec.s, &opts).stage("cgo-check")?;
        let r = p.rho_defects().into_iter().fold(0.0, f64::max);
        let t = p.transport_residual[0].max(p.transport_residual[1]);
        let f = frame.orthogonality_defect();
        let dens = boundary_densities(&p, &ctx.setup.sphere, cfg.physics.k, ctx.setup.sphere.exact_degree() / 2, 1.0).stage("cgo-check")?;
        rho = rho.max(r);
        transport = transport.max(t);
        frame_defect = frame_defect.max(f);
        rows.push(vec![
            i.to_string(),
            num(spec.xi[0]),
            num(spec.xi[1]),
            num(spec.xi[2]),
            num(spec.s),
            num(r),
            num(t),
            num(f),
            p.zeroed_modes[0].max(p.zeroed_modes[1]).to_string(),
            num(dens.norms[0]),
            num(dens.norms[1]),
        ]);
    }
    run.write(
        "cgo_probes.csv",
        &csv_bytes(
            &["probe", "xi_x", "xi_y", "xi_z", "s", "rho_defect", "transport_residual", "frame_defect", "zeroed_modes", "density_norm_1", "density_norm_2"],
            rows,
        )?,
    )?;
    // the identity is empty when ω·A vanishes
    let salo_gaps: Vec<Option<f64>> = block
        .salo_directions(&ctx.setup.grid)
        .into_iter()
        .map(|xi| {
            let c = salo_identity(&a, generic_frame(xi).omega(), xi);
            (c.linear.norm() > 0.0).then_some(c.gap)
        })
        .collect();
    let g = block.gates;
    let worst_salo = salo_gaps.iter().flatten().fold(0.0f64, |m, v| m.max(*v));
    let pass = rho <= g.rho && transport <= g.transport && frame_defect <= g.frame && worst_salo <= g.salo;
    run.tolerance("cgo.rho_defect", rho);
    run.tolerance("cgo.transport_residual", transport);
    run.tolerance("cgo.frame_defect", frame_defect);
    run.tolerance("cgo.salo_gap", worst_salo);
    run.write_json(
        "cgo_summary.json",
        &CgoSummary {
            rho_defect: rho,
            transport_residual: transport,
            frame_defect,
            salo_gaps,
            gates: g,
            pass,
        },
    )?;
    if !pass {
        return Err(CliError::numerical("cgo-check", "identity residuals above the configured gates").with_parameter("cgo_check.gates"));
    }
    Ok(())
}

#[derive(Serialize)]
struct ErrorReport {
    certified: bool,
    delta: f64,
    noise: f64,
    curl: Option<TargetReport>,
    q: Option<TargetReport>,
}

#[derive(Serialize)]
struct TargetReport {
    cutoff: f64,
    lattice_points: usize,
    lambda: f64,
    max_tail: f64,
    /// relative L∞ error against the configured potentials
    relative_linf_error: f64,
}

pub fn reconstruct(ctx: &Ctx, run: &mut RunDir) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let block = &cfg.reconstruct;
    let grid = ctx.setup.grid;
    let (a1, q1) = cfg.media(&grid, &cfg.potentials)?;
    let (a2, q2) = cfg.media(&grid, &block.potentials2)?;
    let load = |stem: &std::path::Path| io::read_near_field(stem).map_err(|e| CliError::from_core("config", e).with_parameter(stem.display().to_string()));
    let n1 = match &block.near_field_1 {
        Some(stem) => load(stem)?,
        None => ctx.near_field(&cfg.potentials, "reconstruct")?,
    };
    let mut n2 = match &block.near_field_2 {
        Some(stem) => load(stem)?,
        None => ctx.near_field(&block.potentials2, "reconstruct")?,
    };
    if block.noise > 0.0 {
        n2 = add_noise(&n2, block.noise, ctx.seed).stage("reconstruct")?;
        run.note(format!("operator-norm noise {} added to the second near-field matrix with seed {}", block.noise, ctx.seed));
    }
    let pc = ProbeContext { n1: &n1, n2: &n2, a1: &a1, a2: &a2 };
    let sup = [a1.field().sup_norm(), a2.field().sup_norm(), q1.field().sup_norm(), q2.field().sup_norm()]
        .into_iter()
        .fold(0.0, f64::max);
    let certified = sup <= block.born_threshold && block.near_field_1.is_none() && block.near_field_2.is_none();
    if !certified {
        run.note("uncertified: outside the validated Born regime or on external data");
    }
    let mut report = ErrorReport {
        certified,
        delta: 0.0,
        noise: block.noise,
        curl: None,
        q: None,
    };
    let mut curl_field = None;
    if block.targets.curl {
        ctx.log("reconstruct: curl");
        let r = reconstruct_curl(&pc, &block.config).stage("reconstruct")?;
        let truth = curl(a2.sub(&a1).stage("reconstruct")?.field());
        report.delta = r.delta;
        report.curl = Some(TargetReport {
            cutoff: r.cutoff,
            lattice_points: r.estimates[0].points.len(),
            lambda: r.lambda,
            max_tail: r.max_tail,
            relative_linf_error: r.relative_linf_error(&truth).stage("reconstruct")?,
        });
        run.tolerance("reconstruct.max_tail", r.max_tail);
        let files = io::write_vector_field(&run.path("curl"), &r.field, Some("curl(A2 - A1) estimate")).stage("output")?;
        run.track(files);
        curl_field = Some(r.field);
    }
    if block.targets.q {
        ctx.log("reconstruct: q");
        let correction = if block.config.q_magnetic_correction { curl_field.as_ref() } else { None };
        let r = reconstruct_q(&pc, &block.config, None, correction).stage("reconstruct")?;
        let truth = q2.sub(&q1).stage("reconstruct")?;
        report.delta = r.delta;
        report.q = Some(TargetReport {
            cutoff: r.cutoff,
            lattice_points: r.estimate.points.len(),
            lambda: r.lambda,
            max_tail: r.max_tail,
            relative_linf_error: r.relative_linf_error(&truth).stage("reconstruct")?,
        });
        run.tolerance("reconstruct.max_tail", r.max_tail);
        let files = io::write_fields(&run.path("q"), &[&r.field], Some("q2 - q1 estimate")).stage("output")?;
        run.track(files);
    }
    run.write_json("error_report.json", &report)?;
    Ok(())
}

type Medium = (MagneticPotential, ElectricPotential, NearFieldMatrix, Option<(FarFieldCoefficients, FarFieldData)>);

pub fn sweep(ctx: &Ctx, run: &mut RunDir) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let block = &cfg.sweep;
    let dirs = SphereGrid::new(1.0, block.far_directions.n_theta, block.far_directions.n_phi).stage("sweep")?;
    let mut cache: HashMap<String, Medium> = HashMap::new();
    let mut medium = |list: &[PotentialDescriptor]| -> Result<Medium, CliError> {
        let key = serde_json::to_string(list).map_err(|e| CliError::config("sweep", e.to_string()))?;
        if let Some(m) = cache.get(&key) {
            return Ok(m.clone());
        }
        let (a, q) = cfg.media(&ctx.setup.grid, list)?;
        let n = ctx.near_field(list, "sweep")?;
        let far = block.far_l_max.map(|l| far_pair(ctx, &a, &q, &dirs, l, "sweep")).transpose()?;
        let m = (a, q, n, far);
        cache.insert(key, m.clone());
        Ok(m)
    };
    let mut pairs = Vec::new();
    for spec in block.resolved_pairs() {
        let (a1, q1, n1, f1) = medium(&spec.potentials1)?;
        let (a2, q2, n2, f2) = medium(&spec.potentials2)?;
        let (far1, far2, far_data) = match (f1, f2) {
            (Some((c1, d1)), Some((c2, d2))) => (Some(c1), Some(c2), Some((d1, d2))),
            _ => (None, None, None),
        };
        pairs.push(SweepPair {
            id: spec.id.clone(),
            n1,
            n2,
            a1,
            a2,
            q_truth: q2.sub(&q1).stage("sweep")?,
            far1,
            far2,
            far_data,
        });
    }
    ctx.log(format!("sweep: {} pairs x {} noise levels", pairs.len(), block.noise.len()));
    let summary = stability_sweep(&pairs, &block.noise, &block.config, ctx.seed).stage("sweep")?;
    run.write("sweep.csv", summary.to_csv().as_bytes())?;
    run.write_json("sweep.json", &summary)?;
    let failures = summary.rows.iter().filter(|r| r.failure.is_some()).count();
    if failures > 0 {
        run.note(format!("{failures} sweep rows failed; see the failure column"));
    }
    run.note("constants in the stability estimates are non-constructive; exponents are fitted, not certified");
    Ok(())
}
