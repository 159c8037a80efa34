use std::path::Path;

use cartan_forge::coframe::Coframe;
use cartan_forge::field::ScalarField;
use cartan_forge::io;
use cartan_forge::report::ResidualTable;
use cartan_forge::revolution::{
    build_surface, conserved_quantities, domain_extent, integrate_beta_geodesic, integrate_geodesic,
    prime_integral_check, BetaForm, ConstantCurvature, Forcing, GeodesicState, LiftOrientation, Trajectory,
};
use cartan_forge::sampling::Sampling;
use cartan_forge::scenes;
use cartan_forge::structures::{check_bianchi, extract_invariants, verify_cartan, CartanStructure, FinslerStructure};
use cartan_forge::transforms::{self, TransformMatrix};
use cartan_forge::{Error, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::json;

use crate::args::{Case, Command, Kind, OrbitArgs, SampleArgs};
use crate::report::{Check, RunReport};

/// Read a coframe file; if it does not exist but its file stem names a
/// built-in scene, use the scene.
fn load_coframe(path: &Path, sa: &SampleArgs) -> Result<Coframe> {
    if path.exists() {
        return io::read_coframe(path);
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    match scenes::scene(stem, sa.orientation.into()) {
        Ok(s) => Ok(s.coframe),
        Err(_) => io::read_coframe(path),
    }
}

fn sampling_for(cf: &Coframe, sa: &SampleArgs, seed: u64, report: &mut RunReport) -> Result<Sampling> {
    let mut dom = *cf.domain();
    for corner in [&sa.lo, &sa.hi].into_iter().flatten() {
        if corner.len() != 3 {
            return Err(Error::Input(format!("--lo/--hi take three comma-separated numbers, got {corner:?}")));
        }
    }
    if let Some(lo) = &sa.lo {
        dom.lo = [lo[0], lo[1], lo[2]];
    }
    if let Some(hi) = &sa.hi {
        dom.hi = [hi[0], hi[1], hi[2]];
    }
    if !dom.is_valid() {
        return Err(Error::Input(format!("invalid sampling box {dom:?}")));
    }
    let sampling = match sa.random {
        Some(n) if n > 0 => Sampling::random(&dom, n, seed, sa.tol),
        Some(_) => return Err(Error::Input("--random needs at least one point".into())),
        None => Sampling::grid(&dom, sa.samples as usize, sa.tol),
    };
    report.sampling = Some(json!({
        "box": dom,
        "mode": if sa.random.is_some() { "random" } else { "grid" },
        "points": sampling.points.len(),
        "tol": sa.tol,
        "seed": seed,
    }));
    Ok(sampling)
}

fn field(text: &str, cf: &Coframe) -> Result<ScalarField> {
    Ok(ScalarField::parse(text, cf.chart())?)
}

fn require<'a, T>(opt: &'a Option<T>, flag: &str) -> Result<&'a T> {
    opt.as_ref().ok_or_else(|| Error::Input(format!("this case needs --{flag}")))
}

fn load_cartan(path: &Path, sa: &SampleArgs, seed: u64, report: &mut RunReport) -> Result<(CartanStructure, Sampling)> {
    let cf = load_coframe(path, sa)?;
    let sampling = sampling_for(&cf, sa, seed, report)?;
    let (cs, rep) = verify_cartan(&cf, &sampling)?;
    report.check("cartan_input", Check::table(&rep.residuals, sampling.tol));
    Ok((cs, sampling))
}

fn load_finsler(path: &Path, sa: &SampleArgs, seed: u64, report: &mut RunReport) -> Result<(FinslerStructure, Sampling)> {
    let cf = load_coframe(path, sa)?;
    let sampling = sampling_for(&cf, sa, seed, report)?;
    let (fs, rep) = extract_invariants(&cf, &sampling)?;
    report.check("finsler_input", Check::table(&rep.residuals, sampling.tol));
    report.result("input_invariants", &rep.functions)?;
    Ok((fs, sampling))
}

pub fn run(cmd: &Command, seed: u64, report: &mut RunReport) -> Result<()> {
    match cmd {
        Command::Verify { coframe, kind, sampling } => {
            let cf = load_coframe(coframe, sampling)?;
            let s = sampling_for(&cf, sampling, seed, report)?;
            let rep = match kind {
                Kind::Cartan => verify_cartan(&cf, &s)?.1,
                Kind::Finsler => extract_invariants(&cf, &s)?.1,
            };
            report.check(&rep.kind, Check::table(&rep.residuals, s.tol));
            report.result("structure", &rep)?;
        }
        Command::Invariants { coframe, sampling } => {
            let cf = load_coframe(coframe, sampling)?;
            let s = sampling_for(&cf, sampling, seed, report)?;
            let (_, rep) = extract_invariants(&cf, &s)?;
            report.check("finsler", Check::table(&rep.residuals, s.tol));
            report.result("structure", &rep)?;
        }
        Command::Bianchi { coframe, sampling } => {
            let cf = load_coframe(coframe, sampling)?;
            let s = sampling_for(&cf, sampling, seed, report)?;
            let (fs, rep) = extract_invariants(&cf, &s)?;
            report.check("finsler", Check::table(&rep.residuals, s.tol));
            report.check("bianchi", Check::table(&check_bianchi(&fs).evaluate(&s)?, s.tol));
            report.result("structure", &rep)?;
        }
        Command::Transform {
            case,
            cartan,
            finsler,
            matrix,
            m,
            f,
            c,
            sign,
            out,
            sampling,
        } => {
            let built = transform(*case, cartan, finsler, matrix, m, f, *c, *sign, sampling, seed, report)?;
            if let (Some(cf), Some(path)) = (built, out) {
                io::write_coframe(&cf, Some(format!("{case:?} transform output")), path)?;
                report.artifacts.push(path.display().to_string());
            }
        }
        Command::Eds { cartan, m, sampling } => {
            let (cs, s) = load_cartan(cartan, sampling, seed, report)?;
            let m = m.as_deref().map(|t| field(t, &cs.coframe)).transpose()?;
            let eds = transforms::eds_residuals(&cs, m.as_ref()).evaluate(&s)?;
            report.check("eds", Check::table(&eds.residuals, s.tol));
            report.result("Q", &json!({"min": eds.q_min, "max": eds.q_max, "spread": eds.q_spread}))?;
        }
        Command::Geodesic { orbit, drift_tol } => {
            let (traj, s) = orbit_run(orbit, None)?;
            report.check("F_drift", Check::scalar(traj.f_drift(), *drift_tol));
            report.check("E_drift", Check::scalar(traj.e_drift(), *drift_tol));
            orbit_results(&traj, &s, orbit, report)?;
        }
        Command::BetaGeodesic {
            orbit,
            beta_r,
            beta_theta,
            kg,
            drift_tol,
        } => {
            let forcing: Box<dyn Forcing> = match kg {
                Some(k) => Box::new(ConstantCurvature(*k)),
                None => Box::new(BetaForm::parse(beta_r, beta_theta)?),
            };
            let (traj, s) = orbit_run(orbit, Some(forcing.as_ref()))?;
            let speed = traj.e.iter().map(|e| (e - 1.0).abs()).fold(0.0, f64::max);
            report.check("unit_speed", Check::scalar(speed, *drift_tol));
            orbit_results(&traj, &s, orbit, report)?;
        }
        Command::Extent { r0 } => {
            if !(*r0 > 1.0) {
                return Err(Error::Precondition(format!("R0 must exceed 1, got {r0}")));
            }
            if *r0 >= 1.5 {
                report.result("extent", &json!({"R0": r0, "infinite": true, "T": null}))?;
            } else {
                let t = domain_extent(*r0)?;
                let at = cartan_forge::revolution::big_phi_sq(*r0, t);
                let beyond = cartan_forge::revolution::big_phi_sq(*r0, t + 1e-9);
                let positive = (1..=1000).all(|k| cartan_forge::revolution::big_phi_sq(*r0, t * k as f64 / 1001.0) > 0.0);
                report.check("phi_sq_at_T", Check::scalar(at.abs(), 1e-12));
                report.check("sign_change", Check::flag(at >= 0.0 && beyond <= 0.0));
                report.check("positive_inside", Check::flag(positive));
                report.result("extent", &json!({"R0": r0, "infinite": false, "T": t, "phi_sq_at_T": at}))?;
            }
        }
        Command::ScanR0 { lo, hi, samples, r0 } => {
            if !(lo < hi) || *samples < 2 {
                return Err(Error::Input("need lo < hi and at least 2 samples".into()));
            }
            let (arg, min) = transforms::scan_f_minimum(*lo, *hi, *samples);
            report.result("f_minimum", &json!({"R": arg, "f": min}))?;
            let rows: Vec<_> = r0
                .iter()
                .map(|&r| {
                    let t = domain_extent(r).ok();
                    json!({"R0": r, "Q": transforms::f_of_r(r), "T": t, "infinite": r >= 1.5})
                })
                .collect();
            report.result("table", &rows)?;
        }
        Command::PrimeIntegral {
            r0,
            count,
            t_end,
            step,
            stride,
            orientation,
            tol,
        } => {
            let s = build_surface(*r0)?;
            let mut rng = StdRng::seed_from_u64(seed);
            let mut trajs = Vec::with_capacity(*count);
            for _ in 0..*count {
                let r = rng.gen_range(0.6..2.0);
                let psi = rng.gen_range(0.4..2.7);
                let init = GeodesicState::unit_speed(&s, r, 0.0, psi);
                trajs.push(integrate_geodesic(&s, init, *t_end, *step)?);
            }
            let o: LiftOrientation = (*orientation).into();
            let rep = prime_integral_check(&s, &trajs, o, (*stride).max(1))?;
            report.check("spread_along", Check::scalar(rep.max_spread, *tol));
            report.check("spread_across", Check::scalar(rep.cross_spread, *tol));
            report.result("prime_integral", &rep)?;
        }
        Command::Scene {
            names,
            all,
            dir,
            orientation,
        } => {
            let mut list: Vec<String> = names.clone();
            if *all {
                list.extend(scenes::STANDARD_SCENES.iter().map(|s| s.to_string()));
            }
            if list.is_empty() {
                return Err(Error::Input("name at least one scene or pass --all".into()));
            }
            std::fs::create_dir_all(dir).map_err(|source| Error::Io {
                context: format!("creating {}", dir.display()),
                source,
            })?;
            for name in list {
                let sc = scenes::scene(&name, (*orientation).into())?;
                let path = dir.join(format!("{}.cf", sc.name));
                io::write_coframe(&sc.coframe, Some(scenes::describe(&sc)), &path)?;
                report.artifacts.push(path.display().to_string());
            }
        }
    }
    Ok(())
}

fn orbit_run(
    o: &OrbitArgs,
    forcing: Option<&dyn Forcing>,
) -> Result<(Trajectory, cartan_forge::revolution::SurfaceOfRevolution)> {
    let s = build_surface(o.r0_param)?;
    let init = GeodesicState::unit_speed(&s, o.r0, o.theta0, o.psi0);
    let traj = match forcing {
        None => integrate_geodesic(&s, init, o.t_end, o.step)?,
        Some(f) => integrate_beta_geodesic(&s, f, init, o.t_end, o.step)?,
    };
    Ok((traj, s))
}

fn orbit_results(
    traj: &Trajectory,
    s: &cartan_forge::revolution::SurfaceOfRevolution,
    o: &OrbitArgs,
    report: &mut RunReport,
) -> Result<()> {
    let (f0, e0) = conserved_quantities(s, &traj.states[0]);
    let last = traj.states.last().expect("nonempty trajectory");
    report.result(
        "trajectory",
        &json!({
            "samples": traj.len(),
            "F0": f0,
            "E0": e0,
            "F_spread": traj.f_spread(),
            "E_spread": traj.e_spread(),
            "final": last,
        }),
    )?;
    if let Some(path) = &o.out {
        io::export_csv(traj, path)?;
        report.artifacts.push(path.display().to_string());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn transform(
    case: Case,
    cartan: &Option<std::path::PathBuf>,
    finsler: &Option<std::path::PathBuf>,
    matrix: &Option<std::path::PathBuf>,
    m: &Option<String>,
    f: &Option<String>,
    c: f64,
    sign: f64,
    sa: &SampleArgs,
    seed: u64,
    report: &mut RunReport,
) -> Result<Option<Coframe>> {
    let finsler_out = |t: transforms::FinslerTransform, s: &Sampling, report: &mut RunReport| -> Result<Option<Coframe>> {
        let tables = t.evaluate(s)?;
        report.check("structure", Check::table(&t.report.residuals, s.tol));
        report.check("residuals", Check::table(&tables.residuals, s.tol));
        report.precondition("preconditions", Check::table(&tables.preconditions, s.tol));
        report.result("invariants", &t.report.functions)?;
        report.result("sample_points", &t.report.sample_points)?;
        Ok(Some(t.structure.coframe))
    };
    let cartan_out = |t: transforms::CartanTransform, s: &Sampling, report: &mut RunReport| -> Result<Option<Coframe>> {
        let tables = t.evaluate(s)?;
        report.check("structure", Check::table(&t.report.residuals, s.tol));
        report.check("residuals", Check::table(&tables.residuals, s.tol));
        report.precondition("preconditions", Check::table(&tables.preconditions, s.tol));
        report.result("R", &t.report.functions)?;
        report.result("sample_points", &t.report.sample_points)?;
        Ok(Some(t.structure.coframe))
    };
    match case {
        Case::K1Id | Case::K1Conformal => {
            let (fs, s) = load_finsler(require(finsler, "finsler")?, sa, seed, report)?;
            let m = match (case, m) {
                (Case::K1Id, _) => ScalarField::one(fs.coframe.chart()),
                (_, m) => field(require(m, "m")?, &fs.coframe)?,
            };
            cartan_out(transforms::k1_transform(&fs, &m, &s)?, &s, report)
        }
        Case::K1Projective => {
            let (cs, s) = load_cartan(require(cartan, "cartan")?, sa, seed, report)?;
            finsler_out(transforms::k1_projective(&cs, sign, &s)?, &s, report)
        }
        Case::J0Id => {
            let (cs, s) = load_cartan(require(cartan, "cartan")?, sa, seed, report)?;
            let m = field(require(m, "m")?, &cs.coframe)?;
            finsler_out(transforms::j0_identity_transform(&cs, &m, &s)?, &s, report)
        }
        Case::J0Conformal => {
            let (cs, s) = load_cartan(require(cartan, "cartan")?, sa, seed, report)?;
            let m = field(require(m, "m")?, &cs.coframe)?;
            let f = field(require(f, "f")?, &cs.coframe)?;
            finsler_out(transforms::j0_conformal_transform(&cs, &m, &f, &s)?, &s, report)
        }
        Case::Landsberg => {
            let (cs, s) = load_cartan(require(cartan, "cartan")?, sa, seed, report)?;
            finsler_out(transforms::landsberg_from_cartan(&cs, c, &s)?, &s, report)
        }
        Case::Lemma42 => {
            let (fs, s) = load_finsler(require(finsler, "finsler")?, sa, seed, report)?;
            let m = field(require(m, "m")?, &fs.coframe)?;
            cartan_out(transforms::lemma42_cartan(&fs, &m, &s)?, &s, report)
        }
        Case::Torsion => {
            let (cs, s) = load_cartan(require(cartan, "cartan")?, sa, seed, report)?;
            let fs = match finsler {
                Some(p) => {
                    let cf = load_coframe(p, sa)?;
                    let (fs, rep) = extract_invariants(&cf, &s)?;
                    report.check("finsler_input", Check::table(&rep.residuals, s.tol));
                    fs
                }
                None => cs.as_finsler(),
            };
            let a = match matrix {
                Some(p) => io::read_matrix(p)?,
                None => TransformMatrix::identity(cs.coframe.chart()),
            };
            a.check_nonsingular(&s)?;
            let omega = a.apply(&cs.coframe);
            let mut diff = cartan_forge::report::ResidualSet::new();
            for i in 0..3 {
                let rows = (omega.rows()[i].clone(), fs.coframe.rows()[i].clone());
                diff.push_group(
                    format!("omega{}_minus_A_alpha", i + 1),
                    (0..3).map(|k| &rows.1[k] - &rows.0[k]).collect(),
                );
            }
            report.precondition("omega_equals_A_alpha", Check::table(&diff.evaluate(&s)?, s.tol));
            let subst = transforms::subst1_residuals(&a, &cs, &fs).evaluate(&s)?;
            report.check("subst1", Check::table(&subst, s.tol));
            let torsion: ResidualTable = transforms::torsion_terms(&a, &cs, &fs.i, &fs.j, &fs.k).as_set().evaluate(&s)?;
            report.result("torsion", &torsion)?;
            Ok(None)
        }
    }
}
