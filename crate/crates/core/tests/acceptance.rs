//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any fail.

use std::f64::consts::TAU;
use std::time::Instant;

use cartan_forge::field::{Chart, Point, ScalarField};
use cartan_forge::forms::KForm;
use cartan_forge::random::{random_field, random_form};
use cartan_forge::revolution::{
    big_phi_sq, build_surface, domain_extent, frame_bundle_cartan, integrate_beta_geodesic, integrate_geodesic,
    prime_integral_check, BetaForm, ConstantCurvature, GeodesicState, LiftOrientation, SurfaceOfRevolution,
};
use cartan_forge::sampling::{SampleBox, Sampling};
use cartan_forge::structures::{verify_cartan, CartanStructure};
use cartan_forge::transforms::*;
use cartan_forge::{Error, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

type Outcome = Result<(bool, String)>;

fn sup_form(a: &KForm, pts: &[Point]) -> Result<f64> {
    let mut m = 0.0f64;
    for p in pts {
        for x in a.eval(*p)? {
            m = m.max(x.abs());
        }
    }
    Ok(m)
}

fn bundle(s: &SurfaceOfRevolution, dom: &SampleBox) -> Result<(CartanStructure, Sampling, bool, f64)> {
    let sampling = Sampling::default_for(dom);
    let (cs, rep) = frame_bundle_cartan(s, LiftOrientation::Standard, Some(&sampling))?;
    Ok((cs, sampling, rep.pass, rep.residuals.max_sup()))
}

fn exterior_calculus() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2024);
    let pts = SampleBox::new([-1.0; 3], [1.0; 3]).random(100, 7);
    let g = Chart::Generic;
    let (mut dd, mut leib, mut mixed) = (0.0f64, 0.0f64, 0.0f64);
    for n in 0..20 {
        let k = n % 3;
        let u = random_form(&mut rng, k, 4, g);
        if k < 2 {
            dd = dd.max(sup_form(&u.exterior_derivative()?.exterior_derivative()?, &pts)?);
        }
        let v = random_form(&mut rng, if k == 2 { 0 } else { 1 }, 3, g);
        let lhs = u.wedge(&v)?.exterior_derivative()?;
        let a = u.exterior_derivative()?.wedge(&v)?;
        let b = u.wedge(&v.exterior_derivative()?)?;
        let rhs = if k % 2 == 0 { a.add(&b) } else { a.sub(&b) }?;
        leib = leib.max(sup_form(&lhs.sub(&rhs)?, &pts)?);
        let f = random_field(&mut rng, 4, g);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let d = f.partial(i).partial(j) - f.partial(j).partial(i);
            for p in &pts {
                mixed = mixed.max(d.eval(*p)?.abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let tol = 1e-10;
    Ok((
        dd < tol && leib < tol && mixed < tol && secs < 10.0,
        format!("d²={dd:.1e} leibniz={leib:.1e} mixed={mixed:.1e} time={secs:.2}s"),
    ))
}

fn lift_curvature() -> Outcome {
    let s = build_surface(1.5)?;
    let (cs, sampling, pass, sup) = bundle(&s, &s.default_box())?;
    let (_, rep) = verify_cartan(&cs.coframe, &sampling.clone().with_tol(1e-9))?;
    let mut rerr = 0.0f64;
    for k in 0..50 {
        let r = 0.1 + 2.9 * k as f64 / 49.0;
        let v = cs.r.eval([r, 0.7, 1.3])?;
        rerr = rerr.max((v - (1.5 - r * r / 4.0)).abs());
    }
    let sph = SurfaceOfRevolution::round_sphere();
    let (c1, s1, p1, _) = bundle(&sph, &sph.default_box())?;
    let one = sup_difference(&c1.r, &ScalarField::one(Chart::FrameBundle), &s1)?;
    let flat = SurfaceOfRevolution::flat();
    let (c0, s0, p0, _) = bundle(&flat, &flat.default_box())?;
    let zero = sup_difference(&c0.r, &ScalarField::zero(Chart::FrameBundle), &s0)?;
    Ok((
        pass && rep.pass && sup < 1e-9 && rerr < 1e-9 && p1 && p0 && one < 1e-9 && zero < 1e-9,
        format!("structure={sup:.1e} R-(3/2-r²/4)={rerr:.1e} sphere R-1={one:.1e} flat R={zero:.1e}"),
    ))
}

fn profile_closed_forms() -> Outcome {
    let s = build_surface(1.5)?;
    let (mut de, mut dp, mut sym) = (0.0f64, 0.0f64, 0.0f64);
    for k in 1..=600 {
        let r = 6.0 * k as f64 / 600.0;
        let (eta, _) = s.eta(r);
        let (phi, _) = s.phi(r);
        let oracle = r * (-r * r / 4.0).exp();
        de = de.max((eta - 1.0).abs());
        dp = dp.max((phi - oracle).abs());
        dp = dp.max((big_phi_sq(1.5, r).sqrt() * 2.0 - oracle).abs());
        let p = [r, 0.0, 0.0];
        sym = sym.max((s.eta_field().eval(p)? - 1.0).abs());
        sym = sym.max((s.phi_field().eval(p)? - oracle).abs());
    }
    Ok((
        de < 1e-12 && dp < 1e-12 && sym < 1e-12,
        format!("|η-1|={de:.1e} |φ-re^(-r²/4)|={dp:.1e} symbolic={sym:.1e}"),
    ))
}

fn eds_and_q() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for r0 in [1.25, 1.5, 2.0] {
        let s = build_surface(r0)?;
        let (cs, sampling, _, _) = bundle(&s, &s.default_box())?;
        let m = cs.r.exp();
        let eds = eds_residuals(&cs, Some(&m)).evaluate(&sampling)?;
        let res = eds.residuals.max_sup();
        let q = f_of_r(r0);
        let qerr = (eds.q_min - q).abs().max((eds.q_max - q).abs());
        ok &= res < 1e-8 && eds.q_spread < 1e-9 && qerr < 1e-9;
        detail.push(format!("R0={r0}: eds={res:.1e} Qspread={:.1e} Q-f={qerr:.1e}", eds.q_spread));
    }
    let (arg, min) = scan_f_minimum(-2.0, 3.0, 2001);
    ok &= (arg - 1.0).abs() < 1e-6 && (min + 0.5).abs() < 1e-12;
    detail.push(format!("argmin f={arg:.9} min={min}"));
    Ok((ok, detail.join("; ")))
}

fn landsberg() -> Outcome {
    let s = build_surface(1.5)?;
    let (cs, sampling, _, _) = bundle(&s, &s.default_box())?;
    let out = landsberg_from_cartan(&cs, 1.0, &sampling)?;
    let t = out.evaluate(&sampling)?.residuals;
    let names = ["J", "I_vs_formula", "K_vs_formula", "landsberg_I_w2"];
    let ok = out.report.pass && names.iter().all(|n| t.sup(n) < 1e-8);
    let detail = names.iter().map(|n| format!("{n}={:.1e}", t.sup(n))).collect::<Vec<_>>().join(" ");
    Ok((ok, detail))
}

fn j0_and_lemma42() -> Outcome {
    let s = build_surface(1.5)?;
    let (cs, sampling, _, _) = bundle(&s, &s.default_box())?;
    let m = cs.r.exp();
    let a = j0_identity_transform(&cs, &m, &sampling)?;
    let b = landsberg_from_cartan(&cs, 1.0, &sampling)?;
    let mut diff = 0.0f64;
    for (x, y) in [(&a.structure.i, &b.structure.i), (&a.structure.j, &b.structure.j), (&a.structure.k, &b.structure.k)] {
        diff = diff.max(sup_difference(x, y, &sampling)?);
    }
    for i in 0..3 {
        for j in 0..3 {
            let (x, y) = (&a.structure.coframe.rows()[i][j], &b.structure.coframe.rows()[i][j]);
            diff = diff.max(sup_difference(x, y, &sampling)?);
        }
    }
    let back = lemma42_cartan(&a.structure, &m, &sampling)?;
    let (_, rep) = verify_cartan(&back.structure.coframe, &sampling.clone().with_tol(1e-8))?;
    let rerr = sup_difference(&back.structure.r, &cs.r, &sampling)?;
    Ok((
        diff < 1e-9 && rep.pass,
        format!("j0 vs landsberg={diff:.1e} recovered structure={:.1e} R drift={rerr:.1e}", rep.residuals.max_sup()),
    ))
}

fn projective() -> Outcome {
    let lie = ["lie_e2_w1_wedge_w3", "lie_e2_I_w1_plus_J_w3", "I2_plus_J2_w2", "lie_e2_quadratic"];
    let z = ScalarField::zero(Chart::FrameBundle);

    let sph = SurfaceOfRevolution::round_sphere();
    let (cs, sampling, _, _) = bundle(&sph, &sph.default_box())?;
    let out = k1_projective(&cs, 1.0, &sampling)?;
    let t = out.evaluate(&sampling)?.residuals;
    let (i0, j0) = (sup_difference(&out.structure.i, &z, &sampling)?, sup_difference(&out.structure.j, &z, &sampling)?);
    let lie_s = lie.iter().map(|n| t.sup(n)).fold(0.0, f64::max);
    let mut ok = t.sup("K_minus_1") < 1e-9 && i0 < 1e-9 && j0 < 1e-9 && lie_s < 1e-8;
    let mut detail = format!("sphere K-1={:.1e} I={i0:.1e} J={j0:.1e} lie={lie_s:.1e}", t.sup("K_minus_1"));

    // Compact part of {r < √6}, where R > 0.
    let s = build_surface(1.5)?;
    let dom = SampleBox::new([0.1, 0.0, 0.0], [2.4, TAU, TAU]);
    let (cs, sampling, _, _) = bundle(&s, &dom)?;
    for sign in [1.0, -1.0] {
        let out = k1_projective(&cs, sign, &sampling)?;
        let t = out.evaluate(&sampling)?.residuals;
        let lie_b = lie.iter().map(|n| t.sup(n)).fold(0.0, f64::max);
        let (k, i, j) = (t.sup("K_minus_1"), t.sup("I_vs_formula"), t.sup("J_vs_formula"));
        ok &= k < 1e-7 && i < 1e-7 && j < 1e-7 && lie_b < 1e-8;
        detail.push_str(&format!("; 3/2 sign={sign:+} K-1={k:.1e} I={i:.1e} J={j:.1e} lie={lie_b:.1e}"));
    }
    Ok((ok, detail))
}

fn torsion_and_subst1() -> Outcome {
    let s = build_surface(1.5)?;
    let (cs, sampling, _, _) = bundle(&s, &s.default_box())?;
    let id = TransformMatrix::identity(Chart::FrameBundle);
    let fs = cs.as_finsler();
    let tor = torsion_terms(&id, &cs, &fs.i, &fs.j, &fs.k).as_set().evaluate(&sampling)?.max_sup();
    let out = landsberg_from_cartan(&cs, 1.0, &sampling)?;
    let sub = subst1_residuals(&out.matrix, &cs, &out.structure).evaluate(&sampling)?.max_sup();
    Ok((tor < 1e-10 && sub < 1e-7, format!("identity torsion={tor:.1e} landsberg subst1={sub:.1e}")))
}

fn random_states(s: &SurfaceOfRevolution, n: usize, seed: u64) -> Vec<GeodesicState> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = rng.gen_range(0.3..3.0);
            let theta = rng.gen_range(0.0..TAU);
            // Keep |sin ψ| ≥ 1/4 so the orbit stays clear of the coordinate pole.
            let psi = rng.gen_range(0.2527..(std::f64::consts::PI - 0.2527));
            let psi = if rng.gen_bool(0.5) { psi } else { -psi };
            GeodesicState::unit_speed(s, r, theta, psi)
        })
        .collect()
}

fn geodesic_conservation() -> Outcome {
    let s = build_surface(1.5)?;
    let start = Instant::now();
    let drifts: Vec<(f64, f64)> = random_states(&s, 20, 99)
        .into_par_iter()
        .map(|init| integrate_geodesic(&s, init, 50.0, 1e-3).map(|t| (t.f_drift(), t.e_drift())))
        .collect::<Result<_>>()?;
    let secs = start.elapsed().as_secs_f64();
    let f = drifts.iter().map(|d| d.0).fold(0.0, f64::max);
    let e = drifts.iter().map(|d| d.1).fold(0.0, f64::max);
    Ok((f < 1e-8 && e < 1e-8 && secs < 30.0, format!("max F drift={f:.1e} max E drift={e:.1e} time={secs:.2}s")))
}

fn prime_integral() -> Outcome {
    let s = build_surface(1.5)?;
    let mut rng = StdRng::seed_from_u64(5);
    let trajs = (0..5)
        .map(|_| {
            let init = GeodesicState::unit_speed(&s, rng.gen_range(0.6..2.0), 0.0, rng.gen_range(0.4..2.7));
            integrate_geodesic(&s, init, 20.0, 1e-3)
        })
        .collect::<Result<Vec<_>>>()?;
    let rep = prime_integral_check(&s, &trajs, LiftOrientation::Clockwise, 50)?;
    let meridian = integrate_geodesic(&s, GeodesicState::unit_speed(&s, 1.0, 0.3, 0.0), 5.0, 1e-3)?;
    let mer = prime_integral_check(&s, &[meridian], LiftOrientation::Clockwise, 10)?;
    let m = &mer.trajectories[0];
    let ok = rep.max_spread < 1e-6
        && rep.cross_spread < 1e-6
        && rep.negative
        && rep.trajectories.iter().all(|t| !t.meridian)
        && m.meridian
        && m.max_abs_r1_exp_r < 1e-8;
    Ok((
        ok,
        format!(
            "rho={:.10} along={:.1e} across={:.1e} |rho|-e^(3/2)={:.3e} |rho|-e^(3/2)/2={:.1e} matches {} meridian |R_1e^R|={:.1e}",
            rep.rho, rep.max_spread, rep.cross_spread, rep.diff_e32, rep.diff_half_e32, rep.matches, m.max_abs_r1_exp_r
        ),
    ))
}

fn extent() -> Outcome {
    let r0 = 1.25;
    let t = domain_extent(r0)?;
    let at_t = big_phi_sq(r0, t).abs();
    let positive = (1..=1000).all(|k| big_phi_sq(r0, t * k as f64 / 1001.0) > 0.0);
    let bracket = big_phi_sq(r0, t * (1.0 - 1e-6)) > 0.0 && big_phi_sq(r0, t * (1.0 + 1e-6)) < 0.0;
    let infinite = matches!(domain_extent(1.5), Err(Error::Precondition(ref m)) if m.contains("infinite"));
    Ok((
        at_t < 1e-12 && positive && bracket && infinite,
        format!("T={t:.12} |Φ(T)²|={at_t:.1e} positive={positive} bracketed={bracket} R0=3/2 infinite={infinite}"),
    ))
}

fn beta_geodesic() -> Outcome {
    let s = build_surface(1.5)?;
    let mut reduce = 0.0f64;
    let mut speed = 0.0f64;
    let forced = BetaForm::parse("0.1*r", "0.2*sin(theta)")?;
    for init in random_states(&s, 4, 17) {
        let a = integrate_geodesic(&s, init, 20.0, 1e-3)?;
        let b = integrate_beta_geodesic(&s, &BetaForm::zero(), init, 20.0, 1e-3)?;
        for (x, y) in a.states.iter().zip(&b.states) {
            reduce = reduce.max((x.r - y.r).abs()).max((x.theta - y.theta).abs());
        }
        for traj in [
            integrate_beta_geodesic(&s, &forced, init, 20.0, 1e-3)?,
            integrate_beta_geodesic(&s, &ConstantCurvature(0.4), init, 20.0, 1e-3)?,
        ] {
            speed = speed.max(traj.e.iter().map(|e| (e - 1.0).abs()).fold(0.0, f64::max));
        }
    }
    Ok((reduce < 1e-9 && speed < 1e-8, format!("β≡0 vs geodesic={reduce:.1e} max |E-1|={speed:.1e}")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("exterior calculus identities", exterior_calculus),
        ("frame-bundle lift and curvature", lift_curvature),
        ("profile closed forms", profile_closed_forms),
        ("EDS and conserved Q", eds_and_q),
        ("Landsberg structure", landsberg),
        ("J = 0 transform and Cartan recovery", j0_and_lemma42),
        ("K = 1 projective transform", projective),
        ("torsion and substitution identities", torsion_and_subst1),
        ("geodesic conservation", geodesic_conservation),
        ("prime integral", prime_integral),
        ("domain extent", extent),
        ("prescribed-curvature curves", beta_geodesic),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = match run() {
            Ok(x) => x,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!("{} {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, n + 1);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
