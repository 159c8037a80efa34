//! R-Cartan and (I,J,K)-generalized Finsler structures.
//!
//! Cartan:  dα¹ = α²∧α³,  dα² = −α¹∧α³,  dα³ = R α¹∧α².
//! Finsler: dω¹ = −I ω¹∧ω³ + ω²∧ω³,  dω² = −ω¹∧ω³,
//!          dω³ = K ω¹∧ω² − J ω¹∧ω³.
//!
//! In the cyclic coframe basis `(a2∧a3, a3∧a1, a1∧a2)` these read
//! `dα¹ = (1,0,0)`, `dα² = (0,1,0)`, `dα³ = (0,0,R)` and
//! `dω¹ = (1,I,0)`, `dω² = (0,1,0)`, `dω³ = (0,J,K)`.

use crate::coframe::Coframe;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::forms::{KForm, VectorField};
use crate::report::{ResidualSet, StructureReport};
use crate::sampling::{require_positive, Sampling};

#[derive(Debug, Clone)]
pub struct CartanStructure {
    pub coframe: Coframe,
    pub r: ScalarField,
}

#[derive(Debug, Clone)]
pub struct FinslerStructure {
    pub coframe: Coframe,
    pub i: ScalarField,
    pub j: ScalarField,
    pub k: ScalarField,
}

impl CartanStructure {
    /// A Cartan structure is the (0, 0, R) generalized Finsler structure on
    /// the same coframe.
    pub fn as_finsler(&self) -> FinslerStructure {
        let chart = self.coframe.chart();
        FinslerStructure {
            coframe: self.coframe.clone(),
            i: ScalarField::zero(chart),
            j: ScalarField::zero(chart),
            k: self.r.clone(),
        }
    }

    /// Directional derivative `f_{i}` with respect to α, zero-based.
    pub fn d(&self, f: &ScalarField, i: usize) -> ScalarField {
        self.coframe.d(f, i)
    }
}

impl FinslerStructure {
    pub fn d(&self, f: &ScalarField, i: usize) -> ScalarField {
        self.coframe.d(f, i)
    }
}

fn d_expanded(cf: &Coframe, i: usize) -> Result<[ScalarField; 3]> {
    let d = cf.form(i).exterior_derivative()?;
    cf.expand_two_form(&d)
}

fn cartan_residuals(cf: &Coframe) -> Result<(ResidualSet, ScalarField)> {
    let [a, b, c] = d_expanded(cf, 0)?;
    let mut set = ResidualSet::new();
    set.push_group("d_alpha1", vec![a - 1.0, b, c]);
    let [a, b, c] = d_expanded(cf, 1)?;
    set.push_group("d_alpha2", vec![a, b - 1.0, c]);
    let [a, b, r] = d_expanded(cf, 2)?;
    set.push_group("d_alpha3_off_basis", vec![a, b]);
    Ok((set, r))
}

/// Check the Cartan structure equations on the sample set and extract `R`
/// as the `a1∧a2` coefficient of `dα³`.
///
/// Failing residuals are recorded in the report, not returned as errors.
pub fn verify_cartan(cf: &Coframe, sampling: &Sampling) -> Result<(CartanStructure, StructureReport)> {
    cf.check_nonsingular(&sampling.points)?;
    let (mut set, r) = cartan_residuals(cf)?;
    set.push("R_3", cf.d(&r, 2));
    let report = StructureReport::build("cartan", &set, &[("R", &r)], sampling)?;
    Ok((
        CartanStructure {
            coframe: cf.clone(),
            r,
        },
        report,
    ))
}

/// Check `dω² = −ω¹∧ω³` and the fixed coefficients of `dω¹`, `dω³`, and
/// extract `I` from `dω¹`, `J` and `K` from `dω³`.
pub fn extract_invariants(cf: &Coframe, sampling: &Sampling) -> Result<(FinslerStructure, StructureReport)> {
    cf.check_nonsingular(&sampling.points)?;
    let mut set = ResidualSet::new();
    let [a, i, c] = d_expanded(cf, 0)?;
    set.push_group("d_omega1", vec![a - 1.0, c]);
    let [a, b, c] = d_expanded(cf, 1)?;
    set.push_group("d_omega2", vec![a, b - 1.0, c]);
    let [a, j, k] = d_expanded(cf, 2)?;
    set.push("d_omega3_off_basis", a);
    let report = StructureReport::build("finsler", &set, &[("I", &i), ("J", &j), ("K", &k)], sampling)?;
    Ok((
        FinslerStructure {
            coframe: cf.clone(),
            i,
            j,
            k,
        },
        report,
    ))
}

/// Bianchi residuals `r1 = J − I_{ω2}` and `r2 = K_{ω3} + K·I + J_{ω2}`.
pub fn check_bianchi(fs: &FinslerStructure) -> ResidualSet {
    let mut set = ResidualSet::new();
    set.push("bianchi_r1", &fs.j - fs.d(&fs.i, 1));
    set.push(
        "bianchi_r2",
        fs.d(&fs.k, 2) + &fs.k * &fs.i + fs.d(&fs.j, 1),
    );
    set
}

/// Ricci identities for second coframe derivatives of `f`, where `f_{ij}`
/// differentiates along `i` first:
/// `f_1 + f_{32} − f_{23}`, `f_2 + f_{13} − f_{31}`, `R f_3 + f_{21} − f_{12}`.
pub fn check_ricci(f: &ScalarField, cs: &CartanStructure) -> ResidualSet {
    let cf = &cs.coframe;
    let fi = cf.derivatives(f);
    let fij = |i: usize, j: usize| cf.d(fi.get(i), j);
    let mut set = ResidualSet::new();
    set.push("ricci_1", &fi.f1 + fij(2, 1) - fij(1, 2));
    set.push("ricci_2", &fi.f2 + fij(0, 2) - fij(2, 0));
    set.push("ricci_3", &cs.r * &fi.f3 + fij(1, 0) - fij(0, 1));
    set
}

/// `*d log v = −(v_2/v)α¹ + (v_1/v)α²` and
/// `Δ log v = [(v_{11} + v_{22})v − (v_1² + v_2²)]/v²`.
pub fn hodge_laplacian(v: &ScalarField, cs: &CartanStructure, sampling: &Sampling) -> Result<(KForm, ScalarField)> {
    require_positive(v, sampling, "v")?;
    let cf = &cs.coframe;
    let dv = cf.derivatives(v);
    let chart = cf.chart();
    let star = cf.combine_one_form(&[-(&dv.f2 / v), &dv.f1 / v, ScalarField::zero(chart)]);
    let v11 = cf.d(&dv.f1, 0);
    let v22 = cf.d(&dv.f2, 1);
    let lap = ((v11 + v22) * v - (&dv.f1 * &dv.f1 + &dv.f2 * &dv.f2)) / (v * v);
    Ok((star, lap))
}

/// The conformally related structure `(vα¹, vα², α³ − *d log v)` with
/// `R̃ = (R − Δ log v)/v²`. Requires `v > 0` and `v_3 = 0` on the samples;
/// a nonzero `v_3` is reported as a violation rather than extended.
pub fn conformal_rescale(cs: &CartanStructure, v: &ScalarField, sampling: &Sampling) -> Result<CartanStructure> {
    let v3 = cs.d(v, 2);
    let stats = crate::sampling::field_stats(&v3, &sampling.points)?;
    if stats.sup > sampling.tol {
        return Err(Error::Precondition(format!(
            "v_3 = {} exceeds tolerance {} at {:?}",
            stats.sup, sampling.tol, stats.argmax
        )));
    }
    let (star, lap) = hodge_laplacian(v, cs, sampling)?;
    let a = cs.coframe.forms();
    let third = a[2].sub(&star)?;
    let coframe = Coframe::from_forms([&a[0].scale(v), &a[1].scale(v), &third], *cs.coframe.domain())?;
    let r = (&cs.r - lap) / (v * v);
    Ok(CartanStructure { coframe, r })
}

fn symmetric(u: &KForm, v: &KForm) -> Vec<ScalarField> {
    let (a, b) = (u.components(), v.components());
    let mut out = Vec::with_capacity(6);
    for i in 0..3 {
        for j in i..3 {
            out.push(&a[i] * &b[j] + &a[j] * &b[i]);
        }
    }
    out
}

fn add_groups(a: Vec<ScalarField>, b: Vec<ScalarField>) -> Vec<ScalarField> {
    a.into_iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Residuals of the K = 1 Lie-derivative identities along `ê2`:
/// `L(ω¹∧ω³) = 0`, `L(Iω¹ + Jω³) = 0`, `(I² + J²)_{ω2} = 0`, and the
/// polarized form `L ω¹ ⊙ ω¹ + L ω³ ⊙ ω³ = 0` of `L[(ω¹)² + (ω³)²] = 0`.
/// The precondition `K − 1` is reported alongside.
pub fn lie_derivative_checks(fs: &FinslerStructure) -> Result<ResidualSet> {
    let cf = &fs.coframe;
    let e2: VectorField = cf.dual_vector(1);
    let w = cf.forms();
    let mut set = ResidualSet::new();
    set.push("K_minus_1", &fs.k - 1.0);
    let area = w[0].wedge(&w[2])?.lie_derivative(&e2);
    set.push_group("lie_e2_w1_wedge_w3", area.components().to_vec());
    let phi = w[0].scale(&fs.i).add(&w[2].scale(&fs.j))?;
    set.push_group("lie_e2_I_w1_plus_J_w3", phi.lie_derivative(&e2).components().to_vec());
    let norm = &fs.i * &fs.i + &fs.j * &fs.j;
    set.push("I2_plus_J2_w2", fs.d(&norm, 1));
    let l1 = w[0].lie_derivative(&e2);
    let l3 = w[2].lie_derivative(&e2);
    set.push_group("lie_e2_quadratic", add_groups(symmetric(&l1, &w[0]), symmetric(&l3, &w[2])));
    Ok(set)
}

/// Lemma 4.1 check along `ê1`: the symmetric tensor
/// `L[(mω²)² + (ω³)²]` (polarized), its preconditions `m_{ω1}` and `m² − K`,
/// and its agreement with the closed form
/// `2[m m_{ω1} (ω²)² + (K − m²) ω²ω³ − J (ω³)²]`.
pub fn lemma41_checks(fs: &FinslerStructure, m: &ScalarField) -> Result<ResidualSet> {
    let cf = &fs.coframe;
    let e1: VectorField = cf.dual_vector(0);
    let w = cf.forms();
    let mw2 = w[1].scale(m);
    let l_mw2 = mw2.lie_derivative(&e1);
    let l_w3 = w[2].lie_derivative(&e1);
    let lie = add_groups(symmetric(&l_mw2, &mw2), symmetric(&l_w3, &w[2]));

    let m1 = cf.d(m, 0);
    let closed = {
        let a = symmetric(&w[1], &w[1]);
        let b = symmetric(&w[1], &w[2]);
        let c = symmetric(&w[2], &w[2]);
        let ca = m * &m1;
        let cb = &fs.k - m * m;
        a.into_iter()
            .zip(b)
            .zip(c)
            .map(|((a, b), c)| &ca * a + &cb * b - &fs.j * c)
            .collect::<Vec<_>>()
    };
    let mut set = ResidualSet::new();
    set.push("m_w1", m1);
    set.push("m2_minus_K", m * m - &fs.k);
    set.push_group("lie_e1_quadratic", lie.clone());
    set.push_group(
        "lie_e1_quadratic_vs_closed_form",
        lie.into_iter().zip(closed).map(|(l, c)| l - c).collect(),
    );
    Ok(set)
}
