//! Coframe changes `ω = Aα` between Cartan and generalized Finsler
//! structures.
//!
//! Subscripts on `a_ij`, `m`, `f`, `R` are directional derivatives along the
//! α-coframe unless written `_{ωk}`, which means along the constructed
//! ω-coframe. Second derivatives `f_{ij}` differentiate along `i` first.
//!
//! Hard errors are reserved for conditions that make the construction
//! meaningless (vanishing factors, `C = 0`, failed EDS for Landsberg).
//! Conditions that merely need to hold for the result to be what it claims
//! are returned as `preconditions` residuals.

use serde::Serialize;

use crate::coframe::Coframe;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::report::{ResidualSet, ResidualTable, StructureReport};
use crate::sampling::{field_stats, require_nonvanishing, require_positive, sample_values, Sampling};
use crate::structures::{check_bianchi, extract_invariants, lie_derivative_checks, verify_cartan, CartanStructure, FinslerStructure};

pub use crate::revolution::{f_of_r, scan_f_minimum};

/// 3×3 matrix of scalar fields with its (unsigned) minors,
/// `A_ij = det` of `a` with row `i` and column `j` removed.
#[derive(Debug, Clone)]
pub struct TransformMatrix {
    a: [[ScalarField; 3]; 3],
    minors: [[ScalarField; 3]; 3],
}

impl TransformMatrix {
    pub fn new(a: [[ScalarField; 3]; 3]) -> Self {
        let minors = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let r: Vec<usize> = (0..3).filter(|&k| k != i).collect();
                let c: Vec<usize> = (0..3).filter(|&k| k != j).collect();
                &a[r[0]][c[0]] * &a[r[1]][c[1]] - &a[r[0]][c[1]] * &a[r[1]][c[0]]
            })
        });
        TransformMatrix { a, minors }
    }

    pub fn identity(chart: crate::field::Chart) -> Self {
        TransformMatrix::new(std::array::from_fn(|i| {
            std::array::from_fn(|j| ScalarField::constant(if i == j { 1.0 } else { 0.0 }, chart))
        }))
    }

    /// Entry `a_{i+1, j+1}`.
    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        &self.a[i][j]
    }

    pub fn entries(&self) -> &[[ScalarField; 3]; 3] {
        &self.a
    }

    /// Minor `A_{i+1, j+1}`.
    pub fn minor(&self, i: usize, j: usize) -> &ScalarField {
        &self.minors[i][j]
    }

    pub fn det(&self) -> ScalarField {
        &self.a[0][0] * &self.minors[0][0] - &self.a[0][1] * &self.minors[0][1] + &self.a[0][2] * &self.minors[0][2]
    }

    /// `ω = A·base`.
    pub fn apply(&self, base: &Coframe) -> Coframe {
        Coframe::transformed(base, &self.a)
    }

    /// Fail if `det A` vanishes anywhere on the samples.
    pub fn check_nonsingular(&self, sampling: &Sampling) -> Result<()> {
        let det = self.det();
        let values = sample_values(&det, &sampling.points)?;
        for (p, v) in sampling.points.iter().zip(values) {
            if v.abs() < crate::coframe::SINGULAR_DET {
                return Err(Error::Singular { point: *p, det: v });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TorsionTriple {
    pub t13: ScalarField,
    pub t23: ScalarField,
    pub t33: ScalarField,
}

impl TorsionTriple {
    pub fn as_set(&self) -> ResidualSet {
        let mut set = ResidualSet::new();
        set.push("T13", self.t13.clone());
        set.push("T23", self.t23.clone());
        set.push("T33", self.t33.clone());
        set
    }
}

/// The nine relations forced on `a_ij` by `ω = Aα` when α is an R-Cartan
/// and ω an (I,J,K) structure, grouped by the α-wedge they come from.
///
/// `α¹∧α²`: `a_{i1·2} − a_{i2·1} − a_{i3}R − X_i`, `X = (IA₂₃ − A₁₃, A₂₃, −KA₃₃ + JA₂₃)`;
/// `α¹∧α³`: `a_{i3·1} − a_{i1·3} − a_{i2} − Y_i`, `Y = (−IA₂₂ + A₁₂, −A₂₂, KA₃₂ − JA₂₂)`;
/// `α²∧α³`: `a_{i2·3} − a_{i3·2} − a_{i1} − Z_i`, `Z = (IA₂₁ − A₁₁, A₂₁, −KA₃₁ + JA₂₁)`.
pub fn subst1_residuals(a: &TransformMatrix, cs: &CartanStructure, fs: &FinslerStructure) -> ResidualSet {
    let d = |i: usize, j: usize, k: usize| cs.d(a.get(i, j), k);
    let m = |i: usize, j: usize| a.minor(i, j);
    let (ii, jj, kk) = (&fs.i, &fs.j, &fs.k);
    let x = [ii * m(1, 2) - m(0, 2), m(1, 2).clone(), -(kk * m(2, 2)) + jj * m(1, 2)];
    let y = [-(ii * m(1, 1)) + m(0, 1), -m(1, 1), kk * m(2, 1) - jj * m(1, 1)];
    let z = [ii * m(1, 0) - m(0, 0), m(1, 0).clone(), -(kk * m(2, 0)) + jj * m(1, 0)];
    let mut set = ResidualSet::new();
    for i in 0..3 {
        set.push(
            format!("subst1_12_{}", i + 1),
            d(i, 0, 1) - d(i, 1, 0) - a.get(i, 2) * &cs.r - &x[i],
        );
    }
    for i in 0..3 {
        set.push(format!("subst1_13_{}", i + 1), d(i, 2, 0) - d(i, 0, 2) - a.get(i, 1) - &y[i]);
    }
    for i in 0..3 {
        set.push(format!("subst1_23_{}", i + 1), d(i, 1, 2) - d(i, 2, 1) - a.get(i, 0) - &z[i]);
    }
    set
}

/// Closed-form non-absorbable torsion of `ω = Aα`, with `D_i = A_{i3·3} +
/// A_{i1·1} − A_{i2·2}`:
/// `T13 = −D_1 + I D_2 + (I_1A₂₁ − I_2A₂₂ + I_3A₂₃)`, `T23 = D_2`,
/// `T33 = −K D_3 + J D_2 − (K_1A₃₁ − K_2A₃₂ + K_3A₃₃) + (J_1A₂₁ − J_2A₂₂ + J_3A₂₃)`.
pub fn torsion_terms(
    a: &TransformMatrix,
    cs: &CartanStructure,
    i: &ScalarField,
    j: &ScalarField,
    k: &ScalarField,
) -> TorsionTriple {
    let dm = |r: usize| cs.d(a.minor(r, 2), 2) + cs.d(a.minor(r, 0), 0) - cs.d(a.minor(r, 1), 1);
    let pair = |f: &ScalarField, r: usize| {
        cs.d(f, 0) * a.minor(r, 0) - cs.d(f, 1) * a.minor(r, 1) + cs.d(f, 2) * a.minor(r, 2)
    };
    let d2 = dm(1);
    TorsionTriple {
        t13: -dm(0) + i * &d2 + pair(i, 1),
        t23: d2.clone(),
        t33: -(k * dm(2)) + j * &d2 - pair(k, 2) + pair(j, 1),
    }
}

/// Result of building a Finsler structure from a Cartan one.
#[derive(Debug, Clone)]
pub struct FinslerTransform {
    pub matrix: TransformMatrix,
    pub structure: FinslerStructure,
    pub report: StructureReport,
    pub residuals: ResidualSet,
    pub preconditions: ResidualSet,
}

/// Result of building a Cartan structure from a Finsler one.
#[derive(Debug, Clone)]
pub struct CartanTransform {
    pub structure: CartanStructure,
    pub report: StructureReport,
    pub residuals: ResidualSet,
    pub preconditions: ResidualSet,
}

/// Sampled tables for a transform's diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformTables {
    pub residuals: ResidualTable,
    pub preconditions: ResidualTable,
}

impl TransformTables {
    pub fn pass(&self) -> bool {
        self.residuals.pass()
    }

    pub fn preconditions_hold(&self) -> bool {
        self.preconditions.pass()
    }
}

impl FinslerTransform {
    pub fn evaluate(&self, sampling: &Sampling) -> Result<TransformTables> {
        Ok(TransformTables {
            residuals: self.residuals.evaluate(sampling)?,
            preconditions: self.preconditions.evaluate(sampling)?,
        })
    }
}

impl CartanTransform {
    pub fn evaluate(&self, sampling: &Sampling) -> Result<TransformTables> {
        Ok(TransformTables {
            residuals: self.residuals.evaluate(sampling)?,
            preconditions: self.preconditions.evaluate(sampling)?,
        })
    }
}

fn finsler_from(
    cs: &CartanStructure,
    matrix: TransformMatrix,
    sampling: &Sampling,
) -> Result<(TransformMatrix, FinslerStructure, StructureReport)> {
    matrix.check_nonsingular(sampling)?;
    let omega = matrix.apply(&cs.coframe);
    let (fs, report) = extract_invariants(&omega, sampling)?;
    Ok((matrix, fs, report))
}

/// K = 1: recover an R-Cartan coframe α from ω and `m > 0` by inverting
/// `ω¹ = mα¹`, `ω² = (−m_2/m + Im)α¹ + (m_1/m + Jm)α² − α³`, `ω³ = mα²`.
///
/// Since `m_{α1} = m·m_{ω1}`, `m_{α2} = m·m_{ω3}` and `m_{α3} = −m_{ω2}`,
/// the inverse is closed form in ω-derivatives of `m`. Residuals: the
/// φ structure equation `dφ − (R − m²)α¹∧α² + d(*d log m)` with
/// `φ = m(Iα¹ + Jα²)`, and for `m ≡ 1` the curvature condition
/// `R + I_2 − J_1 − 1`. Preconditions: `K − 1`, `m_3`.
pub fn k1_transform(fs: &FinslerStructure, m: &ScalarField, sampling: &Sampling) -> Result<CartanTransform> {
    require_positive(m, sampling, "m")?;
    let chart = fs.coframe.chart();
    let zero = || ScalarField::zero(chart);
    let m_w = fs.coframe.derivatives(m);
    let a21 = -&m_w.f3 + &fs.i * m;
    let a22 = &m_w.f1 + &fs.j * m;
    let inv = m.recip();
    let binv = [
        [inv.clone(), zero(), zero()],
        [zero(), zero(), inv.clone()],
        [&a21 * &inv, ScalarField::constant(-1.0, chart), &a22 * &inv],
    ];
    let alpha = Coframe::transformed(&fs.coframe, &binv);
    let (cs, report) = verify_cartan(&alpha, sampling)?;

    let m_a = alpha.derivatives(m);
    let a = alpha.forms();
    let phi = a[0].scale(&(m * &fs.i)).add(&a[1].scale(&(m * &fs.j)))?;
    let star = alpha.combine_one_form(&[-(&m_a.f2 / m), &m_a.f1 / m, zero()]);
    let lhs = phi.exterior_derivative()?.add(&star.exterior_derivative()?)?;
    let mut c = alpha.expand_two_form(&lhs)?;
    c[2] = &c[2] - (&cs.r - m * m);

    let mut residuals = ResidualSet::new();
    residuals.push_group("phi_structure", c.to_vec());
    if m.as_const() == Some(1.0) {
        residuals.push(
            "curvature_condition",
            &cs.r + alpha.d(&fs.i, 1) - alpha.d(&fs.j, 0) - 1.0,
        );
    }
    let mut preconditions = ResidualSet::new();
    preconditions.push("K_minus_1", &fs.k - 1.0);
    preconditions.push("m_3", m_a.f3.clone());
    Ok(CartanTransform {
        structure: cs,
        report,
        residuals,
        preconditions,
    })
}

/// K = 1 from an R-Cartan structure with `R > 0`: `m = sign·√R`,
/// `ω = (mα¹, −α³, mα²)`, with `I = m_2/m²`, `J = −m_1/m²`.
///
/// For `sign = +1` these are `I = R_2/(2R^{3/2})`, `J = −R_1/(2R^{3/2})`;
/// for `sign = −1` both flip sign. Residuals compare the extracted
/// invariants with these and include the K = 1 Lie-derivative identities.
pub fn k1_projective(cs: &CartanStructure, sign: f64, sampling: &Sampling) -> Result<FinslerTransform> {
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::Precondition(format!("sign must be ±1, got {sign}")));
    }
    require_positive(&cs.r, sampling, "R")?;
    let chart = cs.coframe.chart();
    let zero = || ScalarField::zero(chart);
    let m = sign * cs.r.sqrt();
    let matrix = TransformMatrix::new([
        [m.clone(), zero(), zero()],
        [zero(), zero(), ScalarField::constant(-1.0, chart)],
        [zero(), m.clone(), zero()],
    ]);
    let (matrix, fs, report) = finsler_from(cs, matrix, sampling)?;
    let r32 = cs.r.powf(1.5);
    let i_formula = sign * 0.5 * cs.d(&cs.r, 1) / &r32;
    let j_formula = -sign * 0.5 * cs.d(&cs.r, 0) / &r32;
    let mut residuals = ResidualSet::new();
    residuals.push("I_vs_formula", &fs.i - i_formula);
    residuals.push("J_vs_formula", &fs.j - j_formula);
    residuals.extend(lie_derivative_checks(&fs)?);
    residuals.extend(check_bianchi(&fs));
    let mut preconditions = ResidualSet::new();
    preconditions.push("R_3", cs.d(&cs.r, 2));
    Ok(FinslerTransform {
        matrix,
        structure: fs,
        report,
        residuals,
        preconditions,
    })
}

fn landsberg_residuals(fs: &FinslerStructure, set: &mut ResidualSet) {
    set.push("J", fs.j.clone());
    set.push("landsberg_I_w2", fs.d(&fs.i, 1));
    set.extend(check_bianchi(fs));
}

/// J = 0 with the identity foliation: `ω¹ = (1/m)_2 α¹ + α³/m`,
/// `ω² = α¹/m`, `ω³ = α²`. Expected `I = −2m_2/m`, `K = m²`, `J = 0`.
/// Preconditions: `m_3`, `m_{12}`, `R − (1 − m_{22}/m)`.
pub fn j0_identity_transform(cs: &CartanStructure, m: &ScalarField, sampling: &Sampling) -> Result<FinslerTransform> {
    require_nonvanishing(m, sampling, "m")?;
    let chart = cs.coframe.chart();
    let zero = || ScalarField::zero(chart);
    let inv = m.recip();
    let matrix = TransformMatrix::new([
        [cs.d(&inv, 1), zero(), inv.clone()],
        [inv.clone(), zero(), zero()],
        [zero(), ScalarField::one(chart), zero()],
    ]);
    let (matrix, fs, report) = finsler_from(cs, matrix, sampling)?;
    let md = cs.coframe.derivatives(m);
    let mut residuals = ResidualSet::new();
    residuals.push("I_vs_formula", &fs.i + 2.0 * &md.f2 / m);
    residuals.push("K_vs_formula", &fs.k - m * m);
    landsberg_residuals(&fs, &mut residuals);
    let mut preconditions = ResidualSet::new();
    preconditions.push("m_3", md.f3.clone());
    preconditions.push("m_12", cs.d(&md.f1, 1));
    preconditions.push("curvature_condition", &cs.r - (1.0 - cs.d(&md.f2, 1) / m));
    Ok(FinslerTransform {
        matrix,
        structure: fs,
        report,
        residuals,
        preconditions,
    })
}

/// J = 0 with a conformal factor: rows `((1/f)(f/m)_2, −f_1/(fm), 1/m)`,
/// `(f/m, 0, 0)`, `(0, f, 0)`. Expected `I = −2m_2/(fm)`.
///
/// Residuals include the Landsberg condition `m_{21} − (f_1m_2 + f_2m_1)/f`
/// and the curvature condition
/// `R − f² − [(f_{11} + f_{22})/f − (f_1² + f_2²)/f² − (f_1m_1 − f_2m_2)/(fm) − m_{22}/m]`.
/// When the preconditions hold, `I_{ω2} = −2/f² ·` (Landsberg condition).
/// Preconditions: `f_3`, `m_3`, `(f/m)_3`.
pub fn j0_conformal_transform(
    cs: &CartanStructure,
    m: &ScalarField,
    f: &ScalarField,
    sampling: &Sampling,
) -> Result<FinslerTransform> {
    require_nonvanishing(m, sampling, "m")?;
    require_nonvanishing(f, sampling, "f")?;
    let chart = cs.coframe.chart();
    let zero = || ScalarField::zero(chart);
    let md = cs.coframe.derivatives(m);
    let fd = cs.coframe.derivatives(f);
    let ratio = f / m;
    let matrix = TransformMatrix::new([
        [cs.d(&ratio, 1) / f, -(&fd.f1 / (f * m)), m.recip()],
        [ratio.clone(), zero(), zero()],
        [zero(), f.clone(), zero()],
    ]);
    let (matrix, fs, report) = finsler_from(cs, matrix, sampling)?;
    let fm = f * m;
    let landsberg = cs.d(&md.f2, 0) - (&fd.f1 * &md.f2 + &fd.f2 * &md.f1) / f;
    let bracket = (cs.d(&fd.f1, 0) + cs.d(&fd.f2, 1)) / f - (&fd.f1 * &fd.f1 + &fd.f2 * &fd.f2) / (f * f)
        - (&fd.f1 * &md.f1 - &fd.f2 * &md.f2) / &fm
        - cs.d(&md.f2, 1) / m;
    let mut residuals = ResidualSet::new();
    residuals.push("I_vs_formula", &fs.i + 2.0 * &md.f2 / &fm);
    residuals.push("landsberg_condition", landsberg);
    residuals.push("curvature_condition", &cs.r - f * f - bracket);
    landsberg_residuals(&fs, &mut residuals);
    let mut preconditions = ResidualSet::new();
    preconditions.push("f_3", fd.f3.clone());
    preconditions.push("m_3", md.f3.clone());
    preconditions.push("f_over_m_3", cs.d(&ratio, 2));
    Ok(FinslerTransform {
        matrix,
        structure: fs,
        report,
        residuals,
        preconditions,
    })
}

/// From a generalized Finsler structure and `m` with `m_{ω1} = 0`,
/// `m² = K`: `η = (mω², ω³, mω¹ + m_{ω3}ω²)`, an R-Cartan coframe with
/// `R = 1 − m_{ω33}/m`.
pub fn lemma42_cartan(fs: &FinslerStructure, m: &ScalarField, sampling: &Sampling) -> Result<CartanTransform> {
    require_nonvanishing(m, sampling, "m")?;
    let chart = fs.coframe.chart();
    let zero = || ScalarField::zero(chart);
    let md = fs.coframe.derivatives(m);
    let rows = [
        [zero(), m.clone(), zero()],
        [zero(), zero(), ScalarField::one(chart)],
        [m.clone(), md.f3.clone(), zero()],
    ];
    let eta = Coframe::transformed(&fs.coframe, &rows);
    let (cs, report) = verify_cartan(&eta, sampling)?;
    let mut residuals = ResidualSet::new();
    residuals.push("R_vs_formula", &cs.r - (1.0 - fs.d(&md.f3, 2) / m));
    let mut preconditions = ResidualSet::new();
    preconditions.push("m_w1", md.f1.clone());
    preconditions.push("m2_minus_K", m * m - &fs.k);
    Ok(CartanTransform {
        structure: cs,
        report,
        residuals,
        preconditions,
    })
}

/// Residuals of the EDS for `R` and the field
/// `Q = (R_1² + R_2² + R − 3/2)e^{2(R−1)}`, constant on solutions.
#[derive(Debug, Clone)]
pub struct EdsSystem {
    pub residuals: ResidualSet,
    pub q: ScalarField,
}

/// `R_3`, `R_{11} − (1 − R − R_1²)`, `R_{12} + R_1R_2`, `R_{21} + R_1R_2`,
/// `R_{22} − (1 − R − R_2²)`; with `m`, also `t1 = mR_1 − m_1` and
/// `t2 = −m_{11} + m(1 − R)`.
pub fn eds_residuals(cs: &CartanStructure, m: Option<&ScalarField>) -> EdsSystem {
    let r = &cs.r;
    let rd = cs.coframe.derivatives(r);
    let (r1, r2) = (&rd.f1, &rd.f2);
    let rij = |i: usize, j: usize| cs.d(rd.get(i), j);
    let mut set = ResidualSet::new();
    set.push("R_3", rd.f3.clone());
    set.push("R_11", rij(0, 0) - (1.0 - r - r1 * r1));
    set.push("R_12", rij(0, 1) + r1 * r2);
    set.push("R_21", rij(1, 0) + r1 * r2);
    set.push("R_22", rij(1, 1) - (1.0 - r - r2 * r2));
    if let Some(m) = m {
        let m1 = cs.d(m, 0);
        set.push("t1", m * r1 - &m1);
        set.push("t2", -cs.d(&m1, 0) + m * (1.0 - r));
    }
    let q = (r1 * r1 + r2 * r2 + r - 1.5) * (2.0 * (r - 1.0)).exp();
    EdsSystem { residuals: set, q }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdsReport {
    pub tol: f64,
    pub pass: bool,
    pub residuals: ResidualTable,
    pub q_min: f64,
    pub q_max: f64,
    pub q_spread: f64,
}

impl EdsSystem {
    pub fn evaluate(&self, sampling: &Sampling) -> Result<EdsReport> {
        let residuals = self.residuals.evaluate(sampling)?;
        let q = sample_values(&self.q, &sampling.points)?;
        let q_min = q.iter().cloned().fold(f64::INFINITY, f64::min);
        let q_max = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(EdsReport {
            tol: sampling.tol,
            pass: residuals.pass(),
            residuals,
            q_min,
            q_max,
            q_spread: q_max - q_min,
        })
    }
}

/// The coframe change `ω = Aα` of the Landsberg construction with `m = Ce^R`.
pub fn landsberg_matrix(cs: &CartanStructure, c: f64) -> TransformMatrix {
    let chart = cs.coframe.chart();
    let zero = || ScalarField::zero(chart);
    let s = (-&cs.r).exp() / c;
    TransformMatrix::new([
        [-(cs.d(&cs.r, 1) * &s), zero(), s.clone()],
        [s, zero(), zero()],
        [zero(), ScalarField::one(chart), zero()],
    ])
}

/// Generalized Landsberg structure from an R-Cartan structure solving the
/// EDS: `ω¹ = e^{−R}(α³ − R_2α¹)/C`, `ω² = e^{−R}α¹/C`, `ω³ = α²` with
/// `I = −2R_2`, `J = 0`, `K = C²e^{2R}`.
pub fn landsberg_from_cartan(cs: &CartanStructure, c: f64, sampling: &Sampling) -> Result<FinslerTransform> {
    if c == 0.0 || !c.is_finite() {
        return Err(Error::Precondition(format!("C must be finite and nonzero, got {c}")));
    }
    let eds = eds_residuals(cs, None).evaluate(sampling)?;
    if !eds.pass {
        let (name, worst) = eds
            .residuals
            .0
            .iter()
            .max_by(|a, b| a.1.sup.total_cmp(&b.1.sup))
            .expect("nonempty EDS residuals");
        return Err(Error::Precondition(format!(
            "EDS residual {name} = {} exceeds tolerance {} at {:?}",
            worst.sup, sampling.tol, worst.argmax
        )));
    }
    let (matrix, fs, report) = finsler_from(cs, landsberg_matrix(cs, c), sampling)?;
    let mut residuals = ResidualSet::new();
    residuals.push("I_vs_formula", &fs.i + 2.0 * cs.d(&cs.r, 1));
    residuals.push("K_vs_formula", &fs.k - c * c * (2.0 * &cs.r).exp());
    landsberg_residuals(&fs, &mut residuals);
    Ok(FinslerTransform {
        matrix,
        structure: fs,
        report,
        residuals,
        preconditions: ResidualSet::new(),
    })
}

/// Sup of `|a − b|` over the samples, for comparing two constructions.
pub fn sup_difference(a: &ScalarField, b: &ScalarField, sampling: &Sampling) -> Result<f64> {
    Ok(field_stats(&(a - b), &sampling.points)?.sup)
}
