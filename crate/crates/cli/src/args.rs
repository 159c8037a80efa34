use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cartan-forge", version, about = "Verify structure equations, build coframe transforms and integrate geodesics")]
pub struct Cli {
    /// Seed for random sample points and random initial states.
    #[arg(long, global = true, env = "CARTAN_FORGE_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Cartan,
    Finsler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Orientation {
    Standard,
    Clockwise,
}

impl From<Orientation> for cartan_forge::revolution::LiftOrientation {
    fn from(o: Orientation) -> Self {
        match o {
            Orientation::Standard => Self::Standard,
            Orientation::Clockwise => Self::Clockwise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    K1Id,
    K1Conformal,
    K1Projective,
    J0Id,
    J0Conformal,
    Landsberg,
    Torsion,
    Lemma42,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    /// Grid points per axis over the coframe's domain.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(2..))]
    pub samples: u64,

    /// Use this many seeded random points instead of a grid.
    #[arg(long)]
    pub random: Option<usize>,

    /// Tolerance on sup-norm residuals.
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    pub tol: f64,

    /// Override the lower corner of the sampling box.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lo: Option<Vec<f64>>,

    /// Override the upper corner of the sampling box.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub hi: Option<Vec<f64>>,

    /// Lift orientation used when a coframe argument names a built-in scene.
    #[arg(long, value_enum, default_value_t = Orientation::Standard)]
    pub orientation: Orientation,
}

pub fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct OrbitArgs {
    /// Metric parameter R0 > 1.
    #[arg(long = "R0", default_value_t = 1.5)]
    pub r0_param: f64,
    /// Initial radius.
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
    /// Initial angle θ.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta0: f64,
    /// Initial direction against ∂_r/η; the initial speed is 1.
    #[arg(long, default_value_t = 0.7, allow_hyphen_values = true)]
    pub psi0: f64,
    #[arg(long, default_value_t = 50.0, value_parser = positive)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3, value_parser = positive)]
    pub step: f64,
    /// Trajectory CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check Cartan or generalized Finsler structure equations.
    Verify {
        /// Coframe file, or a built-in scene name such as `sphere_bundle.cf`.
        #[arg(long)]
        coframe: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Cartan)]
        kind: Kind,
        #[command(flatten)]
        sampling: SampleArgs,
    },
    /// Extract I, J, K from a generalized Finsler coframe.
    Invariants {
        #[arg(long)]
        coframe: PathBuf,
        #[command(flatten)]
        sampling: SampleArgs,
    },
    /// Extract invariants and check the Bianchi identities.
    Bianchi {
        #[arg(long)]
        coframe: PathBuf,
        #[command(flatten)]
        sampling: SampleArgs,
    },
    /// Build a coframe change and report its residuals.
    Transform {
        #[arg(long, value_enum)]
        case: Case,
        /// R-Cartan input coframe.
        #[arg(long)]
        cartan: Option<PathBuf>,
        /// Generalized Finsler input coframe.
        #[arg(long)]
        finsler: Option<PathBuf>,
        /// Matrix file with keys a11..a33 (torsion case; identity if absent).
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Function m as an expression in the chart coordinates.
        #[arg(long)]
        m: Option<String>,
        /// Function f as an expression in the chart coordinates.
        #[arg(long)]
        f: Option<String>,
        /// Constant C of the Landsberg construction.
        #[arg(long = "C", default_value_t = 1.0, allow_hyphen_values = true)]
        c: f64,
        /// Sign of m = ±√R in the projective case.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        sign: f64,
        /// Write the constructed coframe here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        sampling: SampleArgs,
    },
    /// EDS residuals for R and the conserved field Q.
    Eds {
        #[arg(long)]
        cartan: PathBuf,
        #[arg(long)]
        m: Option<String>,
        #[command(flatten)]
        sampling: SampleArgs,
    },
    /// Integrate a geodesic of the R0 metric and monitor F and E.
    Geodesic {
        #[command(flatten)]
        orbit: OrbitArgs,
        /// Allowed drift of F and E.
        #[arg(long, default_value_t = 1e-8, value_parser = positive)]
        drift_tol: f64,
    },
    /// Integrate a unit-speed curve with geodesic curvature β(γ̇) or a constant.
    BetaGeodesic {
        #[command(flatten)]
        orbit: OrbitArgs,
        #[arg(long, default_value = "0")]
        beta_r: String,
        #[arg(long, default_value = "0")]
        beta_theta: String,
        /// Constant geodesic curvature; overrides β.
        #[arg(long, allow_hyphen_values = true)]
        kg: Option<f64>,
        #[arg(long, default_value_t = 1e-8, value_parser = positive)]
        drift_tol: f64,
    },
    /// Radius T(R0) where the metric degenerates, for 1 < R0 < 3/2.
    Extent {
        #[arg(long = "R0")]
        r0: f64,
    },
    /// Locate the minimum of f(R) = (R − 3/2)e^{2(R−1)} and tabulate f and T over R0.
    #[command(name = "scan-R0", alias = "scan-r0")]
    ScanR0 {
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 3.0)]
        hi: f64,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
        /// R0 values to tabulate.
        #[arg(long = "R0", value_delimiter = ',', default_values_t = [1.1, 1.25, 1.4, 1.5, 2.0])]
        r0: Vec<f64>,
    },
    /// Ratio R_1 e^R / F along seeded geodesics on the frame-bundle lift.
    PrimeIntegral {
        #[arg(long = "R0", default_value_t = 1.5)]
        r0: f64,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 20.0, value_parser = positive)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3, value_parser = positive)]
        step: f64,
        #[arg(long, default_value_t = 50)]
        stride: usize,
        #[arg(long, value_enum, default_value_t = Orientation::Clockwise)]
        orientation: Orientation,
        #[arg(long, default_value_t = 1e-6, value_parser = positive)]
        tol: f64,
    },
    /// Write built-in scene coframes to files.
    Scene {
        /// Scene names, e.g. sphere_bundle, flat_bundle, r0_1.5_bundle.
        names: Vec<String>,
        /// Write every standard scene.
        #[arg(long)]
        all: bool,
        #[arg(long, default_value = ".")]
        dir: PathBuf,
        #[arg(long, value_enum, default_value_t = Orientation::Standard)]
        orientation: Orientation,
    },
}
