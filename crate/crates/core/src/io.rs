//! Files: coframes and transform matrices as JSON, JSON reports with a
//! metadata envelope, and trajectory CSV.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::coframe::Coframe;
use crate::error::{Error, Result};
use crate::field::{Chart, ScalarField};
use crate::revolution::{GeodesicState, Trajectory};
use crate::sampling::SampleBox;
use crate::transforms::TransformMatrix;

pub const FORMAT_VERSION: u32 = 1;

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> Error {
    let context = context.into();
    move |source| Error::Io { context, source }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(format!("reading {}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(format!("writing {}", path.display())))
}

/// Pretty JSON with every float printed at 17 significant digits and
/// non-finite floats as `null`.
struct Precise(PrettyFormatter<'static>);

impl Formatter for Precise {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serialize with sorted keys and 17-digit floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    // Going through `Value` sorts every object's keys.
    let value = serde_json::to_value(value)?;
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub kind: String,
    pub version: u32,
    pub payload: Value,
}

/// `{kind, version, payload}` around any serializable report.
pub fn envelope<T: Serialize + ?Sized>(kind: &str, payload: &T) -> Result<Envelope> {
    Ok(Envelope {
        kind: kind.to_string(),
        version: FORMAT_VERSION,
        payload: serde_json::to_value(payload)?,
    })
}

pub fn export_json<T: Serialize + ?Sized>(kind: &str, payload: &T, path: &Path) -> Result<()> {
    write_text(path, &to_json_string(&envelope(kind, payload)?)?)
}

pub fn read_envelope(path: &Path) -> Result<Envelope> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

/// On-disk coframe: each `a_i` lists the `dc1, dc2, dc3` coefficients of
/// the i-th form. `defs` are `name = expr` bindings visible in every entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoframeFile {
    #[serde(default)]
    pub chart: Chart,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub defs: Vec<String>,
    pub a1: [String; 3],
    pub a2: [String; 3],
    pub a3: [String; 3],
    pub domain: SampleBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

fn with_defs(defs: &[String], body: &str) -> String {
    let mut out = String::new();
    for d in defs {
        out.push_str("let ");
        out.push_str(d.trim().trim_end_matches(';'));
        out.push_str("; ");
    }
    out.push_str(body);
    out
}

impl CoframeFile {
    pub fn from_coframe(cf: &Coframe, description: Option<String>) -> Self {
        let row = |i: usize| -> [String; 3] { std::array::from_fn(|j| cf.rows()[i][j].to_source()) };
        CoframeFile {
            chart: cf.chart(),
            defs: Vec::new(),
            a1: row(0),
            a2: row(1),
            a3: row(2),
            domain: *cf.domain(),
            description,
        }
    }

    pub fn to_coframe(&self) -> Result<Coframe> {
        if !self.domain.is_valid() {
            return Err(Error::Input(format!("invalid domain {:?}", self.domain)));
        }
        let parse_row = |row: &[String; 3]| -> Result<[ScalarField; 3]> {
            let mut out = Vec::with_capacity(3);
            for s in row {
                out.push(ScalarField::parse(&with_defs(&self.defs, s), self.chart)?);
            }
            Ok(out.try_into().expect("three entries"))
        };
        Ok(Coframe::new(
            [parse_row(&self.a1)?, parse_row(&self.a2)?, parse_row(&self.a3)?],
            self.domain,
        ))
    }
}

pub fn read_coframe(path: &Path) -> Result<Coframe> {
    let file: CoframeFile = serde_json::from_str(&read_text(path)?)?;
    file.to_coframe()
}

pub fn write_coframe(cf: &Coframe, description: Option<String>, path: &Path) -> Result<()> {
    write_text(path, &to_json_string(&CoframeFile::from_coframe(cf, description))?)
}

/// On-disk transform matrix: expression strings under keys `a11`..`a33`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    #[serde(default)]
    pub chart: Chart,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub defs: Vec<String>,
    pub a11: String,
    pub a12: String,
    pub a13: String,
    pub a21: String,
    pub a22: String,
    pub a23: String,
    pub a31: String,
    pub a32: String,
    pub a33: String,
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<TransformMatrix> {
        let entries = [
            [&self.a11, &self.a12, &self.a13],
            [&self.a21, &self.a22, &self.a23],
            [&self.a31, &self.a32, &self.a33],
        ];
        let mut rows = Vec::with_capacity(3);
        for row in entries {
            let mut out = Vec::with_capacity(3);
            for s in row {
                out.push(ScalarField::parse(&with_defs(&self.defs, s), self.chart)?);
            }
            rows.push(<[ScalarField; 3]>::try_from(out).expect("three entries"));
        }
        Ok(TransformMatrix::new(rows.try_into().expect("three rows")))
    }

    pub fn from_matrix(a: &TransformMatrix, chart: Chart) -> Self {
        let s = |i: usize, j: usize| a.get(i, j).to_source();
        MatrixFile {
            chart,
            defs: Vec::new(),
            a11: s(0, 0),
            a12: s(0, 1),
            a13: s(0, 2),
            a21: s(1, 0),
            a22: s(1, 1),
            a23: s(1, 2),
            a31: s(2, 0),
            a32: s(2, 1),
            a33: s(2, 2),
        }
    }
}

pub fn read_matrix(path: &Path) -> Result<TransformMatrix> {
    let file: MatrixFile = serde_json::from_str(&read_text(path)?)?;
    file.to_matrix()
}

pub const CSV_HEADER: [&str; 7] = ["t", "r", "theta", "rdot", "thetadot", "F", "E"];

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a trajectory as CSV with the fixed column order of [`CSV_HEADER`].
pub fn write_trajectory_csv<W: std::io::Write>(traj: &Trajectory, out: W) -> Result<()> {
    if traj.is_empty() {
        return Err(Error::Input("trajectory is empty".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for k in 0..traj.len() {
        let st = &traj.states[k];
        w.write_record([traj.times[k], st.r, st.theta, st.rdot, st.thetadot, traj.f[k], traj.e[k]].map(fmt17))?;
    }
    w.flush().map_err(io_err("flushing CSV"))?;
    Ok(())
}

pub fn export_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(format!("creating {}", path.display())))?;
    write_trajectory_csv(traj, std::io::BufWriter::new(file))
}

pub fn read_trajectory_csv<R: std::io::Read>(input: R) -> Result<Trajectory> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Input(format!("unexpected CSV header {header:?}")));
    }
    let mut traj = Trajectory::default();
    for rec in rd.records() {
        let rec = rec?;
        let mut v = [0.0; 7];
        for (slot, field) in v.iter_mut().zip(rec.iter()) {
            *slot = field
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("not a number: {field:?}")))?;
        }
        traj.times.push(v[0]);
        traj.states.push(GeodesicState::new(v[1], v[2], v[3], v[4]));
        traj.f.push(v[5]);
        traj.e.push(v[6]);
    }
    Ok(traj)
}

pub fn import_csv(path: &Path) -> Result<Trajectory> {
    let file = fs::File::open(path).map_err(io_err(format!("opening {}", path.display())))?;
    read_trajectory_csv(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::ResidualSet;
    use crate::sampling::Sampling;

    #[test]
    fn floats_use_seventeen_digits_and_null() {
        let s = to_json_string(&serde_json::json!({"b": 0.1, "a": f64::NAN, "c": 3})).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"a\": null"));
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.contains("\"c\": 3"));
    }

    #[test]
    fn empty_residual_set_has_empty_payload() {
        let dom = SampleBox::new([0.0; 3], [1.0; 3]);
        let table = ResidualSet::new().evaluate(&Sampling::default_for(&dom)).unwrap();
        let env = envelope("residuals", &table).unwrap();
        assert_eq!(env.payload, serde_json::json!({}));
        let once = to_json_string(&env).unwrap();
        let back: Envelope = serde_json::from_str(&once).unwrap();
        assert_eq!(to_json_string(&back).unwrap(), once);
    }

    #[test]
    fn coframe_file_round_trip() {
        let text = r#"{
            "chart": "generic",
            "defs": ["s = sin(x)"],
            "a1": ["1", "s", "0"],
            "a2": ["0", "1", "0"],
            "a3": ["0", "0", "exp(y)"],
            "domain": {"lo": [0, 0, 0], "hi": [1, 1, 1]}
        }"#;
        let file: CoframeFile = serde_json::from_str(text).unwrap();
        let cf = file.to_coframe().unwrap();
        let again = CoframeFile::from_coframe(&cf, None).to_coframe().unwrap();
        for p in [[0.3, 0.2, 0.1], [0.9, 0.5, 0.7]] {
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(cf.rows()[i][j].eval(p).unwrap(), again.rows()[i][j].eval(p).unwrap());
                }
            }
        }
        assert_eq!(cf.rows()[0][1].eval([0.5, 0.0, 0.0]).unwrap(), 0.5f64.sin());
    }

    #[test]
    fn matrix_file_rejects_unknown_keys() {
        let text = r#"{"a11":"1","a12":"0","a13":"0","a21":"0","a22":"1","a23":"0","a31":"0","a32":"0","a33":"1","a44":"1"}"#;
        assert!(serde_json::from_str::<MatrixFile>(text).is_err());
        let ok = &text[..text.len() - 11];
        let m: MatrixFile = serde_json::from_str(&format!("{ok}}}")).unwrap();
        assert_eq!(m.to_matrix().unwrap().det().as_const(), Some(1.0));
    }

    fn sample_traj(n: usize, thetadot: f64) -> Trajectory {
        let mut t = Trajectory::default();
        for k in 0..n {
            let x = k as f64 * 0.1 + 1.0 / 3.0;
            t.times.push(x);
            t.states.push(GeodesicState::new(1.0 + x, 0.5, -x / 7.0, thetadot));
            t.f.push(thetadot * x);
            t.e.push(1.0);
        }
        t
    }

    #[test]
    fn csv_single_row() {
        let mut buf = Vec::new();
        write_trajectory_csv(&sample_traj(1, 0.2), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap(), "t,r,theta,rdot,thetadot,F,E");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = sample_traj(25, 0.7);
        let mut buf = Vec::new();
        write_trajectory_csv(&t, &mut buf).unwrap();
        assert_eq!(read_trajectory_csv(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn meridian_has_zero_f_column() {
        let mut buf = Vec::new();
        write_trajectory_csv(&sample_traj(5, 0.0), &mut buf).unwrap();
        let back = read_trajectory_csv(buf.as_slice()).unwrap();
        assert!(back.f.iter().all(|f| *f == 0.0));
        assert!(write_trajectory_csv(&Trajectory::default(), Vec::new()).is_err());
    }
}
