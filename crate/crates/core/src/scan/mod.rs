//! Parameter-plane sweeps: classify every node of a grid, optionally measure
//! the speed on a subsample, and write the masks as CSV or SVG.

mod svg;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmt::g12;
use crate::model::CompetitionParams;
use crate::pde::{estimate_speed, SimConfig, SpeedEstimate};
use crate::theory::{classify, evaluate_all, CriterionId, Sign, SignVerdict};

pub use svg::{render_svg, SvgStyle};

/// Coordinates of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Plane {
    /// `x = d`, `y = k` with `r = 1`, `k1 = k2 = k`.
    Symmetric,
    /// `x = k1`, `y = d / r` at fixed `k2` and `r`.
    K1Ratio { k2: f64, r: f64 },
}

impl Plane {
    /// Parameters at a plane point, or `None` outside strong competition.
    pub fn params(&self, x: f64, y: f64) -> Option<CompetitionParams> {
        match *self {
            Plane::Symmetric => CompetitionParams::new(x, 1.0, y, y).ok(),
            Plane::K1Ratio { k2, r } => CompetitionParams::new(y * r, r, x, k2).ok(),
        }
    }

    pub fn axis_labels(&self) -> (&'static str, &'static str) {
        match self {
            Plane::Symmetric => ("d", "k"),
            Plane::K1Ratio { .. } => ("k1", "d/r"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

impl Scale {
    fn forward(self, v: f64) -> f64 {
        match self {
            Scale::Linear => v,
            Scale::Log => v.ln(),
        }
    }

    fn inverse(self, v: f64) -> f64 {
        match self {
            Scale::Linear => v,
            Scale::Log => v.exp(),
        }
    }

    /// `n` nodes from `lo` to `hi` inclusive, uniform in this scale.
    pub fn nodes(self, (lo, hi): (f64, f64), n: usize) -> Vec<f64> {
        let (a, b) = (self.forward(lo), self.forward(hi));
        (0..n)
            .map(|i| {
                if i == 0 {
                    lo
                } else if i == n - 1 {
                    hi
                } else {
                    self.inverse(a + (b - a) * i as f64 / (n - 1) as f64)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub plane: Plane,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub nx: usize,
    pub ny: usize,
    pub with_pde: bool,
    /// With PDE enabled, nodes whose row and column indices are both
    /// multiples of this stride are simulated.
    pub pde_stride: usize,
    pub pde_config: SimConfig,
}

pub const DEFAULT_PDE_STRIDE: usize = 10;

impl ScanSpec {
    pub fn new(
        plane: Plane,
        x_range: (f64, f64),
        y_range: (f64, f64),
        nx: usize,
        ny: usize,
    ) -> Self {
        Self {
            plane,
            x_range,
            y_range,
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
            nx,
            ny,
            with_pde: false,
            pde_stride: DEFAULT_PDE_STRIDE,
            pde_config: SimConfig::default(),
        }
    }

    /// The `(d, k)` window `[1, 10] x [1, 4]` at 91 x 31 nodes.
    pub fn symmetric_default() -> Self {
        Self::new(Plane::Symmetric, (1.0, 10.0), (1.0, 4.0), 91, 31)
    }

    /// Log-log `(k1, d/r)` plane around the reference verticals of `k2`.
    pub fn k1_ratio_default(k2: f64, r: f64) -> Self {
        let hi = f64::max(10.0, 4.0 * k2 * k2);
        Self {
            x_scale: Scale::Log,
            y_scale: Scale::Log,
            ..Self::new(Plane::K1Ratio { k2, r }, (1.01, hi), (1e-3, 1e3), 121, 121)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::Scan(format!(
                "need at least 2 nodes per axis, got {} x {}",
                self.nx, self.ny
            )));
        }
        if self.with_pde && self.pde_stride == 0 {
            return Err(Error::Scan("PDE stride must be positive".into()));
        }
        let (xname, yname) = self.plane.axis_labels();
        let check = |name: &str, (lo, hi): (f64, f64), scale: Scale, floor: f64| {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Scan(format!("{name} range [{lo}, {hi}] is empty")));
            }
            if lo < floor || (floor == 0.0 && lo <= 0.0) {
                return Err(Error::Scan(format!(
                    "{name} range starts at {lo}, below the admissible {floor}"
                )));
            }
            if scale == Scale::Log && lo <= 0.0 {
                return Err(Error::Scan(format!(
                    "log-scaled {name} range must be positive"
                )));
            }
            Ok(())
        };
        // competition coefficients may start at the boundary value 1, whose
        // nodes are reported as outside strong competition
        let (xfloor, yfloor) = match self.plane {
            Plane::Symmetric => (0.0, 1.0),
            Plane::K1Ratio { k2, r } => {
                if !(k2 > 1.0 && k2.is_finite() && r > 0.0 && r.is_finite()) {
                    return Err(Error::Scan(format!(
                        "fixed parameters need k2 > 1 and r > 0, got k2 = {k2}, r = {r}"
                    )));
                }
                (1.0, 0.0)
            }
        };
        check(xname, self.x_range, self.x_scale, xfloor)?;
        check(yname, self.y_range, self.y_scale, yfloor)?;
        Ok(())
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        self.x_scale.nodes(self.x_range, self.nx)
    }

    pub fn y_nodes(&self) -> Vec<f64> {
        self.y_scale.nodes(self.y_range, self.ny)
    }
}

/// Speed measurement attached to a sample; the front trace is dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedSample {
    pub c_hat: f64,
    pub stderr: f64,
    pub converged: bool,
}

impl From<&SpeedEstimate> for SpeedSample {
    fn from(e: &SpeedEstimate) -> Self {
        Self {
            c_hat: e.c_hat,
            stderr: e.stderr,
            converged: e.converged,
        }
    }
}

impl SpeedSample {
    fn failed() -> Self {
        Self {
            c_hat: f64::NAN,
            stderr: f64::NAN,
            converged: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSample {
    pub point: (f64, f64),
    /// Direct (unreflected) outcome of every criterion. All false outside
    /// strong competition.
    pub verdicts: BTreeMap<CriterionId, bool>,
    pub combined: SignVerdict,
    pub c_num: Option<SpeedSample>,
}

impl RegionSample {
    pub fn fires(&self, id: CriterionId) -> bool {
        self.verdicts.get(&id).copied().unwrap_or(false)
    }

    pub fn record(&self) -> RegionRecord {
        RegionRecord {
            point: self.point,
            verdicts: self.verdicts.clone(),
            sign: self.combined.sign,
            c_num: self.c_num,
        }
    }
}

/// The CSV-representable part of a [`RegionSample`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegionRecord {
    pub point: (f64, f64),
    pub verdicts: BTreeMap<CriterionId, bool>,
    pub sign: Sign,
    pub c_num: Option<SpeedSample>,
}

fn sample_at(spec: &ScanSpec, point: (f64, f64), run_pde: bool) -> Result<RegionSample> {
    let Some(params) = spec.plane.params(point.0, point.1) else {
        return Ok(RegionSample {
            point,
            verdicts: CriterionId::ALL.into_iter().map(|c| (c, false)).collect(),
            combined: SignVerdict {
                sign: Sign::Inconclusive,
                fired: Vec::new(),
                reflected: false,
            },
            c_num: None,
        });
    };
    let verdicts = evaluate_all(&params);
    let combined = classify(&params)?;
    let c_num = run_pde.then(|| {
        estimate_speed(&params, &spec.pde_config)
            .map(|e| SpeedSample::from(&e))
            .unwrap_or_else(|_| SpeedSample::failed())
    });
    Ok(RegionSample {
        point,
        verdicts,
        combined,
        c_num,
    })
}

/// Evaluates every node, in parallel, and returns samples in row-major order
/// (`y` outer, `x` inner).
pub fn scan_plane(spec: &ScanSpec) -> Result<Vec<RegionSample>> {
    spec.validate()?;
    let xs = spec.x_nodes();
    let ys = spec.y_nodes();
    let stride = spec.pde_stride.max(1);
    (0..spec.nx * spec.ny)
        .into_par_iter()
        .map(|idx| {
            let (iy, ix) = (idx / spec.nx, idx % spec.nx);
            let run_pde = spec.with_pde && ix % stride == 0 && iy % stride == 0;
            sample_at(spec, (xs[ix], ys[iy]), run_pde)
        })
        .collect()
}

/// Samples of the `(k1, d/r)` plane together with the reference verticals
/// `k1 = sqrt(k2)`, `k2`, `k2^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure2 {
    pub spec: ScanSpec,
    pub samples: Vec<RegionSample>,
    pub verticals: Vec<(f64, String)>,
}

/// Scans `spec` with its plane replaced by `(k1, d/r)` at the given `k2`, `r`.
pub fn figure2_dataset(k2: f64, r: f64, spec: &ScanSpec) -> Result<Figure2> {
    let spec = ScanSpec {
        plane: Plane::K1Ratio { k2, r },
        ..spec.clone()
    };
    let samples = scan_plane(&spec)?;
    let verticals = vec![
        (k2.sqrt(), "k1 = sqrt(k2)".to_string()),
        (k2, "k1 = k2".to_string()),
        (k2 * k2, "k1 = k2^2".to_string()),
    ];
    Ok(Figure2 {
        spec,
        samples,
        verticals,
    })
}

pub fn csv_header() -> Vec<String> {
    let mut header = vec!["x".to_string(), "y".to_string()];
    header.extend(CriterionId::ALL.iter().map(|c| c.label().to_string()));
    header.extend(["combined", "c_num", "stderr", "converged"].map(String::from));
    header
}

pub fn write_csv<W: Write>(samples: &[RegionSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header())?;
    for s in samples {
        let mut row = vec![g12(s.point.0), g12(s.point.1)];
        row.extend(
            CriterionId::ALL
                .iter()
                .map(|&c| if s.fires(c) { "1" } else { "0" }.to_string()),
        );
        row.push(s.combined.sign.as_str().to_string());
        match &s.c_num {
            Some(c) => {
                row.push(g12(c.c_hat));
                row.push(g12(c.stderr));
                row.push(if c.converged { "1" } else { "0" }.to_string());
            }
            None => row.extend([String::new(), String::new(), String::new()]),
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<csv>".into(),
        source,
    })?;
    Ok(())
}

pub fn emit_csv(samples: &[RegionSample], path: &Path) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Scan("nothing to write".into()));
    }
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(samples, BufWriter::new(file))
}

fn parse_field<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Scan(format!("cannot parse {what} from {field:?}")))
}

fn parse_flag(field: &str, what: &str) -> Result<bool> {
    match field.trim() {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(Error::Scan(format!("{what} must be 0 or 1, got {other:?}"))),
    }
}

/// Reads back what [`write_csv`] produced.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<RegionRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != csv_header() {
        return Err(Error::Scan(format!("unexpected header {header:?}")));
    }
    let n_crit = CriterionId::ALL.len();
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let point = (parse_field(&row[0], "x")?, parse_field(&row[1], "y")?);
        let mut verdicts = BTreeMap::new();
        for (j, &c) in CriterionId::ALL.iter().enumerate() {
            verdicts.insert(c, parse_flag(&row[2 + j], c.label())?);
        }
        let sign_field = &row[2 + n_crit];
        let sign = Sign::parse(sign_field)
            .ok_or_else(|| Error::Scan(format!("unknown verdict {sign_field:?}")))?;
        let c_field = &row[3 + n_crit];
        let c_num = if c_field.is_empty() {
            None
        } else {
            Some(SpeedSample {
                c_hat: parse_field(c_field, "c_num")?,
                stderr: parse_field(&row[4 + n_crit], "stderr")?,
                converged: parse_flag(&row[5 + n_crit], "converged")?,
            })
        };
        out.push(RegionRecord {
            point,
            verdicts,
            sign,
            c_num,
        });
    }
    Ok(out)
}

pub fn emit_svg(samples: &[RegionSample], path: &Path, style: &SvgStyle) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Scan("nothing to draw".into()));
    }
    let doc = render_svg(samples, style)?;
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = File::create(path).map_err(io_err)?;
    file.write_all(doc.as_bytes()).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_hit_endpoints() {
        let lin = Scale::Linear.nodes((1.0, 10.0), 91);
        assert_eq!(lin[0], 1.0);
        assert_eq!(lin[90], 10.0);
        assert!((lin[30] - 4.0).abs() < 1e-12);
        let log = Scale::Log.nodes((1e-3, 1e3), 7);
        for (i, v) in log.iter().enumerate() {
            let want = 10f64.powi(i as i32 - 3);
            assert!((v / want - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(ScanSpec::symmetric_default().validate().is_ok());
        assert!(ScanSpec::k1_ratio_default(2.0, 1.0).validate().is_ok());
        let mut s = ScanSpec::symmetric_default();
        s.nx = 1;
        assert!(s.validate().is_err());
        let mut s = ScanSpec::symmetric_default();
        s.y_range = (0.5, 4.0);
        assert!(s.validate().is_err());
        let mut s = ScanSpec::symmetric_default();
        s.x_range = (0.0, 4.0);
        assert!(s.validate().is_err());
        let mut s = ScanSpec::symmetric_default();
        s.x_range = (4.0, 4.0);
        assert!(s.validate().is_err());
        let s = ScanSpec::new(
            Plane::K1Ratio { k2: 1.0, r: 1.0 },
            (1.5, 3.0),
            (0.1, 1.0),
            3,
            3,
        );
        assert!(s.validate().is_err());
    }

    #[test]
    fn boundary_row_is_inconclusive() {
        let s = ScanSpec::new(Plane::Symmetric, (1.0, 2.0), (1.0, 2.0), 3, 3);
        let out = scan_plane(&s).unwrap();
        for sample in &out[..3] {
            assert_eq!(sample.point.1, 1.0);
            assert_eq!(sample.combined.sign, Sign::Inconclusive);
            assert!(sample.verdicts.values().all(|v| !v));
        }
    }
}
