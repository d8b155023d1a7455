//! TOML experiment configuration: sectioned key=value files whose keys name
//! the run-configuration fields exactly. Unknown keys are hard errors, and
//! parse -> serialize -> parse is the identity.

use crate::analysis::Reference;
use crate::error::{Error, Result};
use crate::flux::{make_flux, FluxKind, FluxModel};
use crate::grid::GridSpec;
use crate::params::Params;
use crate::solver::{Perturbation, RunConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxFile {
    pub kind: FluxKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tilt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub p: f64,
    pub mu: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    pub flux: FluxFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationFile {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

/// On-disk form of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    pub record_every: f64,
    pub reference: Reference,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_norm: Option<f64>,
    pub params: ParamsFile,
    pub grid: GridSpec,
    pub perturbation: PerturbationFile,
}

fn default_cfl() -> f64 {
    0.4
}

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Validate and convert into the in-memory run configuration.
    pub fn build(&self) -> Result<RunConfig> {
        let flux = self.build_flux()?;
        let params = Params::new(
            self.params.p,
            self.params.mu,
            self.params.u_minus,
            self.params.u_plus,
            flux,
        )?;
        let perturbation = self.build_perturbation()?;
        let config = RunConfig {
            params,
            grid: self.grid,
            t_end: self.t_end,
            cfl_safety: self.cfl_safety,
            snapshot_times: self.snapshot_times.clone(),
            perturbation,
            record_every: self.record_every,
            reference: self.reference,
            r_norm: self.r_norm,
        };
        config.validate()?;
        Ok(config)
    }

    fn build_flux(&self) -> Result<FluxModel> {
        let f = &self.params.flux;
        let tilt = f.tilt.unwrap_or(0.0);
        match f.kind {
            FluxKind::IntervalDegenerate => {
                let a = f.a.ok_or_else(|| {
                    Error::InvalidConfig("interval_degenerate flux requires a".into())
                })?;
                let b = f.b.ok_or_else(|| {
                    Error::InvalidConfig("interval_degenerate flux requires b".into())
                })?;
                make_flux(f.kind, a, b, tilt)
            }
            _ => {
                if f.a.is_some() || f.b.is_some() {
                    return Err(Error::InvalidConfig(
                        "a and b apply only to the interval_degenerate flux".into(),
                    ));
                }
                make_flux(f.kind, 0.0, 0.0, tilt)
            }
        }
    }

    fn build_perturbation(&self) -> Result<Perturbation> {
        let p = &self.perturbation;
        let field = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| {
                Error::InvalidConfig(format!("perturbation kind {} requires {name}", p.kind))
            })
        };
        match p.kind.as_str() {
            "none" => {
                if p.amplitude.is_some() || p.center.is_some() || p.width.is_some() {
                    return Err(Error::InvalidConfig(
                        "perturbation kind none takes no further keys".into(),
                    ));
                }
                Ok(Perturbation::None)
            }
            "gaussian" => Ok(Perturbation::Gaussian {
                amplitude: field(p.amplitude, "amplitude")?,
                center: field(p.center, "center")?,
                width: field(p.width, "width")?,
            }),
            "bump" => Ok(Perturbation::Bump {
                amplitude: field(p.amplitude, "amplitude")?,
                center: field(p.center, "center")?,
                width: field(p.width, "width")?,
            }),
            other => Err(Error::InvalidConfig(format!(
                "unknown perturbation kind {other} (expected none|gaussian|bump)"
            ))),
        }
    }
}

/// The canonical decay experiment of the acceptance suite.
pub fn canonical_config_text() -> &'static str {
    r#"t_end = 200.0
cfl_safety = 0.4
snapshot_times = [10.0, 100.0, 200.0]
record_every = 0.5
reference = "tildeU"
r_norm = 3.0

[params]
p = 2.0
mu = 1.0
u_minus = -0.5
u_plus = 0.5

[params.flux]
kind = "reduced_quadratic"

[grid]
x_min = -20.0
x_max = 140.0
n = 4096

[perturbation]
kind = "gaussian"
amplitude = 0.1
center = 0.0
width = 1.0
"#
}

/// The companion low-exponent run (p = 1.2) of the acceptance suite; the
/// contact support spreads like t^{1/2.2}, so the domain is wider and the
/// resolution requirement milder.
pub fn low_p_config_text() -> &'static str {
    r#"t_end = 200.0
cfl_safety = 0.4
snapshot_times = []
record_every = 0.5
reference = "tildeU"

[params]
p = 1.2
mu = 1.0
u_minus = -0.5
u_plus = 0.5

[params.flux]
kind = "reduced_quadratic"

[grid]
x_min = -70.0
x_max = 140.0
n = 2048

[perturbation]
kind = "gaussian"
amplitude = 0.1
center = 0.0
width = 1.0
"#
}

// ---------------------------------------------------------------------------
// CSV schemas
// ---------------------------------------------------------------------------

use crate::fmt_g17;
use crate::solver::{NormSeries, Snapshot};

pub const NORMS_HEADER: &str = "t,l1,l2,l4,linf,dxu_lp1,dxphi_lp1,dxu_lr1,gq2,mass";

/// Serialize a norm series to the norms.csv schema (LF endings, 17
/// significant digits). A failed run gains a trailer comment line.
pub fn norms_csv_string(series: &NormSeries) -> String {
    let mut s = String::with_capacity(64 * (series.records.len() + 1));
    s.push_str(NORMS_HEADER);
    s.push('\n');
    for r in &series.records {
        let fields = [
            r.t, r.l1, r.l2, r.l4, r.linf, r.dxu_lp1, r.dxphi_lp1, r.dxu_lr1, r.gq2, r.mass,
        ];
        let line: Vec<String> = fields.iter().map(|&v| fmt_g17(v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    if series.failed {
        s.push_str("# status=failed\n");
    }
    s
}

/// Parse a norms.csv file back into (times, named columns).
pub fn parse_norms_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidConfig("empty norms file".into()))?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(Error::InvalidConfig(format!(
                "row with {} fields under a {}-column header",
                fields.len(),
                names.len()
            )));
        }
        for (c, f) in columns.iter_mut().zip(&fields) {
            let v = f
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidConfig(format!("bad float {f}: {e}")))?;
            c.push(v);
        }
    }
    Ok((names, columns))
}

/// Serialize one field snapshot (`x,u,reference,phi`).
pub fn snapshot_csv_string(snap: &Snapshot) -> String {
    let mut s = String::with_capacity(48 * (snap.x.len() + 1));
    s.push_str("x,u,reference,phi\n");
    for j in 0..snap.x.len() {
        s.push_str(&format!(
            "{},{},{},{}\n",
            fmt_g17(snap.x[j]),
            fmt_g17(snap.u[j]),
            fmt_g17(snap.reference[j]),
            fmt_g17(snap.phi[j])
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_config_parses_and_validates() {
        let file = RunConfigFile::parse(canonical_config_text()).unwrap();
        let config = file.build().unwrap();
        assert_eq!(config.grid.n, 4096);
        assert_eq!(config.params.p, 2.0);
        assert_eq!(config.r_norm, Some(3.0));
        let file2 = RunConfigFile::parse(low_p_config_text()).unwrap();
        file2.build().unwrap();
    }

    #[test]
    fn round_trip_is_identity() {
        let file = RunConfigFile::parse(canonical_config_text()).unwrap();
        let text = file.to_toml();
        let file2 = RunConfigFile::parse(&text).unwrap();
        assert_eq!(file, file2);
        assert_eq!(file2.to_toml(), text);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = canonical_config_text().replace("cfl_safety", "cfl_safe");
        assert!(RunConfigFile::parse(&text).is_err());
        let text = format!("{}\nextra_key = 1.0\n", canonical_config_text());
        assert!(RunConfigFile::parse(&text).is_err());
    }

    #[test]
    fn perturbation_kind_validated() {
        let text = canonical_config_text().replace("\"gaussian\"", "\"gauss\"");
        let file = RunConfigFile::parse(&text).unwrap();
        assert!(file.build().is_err());
    }

    #[test]
    fn norms_csv_round_trips() {
        use crate::solver::{NormRecord, NormSeries};
        let series = NormSeries {
            records: vec![NormRecord {
                t: 0.5,
                l1: 1.0,
                l2: 2.0,
                l4: 3.0,
                linf: 4.0,
                dxu_lp1: 5.0,
                dxphi_lp1: 6.0,
                dxu_lr1: f64::NAN,
                gq2: 7.0,
                mass: 8.0,
            }],
            boundary_flux_integral: vec![0.0],
            failed: false,
        };
        let text = norms_csv_string(&series);
        assert!(text.starts_with(NORMS_HEADER));
        let (names, cols) = parse_norms_csv(&text).unwrap();
        assert_eq!(names[0], "t");
        assert_eq!(cols[0][0], 0.5);
        assert_eq!(cols[4][0], 4.0);
        assert!(cols[7][0].is_nan());
    }
}
