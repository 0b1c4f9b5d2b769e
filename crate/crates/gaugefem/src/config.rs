//! Flat key = value run configuration.

use crate::error::{Error, Result};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Square,
    Torus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algebra {
    Su2,
    U1,
}

/// Run parameters with documented defaults.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub domain: Domain,
    pub nx: usize,
    pub ny: usize,
    pub degree_r: usize,
    pub degree_s: usize,
    pub algebra: Algebra,
    pub scenario: String,
    pub amplitude: f64,
    pub seed: u64,
    pub dt: f64,
    pub steps: usize,
    pub output_every: usize,
    pub output_dir: PathBuf,
    pub kkt_delta: f64,
    pub weight_multiplier: f64,
    pub weight_flux: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        // degree_s defaults to 3: the multiplier space needs degree >= r + 2
        // for the element-boundary constraints to be solvable (see README)
        RunConfig {
            domain: Domain::Torus,
            nx: 8,
            ny: 8,
            degree_r: 1,
            degree_s: 3,
            algebra: Algebra::Su2,
            scenario: "su2_bump".into(),
            amplitude: 1.0,
            seed: 0,
            dt: 0.01,
            steps: 200,
            output_every: 1,
            output_dir: PathBuf::from("."),
            kkt_delta: 1e-10,
            weight_multiplier: 1.0,
            weight_flux: 1.0,
        }
    }
}

fn fail(line: usize, msg: impl Into<String>) -> Error {
    Error::ConfigParse {
        line,
        msg: msg.into(),
    }
}

/// Parse `key = value` lines ('#' starts a comment, blank lines allowed).
/// Unknown keys are rejected; missing keys take the documented defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| fail(line_no, "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        let parse_usize = |v: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| fail(line_no, format!("`{v}` is not a non-negative integer")))
        };
        let parse_f64 = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| fail(line_no, format!("`{v}` is not a number")))
        };
        match key {
            "domain" => {
                cfg.domain = match value {
                    "square" => Domain::Square,
                    "torus" => Domain::Torus,
                    other => return Err(fail(line_no, format!("unknown domain `{other}`"))),
                }
            }
            "nx" => cfg.nx = parse_usize(value)?,
            "ny" => cfg.ny = parse_usize(value)?,
            "degree_r" => cfg.degree_r = parse_usize(value)?,
            "degree_s" => cfg.degree_s = parse_usize(value)?,
            "algebra" => {
                cfg.algebra = match value {
                    "su2" => Algebra::Su2,
                    "u1" => Algebra::U1,
                    other => return Err(fail(line_no, format!("unknown algebra `{other}`"))),
                }
            }
            "scenario" => cfg.scenario = value.to_string(),
            "amplitude" => cfg.amplitude = parse_f64(value)?,
            "seed" => {
                cfg.seed = value
                    .parse()
                    .map_err(|_| fail(line_no, format!("`{value}` is not a seed")))?
            }
            "dt" => cfg.dt = parse_f64(value)?,
            "steps" => cfg.steps = parse_usize(value)?,
            "output_every" => cfg.output_every = parse_usize(value)?,
            "output_dir" => cfg.output_dir = PathBuf::from(value),
            "kkt_delta" => cfg.kkt_delta = parse_f64(value)?,
            "weight_multiplier" => cfg.weight_multiplier = parse_f64(value)?,
            "weight_flux" => cfg.weight_flux = parse_f64(value)?,
            other => return Err(fail(line_no, format!("unknown key `{other}`"))),
        }
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn check(cond: bool, key: &'static str, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::ConfigValidation {
            key,
            msg: msg.into(),
        })
    }
}

pub fn validate(cfg: &RunConfig) -> Result<()> {
    let min = if cfg.domain == Domain::Torus { 3 } else { 1 };
    check(cfg.nx >= min, "nx", "too few subdivisions for this domain")?;
    check(cfg.ny >= min, "ny", "too few subdivisions for this domain")?;
    check(cfg.degree_r == 1, "degree_r", "only degree 1 is implemented")?;
    check(
        (1..=3).contains(&cfg.degree_s),
        "degree_s",
        "multiplier degree must be 1, 2 or 3",
    )?;
    check(
        cfg.dt.is_finite() && cfg.dt > 0.0,
        "dt",
        "time step must be positive",
    )?;
    check(cfg.amplitude.is_finite(), "amplitude", "must be finite")?;
    check(cfg.output_every >= 1, "output_every", "must be at least 1")?;
    check(
        cfg.kkt_delta.is_finite() && cfg.kkt_delta > 0.0,
        "kkt_delta",
        "must be positive",
    )?;
    check(
        cfg.weight_multiplier > 0.0 && cfg.weight_flux > 0.0,
        "weight_multiplier",
        "objective weights must be positive",
    )?;
    Ok(())
}

/// Render the effective configuration in the same key = value format.
pub fn render(cfg: &RunConfig) -> String {
    let domain = match cfg.domain {
        Domain::Square => "square",
        Domain::Torus => "torus",
    };
    let algebra = match cfg.algebra {
        Algebra::Su2 => "su2",
        Algebra::U1 => "u1",
    };
    format!(
        "domain = {domain}\nnx = {}\nny = {}\ndegree_r = {}\ndegree_s = {}\nalgebra = {algebra}\n\
         scenario = {}\namplitude = {}\nseed = {}\ndt = {}\nsteps = {}\noutput_every = {}\n\
         output_dir = {}\nkkt_delta = {}\nweight_multiplier = {}\nweight_flux = {}\n",
        cfg.nx,
        cfg.ny,
        cfg.degree_r,
        cfg.degree_s,
        cfg.scenario,
        cfg.amplitude,
        cfg.seed,
        cfg.dt,
        cfg.steps,
        cfg.output_every,
        cfg.output_dir.display(),
        cfg.kkt_delta,
        cfg.weight_multiplier,
        cfg.weight_flux,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.nx, 8);
        assert_eq!(cfg.steps, 200);
        assert_eq!(cfg.degree_s, 3);
        assert!((cfg.dt - 0.01).abs() < 1e-15);
    }

    #[test]
    fn partial_override() {
        let cfg = parse_config("domain = torus\nnx = 4\nny = 4\n# comment\n").unwrap();
        assert_eq!(cfg.domain, Domain::Torus);
        assert_eq!(cfg.nx, 4);
        assert_eq!(cfg.ny, 4);
        assert_eq!(cfg.steps, 200);
    }

    #[test]
    fn negative_dt_rejected() {
        let err = parse_config("dt = -1").unwrap_err();
        match err {
            Error::ConfigValidation { key, .. } => assert_eq!(key, "dt"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let err = parse_config("nx = 4\nbogus = 1").unwrap_err();
        match err {
            Error::ConfigParse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn render_roundtrips() {
        let cfg = RunConfig::default();
        let text = render(&cfg);
        let back = parse_config(&text).unwrap();
        assert_eq!(back.nx, cfg.nx);
        assert_eq!(back.scenario, cfg.scenario);
        assert_eq!(back.degree_s, cfg.degree_s);
    }
}
