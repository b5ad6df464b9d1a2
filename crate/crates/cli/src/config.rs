//! Run configuration: defaults, `key = value` files and flag overrides.

use pmech::grid::GridSpec;
use pmech::presets;
use pmech::schrodinger::{Branch, ClassicalLattice, WaveGrid};
use pmech::verify::{check_info, Suite, VerifyConfig};
use std::collections::BTreeMap;
use std::path::PathBuf;

pub const OUTDIR_ENV: &str = "PMECH_OUTDIR";

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub hbars: Vec<f64>,
    pub correspondence_hbars: Vec<f64>,
    pub pairs: usize,
    pub triples: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub timings: bool,
    pub suites: Vec<Suite>,
    /// Overrides the preset grid of oscillator, quantize and correspondence.
    pub grid: Option<GridSpec>,
    pub wave: WaveGrid,
    pub lattice: ClassicalLattice,
    pub t_end: f64,
    pub dt: f64,
    pub snapshots: usize,
    pub oscillator_hbar: f64,
    pub signal: String,
    pub hbar: f64,
    pub branch: Branch,
    pub pair: Option<(String, String)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let v = VerifyConfig::default();
        Self {
            seed: v.seed,
            out: None,
            hbars: v.hbars,
            correspondence_hbars: v.correspondence_hbars,
            pairs: v.pairs,
            triples: v.triples,
            tolerances: BTreeMap::new(),
            timings: false,
            suites: Suite::ALL.to_vec(),
            grid: None,
            wave: presets::wave_grid(),
            lattice: presets::classical_lattice(),
            t_end: 2.0 * std::f64::consts::PI,
            dt: 2.0 * std::f64::consts::PI / 2000.0,
            snapshots: 50,
            oscillator_hbar: 1.0,
            signal: "gauss".into(),
            hbar: 0.5,
            branch: Branch::Plus,
            pair: None,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.trim().parse().map_err(|_| format!("{key}: cannot parse `{v}`"))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>, String> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| num(key, s)).collect()
}

pub fn parse_tolerance(spec: &str) -> Result<(String, f64), String> {
    let (name, value) = spec.split_once('=').ok_or_else(|| format!("tolerance `{spec}` is not NAME=VALUE"))?;
    let name = name.trim();
    if check_info(name).is_none() {
        return Err(format!("unknown check `{name}`"));
    }
    let v: f64 = num(name, value)?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(format!("tolerance {name} = {v} must be finite and >= 0"));
    }
    Ok((name.to_string(), v))
}

pub fn parse_suite(name: &str) -> Result<Suite, String> {
    Suite::parse(name.trim()).ok_or_else(|| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite `{name}` (expected one of {})", names.join(", "))
    })
}

impl RunConfig {
    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            self.set(key.trim(), value.trim()).map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "seed" => self.seed = num(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "hbars" => self.hbars = list(key, v)?,
            "correspondence.hbars" => self.correspondence_hbars = list(key, v)?,
            "pairs" => self.pairs = num(key, v)?,
            "triples" => self.triples = num(key, v)?,
            "timings" => self.timings = num(key, v)?,
            "suites" => self.suites = v.split(',').map(parse_suite).collect::<Result<_, _>>()?,
            "grid" => {
                let p = list(key, v)?;
                if p.len() != 6 {
                    return Err("grid: expected L_s, L_x, L_y, N_s, N_x, N_y".into());
                }
                let n = |x: f64| -> Result<usize, String> {
                    if x.fract() == 0.0 && x > 0.0 {
                        Ok(x as usize)
                    } else {
                        Err(format!("grid: point count {x} is not a positive integer"))
                    }
                };
                let g = GridSpec::new(p[0], p[1], p[2], n(p[3])?, n(p[4])?, n(p[5])?).map_err(|e| e.to_string())?;
                self.grid = Some(g);
            }
            "wave.nv" => self.wave = WaveGrid::balanced(num(key, v)?).map_err(|e| e.to_string())?,
            "wave.lv" => self.wave = WaveGrid::new(num(key, v)?, self.wave.nv).map_err(|e| e.to_string())?,
            "lattice" => {
                let p = list(key, v)?;
                if p.len() != 4 {
                    return Err("lattice: expected q_max, p_max, n_q, n_p".into());
                }
                self.lattice = ClassicalLattice::new(p[0], p[1], p[2] as usize, p[3] as usize).map_err(|e| e.to_string())?;
            }
            "oscillator.t_end" => self.t_end = num(key, v)?,
            "oscillator.dt" => self.dt = num(key, v)?,
            "oscillator.snapshots" => self.snapshots = num(key, v)?,
            "oscillator.hbar" => self.oscillator_hbar = num(key, v)?,
            "quantize.signal" => self.signal = v.to_string(),
            "quantize.hbar" => self.hbar = num(key, v)?,
            "quantize.branch" => {
                self.branch = match v {
                    "plus" | "+" => Branch::Plus,
                    "minus" | "-" => Branch::Minus,
                    _ => return Err(format!("quantize.branch: expected plus or minus, got `{v}`")),
                }
            }
            "correspondence.pair" => {
                let (a, b) = v.split_once(',').ok_or("correspondence.pair: expected NAME,NAME")?;
                self.pair = Some((a.trim().to_string(), b.trim().to_string()));
            }
            _ if key.starts_with("tol.") => {
                let (name, value) = parse_tolerance(&format!("{}={v}", &key[4..]))?;
                self.tolerances.insert(name, value);
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Output directory: flag or config, then $PMECH_OUTDIR, then ./pmech-out.
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUTDIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("pmech-out"))
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            seed: self.seed,
            hbars: self.hbars.clone(),
            correspondence_hbars: self.correspondence_hbars.clone(),
            pairs: self.pairs,
            triples: self.triples,
            tolerances: self.tolerances.clone(),
            timings: self.timings,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.verify_config().validate().map_err(|e| e.to_string())?;
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(format!("oscillator.t_end = {} must be finite and >= 0", self.t_end));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(format!("oscillator.dt = {} must be positive", self.dt));
        }
        if self.snapshots == 0 {
            return Err("oscillator.snapshots must be positive".into());
        }
        if self.suites.is_empty() {
            return Err("no suites selected".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\nseed = 9\nhbars = 0.5, 1.0\ntol.bracket.jacobi = 1e-3\n\ngrid = 6,8,8,16,64,64\n").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.hbars, vec![0.5, 1.0]);
        assert_eq!(c.tolerances["bracket.jacobi"], 1e-3);
        assert_eq!(c.grid.unwrap().ns, 16);
        c.validate().unwrap();
    }

    #[test]
    fn bad_lines_are_reported() {
        let mut c = RunConfig::default();
        assert!(c.apply_text("seed 9").unwrap_err().contains("line 1"));
        assert!(c.apply_text("colour = red").unwrap_err().contains("unknown key"));
        assert!(c.apply_text("tol.nope = 1").unwrap_err().contains("unknown check"));
        assert!(c.apply_text("grid = 6,8,8,15,64,64").is_err());
    }
}
