//! Plain-text run configuration.
//!
//! The format is INI-style: `[section]` headers, `key = value` lines, and
//! `#` comments (full-line or trailing). Recognized sections are
//! `[problem]`, `[solver]`, `[experiment]`, and `[bounds]`; unknown sections,
//! unknown keys, and duplicate keys are errors rather than silently ignored.
//!
//! ```text
//! [problem]
//! kind = quadratic          # quadratic | pseudo_huber | softplus
//! N = 10
//! n = 2
//! a = geometric:1.0,1.36    # also constant:V and list:v1,...,vN
//! b = gaussian:42           # also zero, constant:V, gaussian:SEED,SCALE, list:...
//! lipschitz_multiplier = 1.0
//!
//! [solver]
//! max_iters = 500
//! x0 = gaussian:7
//!
//! [experiment]
//! replicas = 1000
//! iterations = 500
//! checkpoints = 0,1,2,5,10,20,50,100,200,500
//! seed = 1
//! ```
//!
//! Scalar generators (`a`, `w`) accept `constant:`, `geometric:start,ratio`,
//! and `list:`; vector generators (`b`, `c`, `x0`) accept `zero`,
//! `constant:`, `gaussian:seed[,scale]`, and `list:` with one entry per
//! coordinate. Generated vectors draw from their own seeded streams, so the
//! instance is independent of the experiment's base seed.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::families::{ProblemSpec, PseudoHuberSpec, QuadraticSpec, SoftplusSpec};
use crate::sampler::RngState;

/// Rule for materializing one scalar per block.
#[derive(Debug, Clone)]
pub enum ScalarGen {
    Constant(f64),
    Geometric { start: f64, ratio: f64 },
    List(Vec<f64>),
}

impl ScalarGen {
    pub fn materialize(&self, count: usize) -> Result<Vec<f64>> {
        match self {
            ScalarGen::Constant(v) => Ok(vec![*v; count]),
            ScalarGen::Geometric { start, ratio } => {
                let mut out = Vec::with_capacity(count);
                let mut v = *start;
                for _ in 0..count {
                    out.push(v);
                    v *= ratio;
                }
                Ok(out)
            }
            ScalarGen::List(vs) => {
                if vs.len() != count {
                    return Err(Error::Config(format!(
                        "list has {} entries, expected {count}",
                        vs.len()
                    )));
                }
                Ok(vs.clone())
            }
        }
    }
}

/// Rule for materializing a flat coordinate vector.
#[derive(Debug, Clone)]
pub enum VectorGen {
    Zero,
    Constant(f64),
    Gaussian { seed: u64, scale: f64 },
    List(Vec<f64>),
}

impl VectorGen {
    pub fn materialize(&self, len: usize) -> Result<Vec<f64>> {
        match self {
            VectorGen::Zero => Ok(vec![0.0; len]),
            VectorGen::Constant(v) => Ok(vec![*v; len]),
            VectorGen::Gaussian { seed, scale } => {
                let mut rng = RngState::new(*seed);
                let mut out = vec![0.0; len];
                rng.fill_standard_normal(&mut out);
                for v in &mut out {
                    *v *= scale;
                }
                Ok(out)
            }
            VectorGen::List(vs) => {
                if vs.len() != len {
                    return Err(Error::Config(format!(
                        "list has {} entries, expected {len}",
                        vs.len()
                    )));
                }
                Ok(vs.clone())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSection {
    pub spec: ProblemSpec,
    pub lipschitz_multiplier: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SolverSection {
    pub max_iters: Option<usize>,
    pub gap_tol: Option<f64>,
    pub residual_tol: Option<f64>,
    pub record_stride: Option<usize>,
    pub x0: Option<VectorGen>,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentSection {
    pub replicas: Option<usize>,
    pub iterations: Option<usize>,
    pub checkpoints: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub eps: Option<f64>,
    pub eps_rel: Option<f64>,
    pub rho: Option<f64>,
}

/// Manual overrides for quantities the envelopes need; each replaces the
/// analytic value when both exist.
#[derive(Debug, Clone, Default)]
pub struct BoundsSection {
    pub tilde_r_sq: Option<f64>,
    pub r_sq: Option<f64>,
    pub mu_f: Option<f64>,
    pub f_star: Option<f64>,
    pub max_k: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    pub problem: Option<ProblemSection>,
    pub solver: Option<SolverSection>,
    pub experiment: Option<ExperimentSection>,
    pub bounds: Option<BoundsSection>,
}

impl FileConfig {
    pub fn require_problem(&self) -> Result<&ProblemSection> {
        self.problem
            .as_ref()
            .ok_or_else(|| Error::Config("missing [problem] section".into()))
    }

    pub fn require_solver(&self) -> Result<&SolverSection> {
        self.solver
            .as_ref()
            .ok_or_else(|| Error::Config("missing [solver] section".into()))
    }

    pub fn require_experiment(&self) -> Result<&ExperimentSection> {
        self.experiment
            .as_ref()
            .ok_or_else(|| Error::Config("missing [experiment] section".into()))
    }
}

pub fn load_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<FileConfig> {
    let raw = parse_ini(text)?;
    let mut cfg = FileConfig::default();
    for (section, entries) in raw {
        match section.as_str() {
            "problem" => cfg.problem = Some(build_problem_section(entries)?),
            "solver" => cfg.solver = Some(build_solver_section(entries)?),
            "experiment" => cfg.experiment = Some(build_experiment_section(entries)?),
            "bounds" => cfg.bounds = Some(build_bounds_section(entries)?),
            other => return Err(Error::Config(format!("unknown section [{other}]"))),
        }
    }
    Ok(cfg)
}

type Entries = BTreeMap<String, String>;

fn parse_ini(text: &str) -> Result<BTreeMap<String, Entries>> {
    let mut sections: BTreeMap<String, Entries> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("line {}: unterminated section header", lineno + 1)))?
                .trim()
                .to_string();
            if sections.contains_key(&name) {
                return Err(Error::Config(format!("line {}: duplicate section [{name}]", lineno + 1)));
            }
            sections.insert(name.clone(), Entries::new());
            current = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
        })?;
        let section = current
            .as_ref()
            .ok_or_else(|| Error::Config(format!("line {}: key outside any section", lineno + 1)))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        let entries = sections.get_mut(section).expect("section inserted above");
        if entries.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key '{key}' in [{section}]",
                lineno + 1
            )));
        }
    }
    Ok(sections)
}

/// Typed accessor over one section's entries that records which keys were
/// consumed, so leftovers can be reported as unknown.
struct Reader {
    section: &'static str,
    entries: Entries,
}

impl Reader {
    fn new(section: &'static str, entries: Entries) -> Self {
        Reader { section, entries }
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|v| parse_f64(self.section, key, &v)).transpose()
    }

    fn take_usize(&mut self, key: &str) -> Result<Option<usize>> {
        self.take(key)
            .map(|v| {
                v.parse::<usize>().map_err(|_| {
                    Error::Config(format!("[{}] {key}: '{v}' is not a nonnegative integer", self.section))
                })
            })
            .transpose()
    }

    fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        self.take(key)
            .map(|v| {
                v.parse::<u64>().map_err(|_| {
                    Error::Config(format!("[{}] {key}: '{v}' is not a 64-bit unsigned integer", self.section))
                })
            })
            .transpose()
    }

    fn finish(self) -> Result<()> {
        if let Some(key) = self.entries.keys().next() {
            return Err(Error::Config(format!("unknown key '{key}' in [{}]", self.section)));
        }
        Ok(())
    }
}

fn parse_f64(section: &str, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::Config(format!("[{section}] {key}: '{v}' is not a number")))
}

fn parse_f64_list(section: &str, key: &str, body: &str) -> Result<Vec<f64>> {
    body.split(',')
        .map(|s| parse_f64(section, key, s.trim()))
        .collect()
}

fn parse_scalar_gen(section: &str, key: &str, v: &str) -> Result<ScalarGen> {
    let (head, body) = split_rule(v);
    match head {
        "constant" => Ok(ScalarGen::Constant(parse_f64(section, key, require_body(section, key, body)?)?)),
        "geometric" => {
            let parts = parse_f64_list(section, key, require_body(section, key, body)?)?;
            if parts.len() != 2 {
                return Err(Error::Config(format!(
                    "[{section}] {key}: geometric takes start,ratio"
                )));
            }
            Ok(ScalarGen::Geometric { start: parts[0], ratio: parts[1] })
        }
        "list" => Ok(ScalarGen::List(parse_f64_list(section, key, require_body(section, key, body)?)?)),
        other => Err(Error::Config(format!(
            "[{section}] {key}: unknown generator '{other}' (expected constant, geometric, or list)"
        ))),
    }
}

fn parse_vector_gen(section: &str, key: &str, v: &str) -> Result<VectorGen> {
    let (head, body) = split_rule(v);
    match head {
        "zero" => {
            if body.is_some() {
                return Err(Error::Config(format!("[{section}] {key}: zero takes no arguments")));
            }
            Ok(VectorGen::Zero)
        }
        "constant" => Ok(VectorGen::Constant(parse_f64(section, key, require_body(section, key, body)?)?)),
        "gaussian" => {
            let body = require_body(section, key, body)?;
            let mut parts = body.split(',');
            let seed_str = parts.next().unwrap_or("").trim();
            let seed = seed_str.parse::<u64>().map_err(|_| {
                Error::Config(format!("[{section}] {key}: gaussian seed '{seed_str}' is not a u64"))
            })?;
            let scale = match parts.next() {
                Some(s) => parse_f64(section, key, s.trim())?,
                None => 1.0,
            };
            if parts.next().is_some() {
                return Err(Error::Config(format!(
                    "[{section}] {key}: gaussian takes seed[,scale]"
                )));
            }
            Ok(VectorGen::Gaussian { seed, scale })
        }
        "list" => Ok(VectorGen::List(parse_f64_list(section, key, require_body(section, key, body)?)?)),
        other => Err(Error::Config(format!(
            "[{section}] {key}: unknown generator '{other}' (expected zero, constant, gaussian, or list)"
        ))),
    }
}

fn split_rule(v: &str) -> (&str, Option<&str>) {
    match v.split_once(':') {
        Some((head, body)) => (head.trim(), Some(body.trim())),
        None => (v.trim(), None),
    }
}

fn require_body<'a>(section: &str, key: &str, body: Option<&'a str>) -> Result<&'a str> {
    body.ok_or_else(|| Error::Config(format!("[{section}] {key}: generator needs arguments after ':'")))
}

fn build_problem_section(entries: Entries) -> Result<ProblemSection> {
    let mut r = Reader::new("problem", entries);
    let kind = r
        .take("kind")
        .ok_or_else(|| Error::Config("[problem] missing 'kind'".into()))?;
    let n_blocks = r
        .take_usize("N")?
        .ok_or_else(|| Error::Config("[problem] missing 'N'".into()))?;
    let block_dim = r
        .take_usize("n")?
        .ok_or_else(|| Error::Config("[problem] missing 'n'".into()))?;
    let lipschitz_multiplier = r.take_f64("lipschitz_multiplier")?.unwrap_or(1.0);
    let spec = match kind.as_str() {
        "quadratic" => {
            let a = r
                .take("a")
                .ok_or_else(|| Error::Config("[problem] quadratic needs 'a'".into()))?;
            let curvature = parse_scalar_gen("problem", "a", &a)?.materialize(n_blocks)?;
            let linear = match r.take("b") {
                Some(b) => parse_vector_gen("problem", "b", &b)?.materialize(n_blocks * block_dim)?,
                None => vec![0.0; n_blocks * block_dim],
            };
            ProblemSpec::Quadratic(QuadraticSpec { n_blocks, block_dim, curvature, linear })
        }
        "pseudo_huber" => {
            let w = r
                .take("w")
                .ok_or_else(|| Error::Config("[problem] pseudo_huber needs 'w'".into()))?;
            let weight = parse_scalar_gen("problem", "w", &w)?.materialize(n_blocks)?;
            ProblemSpec::PseudoHuber(PseudoHuberSpec { n_blocks, block_dim, weight })
        }
        "softplus" => {
            let c = r
                .take("c")
                .ok_or_else(|| Error::Config("[problem] softplus needs 'c'".into()))?;
            let direction = parse_vector_gen("problem", "c", &c)?.materialize(n_blocks * block_dim)?;
            ProblemSpec::Softplus(SoftplusSpec { n_blocks, block_dim, direction })
        }
        other => {
            return Err(Error::Config(format!(
                "[problem] unknown kind '{other}' (expected quadratic, pseudo_huber, or softplus)"
            )))
        }
    };
    r.finish()?;
    Ok(ProblemSection { spec, lipschitz_multiplier })
}

fn build_solver_section(entries: Entries) -> Result<SolverSection> {
    let mut r = Reader::new("solver", entries);
    let out = SolverSection {
        max_iters: r.take_usize("max_iters")?,
        gap_tol: r.take_f64("gap_tol")?,
        residual_tol: r.take_f64("residual_tol")?,
        record_stride: match r.take_usize("record_stride")? {
            Some(0) => {
                return Err(Error::Config("[solver] record_stride must be at least 1".into()))
            }
            v => v,
        },
        x0: r.take("x0").map(|v| parse_vector_gen("solver", "x0", &v)).transpose()?,
    };
    r.finish()?;
    Ok(out)
}

fn build_experiment_section(entries: Entries) -> Result<ExperimentSection> {
    let mut r = Reader::new("experiment", entries);
    let checkpoints = r
        .take("checkpoints")
        .map(|v| -> Result<Vec<usize>> {
            v.split(',')
                .map(|s| {
                    let s = s.trim();
                    s.parse::<usize>().map_err(|_| {
                        Error::Config(format!(
                            "[experiment] checkpoints: '{s}' is not a nonnegative integer"
                        ))
                    })
                })
                .collect()
        })
        .transpose()?;
    let out = ExperimentSection {
        replicas: r.take_usize("replicas")?,
        iterations: r.take_usize("iterations")?,
        checkpoints,
        seed: r.take_u64("seed")?,
        eps: r.take_f64("eps")?,
        eps_rel: r.take_f64("eps_rel")?,
        rho: r.take_f64("rho")?,
    };
    if out.eps.is_some() && out.eps_rel.is_some() {
        return Err(Error::Config("[experiment] eps and eps_rel are mutually exclusive".into()));
    }
    r.finish()?;
    Ok(out)
}

fn build_bounds_section(entries: Entries) -> Result<BoundsSection> {
    let mut r = Reader::new("bounds", entries);
    let out = BoundsSection {
        tilde_r_sq: r.take_f64("tilde_r_sq")?,
        r_sq: r.take_f64("r_sq")?,
        mu_f: r.take_f64("mu_f")?,
        f_star: r.take_f64("f_star")?,
        max_k: r.take_usize("max_k")?,
    };
    r.finish()?;
    Ok(out)
}

/// Log-spaced default checkpoint set `{0, 1, 2, 5, 10, 20, 50, …} ∪ {k_max}`.
pub fn default_checkpoints(k_max: usize) -> Vec<usize> {
    let mut out = vec![0];
    let mut decade = 1usize;
    'outer: loop {
        for mult in [1, 2, 5] {
            let v = match decade.checked_mul(mult) {
                Some(v) if v < k_max => v,
                _ => break 'outer,
            };
            out.push(v);
        }
        decade = match decade.checked_mul(10) {
            Some(d) => d,
            None => break,
        };
    }
    if k_max > 0 {
        out.push(k_max);
    }
    out
}
