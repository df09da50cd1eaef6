//! Run configuration files.
//!
//! Flat `key = value` lines grouped into sections, `#` starts a comment:
//!
//! ```text
//! problem = colliding-flow
//! method = nvem
//! stab = dtilde
//!
//! [mesh]
//! kind = voronoi
//! sites = 256
//! ```
//!
//! Keys before the first section header are global. Unknown sections and
//! keys are rejected with the list of valid ones.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nvem::benchmarks::Kolosov;
use nvem::problem::{Method, Stabilization};

const GLOBAL_KEYS: &[&str] = &["problem", "method", "stab", "methods", "tolerance", "kolosov"];
const MESH_KEYS: &[&str] = &[
    "file", "files", "kind", "nx", "ny", "domain", "distortion", "sites", "lloyd", "seed", "grading", "levels",
];
const MATERIAL_KEYS: &[&str] = &["young", "poisson", "condition", "lambda", "mu", "density"];
const BC_KEYS: &[&str] = &["clamp", "fix_x", "fix_y", "body", "point", "traction.<tag>"];
const DYNAMICS_KEYS: &[&str] = &[
    "alpha", "dt", "t_end", "q1", "q2", "schedule", "omega", "tip_load", "gravity", "length", "depth", "thickness",
];
const OUTPUT_KEYS: &[&str] = &["dir", "vtk", "probe", "snapshot_every", "eigenvalues"];

fn valid_keys(section: &str) -> Option<&'static [&'static str]> {
    match section {
        "" => Some(GLOBAL_KEYS),
        "mesh" => Some(MESH_KEYS),
        "material" => Some(MATERIAL_KEYS),
        "bc" => Some(BC_KEYS),
        "dynamics" => Some(DYNAMICS_KEYS),
        "output" => Some(OUTPUT_KEYS),
        _ => None,
    }
}

/// A configuration or usage error; maps to exit status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Res<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Res<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    line: usize,
    value: String,
}

/// Raw sections of a configuration file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Res<Self> {
        let mut cfg = ConfigFile::default();
        let mut section = String::new();
        cfg.sections.insert(section.clone(), BTreeMap::new());
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return err(format!("line {line}: malformed section header `{content}`"));
                };
                let name = name.trim().to_string();
                if valid_keys(&name).is_none() {
                    return err(format!(
                        "line {line}: unknown section [{name}]; valid sections: [mesh], [material], [bc], [dynamics], [output]"
                    ));
                }
                cfg.sections.entry(name.clone()).or_default();
                section = name;
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return err(format!("line {line}: expected `key = value`, found `{content}`"));
            };
            let (key, value) = (key.trim(), value.trim());
            let valid = valid_keys(&section).unwrap();
            let known = valid.contains(&key) || (section == "bc" && key.starts_with("traction.") && key.len() > 9);
            if !known {
                let place = if section.is_empty() { "global".to_string() } else { format!("[{section}]") };
                return err(format!(
                    "line {line}: unknown key `{key}` in {place}; valid keys: {}",
                    valid.join(", ")
                ));
            }
            let entries = cfg.sections.get_mut(&section).unwrap();
            if entries.contains_key(key) {
                return err(format!("line {line}: duplicate key `{key}`"));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.to_string(),
                },
            );
        }
        Ok(cfg)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.get(section).is_some_and(|s| !s.is_empty())
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(|e| e.value.as_str())
    }

    fn get<T: FromStr>(&self, section: &str, key: &str) -> Res<Option<T>> {
        let Some(e) = self.sections.get(section).and_then(|s| s.get(key)) else {
            return Ok(None);
        };
        e.value
            .parse()
            .map(Some)
            .map_err(|_| ConfigError(format!("line {}: cannot parse `{key}` from `{}`", e.line, e.value)))
    }

    fn list<T: FromStr>(&self, section: &str, key: &str) -> Res<Option<Vec<T>>> {
        let Some(e) = self.sections.get(section).and_then(|s| s.get(key)) else {
            return Ok(None);
        };
        e.value
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse()
                    .map_err(|_| ConfigError(format!("line {}: cannot parse `{key}` entry `{t}`", e.line)))
            })
            .collect::<Res<Vec<T>>>()
            .map(Some)
    }

    fn fixed<const N: usize>(&self, section: &str, key: &str) -> Res<Option<[f64; N]>> {
        match self.list::<f64>(section, key)? {
            None => Ok(None),
            Some(v) => v
                .try_into()
                .map(Some)
                .map_err(|_| ConfigError(format!("`{key}` needs exactly {N} numbers"))),
        }
    }

    fn traction_entries(&self) -> Res<Vec<(String, [f64; 2])>> {
        let keys: Vec<String> = self
            .sections
            .get("bc")
            .map(|s| s.keys().filter(|k| k.starts_with("traction.")).cloned().collect())
            .unwrap_or_default();
        keys.into_iter()
            .map(|k| {
                let v = self.fixed::<2>("bc", &k)?.unwrap();
                Ok((k["traction.".len()..].to_string(), v))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    PatchTest,
    CollidingFlow,
    Beam,
    PlateWithHole,
    Cook,
    Cantilever,
    Custom,
}

impl FromStr for ProblemKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Res<Self> {
        Ok(match s {
            "patch-test" => ProblemKind::PatchTest,
            "colliding-flow" => ProblemKind::CollidingFlow,
            "beam" => ProblemKind::Beam,
            "plate-with-hole" => ProblemKind::PlateWithHole,
            "cook" => ProblemKind::Cook,
            "cantilever" => ProblemKind::Cantilever,
            "custom" => ProblemKind::Custom,
            other => {
                return err(format!(
                    "unknown problem `{other}`; valid problems: patch-test, colliding-flow, beam, plate-with-hole, cook, cantilever, custom"
                ))
            }
        })
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::PatchTest => "patch-test",
            ProblemKind::CollidingFlow => "colliding-flow",
            ProblemKind::Beam => "beam",
            ProblemKind::PlateWithHole => "plate-with-hole",
            ProblemKind::Cook => "cook",
            ProblemKind::Cantilever => "cantilever",
            ProblemKind::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    Quad,
    DistortedQuad,
    HexDominantPoly,
    Voronoi,
    Plate,
    PlateQuad,
    Cook,
}

impl FromStr for MeshKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Res<Self> {
        Ok(match s {
            "quad" => MeshKind::Quad,
            "distorted-quad" => MeshKind::DistortedQuad,
            "hex-dominant-poly" => MeshKind::HexDominantPoly,
            "voronoi" => MeshKind::Voronoi,
            "plate" => MeshKind::Plate,
            "plate-quad" => MeshKind::PlateQuad,
            "cook" => MeshKind::Cook,
            other => {
                return err(format!(
                    "unknown mesh kind `{other}`; valid kinds: quad, distorted-quad, hex-dominant-poly, voronoi, plate, plate-quad, cook"
                ))
            }
        })
    }
}

/// `[mesh]`: mesh files or a generator with its parameters. Unset
/// parameters fall back to per-problem defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeshSpec {
    pub file: Option<PathBuf>,
    pub files: Vec<PathBuf>,
    pub kind: Option<MeshKind>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub domain: Option<[f64; 4]>,
    pub distortion: Option<f64>,
    pub sites: Option<usize>,
    pub lloyd: Option<usize>,
    pub seed: Option<u64>,
    pub grading: Option<f64>,
    pub levels: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaterialSpec {
    pub young: Option<f64>,
    pub poisson: Option<f64>,
    pub condition: Option<nvem::material::PlaneCondition>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub density: Option<f64>,
}

/// `[bc]` for `problem = custom`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BcSpec {
    pub clamp: Vec<String>,
    pub fix_x: Vec<String>,
    pub fix_y: Vec<String>,
    pub body: Option<[f64; 2]>,
    /// `x y fx fy`, applied at the nearest node.
    pub point: Option<[f64; 4]>,
    pub tractions: Vec<(String, [f64; 2])>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Constant,
    Ramp,
    Harmonic,
}

impl FromStr for ScheduleKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Res<Self> {
        Ok(match s {
            "constant" => ScheduleKind::Constant,
            "ramp" => ScheduleKind::Ramp,
            "harmonic" => ScheduleKind::Harmonic,
            other => return err(format!("unknown schedule `{other}`; valid schedules: constant, ramp, harmonic")),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DynamicsSpec {
    pub alpha: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub q1: Option<f64>,
    pub q2: Option<f64>,
    pub schedule: Option<ScheduleKind>,
    pub omega: Option<f64>,
    pub tip_load: Option<f64>,
    pub gravity: Option<f64>,
    pub length: Option<f64>,
    pub depth: Option<f64>,
    pub thickness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub vtk: bool,
    pub probe: Option<[f64; 2]>,
    pub snapshot_every: usize,
    pub eigenvalues: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("out"),
            vtk: true,
            probe: None,
            snapshot_every: 0,
            eigenvalues: 12,
        }
    }
}

/// A fully parsed configuration. Command-line flags are applied on top
/// with [`RunConfig::apply_flags`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub method: Method,
    pub stab: Stabilization,
    /// Extra `(method, stab)` pairs for `converge`.
    pub methods: Vec<(Method, Stabilization)>,
    pub tolerance: Option<f64>,
    pub kolosov: Kolosov,
    pub mesh: MeshSpec,
    pub material: MaterialSpec,
    pub bc: BcSpec,
    pub dynamics: DynamicsSpec,
    pub output: OutputSpec,
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub method: Option<Method>,
    pub stab: Option<Stabilization>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

fn parse_method_pair(s: &str) -> Res<(Method, Stabilization)> {
    let Some((m, st)) = s.split_once(':') else {
        return err(format!("`methods` entries look like nvem:dtilde, found `{s}`"));
    };
    Ok((
        m.parse().map_err(|e: nvem::Error| ConfigError(e.to_string()))?,
        st.parse().map_err(|e: nvem::Error| ConfigError(e.to_string()))?,
    ))
}

fn parse_bool(s: &str) -> Res<bool> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => err(format!("expected true or false, found `{other}`")),
    }
}

fn words(cfg: &ConfigFile, section: &str, key: &str) -> Vec<String> {
    cfg.raw(section, key)
        .map(|v| v.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).map(String::from).collect())
        .unwrap_or_default()
}

impl RunConfig {
    /// Defaults for `problem` with no other settings.
    pub fn preset(problem: ProblemKind) -> Self {
        RunConfig {
            problem,
            method: Method::Nvem,
            stab: Stabilization::DTilde,
            methods: Vec::new(),
            tolerance: None,
            kolosov: Kolosov::MatchCondition,
            mesh: MeshSpec::default(),
            material: MaterialSpec::default(),
            bc: BcSpec::default(),
            dynamics: DynamicsSpec::default(),
            output: OutputSpec::default(),
        }
    }

    /// Parses `text`; relative mesh paths are resolved against `base`.
    pub fn from_text(text: &str, base: &Path) -> Res<Self> {
        let f = ConfigFile::parse(text)?;
        let problem = f.get::<ProblemKind>("", "problem")?.unwrap_or(ProblemKind::Custom);
        let mut c = RunConfig::preset(problem);
        let nvem_err = |e: nvem::Error| ConfigError(e.to_string());
        if let Some(m) = f.raw("", "method") {
            c.method = m.parse().map_err(nvem_err)?;
        }
        if let Some(s) = f.raw("", "stab") {
            c.stab = s.parse().map_err(nvem_err)?;
        }
        c.methods = words(&f, "", "methods").iter().map(|s| parse_method_pair(s)).collect::<Res<_>>()?;
        c.tolerance = f.get("", "tolerance")?;
        if let Some(k) = f.raw("", "kolosov") {
            c.kolosov = match k {
                "match" => Kolosov::MatchCondition,
                "plane-stress-form" => Kolosov::PlaneStressForm,
                other => return err(format!("unknown kolosov `{other}`; valid values: match, plane-stress-form")),
            };
        }
        let path = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        c.mesh = MeshSpec {
            file: f.raw("mesh", "file").map(path),
            files: words(&f, "mesh", "files").iter().map(|s| path(s)).collect(),
            kind: f.get("mesh", "kind")?,
            nx: f.get("mesh", "nx")?,
            ny: f.get("mesh", "ny")?,
            domain: f.fixed::<4>("mesh", "domain")?,
            distortion: f.get("mesh", "distortion")?,
            sites: f.get("mesh", "sites")?,
            lloyd: f.get("mesh", "lloyd")?,
            seed: f.get("mesh", "seed")?,
            grading: f.get("mesh", "grading")?,
            levels: f.list("mesh", "levels")?.unwrap_or_default(),
        };
        c.material = MaterialSpec {
            young: f.get("material", "young")?,
            poisson: f.get("material", "poisson")?,
            condition: match f.raw("material", "condition") {
                Some(s) => Some(s.parse().map_err(nvem_err)?),
                None => None,
            },
            lambda: f.get("material", "lambda")?,
            mu: f.get("material", "mu")?,
            density: f.get("material", "density")?,
        };
        c.bc = BcSpec {
            clamp: words(&f, "bc", "clamp"),
            fix_x: words(&f, "bc", "fix_x"),
            fix_y: words(&f, "bc", "fix_y"),
            body: f.fixed::<2>("bc", "body")?,
            point: f.fixed::<4>("bc", "point")?,
            tractions: f.traction_entries()?,
        };
        c.dynamics = DynamicsSpec {
            alpha: f.get("dynamics", "alpha")?,
            dt: f.get("dynamics", "dt")?,
            t_end: f.get("dynamics", "t_end")?,
            q1: f.get("dynamics", "q1")?,
            q2: f.get("dynamics", "q2")?,
            schedule: f.get("dynamics", "schedule")?,
            omega: f.get("dynamics", "omega")?,
            tip_load: f.get("dynamics", "tip_load")?,
            gravity: f.get("dynamics", "gravity")?,
            length: f.get("dynamics", "length")?,
            depth: f.get("dynamics", "depth")?,
            thickness: f.get("dynamics", "thickness")?,
        };
        let d = OutputSpec::default();
        c.output = OutputSpec {
            dir: f.raw("output", "dir").map(path).unwrap_or(d.dir),
            vtk: f.raw("output", "vtk").map(parse_bool).transpose()?.unwrap_or(d.vtk),
            probe: f.fixed::<2>("output", "probe")?,
            snapshot_every: f.get("output", "snapshot_every")?.unwrap_or(d.snapshot_every),
            eigenvalues: f.get("output", "eigenvalues")?.unwrap_or(d.eigenvalues),
        };
        if problem != ProblemKind::Custom && (f.has_section("bc")) {
            return err(format!("[bc] is only used with problem = custom, not {problem}"));
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Res<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config file {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_text(&text, base)
    }

    pub fn apply_flags(&mut self, flags: &Flags) {
        if let Some(m) = flags.method {
            self.method = m;
        }
        if let Some(s) = flags.stab {
            self.stab = s;
        }
        if let Some(o) = &flags.out {
            self.output.dir = o.clone();
        }
        if let Some(s) = flags.seed {
            self.mesh.seed = Some(s);
        }
    }

    /// `methods` if given, otherwise the single `(method, stab)` pair.
    pub fn method_list(&self) -> Vec<(Method, Stabilization)> {
        if self.methods.is_empty() {
            vec![(self.method, self.stab)]
        } else {
            self.methods.clone()
        }
    }
}
