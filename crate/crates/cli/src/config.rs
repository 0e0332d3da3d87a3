//! Experiment configuration read from TOML.

use anyhow::{bail, ensure, Context, Result};
use liouville_core::geometry::{build_domain, DomainKind, Point2};
use liouville_core::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::PathBuf;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output directory, overridden by `--out`.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(rename = "job")]
    pub jobs: Vec<JobConfig>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobConfig {
    /// File stem for the job's outputs.
    pub name: String,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(flatten)]
    pub experiment: Experiment,
}

/// Overrides applied on top of the solver defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    pub trust_factor: Option<f64>,
    pub lattice_offset: Option<[f64; 2]>,
    pub newton_tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl SolverOptions {
    pub fn apply(&self, h: f64) -> SolverConfig {
        let mut cfg = SolverConfig::with_h(h);
        if let Some(t) = self.trust_factor {
            cfg.trust_factor = t;
        }
        if let Some(o) = self.lattice_offset {
            cfg.lattice_offset = o;
        }
        if let Some(t) = self.newton_tol {
            cfg.newton.tol = t;
        }
        if let Some(m) = self.max_iter {
            cfg.newton.max_iter = m;
        }
        cfg
    }

    fn validate(&self) -> Result<()> {
        if let Some(t) = self.trust_factor {
            ensure!(t.is_finite() && t >= 1.0, "solver.trust_factor must be at least 1");
        }
        if let Some(o) = self.lattice_offset {
            ensure!(o.iter().all(|v| (0.0..1.0).contains(v)), "solver.lattice_offset entries must lie in [0, 1)");
        }
        if let Some(t) = self.newton_tol {
            ensure!(t > 0.0, "solver.newton_tol must be positive");
        }
        Ok(())
    }
}

/// Background used by the grid solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Background {
    Smooth,
    Corner,
    Defining,
    ConstantK,
}

/// Domain of a C^{1,alpha} rate experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum C1AlphaVariant {
    /// Power-law graph `y > m |x|^(1+alpha)`; binding.
    Graph,
    /// Corner with power-law arms, compared against the corner model; advisory.
    CornerArms,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    DiskValidate {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "disk_hs")]
        hs: Vec<f64>,
        #[serde(default = "tenth")]
        d_min: f64,
        #[serde(default = "disk_max_error")]
        max_error: f64,
        #[serde(default = "second_order")]
        order: [f64; 2],
    },
    SmoothRate {
        #[serde(default = "unit_disk")]
        domain: DomainKind,
        #[serde(default = "fine_h")]
        h: f64,
        #[serde(default = "smooth_window")]
        window: [f64; 2],
        #[serde(default = "two")]
        expected: f64,
        #[serde(default = "fifth")]
        tolerance: f64,
        /// Boundary point the profile ray starts from; defaults to the rightmost point of a disk.
        ray_origin: Option<Point2>,
        /// Inward direction of the ray; defaults to the inward normal of a disk.
        ray_direction: Option<Point2>,
    },
    C1alphaRate {
        #[serde(default = "c1alpha_variant")]
        variant: C1AlphaVariant,
        #[serde(default = "half")]
        alpha: f64,
        #[serde(default = "one")]
        m: f64,
        #[serde(default = "one")]
        radius: f64,
        /// Opening of the corner-arms variant, in units of pi.
        #[serde(default = "half")]
        mu: f64,
        #[serde(default = "quarter")]
        amplitude: f64,
        #[serde(default = "fine_h")]
        h: f64,
        window: Option<[f64; 2]>,
        tolerance: Option<f64>,
    },
    CornerRate {
        mu: f64,
        #[serde(default = "quarter")]
        amplitude: f64,
        #[serde(default = "two")]
        arm_length: f64,
        #[serde(default = "fine_h")]
        h: f64,
        window: Option<[f64; 2]>,
        #[serde(default = "corner_min_slope")]
        min_slope: f64,
    },
    Localization {
        mu: f64,
        #[serde(default = "medium_h")]
        h: f64,
        #[serde(default = "half")]
        window_top: f64,
        #[serde(default = "localization_slack")]
        slack: f64,
    },
    BracketAudit {
        #[serde(default = "audit_domains")]
        domains: Vec<DomainKind>,
        #[serde(default = "coarse_h")]
        h: f64,
        #[serde(default = "thousand")]
        points: usize,
        #[serde(default = "ten")]
        slack_factor: f64,
    },
    SupersubAudit {
        #[serde(default = "supersub_mus")]
        mus: Vec<f64>,
        #[serde(default = "supersub_amplitudes")]
        amplitudes: Vec<f64>,
        #[serde(default = "ten_thousand")]
        points: usize,
    },
    KahlerProduct {
        #[serde(default = "unit_radii")]
        radii: Vec<f64>,
        #[serde(default = "thousand")]
        points: usize,
        /// Residual points are drawn from `|z_i| < fraction * radius_i`.
        #[serde(default = "point_fraction")]
        fraction: f64,
        #[serde(default = "fd_h")]
        fd_h: f64,
        #[serde(default = "residual_tol")]
        residual_tol: f64,
        #[serde(default = "bound_range")]
        bound_range: [f64; 2],
    },
    ConvergenceStudy {
        #[serde(default = "unit_disk")]
        domain: DomainKind,
        #[serde(default = "smooth_background")]
        background: Background,
        #[serde(default = "disk_hs")]
        hs: Vec<f64>,
        /// Reference spacing of a self-convergence study; without it the domain must be a disk.
        h_ref: Option<f64>,
        #[serde(default = "tenth")]
        d_min: f64,
        order: Option<[f64; 2]>,
    },
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn ten() -> f64 {
    10.0
}
fn half() -> f64 {
    0.5
}
fn quarter() -> f64 {
    0.25
}
fn fifth() -> f64 {
    0.2
}
fn tenth() -> f64 {
    0.1
}
fn thousand() -> usize {
    1000
}
fn ten_thousand() -> usize {
    10_000
}
fn fine_h() -> f64 {
    1.0 / 256.0
}
fn medium_h() -> f64 {
    1.0 / 128.0
}
fn coarse_h() -> f64 {
    1.0 / 64.0
}
fn disk_hs() -> Vec<f64> {
    vec![1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0]
}
fn disk_max_error() -> f64 {
    5e-4
}
fn second_order() -> [f64; 2] {
    [1.5, 2.5]
}
fn smooth_window() -> [f64; 2] {
    [0.05, 0.4]
}
fn unit_disk() -> DomainKind {
    DomainKind::Disk { radius: 1.0, center: Point2::ORIGIN }
}
fn c1alpha_variant() -> C1AlphaVariant {
    C1AlphaVariant::Graph
}
fn corner_min_slope() -> f64 {
    0.8
}
fn localization_slack() -> f64 {
    0.4
}
fn audit_domains() -> Vec<DomainKind> {
    vec![
        unit_disk(),
        DomainKind::Sector { mu: 0.5, radius: 1.0 },
        DomainKind::Sector { mu: 1.5, radius: 1.0 },
        DomainKind::CurvedCorner { mu: 0.75, amplitude: 0.25, arm_length: 1.0 },
    ]
}
fn supersub_mus() -> Vec<f64> {
    vec![0.3, 0.9, 1.5]
}
fn supersub_amplitudes() -> Vec<f64> {
    vec![0.5, 2.0]
}
fn unit_radii() -> Vec<f64> {
    vec![1.0, 1.0]
}
fn point_fraction() -> f64 {
    0.8
}
fn fd_h() -> f64 {
    1e-3
}
fn residual_tol() -> f64 {
    1e-6
}
fn bound_range() -> [f64; 2] {
    [0.16, 0.01]
}
fn smooth_background() -> Background {
    Background::Smooth
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::DiskValidate { .. } => "disk-validate",
            Experiment::SmoothRate { .. } => "smooth-rate",
            Experiment::C1alphaRate { .. } => "c1alpha-rate",
            Experiment::CornerRate { .. } => "corner-rate",
            Experiment::Localization { .. } => "localization",
            Experiment::BracketAudit { .. } => "bracket-audit",
            Experiment::SupersubAudit { .. } => "supersub-audit",
            Experiment::KahlerProduct { .. } => "kahler-product",
            Experiment::ConvergenceStudy { .. } => "convergence-study",
        }
    }

    /// Whether the job's verdict counts toward the exit status.
    pub fn binding(&self) -> bool {
        !matches!(self, Experiment::C1alphaRate { variant: C1AlphaVariant::CornerArms, .. })
    }

    fn validate(&self) -> Result<()> {
        match self {
            Experiment::DiskValidate { radius, hs, d_min, max_error, order } => {
                positive("radius", *radius)?;
                spacings(hs, 2)?;
                ensure!(*d_min >= 0.0 && d_min < radius, "d_min must lie in [0, radius)");
                positive("max_error", *max_error)?;
                interval("order", *order)?;
            }
            Experiment::SmoothRate { domain, h, window, tolerance, ray_origin, ray_direction, .. } => {
                build_domain(domain).context("invalid domain")?;
                spacing(*h)?;
                interval("window", *window)?;
                ensure!(*tolerance >= 0.0, "tolerance must be nonnegative");
                if ray_origin.is_none() || ray_direction.is_none() {
                    ensure!(matches!(domain, DomainKind::Disk { .. }), "ray_origin and ray_direction are required unless the domain is a disk");
                }
                if let Some(d) = ray_direction {
                    ensure!(d.norm() > 0.0, "ray_direction must be nonzero");
                }
            }
            Experiment::C1alphaRate { variant, alpha, m, radius, mu, amplitude, h, window, tolerance } => {
                spacing(*h)?;
                match variant {
                    C1AlphaVariant::Graph => build_domain(&DomainKind::C1AlphaCorner { alpha: *alpha, m: *m, radius: *radius }),
                    C1AlphaVariant::CornerArms => {
                        build_domain(&DomainKind::C1AlphaArmCorner { mu: *mu, alpha: *alpha, amplitude: *amplitude, arm_length: 2.0 })
                    }
                }
                .context("invalid domain")?;
                if let Some(w) = window {
                    interval("window", *w)?;
                }
                if let Some(t) = tolerance {
                    ensure!(*t >= 0.0, "tolerance must be nonnegative");
                }
            }
            Experiment::CornerRate { mu, amplitude, arm_length, h, window, .. } => {
                spacing(*h)?;
                build_domain(&DomainKind::CurvedCorner { mu: *mu, amplitude: *amplitude, arm_length: *arm_length }).context("invalid domain")?;
                if let Some(w) = window {
                    interval("window", *w)?;
                }
            }
            Experiment::Localization { mu, h, window_top, slack } => {
                spacing(*h)?;
                ensure!(*mu > 0.0 && *mu < 2.0, "mu must lie in (0, 2)");
                positive("window_top", *window_top)?;
                ensure!(*slack >= 0.0, "slack must be nonnegative");
            }
            Experiment::BracketAudit { domains, h, points, slack_factor } => {
                ensure!(!domains.is_empty(), "bracket-audit needs at least one domain");
                for d in domains {
                    build_domain(d).context("invalid domain")?;
                }
                spacing(*h)?;
                ensure!(*points >= domains.len(), "points must be at least the number of domains");
                ensure!(*slack_factor >= 0.0, "slack_factor must be nonnegative");
            }
            Experiment::SupersubAudit { mus, amplitudes, points } => {
                ensure!(!mus.is_empty() && !amplitudes.is_empty(), "mus and amplitudes must be nonempty");
                for mu in mus {
                    ensure!(*mu > 0.0 && *mu < 2.0, "mu must lie in (0, 2)");
                }
                for a in amplitudes {
                    positive("amplitude", *a)?;
                }
                ensure!(*points > 0, "points must be positive");
            }
            Experiment::KahlerProduct { radii, points, fraction, fd_h, residual_tol, bound_range } => {
                ensure!(!radii.is_empty(), "radii must be nonempty");
                for r in radii {
                    positive("radius", *r)?;
                }
                ensure!(*points > 0, "points must be positive");
                ensure!(*fraction > 0.0 && *fraction < 1.0, "fraction must lie in (0, 1)");
                positive("fd_h", *fd_h)?;
                positive("residual_tol", *residual_tol)?;
                ensure!(bound_range[0] > bound_range[1] && bound_range[1] > 0.0, "bound_range must be [d_max, d_min] with d_max > d_min > 0");
            }
            Experiment::ConvergenceStudy { domain, background, hs, h_ref, d_min, order } => {
                build_domain(domain).context("invalid domain")?;
                spacings(hs, 2)?;
                ensure!(*d_min >= 0.0, "d_min must be nonnegative");
                match h_ref {
                    Some(r) => {
                        spacing(*r)?;
                        for h in hs {
                            let ratio = h / r;
                            ensure!(ratio > 1.5 && (ratio - ratio.round()).abs() < 1e-9, "every h must be an integer multiple (at least 2) of h_ref");
                        }
                    }
                    None => ensure!(matches!(domain, DomainKind::Disk { .. }), "h_ref is required unless the domain is a disk"),
                }
                if *background == Background::Corner {
                    ensure!(!build_domain(domain)?.corners().is_empty(), "the corner background needs a domain with a corner");
                }
                if let Some(o) = order {
                    interval("order", *o)?;
                }
            }
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("config does not parse")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.jobs.is_empty(), "config defines no [[job]]");
        let mut names = HashSet::new();
        for job in &self.jobs {
            let ok = !job.name.is_empty() && job.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
            ensure!(ok, "job name {:?} must be nonempty and use only letters, digits, '-' and '_'", job.name);
            if !names.insert(job.name.as_str()) {
                bail!("duplicate job name {:?}", job.name);
            }
            job.solver.validate().with_context(|| format!("job {:?}", job.name))?;
            job.experiment.validate().with_context(|| format!("job {:?}", job.name))?;
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    ensure!(v.is_finite() && v > 0.0, "{name} must be positive, got {v}");
    Ok(())
}

fn spacing(h: f64) -> Result<()> {
    ensure!(h.is_finite() && h > 0.0 && h <= 0.5, "grid spacing must lie in (0, 0.5], got {h}");
    Ok(())
}

fn spacings(hs: &[f64], at_least: usize) -> Result<()> {
    ensure!(hs.len() >= at_least, "need at least {at_least} grid spacings");
    for h in hs {
        spacing(*h)?;
    }
    ensure!(hs.windows(2).all(|w| w[1] < w[0]), "grid spacings must decrease");
    Ok(())
}

fn interval(name: &str, w: [f64; 2]) -> Result<()> {
    ensure!(w[0].is_finite() && w[1].is_finite() && w[0] < w[1], "{name} must be [lo, hi] with lo < hi");
    Ok(())
}

/// Annotated example of every experiment kind with its defaults.
pub const SCHEMA: &str = r#"# Liouville experiment configuration (TOML).
#
# seed = 1                      # base seed; job i uses seed + i
# out = "runs/example"          # output directory (overridden by --out)
#
# Every [[job]] has a unique `name` (letters, digits, '-', '_'), a `kind`, and
# optionally a [job.solver] table:
#   trust_factor = 10.0         # trust region d >= trust_factor * h
#   lattice_offset = [0.0, 0.0] # node (i, j) sits at (offset + (i, j)) h
#   newton_tol = 1e-10
#   max_iter = 50
#
# Domains use the form { kind = "...", ... } with kinds
#   disk { radius, center = { x, y } }        sector { mu, radius }
#   curved-corner { mu, amplitude, arm_length = 2 }
#   c1-alpha-arm-corner { mu, alpha, amplitude, arm_length = 2 }
#   c1-alpha-corner { alpha, m, radius }      smooth-blob { radius = 1, amplitude, lobes }
#
# Binding checks decide the exit status; advisory ones are reported only.
# CSV columns are listed after each kind.

[[job]]
name = "disk"
kind = "disk-validate"          # error against the exact solution on the disk
radius = 1.0
hs = [0.03125, 0.015625, 0.0078125]
d_min = 0.1                     # errors measured on d >= d_min
max_error = 5e-4                # at the second spacing
order = [1.5, 2.5]              # least-squares order
# csv: h,max_error,nodes,order

[[job]]
name = "smooth"
kind = "smooth-rate"            # |u + log d - kappa d / 2| ~ C d^slope
domain = { kind = "disk", radius = 1.0 }
h = 0.00390625
window = [0.05, 0.4]
expected = 2.0
tolerance = 0.2
# ray_origin = { x = 1.0, y = 0.0 }     # required for non-disk domains
# ray_direction = { x = -1.0, y = 0.0 }
# csv: x,d,px,py,error

[[job]]
name = "holder"
kind = "c1alpha-rate"           # |u + log d| ~ C d^alpha
variant = "graph"               # or "corner-arms" (advisory, |u - f_mu|)
alpha = 0.5
m = 1.0
radius = 1.0
mu = 0.5                        # corner-arms only
amplitude = 0.25                # corner-arms only
h = 0.00390625
# window = [20 h, 0.2 * feature scale] and tolerance = 0.2 (0.1 for corner-arms) by default
# csv: x,d,px,py,error

[[job]]
name = "corner"
kind = "corner-rate"            # |u - f_mu| ~ C d^slope along the bisector
mu = 0.5
amplitude = 0.25
arm_length = 2.0
h = 0.00390625
min_slope = 0.8
# csv: x,d,px,py,error

[[job]]
name = "local"
kind = "localization"           # |u_inner - u_outer| ~ C r^slope, slope >= 1/mu - slack
mu = 0.5
h = 0.0078125
window_top = 0.5
slack = 0.4
# csv: x,d,px,py,gap

[[job]]
name = "brackets"
kind = "bracket-audit"          # lower - slack <= u <= upper + slack at trust-region nodes
h = 0.015625
points = 1000
slack_factor = 10.0             # slack = slack_factor * h^2
# domains = [{ kind = "disk", radius = 1.0 }, { kind = "sector", mu = 0.5, radius = 1.0 }]
# csv: domain,px,py,d,lower,u,upper,flagged

[[job]]
name = "barriers"
kind = "supersub-audit"         # sign checks of the cone barriers
mus = [0.3, 0.9, 1.5]
amplitudes = [0.5, 2.0]
points = 10000
# csv: mu,a,points,super_violations,sub_violations,max_super,min_sub

[[job]]
name = "product"
kind = "kahler-product"         # product of disk factors
radii = [1.0, 1.0]              # one disk per factor, n = len(radii)
points = 1000
fraction = 0.8
fd_h = 1e-3
residual_tol = 1e-6
bound_range = [0.16, 0.01]
# csv: level_d,samples,sup

[[job]]
name = "study"
kind = "convergence-study"
domain = { kind = "sector", mu = 1.5, radius = 1.0 }
background = "corner"           # smooth | corner | defining | constant-k
hs = [0.03125, 0.015625]
h_ref = 0.00390625              # omit for the exact disk solution
d_min = 0.1                     # exact-solution studies only
# order = [1.5, 2.5]
# csv: h,max_error,nodes,order
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_example_is_a_valid_config() {
        let cfg = ExperimentConfig::parse(SCHEMA).unwrap();
        let kinds: HashSet<&str> = cfg.jobs.iter().map(|j| j.experiment.kind()).collect();
        assert_eq!(kinds.len(), 9);
    }

    #[test]
    fn unknown_fields_and_kinds_are_rejected() {
        assert!(ExperimentConfig::parse("[[job]]\nname = \"a\"\nkind = \"disk-validate\"\nradius = 1.0\nbogus = 3\n").is_err());
        assert!(ExperimentConfig::parse("[[job]]\nname = \"a\"\nkind = \"nope\"\n").is_err());
        assert!(ExperimentConfig::parse("seed = 1\n").is_err());
    }

    #[test]
    fn kind_specific_validation() {
        let bad = [
            "[[job]]\nname = \"a\"\nkind = \"corner-rate\"\nmu = 2.5\n",
            "[[job]]\nname = \"a\"\nkind = \"disk-validate\"\nhs = [0.01, 0.02]\n",
            "[[job]]\nname = \"a\"\nkind = \"smooth-rate\"\ndomain = { kind = \"sector\", mu = 0.5, radius = 1.0 }\n",
            "[[job]]\nname = \"a\"\nkind = \"convergence-study\"\ndomain = { kind = \"sector\", mu = 0.5, radius = 1.0 }\nhs = [0.05, 0.025]\n",
            "[[job]]\nname = \"a\"\nkind = \"supersub-audit\"\n[[job]]\nname = \"a\"\nkind = \"supersub-audit\"\n",
            "[[job]]\nname = \"a/b\"\nkind = \"supersub-audit\"\n",
        ];
        for text in bad {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::parse("[[job]]\nname = \"a\"\nkind = \"kahler-product\"\n").unwrap();
        assert_eq!(cfg.seed, DEFAULT_SEED);
        match &cfg.jobs[0].experiment {
            Experiment::KahlerProduct { radii, points, .. } => assert_eq!((radii.len(), *points), (2, 1000)),
            e => panic!("{e:?}"),
        }
        assert!(!ExperimentConfig::parse("[[job]]\nname = \"a\"\nkind = \"c1alpha-rate\"\nvariant = \"corner-arms\"\n").unwrap().jobs[0].experiment.binding());
    }
}
