//! Seeded verification campaigns: one scenario kind per structural result,
//! run over many trials and summarised against named tolerances.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accontinuity::{verify_ac_transform, verify_cp_induction, DEFAULT_PURITY_DEPTH, DEFAULT_PURITY_TOL};
use crate::algebra::{c, operator_norm, r, ComplexMatrix, C64};
use crate::correspondence::{Correspondence, EquivalenceBimodule};
use crate::error::{Error, Result};
use crate::fock::{fock_norm, TensorPolynomial};
use crate::instances::{matrices_over_diagonal, random_instance, ContextShape};
use crate::morita::{canonical_stabilization, popescu_form, random_ball_point, MoritaContext};
use crate::report::Residuals;
use crate::representation::{sigma_dual, CovariantPair, Representation};

pub const DEFAULT_SEED: u64 = 0xC0FFEE;
pub const DEFAULT_TRIALS: usize = 200;
/// Points drawn per random context in functor trials.
const FUNCTOR_POINTS: usize = 3;
/// Scale applied to ball points in absolute-continuity trials, keeping the
/// spectral radius of the induced completely positive map at most 0.95².
const AC_POINT_SCALE: f64 = 0.95;
const CIRCLE_SAMPLES: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Functor,
    CpLemma,
    AcTransform,
    Stabilize,
    Reconstruct,
    DiscConvergence,
}

impl Kind {
    pub const ALL: [Kind; 6] =
        [Kind::Functor, Kind::CpLemma, Kind::AcTransform, Kind::Stabilize, Kind::Reconstruct, Kind::DiscConvergence];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Functor => "functor",
            Kind::CpLemma => "cp_lemma",
            Kind::AcTransform => "ac_transform",
            Kind::Stabilize => "stabilize",
            Kind::Reconstruct => "reconstruct",
            Kind::DiscConvergence => "disc_convergence",
        }
    }

    /// Residual names checked by this kind and their default tolerances.
    pub fn default_tolerances(self) -> BTreeMap<String, f64> {
        let list: &[(&str, f64)] = match self {
            Kind::Functor => &[("isometry_gap", 1e-8), ("intertwining", 1e-9), ("dual_dim_gap", 0.0), ("image_rank_gap", 0.0)],
            Kind::CpLemma => &[("cp_induction", 1e-10), ("commutant_containment", 1e-9), ("commutant_dim_gap", 0.0)],
            Kind::AcTransform => &[("projection_difference", 1e-8), ("full_mismatch", 0.0), ("spectral_radius_excess", 0.0)],
            Kind::Stabilize => &[
                ("rr_star_minus_p0", 1e-12),
                ("w_isometry", 1e-10),
                ("w_onto_window", 1e-10),
                ("w_window_rank_deficit", 0.0),
                ("w_right_intertwining", 1e-10),
                ("w_left_intertwining", 1e-10),
                ("phi_multiplicative", 1e-10),
            ],
            Kind::Reconstruct => &[("popescu_equality", 1e-12), ("norm_excess", 1e-12)],
            Kind::DiscConvergence => &[
                ("point_evaluation_error", 1e-12),
                ("point_bound_excess", 1e-6),
                ("matrix_bound_excess", 1e-6),
                ("fock_norm_gap", 1e-2),
                ("fock_norm_excess", 1e-12),
            ],
        };
        list.iter().map(|(n, v)| (n.to_string(), *v)).collect()
    }

    pub fn default_nmax(self) -> Option<usize> {
        match self {
            Kind::DiscConvergence => Some(200),
            _ => None,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s || k.name().replace('_', "-") == s)
            .ok_or_else(|| {
                let names: Vec<_> = Kind::ALL.iter().map(|k| k.name()).collect();
                Error::Argument(format!("unknown kind '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

/// Where a scenario's fixed instance comes from. Without one, every trial
/// draws its own random instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    /// `scalar-trivial`, `column` or `diagonal`.
    Builtin(String),
    File(PathBuf),
    Inline(Box<InstanceFile>),
}

/// Serialised instance: `F` over `N`, optionally an equivalence bimodule `X`
/// (the context is then `E = X ⊗ F ⊗ X̃`; otherwise the trivial context),
/// and a representation of `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub kind: Kind,
    pub seed: u64,
    #[serde(default)]
    pub shape: Option<ContextShape>,
    #[serde(default)]
    pub nmax: Option<usize>,
    pub f: Correspondence,
    #[serde(default)]
    pub x: Option<EquivalenceBimodule>,
    pub sigma: Representation,
}

impl InstanceFile {
    pub fn builtin(name: &str) -> Result<Self> {
        let (f, x, sigma) = match name {
            "scalar-trivial" => (Correspondence::standard(1), None, Representation::scalar(1)),
            "column" => (Correspondence::standard(2), Some(EquivalenceBimodule::column(2)), Representation::scalar(2)),
            "diagonal" => {
                let f = matrices_over_diagonal(2);
                let sigma = Representation::identity(&f.coeff_algebra).amplify(2);
                (f, None, sigma)
            }
            other => {
                return Err(Error::Argument(format!(
                    "unknown builtin instance '{other}' (expected scalar-trivial, column or diagonal)"
                )))
            }
        };
        Ok(InstanceFile { kind: Kind::Functor, seed: 0, shape: None, nmax: None, f, x, sigma })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn context(&self) -> Result<MoritaContext> {
        match &self.x {
            Some(x) => MoritaContext::induced(&self.f, x),
            None => MoritaContext::trivial(&self.f),
        }
    }
}

impl InstanceSource {
    pub fn resolve(&self) -> Result<InstanceFile> {
        match self {
            InstanceSource::Builtin(name) => InstanceFile::builtin(name),
            InstanceSource::File(path) => InstanceFile::load(path),
            InstanceSource::Inline(inst) => Ok((**inst).clone()),
        }
    }
}

/// Reproducible random instance for a scenario kind.
pub fn generate_instance(kind: Kind, seed: u64, nmax: Option<usize>) -> Result<InstanceFile> {
    match kind {
        Kind::Stabilize | Kind::Reconstruct | Kind::DiscConvergence => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = if kind == Kind::DiscConvergence { 1 } else { rng.random_range(1..=3usize) };
            let h = rng.random_range(1..=3usize);
            Ok(InstanceFile {
                kind,
                seed,
                shape: None,
                nmax: Some(nmax.or(kind.default_nmax()).unwrap_or(3)),
                f: Correspondence::standard(d),
                x: None,
                sigma: Representation::scalar(h),
            })
        }
        _ => {
            let inst = random_instance(seed)?;
            Ok(InstanceFile {
                kind,
                seed,
                shape: Some(inst.shape.clone()),
                nmax,
                f: inst.context.f.clone(),
                x: Some(inst.context.x.clone()),
                sigma: inst.sigma,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: Kind,
    #[serde(default)]
    pub instance: Option<InstanceSource>,
    pub trials: usize,
    pub seed: u64,
    /// Overrides of the default tolerances, by residual name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub nmax: Option<usize>,
}

impl Scenario {
    pub fn new(kind: Kind) -> Self {
        Scenario { kind, instance: None, trials: DEFAULT_TRIALS, seed: DEFAULT_SEED, tolerances: BTreeMap::new(), nmax: None }
    }

    /// Default tolerances with the overrides applied. Unknown names are an
    /// error so that typos do not silently loosen nothing.
    pub fn effective_tolerances(&self) -> Result<BTreeMap<String, f64>> {
        let mut tols = self.kind.default_tolerances();
        for (name, value) in &self.tolerances {
            match tols.get_mut(name) {
                Some(slot) => *slot = *value,
                None => {
                    return Err(Error::Argument(format!(
                        "kind {} has no residual named '{name}' (known: {})",
                        self.kind,
                        tols.keys().cloned().collect::<Vec<_>>().join(", ")
                    )))
                }
            }
        }
        Ok(tols)
    }
}

/// Sub-seed for trial `index`, a fixed mix of the master seed.
pub fn trial_seed(master: u64, index: usize) -> u64 {
    let mut z = master ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub residuals: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub max: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: Scenario,
    pub trials: Vec<TrialRecord>,
    /// Residuals computed once per scenario rather than per trial.
    pub global: BTreeMap<String, f64>,
    pub summary: Vec<CheckSummary>,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl Report {
    pub fn to_machine(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Machine form with the wall time zeroed, for byte comparisons.
    pub fn canonical(&self) -> String {
        let mut copy = self.clone();
        copy.wall_time_s = 0.0;
        copy.to_machine()
    }

    pub fn from_machine(text: &str, location: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("{location}:{}:{}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn to_human(&self, verbose: bool) -> String {
        use std::fmt::Write;
        let s = &self.scenario;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "scenario {}  trials {}  seed {:#x}  nmax {}",
            s.kind,
            s.trials,
            s.seed,
            s.nmax.map_or("default".to_string(), |n| n.to_string())
        );
        for c in &self.summary {
            let _ = writeln!(
                out,
                "  {:<26} max {:<24e} tol {:<10e} {}",
                c.name,
                c.max,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        for t in self.trials.iter().filter(|t| t.error.is_some()) {
            let _ = writeln!(out, "  trial {} error: {}", t.index, t.error.as_deref().unwrap_or(""));
        }
        if verbose {
            for t in &self.trials {
                let cells: Vec<String> = t.residuals.iter().map(|(n, v)| format!("{n}={v:e}")).collect();
                let _ = writeln!(out, "    trial {:>4} seed {:#018x} {}", t.index, t.seed, cells.join(" "));
            }
        }
        let _ = writeln!(out, "  wall time {:.3} s", self.wall_time_s);
        let _ = writeln!(out, "{} {}", if self.pass { "PASS" } else { "FAIL" }, s.kind);
        out
    }
}

pub fn run_scenario(s: &Scenario) -> Result<Report> {
    let start = Instant::now();
    let tols = s.effective_tolerances()?;
    let fixed = s.instance.as_ref().map(InstanceSource::resolve).transpose()?;
    let fixed = fixed.as_ref();
    let nmax = s.nmax.or(fixed.and_then(|f| f.nmax)).or(s.kind.default_nmax());
    let fixed_context = match (s.kind, fixed) {
        (Kind::Functor | Kind::CpLemma | Kind::AcTransform, Some(f)) => Some(f.context()?),
        _ => None,
    };

    let trials: Vec<TrialRecord> = (0..s.trials)
        .into_par_iter()
        .map(|index| {
            let seed = trial_seed(s.seed, index);
            let outcome = run_trial(s.kind, index, seed, fixed, fixed_context.as_ref(), nmax);
            match outcome {
                Ok(res) => {
                    let bad: Vec<&str> = res.entries.iter().filter(|(_, v)| !v.is_finite()).map(|(n, _)| n.as_str()).collect();
                    let error = (!bad.is_empty()).then(|| format!("non-finite residuals: {}", bad.join(", ")));
                    let residuals = res.entries.iter().filter(|(_, v)| v.is_finite()).cloned().collect();
                    TrialRecord { index, seed, residuals, error }
                }
                Err(e) => TrialRecord { index, seed, residuals: BTreeMap::new(), error: Some(e.to_string()) },
            }
        })
        .collect();

    let global: BTreeMap<String, f64> = match s.kind {
        Kind::DiscConvergence => disc_norm_checks(nmax.unwrap_or(200))?.entries.into_iter().collect(),
        _ => BTreeMap::new(),
    };

    let mut summary = Vec::new();
    for (name, tol) in &tols {
        let mut seen = false;
        let mut worst = 0.0f64;
        for v in trials.iter().filter_map(|t| t.residuals.get(name)).chain(global.get(name)) {
            seen = true;
            worst = worst.max(*v);
        }
        if seen {
            summary.push(CheckSummary { name: name.clone(), max: worst, tolerance: *tol, pass: worst <= *tol });
        }
    }
    let pass = trials.iter().all(|t| t.error.is_none()) && summary.iter().all(|c| c.pass) && !summary.is_empty();
    Ok(Report { scenario: s.clone(), trials, global, summary, pass, wall_time_s: start.elapsed().as_secs_f64() })
}

fn run_trial(
    kind: Kind,
    index: usize,
    seed: u64,
    fixed: Option<&InstanceFile>,
    fixed_context: Option<&MoritaContext>,
    nmax: Option<usize>,
) -> Result<Residuals> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let context_and_sigma = || -> Result<(MoritaContext, Representation)> {
        match (fixed_context, fixed) {
            (Some(ctx), Some(f)) => Ok((ctx.clone(), f.sigma.clone())),
            _ => {
                let inst = random_instance(seed)?;
                Ok((inst.context, inst.sigma))
            }
        }
    };
    match kind {
        Kind::Functor => {
            let (ctx, sigma) = context_and_sigma()?;
            let rep = ctx.verify_functor(&sigma, FUNCTOR_POINTS, seed)?;
            Ok(Residuals::new()
                .with("isometry_gap", rep.max_isometry_gap)
                .with("intertwining", rep.max_intertwining)
                .with("dual_dim_gap", (rep.dim_f_dual as f64 - rep.dim_e_dual as f64).abs())
                .with("image_rank_gap", (rep.image_rank as f64 - rep.dim_e_dual as f64).abs()))
        }
        Kind::CpLemma => {
            let (ctx, sigma) = context_and_sigma()?;
            let dual = sigma_dual(&ctx.f, &sigma)?;
            let z = random_ball_point(&dual, &mut rng);
            verify_cp_induction(&ctx, &CovariantPair::from_point(&dual, &z), None)
        }
        Kind::AcTransform => {
            let (ctx, sigma) = context_and_sigma()?;
            let dual = sigma_dual(&ctx.f, &sigma)?;
            let z = random_ball_point(&dual, &mut rng) * r(AC_POINT_SCALE);
            let out = verify_ac_transform(&ctx, &CovariantPair::from_point(&dual, &z), DEFAULT_PURITY_DEPTH, DEFAULT_PURITY_TOL)?;
            let mut res = out.residuals;
            res.push("spectral_radius_excess", (out.source.spectral_radius - 0.95).max(0.0));
            res.push("source_rank", out.source.rank() as f64);
            res.push("target_rank", out.target.rank() as f64);
            Ok(res)
        }
        Kind::Stabilize => {
            let (f, cap) = match fixed {
                Some(inst) => (inst.f.clone(), nmax.unwrap_or(3)),
                None => {
                    let f = match index % 3 {
                        0 => Correspondence::standard(1),
                        1 => Correspondence::standard(2),
                        _ => matrices_over_diagonal(2),
                    };
                    (f, nmax.unwrap_or(2 + (index / 3) % 3))
                }
            };
            let st = canonical_stabilization(&f, cap)?;
            Ok(st.check(3, seed))
        }
        Kind::Reconstruct => {
            let (d, h, cap) = match fixed {
                Some(inst) => (inst.f.vec_dim, inst.sigma.space_dim, nmax.unwrap_or(3)),
                None => (1 + index % 3, 1 + (index / 3) % 3, nmax.unwrap_or(2 + (index / 9) % 3)),
            };
            reconstruct_trial(d, h, cap, &mut rng)
        }
        Kind::DiscConvergence => disc_trial(&mut rng),
    }
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Random matrix with operator norm uniform in `[0, 1]`.
fn random_contraction(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = gaussian_matrix(rows, cols, rng);
    let radius: f64 = rng.random_range(0.0..=1.0);
    let norm = operator_norm(&g);
    if norm == 0.0 {
        g
    } else {
        g * r(radius / norm)
    }
}

fn reconstruct_trial(d: usize, h: usize, cap: usize, rng: &mut ChaCha8Rng) -> Result<Residuals> {
    let st = canonical_stabilization(&Correspondence::standard(d), cap)?;
    let row = random_contraction(h, d * h, rng);
    let ts: Vec<ComplexMatrix> = (0..d).map(|i| row.columns(i * h, h).into_owned()).collect();
    let pair = CovariantPair::new(&st.fock.base, &Representation::scalar(h), row.clone())?;
    let rec = st.reconstruction_operator(&pair)?;
    let direct = popescu_form(&ts, cap)?;
    Ok(Residuals::new()
        .with("popescu_equality", operator_norm(&(&rec.matrix - direct)))
        .with("norm_excess", (operator_norm(&rec.matrix) - operator_norm(&row)).max(0.0)))
}

fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::default(), |acc, a| acc * z + a)
}

/// `max |p|` over equally spaced points of the unit circle.
fn circle_sup(coeffs: &[C64]) -> f64 {
    (0..CIRCLE_SAMPLES)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / CIRCLE_SAMPLES as f64;
            horner(coeffs, C64::from_polar(1.0, theta)).norm()
        })
        .fold(0.0, f64::max)
}

fn disc_trial(rng: &mut ChaCha8Rng) -> Result<Residuals> {
    let degree = rng.random_range(1..=5usize);
    let coeffs: Vec<C64> = (0..=degree).map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    let p = TensorPolynomial::scalar(&coeffs);
    let sup = circle_sup(&coeffs);
    let line = Correspondence::standard(1);

    let radius: f64 = rng.random_range(0.0f64..1.0).sqrt();
    let lambda = C64::from_polar(radius, rng.random_range(0.0..2.0 * std::f64::consts::PI));
    let point = CovariantPair::new(&line, &Representation::scalar(1), ComplexMatrix::from_element(1, 1, lambda))?;
    let value = point.integrated_form(&p)?[(0, 0)];

    let t = random_contraction(2, 2, rng);
    let matrix = CovariantPair::new(&line, &Representation::scalar(2), t)?;
    let image = matrix.integrated_form(&p)?;

    Ok(Residuals::new()
        .with("point_evaluation_error", (value - horner(&coeffs, lambda)).norm())
        .with("point_bound_excess", (value.norm() - sup).max(0.0))
        .with("matrix_bound_excess", (operator_norm(&image) - sup).max(0.0)))
}

/// Truncated Fock norm of `1 + z` against its limit 2.
fn disc_norm_checks(cap: usize) -> Result<Residuals> {
    let p = TensorPolynomial::scalar(&[r(1.0), r(1.0)]);
    let value = fock_norm(&Correspondence::standard(1), &p, cap)?;
    Ok(Residuals::new()
        .with("fock_norm", value)
        .with("fock_norm_gap", (value - 2.0).abs())
        .with("fock_norm_excess", (value - 2.0).max(0.0)))
}

/// All kinds with the given master seed and trial count.
pub fn default_campaign(seed: u64, trials: usize) -> Vec<Scenario> {
    Kind::ALL
        .iter()
        .map(|&kind| Scenario { seed, trials, ..Scenario::new(kind) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(kind: Kind, trials: usize) -> Report {
        run_scenario(&Scenario { trials, seed: 1, ..Scenario::new(kind) }).unwrap()
    }

    #[test]
    fn scalar_trivial_functor_has_no_gap() {
        let s = Scenario {
            instance: Some(InstanceSource::Builtin("scalar-trivial".into())),
            trials: 10,
            seed: 1,
            ..Scenario::new(Kind::Functor)
        };
        let rep = run_scenario(&s).unwrap();
        assert!(rep.pass, "{}", rep.to_human(true));
        assert_eq!(rep.summary.iter().find(|c| c.name == "isometry_gap").unwrap().max, 0.0);
    }

    #[test]
    fn every_kind_passes_briefly() {
        for kind in Kind::ALL {
            let mut s = Scenario { trials: 4, seed: 5, ..Scenario::new(kind) };
            if kind == Kind::DiscConvergence {
                s.nmax = Some(60);
                s.tolerances.insert("fock_norm_gap".into(), 5e-2);
            }
            let rep = run_scenario(&s).unwrap();
            assert!(rep.pass, "{}", rep.to_human(true));
        }
    }

    #[test]
    fn reports_are_deterministic_and_round_trip() {
        let a = quick(Kind::CpLemma, 6);
        let b = quick(Kind::CpLemma, 6);
        assert_eq!(a.canonical(), b.canonical());
        let back = Report::from_machine(&a.to_machine(), "memory").unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn tolerance_overrides() {
        let mut s = Scenario { trials: 2, seed: 3, ..Scenario::new(Kind::Reconstruct) };
        s.tolerances.insert("no_such_check".into(), 1.0);
        assert!(run_scenario(&s).is_err());
        s.tolerances.clear();
        s.tolerances.insert("popescu_equality".into(), -1.0);
        assert!(!run_scenario(&s).unwrap().pass);
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("cp_lemma".parse::<Kind>().unwrap(), Kind::CpLemma);
        assert_eq!("disc-convergence".parse::<Kind>().unwrap(), Kind::DiscConvergence);
        assert!("nope".parse::<Kind>().is_err());
    }

    #[test]
    fn generated_instances_reproduce_and_load() {
        let a = serde_json::to_string(&generate_instance(Kind::Functor, 42, None).unwrap()).unwrap();
        let b = serde_json::to_string(&generate_instance(Kind::Functor, 42, None).unwrap()).unwrap();
        assert_eq!(a, b);
        let inst: InstanceFile = serde_json::from_str(&a).unwrap();
        let s = Scenario {
            instance: Some(InstanceSource::Inline(Box::new(inst))),
            trials: 3,
            seed: 9,
            ..Scenario::new(Kind::CpLemma)
        };
        assert!(run_scenario(&s).unwrap().pass);
    }

    #[test]
    fn parse_errors_carry_location() {
        let dir = std::env::temp_dir().join(format!("morita-parse-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.json");
        std::fs::write(&path, "{\n  \"kind\": \"functor\",\n  \"seed\": oops\n}").unwrap();
        match InstanceFile::load(&path) {
            Err(Error::Parse { location, .. }) => assert!(location.ends_with(":3:11"), "{location}"),
            other => panic!("unexpected {other:?}"),
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
