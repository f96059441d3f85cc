//! Batch front end: parse a JSON job, run one command, emit a report.
//!
//! A job file is a JSON object holding the command name, an optional
//! `options` block and the payload fields the command needs. Command-line
//! flags override the file. Reports echo the fully resolved job in canonical
//! form together with its SHA-256, so any report can be replayed.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use toricgit::build::{alpha_surface_formula, projectivized_bundle, BuildError};
use toricgit::git::{FaceStatus, GitError, GitSetup};
use toricgit::json::{
    index_from_json, index_to_json, subspace_to_rows, BundleDto, JsonError, PolytopeDto, RationalDto, SetupDto,
    SheafDto,
};
use toricgit::klyachko::{FiltrationSheaf, KlyachkoError};
use toricgit::lattice::LatticeError;
use toricgit::linalg::{format_rational, Int, Rat};
use toricgit::minkowski::{
    ample_class_alpha, compatible_subgroups, converse_falsifier, curve_proportionality, minkowski_condition,
    solve_minkowski, verify_slope_identity, MinkowskiError, SearchOptions, SolverOptions,
};
use toricgit::polytope::PolytopeError;
use toricgit::stability::{check_stability, slope, SlopeEntry, SlopeValue, StabilityError, StabilityOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Quotient,
    Classify,
    Slope,
    Stability,
    Descend,
    Pullback,
    Pushforward,
    MinkowskiCheck,
    SolveMinkowski,
    Alpha,
    SlopeIdentity,
    CompatibleSubgroups,
    Bundle,
    FalsifyConverse,
}

impl Command {
    pub fn name(self) -> &'static str {
        use Command::*;
        match self {
            Quotient => "quotient",
            Classify => "classify",
            Slope => "slope",
            Stability => "stability",
            Descend => "descend",
            Pullback => "pullback",
            Pushforward => "pushforward",
            MinkowskiCheck => "minkowski-check",
            SolveMinkowski => "solve-minkowski",
            Alpha => "alpha",
            SlopeIdentity => "slope-identity",
            CompatibleSubgroups => "compatible-subgroups",
            Bundle => "bundle",
            FalsifyConverse => "falsify-converse",
        }
    }

    /// Payload fields: (required, optional). `setup|bundle` means exactly one.
    fn schema(self) -> (&'static [&'static str], &'static [&'static str]) {
        use Command::*;
        match self {
            Quotient | Classify | MinkowskiCheck | FalsifyConverse => (&["setup"], &[]),
            Slope | Stability => (&["polytope", "sheaf"], &[]),
            Descend | Pushforward => (&["setup", "sheaf"], &[]),
            Pullback => (&["setup", "sheaf"], &["index"]),
            SolveMinkowski => (&["normals", "targets"], &[]),
            Alpha => (&["setup|bundle"], &[]),
            SlopeIdentity => (&["setup|bundle", "sheaf"], &["index"]),
            CompatibleSubgroups => (&["polytope"], &[]),
            Bundle => (&["bundle"], &[]),
        }
    }
}

/// Tunables; every field has a default so a resolved job is always complete.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub tol: f64,
    pub seed: u64,
    pub max_iter: usize,
    pub cap: usize,
    pub k_max: i64,
}

impl Default for Options {
    fn default() -> Self {
        let s = SolverOptions::default();
        Options {
            tol: s.tol,
            seed: toricgit::stability::DEFAULT_SEED,
            max_iter: s.max_iter,
            cap: toricgit::stability::DEFAULT_CAP,
            k_max: SearchOptions::default().k_max,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialOptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<i64>,
}

impl PartialOptions {
    /// Fields set in `over` win over those set here.
    pub fn overlay(&self, over: &PartialOptions) -> PartialOptions {
        PartialOptions {
            tol: over.tol.or(self.tol),
            seed: over.seed.or(self.seed),
            max_iter: over.max_iter.or(self.max_iter),
            cap: over.cap.or(self.cap),
            k_max: over.k_max.or(self.k_max),
        }
    }

    pub fn resolve(&self) -> Options {
        let d = Options::default();
        Options {
            tol: self.tol.unwrap_or(d.tol),
            seed: self.seed.unwrap_or(d.seed),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            cap: self.cap.unwrap_or(d.cap),
            k_max: self.k_max.unwrap_or(d.k_max),
        }
    }
}

/// A job as read from a file. `command` and `options` may be supplied by flags instead.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JobFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<PartialOptions>,
    #[serde(flatten)]
    pub payload: Payload,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Payload {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polytope: Option<PolytopeDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub setup: Option<SetupDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bundle: Option<BundleDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sheaf: Option<SheafDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<BTreeMap<String, i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normals: Option<Vec<Vec<i64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<RationalDto>>,
}

impl Payload {
    fn present(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let fields: [(&'static str, bool); 7] = [
            ("polytope", self.polytope.is_some()),
            ("setup", self.setup.is_some()),
            ("bundle", self.bundle.is_some()),
            ("sheaf", self.sheaf.is_some()),
            ("index", self.index.is_some()),
            ("normals", self.normals.is_some()),
            ("targets", self.targets.is_some()),
        ];
        for (name, set) in fields {
            if set {
                out.push(name);
            }
        }
        out
    }
}

/// A fully resolved job: the canonical form echoed in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub command: Command,
    pub options: Options,
    #[serde(flatten)]
    pub payload: Payload,
}

impl Job {
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("jobs always serialize")
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    /// Checks that exactly the fields the command uses are present.
    pub fn validate(&self) -> Result<(), CliError> {
        let (required, optional) = self.command.schema();
        let present = self.payload.present();
        let mut allowed: Vec<&str> = optional.to_vec();
        for req in required {
            let alternatives: Vec<&str> = req.split('|').collect();
            let found: Vec<&&str> = alternatives.iter().filter(|a| present.contains(a)).collect();
            match found.len() {
                0 => {
                    return Err(CliError::schema(format!(
                        "command {} needs field `{}`",
                        self.command.name(),
                        alternatives.join("` or `")
                    )))
                }
                1 => {}
                _ => {
                    return Err(CliError::schema(format!(
                        "command {} takes only one of `{}`",
                        self.command.name(),
                        alternatives.join("`, `")
                    )))
                }
            }
            allowed.extend(alternatives);
        }
        if let Some(extra) = present.iter().find(|p| !allowed.contains(p)) {
            return Err(CliError::schema(format!("command {} does not use field `{extra}`", self.command.name())));
        }
        Ok(())
    }
}

/// Merges a job file with flag overrides into a resolved job.
pub fn resolve_job(file: JobFile, command: Option<Command>, flags: &PartialOptions) -> Result<Job, CliError> {
    let command = command
        .or(file.command)
        .ok_or_else(|| CliError::schema("no command given (use --command or a `command` field)".into()))?;
    let options = file.options.unwrap_or_default().overlay(flags).resolve();
    let job = Job { command, options, payload: file.payload };
    job.validate()?;
    Ok(job)
}

const TOP_LEVEL: &[&str] =
    &["command", "options", "polytope", "setup", "bundle", "sheaf", "index", "normals", "targets"];

/// Parses a job file, rejecting unknown top-level keys.
pub fn parse_job_file(text: &str) -> Result<JobFile, CliError> {
    let raw: Value = serde_json::from_str(text).map_err(|e| CliError::schema(format!("invalid job JSON: {e}")))?;
    let obj = raw.as_object().ok_or_else(|| CliError::schema("a job must be a JSON object".into()))?;
    if let Some(k) = obj.keys().find(|k| !TOP_LEVEL.contains(&k.as_str())) {
        return Err(CliError::schema(format!("unknown field `{k}`")));
    }
    serde_json::from_value(raw).map_err(|e| CliError::schema(format!("invalid job: {e}")))
}

/// Parses an echoed job back (the `input` field of a report).
pub fn parse_resolved_job(v: &Value) -> Result<Job, CliError> {
    let file = parse_job_file(&v.to_string())?;
    let options = file.options.clone().unwrap_or_default();
    let complete = options.tol.is_some()
        && options.seed.is_some()
        && options.max_iter.is_some()
        && options.cap.is_some()
        && options.k_max.is_some();
    if !complete {
        return Err(CliError::schema("echoed job must carry every option".into()));
    }
    resolve_job(file, None, &PartialOptions::default())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub module: &'static str,
    pub error: &'static str,
    pub kind: &'static str,
    pub message: String,
}

const INFEASIBLE: &[&str] =
    &["NotGeneric", "InfeasibleTargets", "MinkowskiFails", "CurveQuotient", "NoConvergence", "NotAmple"];

impl CliError {
    pub fn schema(message: String) -> Self {
        CliError { module: "cli", error: "CliError", kind: "Schema", message }
    }

    pub fn io(message: String) -> Self {
        CliError { module: "cli", error: "CliError", kind: "Io", message }
    }

    /// 2 for mathematical infeasibility, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        if INFEASIBLE.contains(&self.kind) {
            2
        } else {
            1
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "module": self.module, "error": self.error, "kind": self.kind, "message": self.message })
    }
}

impl From<PolytopeError> for CliError {
    fn from(e: PolytopeError) -> Self {
        CliError { module: "polytope", error: "PolytopeError", kind: e.kind(), message: e.to_string() }
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        CliError { module: "lattice", error: "LatticeError", kind: e.kind(), message: e.to_string() }
    }
}

impl From<KlyachkoError> for CliError {
    fn from(e: KlyachkoError) -> Self {
        CliError { module: "klyachko", error: "KlyachkoError", kind: e.kind(), message: e.to_string() }
    }
}

impl From<StabilityError> for CliError {
    fn from(e: StabilityError) -> Self {
        match e {
            StabilityError::Klyachko(k) => k.into(),
            e => CliError { module: "stability", error: "StabilityError", kind: e.kind(), message: e.to_string() },
        }
    }
}

impl From<GitError> for CliError {
    fn from(e: GitError) -> Self {
        match e {
            GitError::Lattice(x) => x.into(),
            GitError::Polytope(x) => x.into(),
            GitError::Klyachko(x) => x.into(),
            e => CliError { module: "git", error: "GitError", kind: e.kind(), message: e.to_string() },
        }
    }
}

impl From<MinkowskiError> for CliError {
    fn from(e: MinkowskiError) -> Self {
        match e {
            MinkowskiError::Git(x) => x.into(),
            MinkowskiError::Polytope(x) => x.into(),
            e => CliError { module: "minkowski", error: "MinkowskiError", kind: e.kind(), message: e.to_string() },
        }
    }
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Polytope(x) => x.into(),
            BuildError::Git(x) => x.into(),
            e => CliError { module: "build", error: "BuildError", kind: e.kind(), message: e.to_string() },
        }
    }
}

impl From<JsonError> for CliError {
    fn from(e: JsonError) -> Self {
        match e {
            JsonError::Schema(m) => CliError { module: "json", error: "JsonError", kind: "Schema", message: m },
            JsonError::Polytope(x) => x.into(),
            JsonError::Klyachko(x) => x.into(),
            JsonError::Lattice(x) => x.into(),
            JsonError::Git(x) => x.into(),
            JsonError::Build(x) => x.into(),
        }
    }
}

/// Rounds to 12 significant digits for reporting.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| json!(sig12(x))).collect())
}

fn q(x: &Rat) -> Value {
    Value::String(format_rational(x))
}

fn qs(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(q).collect())
}

fn ints(v: &[Int]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(x.to_string())).collect())
}

fn slope_json(s: &SlopeValue) -> Value {
    match s {
        SlopeValue::Exact(x) => q(x),
        SlopeValue::Numeric(x) => json!(sig12(*x)),
    }
}

fn entry_json(e: &SlopeEntry) -> Value {
    json!({
        "basis": serde_json::to_value(subspace_to_rows(&e.subspace)).expect("rationals serialize"),
        "slope": slope_json(&e.slope),
        "source": format!("{:?}", e.source),
    })
}

fn sheaf_json(s: &FiltrationSheaf) -> Value {
    serde_json::to_value(SheafDto::from_domain(s)).expect("sheaves serialize")
}

fn polytope_json(p: &toricgit::HPolytope) -> Result<Value, CliError> {
    Ok(serde_json::to_value(PolytopeDto::from_domain(p)?).expect("polytopes serialize"))
}

fn solver_options(o: &Options) -> SolverOptions {
    SolverOptions { tol: o.tol, max_iter: o.max_iter, seed: o.seed, restart: 0 }
}

struct Inputs<'a> {
    job: &'a Job,
}

impl Inputs<'_> {
    fn polytope(&self) -> Result<toricgit::HPolytope, CliError> {
        Ok(self.job.payload.polytope.as_ref().expect("validated").to_domain()?)
    }

    fn setup(&self) -> Result<GitSetup, CliError> {
        let p = &self.job.payload;
        match (&p.setup, &p.bundle) {
            (Some(s), _) => Ok(s.to_domain()?),
            (None, Some(b)) => Ok(projectivized_bundle(&b.to_domain()?)?),
            (None, None) => unreachable!("validated"),
        }
    }

    fn sheaf(&self) -> Result<FiltrationSheaf, CliError> {
        Ok(self.job.payload.sheaf.as_ref().expect("validated").to_domain()?)
    }

    fn index(&self, setup: &GitSetup) -> Result<toricgit::UnstableIndexVector, CliError> {
        match &self.job.payload.index {
            Some(i) => Ok(index_from_json(i)?),
            None => Ok(setup.zero_index()),
        }
    }
}

fn generic_setup(setup: &GitSetup) -> Result<(), CliError> {
    if setup.is_generic() {
        Ok(())
    } else {
        Err(GitError::NotGeneric.into())
    }
}

/// Runs a validated job and returns its result object.
pub fn run(job: &Job) -> Result<Value, CliError> {
    job.validate()?;
    let inp = Inputs { job };
    let opts = &job.options;
    let result =
        match job.command {
            Command::Quotient => {
                let setup = inp.setup()?;
                generic_setup(&setup)?;
                json!({
                    "generic": true,
                    "quotient_dim": setup.quotient_dim(),
                    "stable_facets": setup.stable_facets(),
                    "unstable_facets": setup.unstable_facets(),
                    "b": ints(setup.b()?),
                    "projected_normals": setup.projected_normals().iter().map(|u| ints(u)).collect::<Vec<_>>(),
                    "quotient_polytope": polytope_json(setup.quotient_polytope()?)?,
                })
            }
            Command::Classify => {
                let setup = inp.setup()?;
                let faces: Vec<Value> = setup
                    .classification()
                    .iter()
                    .map(|c| {
                        json!({
                            "facets": c.face.active_facets.iter().collect::<Vec<_>>(),
                            "dim": c.face.dim,
                            "status": match c.status {
                                FaceStatus::Stable => "stable",
                                FaceStatus::StrictlySemistable => "strictly-semistable",
                                FaceStatus::Unstable => "unstable",
                            },
                            "witness": c.witness.as_ref().map(|w| qs(w)),
                        })
                    })
                    .collect();
                json!({
                    "generic": setup.is_generic(),
                    "stable_facets": setup.stable_facets(),
                    "unstable_facets": setup.unstable_facets(),
                    "faces": faces,
                })
            }
            Command::Slope => {
                let p = inp.polytope()?;
                let s = inp.sheaf()?;
                json!({
                    "slope": q(&slope(&s, &p)?),
                    "rank": s.rank(),
                    "det_indices": s.det_indices(),
                    "c1": qs(&s.first_chern().to_vec(s.facet_count())),
                })
            }
            Command::Stability => {
                let p = inp.polytope()?;
                let s = inp.sheaf()?;
                let so = StabilityOptions { cap: opts.cap, seed: opts.seed, ..StabilityOptions::default() };
                let v = check_stability(&s, &p, &so)?;
                json!({
                    "status": format!("{:?}", v.status),
                    "certainty": format!("{:?}", v.certainty),
                    "slope": slope_json(&v.slope),
                    "witness": v.witness.as_ref().map(entry_json),
                    "candidates": v.slope_table.len(),
                    "cap_hit": v.cap_hit,
                    "random_samples": v.random_samples,
                    "seed": v.seed,
                    "field": v.field,
                    "slope_table": v.slope_table.iter().map(entry_json).collect::<Vec<_>>(),
                })
            }
            Command::Descend => {
                let setup = inp.setup()?;
                let s = inp.sheaf()?;
                let d = setup.descends(&s)?;
                let mut out = Map::new();
                out.insert("descends".into(), json!(d));
                if d {
                    out.insert("pushforward".into(), sheaf_json(&setup.pushforward(&s)?));
                }
                Value::Object(out)
            }
            Command::Pushforward => {
                let setup = inp.setup()?;
                let s = inp.sheaf()?;
                json!({ "descends": setup.descends(&s)?, "sheaf": sheaf_json(&setup.pushforward(&s)?) })
            }
            Command::Pullback => {
                let setup = inp.setup()?;
                let e = inp.sheaf()?;
                let i = inp.index(&setup)?;
                json!({ "index": index_to_json(&i), "sheaf": sheaf_json(&setup.pullback_functor(&i, &e)?) })
            }
            Command::MinkowskiCheck => {
                let setup = inp.setup()?;
                let r = minkowski_condition(&setup)?;
                json!({ "holds": r.holds, "defect": qs(&r.defect) })
            }
            Command::SolveMinkowski => {
                let normals: Vec<Vec<Int>> = job
                    .payload
                    .normals
                    .as_ref()
                    .expect("validated")
                    .iter()
                    .map(|u| u.iter().map(|&x| Int::from(x)).collect())
                    .collect();
                let dim = normals.first().map(Vec::len).unwrap_or(0);
                let targets =
                    job.payload.targets.as_ref().expect("validated").iter().map(RationalDto::to_rat).collect::<Result<
                        Vec<_>,
                        _,
                    >>(
                    )?;
                let sol = solve_minkowski(dim, &normals, &targets, &solver_options(opts))?;
                json!({
                    "supports": floats(&sol.supports),
                    "exact_supports": qs(&sol.exact_supports),
                    "facet_volumes": floats(&sol.facet_volumes),
                    "residual": sig12(sol.residual),
                    "iterations": sol.iterations,
                    "polytope": polytope_json(&sol.polytope)?,
                })
            }
            Command::Alpha => {
                let setup = inp.setup()?;
                let a = ample_class_alpha(&setup, &solver_options(opts))?;
                let mut out = json!({
                    "quotient_facets": setup.stable_facets(),
                    "targets": qs(&a.targets),
                    "supports": floats(&a.supports),
                    "exact_supports": qs(&a.exact_supports),
                    "facet_volumes": floats(&a.facet_volumes),
                    "residual": sig12(a.residual),
                    "iterations": a.iterations,
                });
                if let Some(b) = &job.payload.bundle {
                    if let Ok(f) = alpha_surface_formula(&b.to_domain()?) {
                        out["formula"] = qs(&f.to_vec(b.base.facets.len()));
                    }
                }
                out
            }
            Command::SlopeIdentity => {
                let setup = inp.setup()?;
                let e = inp.sheaf()?;
                let i = inp.index(&setup)?;
                generic_setup(&setup)?;
                if setup.quotient_dim() == 1 {
                    let c = curve_proportionality(&setup, &e, &i)?;
                    json!({
                        "mode": "curve",
                        "corrected_lhs": q(&c.corrected_lhs),
                        "mu_deg": q(&c.mu_deg),
                        "constants": qs(&c.constants),
                        "constant": c.constant,
                        "holds": c.holds,
                    })
                } else {
                    let a = ample_class_alpha(&setup, &solver_options(opts))?;
                    let id = verify_slope_identity(&setup, &e, &i, &a)?;
                    json!({
                        "mode": "alpha",
                        "lhs": q(&id.lhs),
                        "mu_alpha": sig12(id.mu_alpha),
                        "correction": q(&id.correction),
                        "rhs": sig12(id.rhs),
                        "residual": sig12(id.residual),
                        "solver_residual": sig12(a.residual),
                    })
                }
            }
            Command::CompatibleSubgroups => {
                let p = inp.polytope()?;
                let r = compatible_subgroups(&p, &SearchOptions { k_max: opts.k_max, ..SearchOptions::default() });
                let subgroups: Vec<Value> = r
                    .subgroups
                    .iter()
                    .map(|s| {
                        json!({
                            "generator": ints(&s.generator),
                            "subset": s.subset,
                            "dilation": s.dilation,
                            "translation": ints(&s.translation),
                            "from_vertex": s.from_vertex,
                            "weighted_projective": s.weighted_projective,
                        })
                    })
                    .collect();
                json!({
                    "count": subgroups.len(),
                    "subgroups": subgroups,
                    "subsets_examined": r.subsets_examined,
                    "all_u_nonzero": r.all_u_nonzero,
                    "upper_bound": r.upper_bound.map(|b| b.to_string()),
                })
            }
            Command::Bundle => {
                let spec = job.payload.bundle.as_ref().expect("validated").to_domain()?;
                let setup = projectivized_bundle(&spec)?;
                let mut out = json!({
                    "setup": serde_json::to_value(SetupDto::from_domain(&setup)?).expect("setups serialize"),
                    "generic": setup.is_generic(),
                    "stable_facets": setup.stable_facets(),
                    "unstable_facets": setup.unstable_facets(),
                    "minkowski_holds": minkowski_condition(&setup)?.holds,
                    "weighted_projective": setup.is_weighted_projective_quotient()?,
                });
                if let Ok(f) = alpha_surface_formula(&spec) {
                    out["formula"] = qs(&f.to_vec(spec.base.facet_count()));
                }
                out
            }
            Command::FalsifyConverse => {
                let setup = inp.setup()?;
                match converse_falsifier(&setup)? {
                    None => json!({ "counterexample": null }),
                    Some(c) => json!({
                        "counterexample": {
                            "facets": [c.facets.0, c.facets.1],
                            "quotient_facets": [c.quotient_facets.0, c.quotient_facets.1],
                            "multiplicities": [c.multiplicities.0, c.multiplicities.1],
                            "sheaf": sheaf_json(&c.sheaf),
                            "x_slopes": [q(&c.x_slopes.0), q(&c.x_slopes.1)],
                            "ratios": qs(&c.ratios),
                            "y_degrees": [q(&c.y_degrees.0), q(&c.y_degrees.1)],
                            "defect": qs(&c.defect),
                        }
                    }),
                }
            }
        };
    Ok(result)
}

/// The full report for a resolved job.
pub fn report(job: &Job) -> (Value, i32) {
    let head = |status: &str| {
        json!({
            "command": job.command.name(),
            "status": status,
            "input_sha256": job.sha256(),
            "input": serde_json::to_value(job).expect("jobs serialize"),
        })
    };
    match run(job) {
        Ok(result) => {
            let mut r = head("ok");
            r["result"] = result;
            (r, 0)
        }
        Err(e) => {
            let mut r = head("error");
            r["error"] = e.to_json();
            (r, e.exit_code())
        }
    }
}

/// Report for input that could not be turned into a job.
pub fn error_report(raw: &[u8], e: &CliError) -> Value {
    json!({
        "command": null,
        "status": "error",
        "input_sha256": hex::encode(Sha256::digest(raw)),
        "error": e.to_json(),
    })
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn render(out: &mut String, key: &str, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => {
            let _ = writeln!(out, "{pad}{key}:");
            for (k, x) in m {
                render(out, k, x, depth + 1);
            }
        }
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = a.iter().map(scalar_text).collect();
            let _ = writeln!(out, "{pad}{key}: [{}]", items.join(", "));
        }
        Value::Array(a)
            if a.iter().all(|x| x.as_array().is_some_and(|r| r.iter().all(|y| !y.is_object() && !y.is_array()))) =>
        {
            let rows: Vec<String> = a
                .iter()
                .map(|r| format!("[{}]", r.as_array().unwrap().iter().map(scalar_text).collect::<Vec<_>>().join(", ")))
                .collect();
            let _ = writeln!(out, "{pad}{key}: [{}]", rows.join(", "));
        }
        Value::Array(a) => {
            let _ = writeln!(out, "{pad}{key}: {} entries", a.len());
            for (i, x) in a.iter().enumerate() {
                render(out, &format!("[{i}]"), x, depth + 1);
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{key}: {}", scalar_text(other));
        }
    }
}

/// Plain-text rendering of a report; the echoed input is summarized by its hash.
pub fn render_text(report: &Value) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} [{}] input sha256 {}",
        scalar_text(&report["command"]),
        scalar_text(&report["status"]),
        scalar_text(&report["input_sha256"])
    );
    for key in ["result", "error"] {
        if let Some(v) = report.get(key) {
            render(&mut out, key, v, 0);
        }
    }
    out
}
