//! Command implementations behind the `newtonscope` binary.
//!
//! Every command returns a JSON document embedding the seed and settings, and
//! an exit status: 0 when decisive, 2 when inconclusive.

pub mod input;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use newtonscope::numerics::seeded_rng;
use newtonscope::oracle::{
    build_oracle, svg_frames, trace_document, OracleAnswer, OracleOutcome, OracleSettings, TargetChoice, TraceDocument,
};
use newtonscope::polytope::{reconstruct_polytope, symbolic_oracle, ReconstructSettings, Response};
use newtonscope::tracker::TrackSettings;
use newtonscope::tropical::{tropical_membership, MembershipReport, MembershipSettings, MonomialMap};
use newtonscope::witness::{witness_for_hypersurface, witness_for_projection, WitnessDocument, WitnessSet};
use newtonscope::Rational;
use serde::{Deserialize, Serialize};

pub use input::{parse_direction, parse_matrix, SystemFile};

/// Environment variable consulted when neither the flag nor the file sets a seed.
pub const SEED_ENV: &str = "NEWTONSCOPE_SEED";

const WITNESS_STREAM: u64 = 0;
const ORACLE_STREAM: u64 = 1;

/// Exit status for inconclusive answers.
pub const EXIT_INCONCLUSIVE: u8 = 2;

/// A command's JSON output and exit status.
#[derive(Clone, Debug)]
pub struct Report {
    pub json: String,
    pub exit: u8,
}

impl Report {
    fn new<T: Serialize>(value: &T, decisive: bool) -> Result<Self> {
        let json = serde_json::to_string_pretty(value)?;
        Ok(Self { json, exit: if decisive { 0 } else { EXIT_INCONCLUSIVE } })
    }
}

/// Seed from the flag, else the file, else the environment, else 0.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer")),
        Err(_) => Ok(0),
    }
}

/// Witness set of the file's variety, projected as the file requests.
pub fn compute_witness(file: &SystemFile, track: &TrackSettings, seed: u64) -> Result<WitnessSet> {
    let mut rng = seeded_rng(seed, WITNESS_STREAM);
    let s = &file.system;
    let w = if file.project.is_empty() && s.len() == 1 {
        witness_for_hypersurface(&s.polys()[0], s.variable_names().to_vec(), &mut rng)?
    } else {
        witness_for_projection(s, &file.project, track, &mut rng)?
    };
    Ok(w.with_seed(seed))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct WitnessOutput<'a> {
    command: &'static str,
    track: &'a TrackSettings,
    #[serde(flatten)]
    witness: WitnessDocument,
}

pub fn cmd_witness(file: &SystemFile, seed: u64) -> Result<Report> {
    let track = TrackSettings::default();
    let w = compute_witness(file, &track, seed)?;
    Report::new(&WitnessOutput { command: "witness", track: &track, witness: w.to_document() }, true)
}

/// Where the oracle's witness set comes from.
pub enum OracleInput {
    System(SystemFile),
    Witness(WitnessDocument),
}

impl OracleInput {
    /// Reads a system file, or a witness document if the file holds JSON.
    pub fn load(path: &Path) -> Result<Self> {
        let text = input::read(path)?;
        if text.trim_start().starts_with('{') {
            let doc: WitnessDocument =
                serde_json::from_str(&text).with_context(|| format!("{}: not a witness document", path.display()))?;
            Ok(Self::Witness(doc))
        } else {
            Ok(Self::System(SystemFile::parse(&text).with_context(|| path.display().to_string())?))
        }
    }

    pub fn file_seed(&self) -> Option<u64> {
        match self {
            Self::System(f) => f.seed,
            Self::Witness(d) => d.seed,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleOutput {
    pub command: String,
    pub seed: u64,
    pub settings: OracleSettings,
    pub omega: Vec<String>,
    pub degree: usize,
    #[serde(flatten)]
    pub outcome: OracleOutcome,
    pub steps: usize,
    pub trace: TraceDocument,
}

/// Builds the oracle for `input` and answers one query.
pub fn run_oracle(
    input: &OracleInput,
    omega: &[Rational],
    settings: &OracleSettings,
    seed: u64,
) -> Result<OracleOutput> {
    let track = TrackSettings::default();
    let witness = match input {
        OracleInput::System(f) => compute_witness(f, &track, seed)?,
        OracleInput::Witness(d) => WitnessSet::from_document(d)?,
    };
    if omega.len() != witness.image_dim() {
        bail!("direction has {} entries, the image has {} coordinates", omega.len(), witness.image_dim());
    }
    let ctx = build_oracle(&witness, &TargetChoice::Default, &track, &mut seeded_rng(seed, ORACLE_STREAM))?;
    let answer: OracleAnswer = ctx.query(omega, settings)?;
    Ok(OracleOutput {
        command: "oracle".into(),
        seed,
        settings: settings.clone(),
        omega: omega.iter().map(|w| w.to_string()).collect(),
        degree: ctx.degree(),
        outcome: answer.outcome.clone(),
        steps: answer.steps,
        trace: trace_document(&answer, &ctx.targets(), settings.epsilon),
    })
}

/// Answers one query, optionally writing its traces into a directory.
pub fn cmd_oracle(
    input: &OracleInput,
    omega: &[Rational],
    settings: &OracleSettings,
    seed: u64,
    emit: Option<(TraceFormat, &Path)>,
) -> Result<Report> {
    let out = run_oracle(input, omega, settings, seed)?;
    if let Some((format, dir)) = emit {
        write_traces(&out.trace, format, dir)?;
    }
    Report::new(&out, out.outcome.is_decisive())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceFormat {
    Json,
    Svg,
}

/// Writes a trace document as `trace.json` or as SVG frames into `dir`.
pub fn write_traces(doc: &TraceDocument, format: TraceFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let files = match format {
        TraceFormat::Json => vec![("trace.json".to_string(), serde_json::to_string_pretty(doc)?)],
        TraceFormat::Svg => svg_frames(doc),
    };
    files
        .into_iter()
        .map(|(name, body)| {
            let path = dir.join(name);
            std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            Ok(path)
        })
        .collect()
}

/// Exports the traces of a saved oracle answer.
pub fn cmd_traces(answer: &Path, format: TraceFormat, dir: &Path) -> Result<Report> {
    let text = input::read(answer)?;
    let out: OracleOutput =
        serde_json::from_str(&text).with_context(|| format!("{}: not an oracle answer", answer.display()))?;
    let files = write_traces(&out.trace, format, dir)?;
    let names: Vec<String> = files.iter().map(|p| p.display().to_string()).collect();
    Report::new(&serde_json::json!({ "command": "traces", "seed": out.seed, "files": names }), true)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PolytopeOutput<'a> {
    command: &'static str,
    seed: u64,
    mode: &'static str,
    settings: Option<&'a OracleSettings>,
    degree: u32,
    dimension: usize,
    vertices: Vec<Vec<i64>>,
    queries: usize,
}

/// Reconstructs the homogenized Newton polytope of the file's hypersurface.
///
/// With `symbolic` the file must hold one explicit polynomial and no
/// projection; the exact oracle replaces path tracking.
pub fn cmd_polytope(file: &SystemFile, settings: &OracleSettings, symbolic: bool, seed: u64) -> Result<Report> {
    let rs = ReconstructSettings::default();
    let (rec, degree, n) = if symbolic {
        if !file.project.is_empty() || file.system.len() != 1 {
            bail!("--symbolic needs a single equation and no projection");
        }
        let f = &file.system.polys()[0];
        let oracle = |w: &[Rational]| symbolic_oracle(f, w).map(|a| Response::from(&a)).map_err(|e| e.to_string());
        (reconstruct_polytope(oracle, f.nvars(), f.degree(), &rs)?, f.degree(), f.nvars())
    } else {
        let track = TrackSettings::default();
        let witness = compute_witness(file, &track, seed)?;
        let ctx = build_oracle(&witness, &TargetChoice::Default, &track, &mut seeded_rng(seed, ORACLE_STREAM))?;
        let oracle =
            |w: &[Rational]| ctx.query(w, settings).map(|a| Response::from(&a.outcome)).map_err(|e| e.to_string());
        let degree = ctx.degree() as u32;
        (reconstruct_polytope(oracle, ctx.dim(), degree, &rs)?, degree, ctx.dim())
    };
    let out = PolytopeOutput {
        command: "polytope",
        seed,
        mode: if symbolic { "symbolic" } else { "numeric" },
        settings: (!symbolic).then_some(settings),
        degree,
        dimension: rec.polytope.dim(),
        vertices: rec.polytope.vertices(),
        queries: rec.log.len(),
    };
    debug_assert_eq!(out.vertices.first().map_or(n + 1, Vec::len), n + 1);
    Report::new(&out, true)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TropicalOutput<'a> {
    command: &'static str,
    settings: &'a OracleSettings,
    #[serde(flatten)]
    report: &'a MembershipReport,
}

pub fn run_tropical(
    file: &SystemFile,
    omega: &[Rational],
    settings: &OracleSettings,
    map: &MonomialMap,
    seed: u64,
) -> Result<MembershipReport> {
    if !file.project.is_empty() {
        bail!("tropical membership works on the whole variety; remove the `project:` line");
    }
    let ms = MembershipSettings { oracle: settings.clone(), ..MembershipSettings::default() };
    Ok(tropical_membership(&file.system, omega, &ms, map, seed)?)
}

pub fn cmd_tropical(
    file: &SystemFile,
    omega: &[Rational],
    settings: &OracleSettings,
    map: &MonomialMap,
    seed: u64,
) -> Result<Report> {
    let report = run_tropical(file, omega, settings, map, seed)?;
    Report::new(&TropicalOutput { command: "tropical", settings, report: &report }, report.verdict.is_some())
}

/// `none`, `random`, or the path of a matrix file.
pub fn parse_monomial_map(arg: &str) -> Result<MonomialMap> {
    Ok(match arg {
        "none" => MonomialMap::None,
        "random" => MonomialMap::Random,
        path => {
            let text = input::read(Path::new(path))?;
            MonomialMap::Given(parse_matrix(&text).with_context(|| path.to_string())?)
        }
    })
}
