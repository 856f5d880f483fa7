//! Command-line front end: subcommands, exit codes and report artifacts.
//!
//! Exit codes: 0 success or certified, 1 refuted or nontrivial, 2
//! inconclusive, 3 usage or input error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::collapse::{certify_bicollapsible, CertifyBudget, CollapsingVerdict, VerdictStatus};
use crate::dehn::{DehnError, DehnSolver, DehnStep, TieBreak};
use crate::diagram::{
    area_bound_check, canonical_code, check_generalized_dehn, check_ladder_or_three_exits, classify_cells,
    enumerate_reduced_disks, find_spherical_near_immersion, SphereSearch,
};
use crate::geometry::{
    build_ball, carrier, divisive_trees, dual_cube_fragment, geodesic_crossing_profile, halfspaces, walls,
    CayleyBall, EqualityOracle, Wall, Wallspace,
};
use crate::smallcancel::{certify_3_collapsing, small_cancellation_report};
use crate::snf::smith_normal_form;
use crate::words::{branch, is_proper_power, parse_presentation, BranchedPresentation, Presentation};

pub const SCHEMA_VERSION: u32 = 1;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "collapsar", version, about = "Bicollapsibility, branched presentations and Dehn's algorithm")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Print the JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Area bound for diagram searches; face bound for refutation searches.
    #[arg(long, global = true, value_name = "N")]
    pub max_area: Option<usize>,
    /// Ball radius for `ball`, `walls` and `cube`.
    #[arg(long, global = true, value_name = "R")]
    pub radius: Option<usize>,
    /// Run Dehn's algorithm on presentations that are not eligible.
    #[arg(long = "unsafe", global = true)]
    pub allow_unsafe: bool,
    /// Seed for sampled checks and random tie-breaking.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write report artifacts into this directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Word problem oracle used to build Cayley balls.
    #[arg(long, global = true, value_enum, default_value_t = OracleChoice::Auto)]
    pub oracle: OracleChoice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleChoice {
    /// Dehn's algorithm when eligible.
    Auto,
    Dehn,
    /// Exponent sums modulo the relation lattice; exact for abelian groups.
    Abelian,
    /// Bounded diagram search, using `--max-area`.
    Bounded,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a presentation file and print its normal form.
    Parse { file: PathBuf },
    /// Small cancellation report and collapsing certificates.
    Certify { file: PathBuf },
    /// Raise relators to powers, e.g. `branch torus.pres 2`.
    Branch {
        file: PathBuf,
        /// Comma separated exponents; defaults to the powers written in the file.
        #[arg(value_delimiter = ',')]
        exponents: Vec<usize>,
    },
    /// Decide a word with Dehn's algorithm.
    Solve { file: PathBuf, word: String },
    /// Orders of the relator roots.
    Order { file: PathBuf },
    /// Enumerate reduced disk diagrams and check exit properties.
    Diagrams { file: PathBuf },
    /// Search for a spherical near-immersion.
    SphereSearch { file: PathBuf },
    /// Build a Cayley ball.
    Ball { file: PathBuf },
    /// Divisive trees, walls, halfspaces and carriers in a Cayley ball.
    Walls { file: PathBuf },
    /// Dual cube complex fragment of the walls meeting the safe region.
    Cube {
        file: PathBuf,
        /// Largest number of wall flips from the root orientation.
        #[arg(long, default_value_t = 3)]
        flips: usize,
    },
    /// Bundle the artifacts of earlier runs in a directory.
    Report { dir: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Negative,
    Inconclusive,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Negative => 1,
            Outcome::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub claim: String,
    /// `holds`, `fails` or `unknown`.
    pub status: String,
    /// The rule or computation licensing the status.
    pub provenance: String,
}

impl Claim {
    fn new(claim: impl Into<String>, holds: Option<bool>, provenance: impl Into<String>) -> Self {
        let status = match holds {
            Some(true) => "holds",
            Some(false) => "fails",
            None => "unknown",
        };
        Claim { claim: claim.into(), status: status.into(), provenance: provenance.into() }
    }

    fn from_verdict(claim: &str, v: &CollapsingVerdict) -> Self {
        let holds = match v.status {
            VerdictStatus::Certified => Some(true),
            VerdictStatus::Refuted => Some(false),
            VerdictStatus::Inconclusive => None,
        };
        Claim::new(claim, holds, v.provenance.clone())
    }
}

/// Deterministic given input, flags and version; timing lives in a
/// separate artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input_digest: String,
    pub outcome: Outcome,
    pub claims: Vec<Claim>,
    pub data: Value,
}

struct Artifacts {
    report: Report,
    text: String,
    dot: Option<String>,
    /// Additional files as `(suffix, contents)`.
    extra: Vec<(String, String)>,
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("COLLAPSAR_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| anyhow!("COLLAPSAR_THREADS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        bail!("COLLAPSAR_THREADS must be a positive integer, got 0");
    }
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(cli: &Cli) -> Result<i32> {
    configure_threads()?;
    if let Command::Report { dir } = &cli.command {
        return bundle(cli, dir);
    }
    let start = Instant::now();
    let art = match &cli.command {
        Command::Parse { file } => cmd_parse(cli, file)?,
        Command::Certify { file } => cmd_certify(cli, file)?,
        Command::Branch { file, exponents } => cmd_branch(cli, file, exponents)?,
        Command::Solve { file, word } => cmd_solve(cli, file, word)?,
        Command::Order { file } => cmd_order(cli, file)?,
        Command::Diagrams { file } => cmd_diagrams(cli, file)?,
        Command::SphereSearch { file } => cmd_sphere(cli, file)?,
        Command::Ball { file } => cmd_ball(cli, file)?,
        Command::Walls { file } => cmd_walls(cli, file)?,
        Command::Cube { file, flips } => cmd_cube(cli, file, *flips)?,
        Command::Report { .. } => unreachable!("handled above"),
    };
    emit(cli, &art, start.elapsed())?;
    Ok(art.report.outcome.exit_code())
}

fn emit(cli: &Cli, art: &Artifacts, elapsed: Duration) -> Result<()> {
    let json = serde_json::to_string_pretty(&art.report)? + "\n";
    if cli.json {
        print!("{json}");
    } else {
        print!("{}", art.text);
        eprintln!("({} in {:.1} ms)", art.report.command, elapsed.as_secs_f64() * 1e3);
    }
    let Some(dir) = &cli.out else { return Ok(()) };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let stem = art.report.command.clone();
    let write = |name: String, body: &str| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
    };
    write(format!("{stem}.json"), &json)?;
    write(format!("{stem}.txt"), &art.text)?;
    if let Some(dot) = &art.dot {
        write(format!("{stem}.dot"), dot)?;
    }
    for (suffix, body) in &art.extra {
        write(format!("{stem}.{suffix}"), body)?;
    }
    let timing = json!({ "command": stem, "elapsed_ms": elapsed.as_secs_f64() * 1e3 });
    write(format!("{stem}.timing.json"), &(serde_json::to_string_pretty(&timing)? + "\n"))
}

// ---------------------------------------------------------------------------
// Inputs

struct Input {
    presentation: Presentation,
    digest: String,
}

fn flag_summary(cli: &Cli) -> Vec<String> {
    vec![
        format!("max_area={:?}", cli.max_area),
        format!("radius={:?}", cli.radius),
        format!("unsafe={}", cli.allow_unsafe),
        format!("seed={:?}", cli.seed),
        format!("oracle={:?}", cli.oracle),
    ]
}

fn load(cli: &Cli, command: &str, file: &Path, extra: &[String]) -> Result<Input> {
    let bytes = fs::read(file).with_context(|| format!("reading {}", file.display()))?;
    let text = std::str::from_utf8(&bytes).with_context(|| format!("{} is not UTF-8", file.display()))?;
    let presentation = parse_presentation(text).with_context(|| format!("parsing {}", file.display()))?;
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    for f in flag_summary(cli).iter().chain(extra) {
        h.update([0u8]);
        h.update(f.as_bytes());
    }
    h.update([0u8]);
    h.update(&bytes);
    Ok(Input { presentation, digest: format!("{:x}", h.finalize()) })
}

fn report(command: &str, input: &Input, outcome: Outcome, claims: Vec<Claim>, data: Value) -> Report {
    Report {
        schema: SCHEMA_VERSION,
        tool: "collapsar".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        input_digest: input.digest.clone(),
        outcome,
        claims,
        data,
    }
}

fn budget(cli: &Cli) -> CertifyBudget {
    CertifyBudget { max_faces: cli.max_area.unwrap_or(CertifyBudget::default().max_faces) }
}

/// The branched structure written in the file, with eligibility decided by
/// certifying the base presentation.
fn branched(cli: &Cli, p: &Presentation) -> Result<(BranchedPresentation, CollapsingVerdict)> {
    let b = BranchedPresentation::from_powers(p)?;
    let v = certify_bicollapsible(&b.base, budget(cli));
    let certified = v.status == VerdictStatus::Certified;
    Ok((b.with_certification(certified), v))
}

fn solver(cli: &Cli, b: &BranchedPresentation) -> Result<DehnSolver> {
    match DehnSolver::new(b) {
        Ok(s) => Ok(s),
        Err(DehnError::NotEligible) if cli.allow_unsafe => Ok(DehnSolver::new_unchecked(b)),
        Err(e) => Err(e.into()),
    }
}

fn status_word(s: VerdictStatus) -> &'static str {
    match s {
        VerdictStatus::Certified => "certified",
        VerdictStatus::Refuted => "refuted",
        VerdictStatus::Inconclusive => "inconclusive",
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

// ---------------------------------------------------------------------------
// Commands

fn cmd_parse(cli: &Cli, file: &Path) -> Result<Artifacts> {
    let input = load(cli, "parse", file, &[])?;
    let p = &input.presentation;
    let rows: Vec<Vec<i64>> = p.relators.iter().map(|r| r.representative.exponent_vector(p.rank())).collect();
    let ab = smith_normal_form(&rows, p.rank()).abelian_invariants();
    let relators: Vec<Value> = p
        .relators
        .iter()
        .map(|r| {
            let power = r.cyclically_reduced.then(|| is_proper_power(r)).flatten();
            json!({
                "word": p.word_to_string(&r.representative),
                "length": r.len(),
                "freely_reduced": r.freely_reduced,
                "cyclically_reduced": r.cyclically_reduced,
                "root": power.as_ref().map(|(w, _)| p.word_to_string(w)),
                "exponent": power.as_ref().map_or(1, |(_, n)| *n),
            })
        })
        .collect();
    let mut text = format!("{p}\n  generators {}\n  relators {}\n", p.rank(), p.relators.len());
    for r in &relators {
        let _ = writeln!(
            text,
            "    {} (length {}, cyclically reduced {}, exponent {})",
            r["word"].as_str().unwrap_or_default(),
            r["length"],
            yes(r["cyclically_reduced"].as_bool().unwrap_or(false)),
            r["exponent"]
        );
    }
    let _ = writeln!(text, "  abelianization {ab}");
    let data = json!({
        "presentation": p.to_string(),
        "generators": p.generators.iter().map(|g| g.name.clone()).collect::<Vec<_>>(),
        "relators": relators,
        "abelianization": ab,
    });
    let claims = vec![Claim::new("parses", Some(true), "presentation grammar")];
    Ok(Artifacts { report: report("parse", &input, Outcome::Success, claims, data), text, dot: None, extra: vec![] })
}

fn cmd_certify(cli: &Cli, file: &Path) -> Result<Artifacts> {
    let input = load(cli, "certify", file, &[])?;
    let p = &input.presentation;
    let sc = small_cancellation_report(p);
    let three = certify_3_collapsing(p);
    let bi = certify_bicollapsible(p, budget(cli));
    let outcome = match bi.status {
        VerdictStatus::Certified => Outcome::Success,
        VerdictStatus::Refuted => Outcome::Negative,
        VerdictStatus::Inconclusive => Outcome::Inconclusive,
    };
    let piece_rule = "minimal piece decompositions of every relator";
    let claims = vec![
        Claim::new("C(4)", Some(sc.c4), piece_rule),
        Claim::new("C(6)", Some(sc.c6), piece_rule),
        Claim::new("T(4)", Some(sc.t4), "no reduced star graph cycle of length 3"),
        Claim::from_verdict("3-collapsing", &three),
        Claim::from_verdict("bicollapsible", &bi),
    ];
    let mut text = format!("{p}\n");
    let _ = writeln!(
        text,
        "  small cancellation: C(4) {}, C(6) {}, T(4) {}, max piece {}",
        yes(sc.c4),
        yes(sc.c6),
        yes(sc.t4),
        sc.max_piece.map_or("-".to_string(), |m| m.to_string())
    );
    for (name, v) in [("3-collapsing", &three), ("bicollapsible", &bi)] {
        let _ = writeln!(text, "  {name}: {} ({})", status_word(v.status), v.provenance);
        for n in &v.notes {
            let _ = writeln!(text, "    note: {n}");
        }
        if let Some(b) = &v.bound {
            let _ = writeln!(text, "    bound: {b}");
        }
    }
    let dot = bi.witness.as_ref().map(|w| w.complex.to_dot());
    let data = json!({ "small_cancellation": sc, "three_collapsing": three, "bicollapsible": bi });
    Ok(Artifacts { report: report("certify", &input, outcome, claims, data), text, dot, extra: vec![] })
}

fn cmd_branch(cli: &Cli, file: &Path, exponents: &[usize]) -> Result<Artifacts> {
    let extra = [format!("exponents={exponents:?}")];
    let input = load(cli, "branch", file, &extra)?;
    let p = &input.presentation;
    let b = if exponents.is_empty() { BranchedPresentation::from_powers(p)? } else { branch(p, exponents)? };
    let v = certify_bicollapsible(&b.base, budget(cli));
    let b = b.with_certification(v.status == VerdictStatus::Certified);
    let bp = b.presentation();
    let claims = vec![
        Claim::from_verdict("base bicollapsible", &v),
        Claim::new(
            "dehn eligible",
            Some(b.dehn_eligible),
            "certified base, every exponent at least 2, base relators immersed and not proper powers",
        ),
    ];
    let text = format!(
        "base {}\nexponents {:?}\nbranched {}\nbase certified {}\ndehn eligible {}\n",
        b.base,
        b.exponents,
        bp,
        yes(b.base_certified),
        yes(b.dehn_eligible)
    );
    let data = json!({
        "base": b.base.to_string(),
        "exponents": b.exponents,
        "branched": bp.to_string(),
        "base_certified": b.base_certified,
        "dehn_eligible": b.dehn_eligible,
        "base_verdict": v,
    });
    Ok(Artifacts { report: report("branch", &input, Outcome::Success, claims, data), text, dot: None, extra: vec![] })
}

fn trace_json(p: &Presentation, steps: &[DehnStep]) -> Vec<Value> {
    steps
        .iter()
        .map(|s| match s {
            DehnStep::Rewrite { pos, placement, q, s_inv } => json!({
                "step": "rewrite",
                "pos": pos,
                "relator": placement.relator,
                "inverted": placement.inverted,
                "offset": placement.offset,
                "q": p.word_to_string(q),
                "s_inv": p.word_to_string(s_inv),
            }),
            DehnStep::FreeReduction { pos } => json!({ "step": "free_reduction", "pos": pos }),
        })
        .collect()
}

fn cmd_solve(cli: &Cli, file: &Path, word: &str) -> Result<Artifacts> {
    let input = load(cli, "solve", file, &[format!("word={word}")])?;
    let (b, _) = branched(cli, &input.presentation)?;
    let s = solver(cli, &b)?;
    let p = s.presentation().clone();
    let w = p.parse_word(word).with_context(|| format!("parsing word {word:?}"))?;
    let tie = cli.seed.map_or(TieBreak::Leftmost, TieBreak::Random);
    let (reduced, trace) = s.reduce_with(&w, tie);
    let trivial = reduced.is_empty();
    let outcome = match (trivial, s.is_heuristic()) {
        (true, _) => Outcome::Success,
        (false, false) => Outcome::Negative,
        (false, true) => Outcome::Inconclusive,
    };
    let provenance = if trivial {
        "the trace rewrites the word to the empty word by relator substitutions".to_string()
    } else if s.is_heuristic() {
        "Dehn's algorithm stalled on a presentation that is not eligible; nontriviality is not certified".to_string()
    } else {
        "Dehn's algorithm is complete for eligible branched presentations".to_string()
    };
    let claims = vec![Claim::new(format!("{word} is trivial"), if s.is_heuristic() && !trivial { None } else { Some(trivial) }, provenance)];
    let mut text = format!(
        "{}: {}{}\n  reduced to {} after {} rewrites\n",
        word,
        if trivial { "trivial" } else { "nontrivial" },
        if s.is_heuristic() { " (heuristic)" } else { "" },
        p.word_to_string(&reduced),
        trace.rewrites()
    );
    for st in &trace.steps {
        if let DehnStep::Rewrite { pos, q, s_inv, .. } = st {
            let _ = writeln!(text, "    at {pos}: {} -> {}", p.word_to_string(q), p.word_to_string(s_inv));
        }
    }
    let data = json!({
        "word": p.word_to_string(&w),
        "reduced": p.word_to_string(&reduced),
        "trivial": trivial,
        "heuristic": s.is_heuristic(),
        "rewrites": trace.rewrites(),
        "trace": trace_json(&p, &trace.steps),
    });
    Ok(Artifacts { report: report("solve", &input, outcome, claims, data), text, dot: None, extra: vec![] })
}

fn cmd_order(cli: &Cli, file: &Path) -> Result<Artifacts> {
    let input = load(cli, "order", file, &[])?;
    let (b, _) = branched(cli, &input.presentation)?;
    let s = solver(cli, &b)?;
    let orders = s.orders();
    let violation = orders.iter().any(|o| o.violation);
    let outcome = match (violation, s.is_heuristic()) {
        (true, _) => Outcome::Negative,
        (false, true) => Outcome::Inconclusive,
        (false, false) => Outcome::Success,
    };
    let mut text = String::from("relator  root  expected  order\n");
    let mut claims = Vec::new();
    for o in &orders {
        let root = b.base.word_to_string(&b.base.relators[o.relator].representative);
        let order = o.order.map_or("> expected".to_string(), |m| m.to_string());
        let _ = writeln!(text, "{:>7}  {root}  {:>8}  {order}", o.relator, o.expected);
        claims.push(Claim::new(
            format!("order of relator {} is {}", o.relator, o.expected),
            if s.is_heuristic() && !o.violation { None } else { Some(!o.violation) },
            "least power reduced to the empty word by Dehn's algorithm",
        ));
    }
    let data = json!({ "heuristic": s.is_heuristic(), "orders": orders });
    Ok(Artifacts { report: report("order", &input, outcome, claims, data), text, dot: None, extra: vec![] })
}

fn cmd_diagrams(cli: &Cli, file: &Path) -> Result<Artifacts> {
    let input = load(cli, "diagrams", file, &[])?;
    let p = &input.presentation;
    let max_area = cli.max_area.unwrap_or(2);
    let degrees: Vec<usize> = BranchedPresentation::from_powers(p)
        .map(|b| b.exponents)
        .unwrap_or_else(|_| vec![1; p.relators.len()]);
    let lengths: Vec<usize> = p.relators.iter().map(|r| r.len()).collect();
    let uniform = lengths.first().copied().filter(|&l| lengths.iter().all(|&m| m == l));
    let disks = enumerate_reduced_disks(p, max_area);
    let mut rows = Vec::with_capacity(disks.len());
    let (mut dehn_bad, mut area_bad, mut exits_bad) = (0, 0, 0);
    for d in &disks {
        let c = classify_cells(d);
        let strong = check_generalized_dehn(d, true);
        let area_ok = uniform.and_then(|r| area_bound_check(d, r).ok());
        let exits = check_ladder_or_three_exits(d, &degrees);
        dehn_bad += usize::from(!strong);
        area_bad += usize::from(area_ok == Some(false));
        exits_bad += usize::from(!exits);
        rows.push(json!({
            "code": canonical_code(d),
            "area": d.area(),
            "perimeter": d.perimeter(),
            "boundary": p.word_to_string(&d.boundary_word()),
            "spurs": c.spurs,
            "shells": c.shells,
            "cutcells": c.cutcells,
            "strong_dehn": strong,
            "area_bound": area_ok,
            "ladder_or_three_exits": exits,
        }));
    }
    let outcome = if dehn_bad + area_bad + exits_bad == 0 { Outcome::Success } else { Outcome::Negative };
    let claims = vec![
        Claim::new("strong generalized Dehn property", Some(dehn_bad == 0), format!("all reduced disks of area <= {max_area}")),
        Claim::new(
            "area <= perimeter + 1 - r",
            uniform.map(|_| area_bad == 0),
            "checked when all relators share one length r",
        ),
        Claim::new("single cell, ladder, or three exits", Some(exits_bad == 0), "tiny inner path shells and spurs counted"),
    ];
    let mut text = format!("{p}\n  reduced disk diagrams up to area {max_area}: {}\n", disks.len());
    for a in 1..=max_area {
        let _ = writeln!(text, "    area {a}: {}", disks.iter().filter(|d| d.area() == a).count());
    }
    let _ = writeln!(
        text,
        "  violations: strong Dehn {dehn_bad}, area bound {}, ladder or three exits {exits_bad}",
        uniform.map_or("n/a".to_string(), |_| area_bad.to_string())
    );
    let dot: String = disks.iter().take(64).map(|d| d.to_dot()).collect();
    let maps = serde_json::to_string(&disks)? + "\n";
    let data = json!({ "max_area": max_area, "count": disks.len(), "diagrams": rows });
    Ok(Artifacts {
        report: report("diagrams", &input, outcome, claims, data),
        text,
        dot: Some(dot),
        extra: vec![("maps.json".into(), maps)],
    })
}

fn cmd_sphere(cli: &Cli, file: &Path) -> Result<Artifacts> {
    let input = load(cli, "sphere-search", file, &[])?;
    let p = &input.presentation;
    let max_area = cli.max_area.unwrap_or(2);
    let res = find_spherical_near_immersion(p, max_area);
    let (outcome, holds, text) = match &res {
        SphereSearch::Found { sphere } => (
            Outcome::Negative,
            Some(false),
            format!("spherical near-immersion of area {}: not diagrammatically reducible\n", sphere.area()),
        ),
        SphereSearch::Absent { max_area } => {
            (Outcome::Inconclusive, None, format!("no spherical near-immersion up to area {max_area}\n"))
        }
        SphereSearch::Exhausted { completed_area } => (
            Outcome::Inconclusive,
            None,
            format!("search budget exhausted; no sphere up to area {completed_area}\n"),
        ),
    };
    let claims = vec![Claim::new("diagrammatically reducible", holds, format!("side-pairing search up to area {max_area}"))];
    let data = json!({ "max_area": max_area, "result": res });
    Ok(Artifacts { report: report("sphere-search", &input, outcome, claims, data), text: format!("{p}\n  {text}"), dot: None, extra: vec![] })
}

fn oracle(cli: &Cli, b: &BranchedPresentation) -> Result<EqualityOracle> {
    let p = b.presentation();
    Ok(match cli.oracle {
        OracleChoice::Auto | OracleChoice::Dehn if b.dehn_eligible => EqualityOracle::dehn(b)?,
        OracleChoice::Auto | OracleChoice::Dehn if cli.allow_unsafe => EqualityOracle::Dehn(DehnSolver::new_unchecked(b)),
        OracleChoice::Dehn => return Err(DehnError::NotEligible.into()),
        OracleChoice::Auto => bail!(
            "not eligible for Dehn's algorithm; choose --oracle abelian or --oracle bounded, or pass --unsafe"
        ),
        OracleChoice::Abelian => EqualityOracle::abelian(&p),
        OracleChoice::Bounded => EqualityOracle::bounded(&p, cli.max_area.unwrap_or(4)),
    })
}

fn ball_for(cli: &Cli, input: &Input, default_radius: usize) -> Result<CayleyBall> {
    let (b, _) = branched(cli, &input.presentation)?;
    let o = oracle(cli, &b)?;
    Ok(build_ball(&b, cli.radius.unwrap_or(default_radius), &o)?)
}

fn ball_dot(ball: &CayleyBall, colored: &BTreeMap<usize, usize>) -> String {
    const PALETTE: [&str; 8] = ["red", "blue", "darkgreen", "orange", "purple", "brown", "magenta", "cyan"];
    let mut s = String::from("graph ball {\n");
    for v in 0..ball.num_vertices() {
        let shape = if ball.is_safe_vertex(v) { "doublecircle" } else { "circle" };
        let _ = writeln!(s, "  v{v} [label=\"{}\", shape={shape}];", ball.vertex_name(v));
    }
    for (e, &(u, v)) in ball.complex.edges.iter().enumerate() {
        let g = ball.complex.edge_labels[e].map_or(String::new(), |g| ball.generators[g].clone());
        match colored.get(&e) {
            Some(&w) => {
                let _ = writeln!(s, "  v{u} -- v{v} [label=\"{g}\", color={}, penwidth=2];", PALETTE[w % PALETTE.len()]);
            }
            None => {
                let _ = writeln!(s, "  v{u} -- v{v} [label=\"{g}\"];");
            }
        }
    }
    s.push_str("}\n");
    s
}

fn ball_summary(ball: &CayleyBall) -> Value {
    json!({
        "radius": ball.radius,
        "safe_radius": ball.safe_radius,
        "oracle": ball.oracle,
        "vertices": ball.num_vertices(),
        "edges": ball.complex.num_edges(),
        "faces": ball.complex.num_faces(),
        "safe_vertices": (0..ball.num_vertices()).filter(|&v| ball.is_safe_vertex(v)).count(),
    })
}

fn cmd_ball(cli: &Cli, file: &Path) -> Result<Artifacts> {
    let input = load(cli, "ball", file, &[])?;
    let ball = ball_for(cli, &input, 3)?;
    let text = format!(
        "{}\n  ball radius {} ({} oracle): {} vertices, {} edges, {} faces, safe radius {}\n",
        input.presentation,
        ball.radius,
        ball.oracle,
        ball.num_vertices(),
        ball.complex.num_edges(),
        ball.complex.num_faces(),
        ball.safe_radius
    );
    let claims = vec![Claim::new("ball built", Some(true), format!("breadth-first search with the {} oracle", ball.oracle))];
    let full = serde_json::to_string(&ball)? + "\n";
    Ok(Artifacts {
        report: report("ball", &input, Outcome::Success, claims, ball_summary(&ball)),
        dot: Some(ball_dot(&ball, &BTreeMap::new())),
        text,
        extra: vec![("full.json".into(), full)],
    })
}

fn meeting_safe(ball: &CayleyBall, ws: &[Wall]) -> Vec<usize> {
    (0..ws.len()).filter(|&i| ws[i].dual_edges.iter().any(|&e| ball.is_safe_edge(e))).collect()
}

/// A breadth-first geodesic from the root to each safe vertex.
fn root_geodesics(ball: &CayleyBall) -> Vec<Vec<usize>> {
    let dist = ball.graph_distances(0, None);
    let mut nbr = vec![Vec::new(); ball.num_vertices()];
    for &(u, v) in &ball.complex.edges {
        nbr[u].push(v);
        nbr[v].push(u);
    }
    (1..ball.num_vertices())
        .filter(|&v| ball.is_safe_vertex(v) && dist[v].is_some())
        .map(|t| {
            let mut path = vec![t];
            let mut x = t;
            while x != 0 {
                x = *nbr[x].iter().find(|&&y| dist[y].map(|d| d + 1) == dist[x]).expect("bfs parent");
                path.push(x);
            }
            path.reverse();
            path
        })
        .collect()
}

fn cmd_walls(cli: &Cli, file: &Path) -> Result<Artifacts> {
    let input = load(cli, "walls", file, &[])?;
    let ball = ball_for(cli, &input, 4)?;
    let seed = cli.seed.unwrap_or(0);
    let trees = divisive_trees(&ball);
    let ws = walls(&ball);
    let meeting = meeting_safe(&ball, &ws);
    let mut rows = Vec::new();
    let (mut bad_sides, mut pairs, mut carrier_failures) = (0, 0, 0);
    let mut colored = BTreeMap::new();
    for (k, &i) in meeting.iter().enumerate() {
        let w = &ws[i];
        let h = halfspaces(&ball, w);
        let c = carrier(&ball, w, 16, seed.wrapping_add(k as u64));
        bad_sides += usize::from(h.sides.len() != 2);
        pairs += c.sampled_pairs;
        carrier_failures += c.failures.len();
        for &e in &w.dual_edges {
            colored.entry(e).or_insert(k);
        }
        rows.push(json!({
            "wall": i,
            "dual_edges": w.dual_edges.len(),
            "faces": w.faces.len(),
            "partial": w.partial,
            "sides": h.sides.iter().map(Vec::len).collect::<Vec<_>>(),
            "safe_sides": h.safe_sides.iter().map(Vec::len).collect::<Vec<_>>(),
            "carrier_pairs": c.sampled_pairs,
            "carrier_failures": c.failures,
        }));
    }
    let geodesics = root_geodesics(&ball);
    let mut profile_failures = 0;
    for path in &geodesics {
        match geodesic_crossing_profile(&ball, &ws, path) {
            Ok(p) if p.failures.is_empty() => {}
            _ => profile_failures += 1,
        }
    }
    let checked = !meeting.is_empty();
    let all_ok = trees.all_acyclic && trees.all_embedded && bad_sides == 0 && carrier_failures == 0 && profile_failures == 0;
    let outcome = match (all_ok, checked) {
        (false, _) => Outcome::Negative,
        (true, true) => Outcome::Success,
        (true, false) => Outcome::Inconclusive,
    };
    let scope = format!("radius {} ball, safe radius {}", ball.radius, ball.safe_radius);
    let claims = vec![
        Claim::new("divisive trees are acyclic", Some(trees.all_acyclic), scope.clone()),
        Claim::new("divisive trees are embedded", Some(trees.all_embedded), scope.clone()),
        Claim::new("walls give two halfspaces", checked.then_some(bad_sides == 0), "components of the wall's face region minus its dual edges"),
        Claim::new("carriers are convex", checked.then_some(carrier_failures == 0), format!("{pairs} sampled pairs, seed {seed}")),
        Claim::new(
            "doubly crossed walls are separated by a singly crossed wall",
            checked.then_some(profile_failures == 0),
            format!("{} breadth-first geodesics from the root", geodesics.len()),
        ),
    ];
    let mut text = format!(
        "{}\n  ball radius {}: {} vertices, safe radius {}\n  divisive trees {} (acyclic {}, embedded {})\n  walls {} ({} meeting the safe region)\n  halfspace failures {bad_sides}, carrier pairs {pairs} failures {carrier_failures}, geodesics {} failures {profile_failures}\n",
        input.presentation,
        ball.radius,
        ball.num_vertices(),
        ball.safe_radius,
        trees.trees.len(),
        yes(trees.all_acyclic),
        yes(trees.all_embedded),
        ws.len(),
        meeting.len(),
        geodesics.len()
    );
    for r in &trees.refutations {
        let _ = writeln!(text, "    {r}");
    }
    let data = json!({
        "ball": ball_summary(&ball),
        "trees": trees.trees.len(),
        "all_acyclic": trees.all_acyclic,
        "all_embedded": trees.all_embedded,
        "refutations": trees.refutations,
        "walls": ws.len(),
        "meeting_safe_region": rows,
        "geodesics": geodesics.len(),
        "profile_failures": profile_failures,
    });
    Ok(Artifacts { report: report("walls", &input, outcome, claims, data), dot: Some(ball_dot(&ball, &colored)), text, extra: vec![] })
}

fn cmd_cube(cli: &Cli, file: &Path, flips: usize) -> Result<Artifacts> {
    let input = load(cli, "cube", file, &[format!("flips={flips}")])?;
    let ball = ball_for(cli, &input, 3)?;
    let ws = walls(&ball);
    let chosen: Vec<Wall> = meeting_safe(&ball, &ws).into_iter().map(|i| ws[i].clone()).collect();
    let space = match Wallspace::from_ball(&ball, &chosen) {
        Ok(s) => s,
        Err(e) => {
            let claims = vec![Claim::new("walls form a wallspace", Some(false), e.to_string())];
            let data = json!({ "ball": ball_summary(&ball), "error": e.to_string() });
            let text = format!("{}\n  walls do not form a wallspace: {e}\n", input.presentation);
            return Ok(Artifacts { report: report("cube", &input, Outcome::Negative, claims, data), text, dot: None, extra: vec![] });
        }
    };
    let root = space.point_of(0).ok_or(anyhow!("the root lies outside some wall region"))?;
    let f = dual_cube_fragment(&space, root, flips)?;
    let k = space.sides.len();
    let crossing_pairs = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).filter(|&(a, b)| space.cross(a, b)).count();
    let ok = f.simply_connected && f.flag_ok;
    let claims = vec![
        Claim::new("fragment is simply connected", Some(f.simply_connected), "squares span the cycle space over GF(2)"),
        Claim::new("flag condition at sampled vertices", Some(f.flag_ok), "pairwise crossing triples span cubes"),
    ];
    let text = format!(
        "{}\n  walls {} ({} distinct partitions of {} common points), crossing pairs {crossing_pairs}, flips {flips}\n  vertices  edges  squares  simply connected  flag\n  {:>8}  {:>5}  {:>7}  {:>16}  {:>4}\n",
        input.presentation,
        chosen.len(),
        k,
        space.points,
        f.vertices.len(),
        f.edges.len(),
        f.squares.len(),
        yes(f.simply_connected),
        yes(f.flag_ok)
    );
    let data = json!({
        "ball": ball_summary(&ball),
        "walls": chosen.len(),
        "separating_walls": k,
        "points": space.points,
        "crossing_pairs": crossing_pairs,
        "flips": flips,
        "vertices": f.vertices.len(),
        "edges": f.edges.len(),
        "squares": f.squares.len(),
        "simply_connected": f.simply_connected,
        "flag_ok": f.flag_ok,
    });
    let outcome = if ok { Outcome::Success } else { Outcome::Negative };
    Ok(Artifacts { report: report("cube", &input, outcome, claims, data), text, dot: None, extra: vec![] })
}

// ---------------------------------------------------------------------------
// Bundling

fn bundle(cli: &Cli, dir: &Path) -> Result<i32> {
    let entries = fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    names.sort();
    let mut reports = Vec::new();
    let mut h = Sha256::new();
    for n in &names {
        if !n.ends_with(".json") || n.ends_with(".timing.json") || n == "bundle.json" {
            continue;
        }
        let body = fs::read(dir.join(n))?;
        if let Ok(r) = serde_json::from_slice::<Report>(&body) {
            h.update(n.as_bytes());
            h.update(&body);
            reports.push((n.clone(), r));
        }
    }
    if reports.is_empty() {
        bail!("no run artifacts in {}", dir.display());
    }
    let mut text = String::from("command         outcome       claims\n");
    for (_, r) in &reports {
        let claims: Vec<String> = r.claims.iter().map(|c| format!("{}: {}", c.claim, c.status)).collect();
        let _ = writeln!(text, "{:<15} {:<13} {}", r.command, format!("{:?}", r.outcome).to_lowercase(), claims.join("; "));
    }
    let bundle = json!({
        "schema": SCHEMA_VERSION,
        "tool": "collapsar",
        "version": env!("CARGO_PKG_VERSION"),
        "input_digest": format!("{:x}", h.finalize()),
        "reports": reports.iter().map(|(n, r)| json!({
            "file": n,
            "command": r.command,
            "outcome": r.outcome,
            "input_digest": r.input_digest,
            "claims": r.claims,
        })).collect::<Vec<_>>(),
        "files": names,
    });
    let target = cli.out.clone().unwrap_or_else(|| dir.to_path_buf());
    fs::create_dir_all(&target)?;
    let json = serde_json::to_string_pretty(&bundle)? + "\n";
    fs::write(target.join("bundle.json"), &json)?;
    fs::write(target.join("summary.txt"), &text)?;
    if cli.json {
        print!("{json}");
    } else {
        print!("{text}");
    }
    Ok(0)
}
