//! Command-line front end. Reports go to stdout or `--out` as JSON or CSV with
//! every float printed to 17 significant digits.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 for usage
//! or input errors.

use std::f64::consts::TAU;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::chain::{
    chain_bound, cone_length, final_lemma_check, polygon_step, standard_test_maps, threshold_r,
    Chain, ChainReport, ConeGrid, ConeLength, FinalLemmaReport,
};
use crate::closed_form::ln_u_over_sinh;
use crate::crz::{
    area_functional, assemble_constants, radius_sandwich, random_triangle_pair, removal_triangles,
    run_campaign, summarize, Campaign, ConstantChecks, Constants, Sandwich,
};
use crate::cylgeom::union_area;
use crate::error::Error;
use crate::rect_hyp::lemma_e_chain_ratio;
use crate::wos::{
    init_thread_pool, lemma_e_ratio, superadditivity_check, DomainSpec, LemmaERatio, Removal,
    SuperadditivityReport, WalkConfig,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FINDING: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "confrad", version, about = "Conformal radius loss in the unit disk")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Walks per Monte-Carlo estimate.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub walks: usize,
    /// Absorption shell width.
    #[arg(long, global = true, default_value_t = 1e-4)]
    pub eps: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Cone lattice resolution in nodes per e-fold.
    #[arg(long, global = true, default_value_t = 40.0)]
    pub grid: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

impl RunConfig {
    fn walk(&self) -> WalkConfig {
        WalkConfig::new(self.walks, self.eps, self.seed)
    }

    fn cone_grid(&self) -> ConeGrid {
        ConeGrid::with_res(self.grid)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Constant chain with its inequality checks.
    Constants,
    /// Radius sandwich and area functional of a domain file.
    Radius { spec: PathBuf },
    /// Two-sided bracket campaign over a family of generated domains.
    CheckCrz {
        #[arg(long, default_value = "random-punctures")]
        family: Campaign,
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
    /// Chain bound for a chain file or a regular q-gon `r 𝕌_q`.
    Chain {
        file: Option<PathBuf>,
        #[arg(long, requires = "r", conflicts_with = "file")]
        q: Option<u32>,
        #[arg(long, requires = "q")]
        r: Option<f64>,
        /// Step bound; defaults to the file's `d` or the q-gon step.
        #[arg(long)]
        d: Option<f64>,
    },
    /// Cone crossing lengths.
    Cone {
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5,0.55,0.6,0.65,0.7,0.75,0.8"
        )]
        u: Vec<f64>,
    },
    /// Green's function ratio on the model domain against the lower bound.
    LemmaE {
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.6,0.9")]
        x: Vec<f64>,
    },
    /// Superadditivity of `ln r` for two domain files or random triangle pairs.
    Superadd {
        a: Option<PathBuf>,
        #[arg(requires = "a")]
        b: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

/// A fatal error with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CoverFailure { .. } => EXIT_FINDING,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// A rendered report and whether its checks passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub pass: bool,
}

/// Pretty JSON layout with floats printed as `{:.16e}`.
struct Digits17(serde_json::ser::PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> std::io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> std::io::Result<()> {
        self.write_f64(w, v as f64)
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

/// Pretty JSON with 17 significant digits per float and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let fmt = Digits17(serde_json::ser::PrettyFormatter::with_indent(b"  "));
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser).expect("reports serialize");
    let mut out = String::from_utf8(buf).expect("utf8");
    out.push('\n');
    out
}

/// A float for CSV cells.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn render<T: Serialize>(format: Format, value: &T, table: impl FnOnce() -> String) -> String {
    match format {
        Format::Json => to_json(value),
        Format::Csv => table(),
    }
}

/// Reads a JSON file, naming the offending key on failure.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    parse_json(&text).map_err(|m| usage(format!("{}: {m}", path.display())))
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        format!("at `{path}`: {}", e.inner())
    })
}

fn bool_cell(b: bool) -> String {
    b.to_string()
}

#[derive(Serialize)]
struct ConstantsOut {
    constants: Constants,
    checks: ConstantChecks,
    pass: bool,
}

fn cmd_constants(run: &RunConfig) -> Result<Outcome, Failure> {
    let constants = assemble_constants()?;
    let checks = constants.checks();
    let out = ConstantsOut {
        constants,
        checks,
        pass: checks.all(),
    };
    let text = render(run.format, &out, || {
        let c = &out.constants;
        let values = [
            ("K1", c.k1),
            ("C2", c.c2),
            ("C2_bound", c.c2_bound),
            ("C1", c.c1),
            ("K2", c.k2),
            ("K", c.k),
            ("K3", c.k3),
            ("C3", c.c3),
            ("Kprime", c.kprime),
            ("Kprime_over_K", c.ratio),
            ("C1_sharp", c.c1_sharp),
            ("K_sharp", c.k_sharp),
        ];
        let k = &out.checks;
        let flags = [
            ("k1_range", k.k1_range),
            ("c2_below_one", k.c2_below_one),
            ("c1_above", k.c1_above),
            ("kprime_is_200", k.kprime_is_200),
            ("k_near_target", k.k_near_target),
            ("ratio_near_target", k.ratio_near_target),
        ];
        let mut rows: Vec<Vec<String>> = values
            .iter()
            .map(|(n, v)| vec![n.to_string(), num(*v)])
            .collect();
        rows.extend(flags.iter().map(|(n, b)| vec![n.to_string(), bool_cell(*b)]));
        csv_text(&["name", "value"], &rows)
    });
    Ok(Outcome {
        text,
        pass: out.pass,
    })
}

#[derive(Serialize)]
struct RemovalDiag {
    kind: &'static str,
    /// Distance from 0 to the removed set.
    inner_radius: f64,
    /// Area of its triangle family over 2π.
    a: f64,
    approximate_area: bool,
    /// `ln r` of the disk minus this removal alone, when known in closed form.
    ln_r_single: Option<f64>,
}

#[derive(Serialize)]
struct RadiusOut {
    spec: DomainSpec,
    a: f64,
    approximate_area: bool,
    sandwich: Sandwich,
    ratio_lo: Option<f64>,
    ratio_hi: Option<f64>,
    pass: Option<bool>,
    removals: Vec<RemovalDiag>,
}

fn removal_diag(r: &Removal) -> RemovalDiag {
    let (ts, exact) = removal_triangles(r);
    let (kind, single) = match r {
        Removal::Puncture(z) => ("puncture", Some(ln_u_over_sinh(-z.norm().ln()))),
        Removal::Triangle(_) => ("triangle", None),
        Removal::GeodesicCut(x) => ("geodesic", Some(-x.ln().cosh().ln())),
        Removal::ModelE(_) => ("modelE", None),
    };
    RemovalDiag {
        kind,
        inner_radius: r.inner_radius(),
        a: union_area(&ts) / TAU,
        approximate_area: !exact,
        ln_r_single: single,
    }
}

fn cmd_radius(run: &RunConfig, path: &Path) -> Result<Outcome, Failure> {
    let spec: DomainSpec = read_json(path)?;
    let constants = assemble_constants()?;
    let area = area_functional(&spec);
    let sandwich = radius_sandwich(&spec, &run.walk())?;
    let (ratio_lo, ratio_hi, pass) = if area.a > 0.0 {
        let lo = sandwich.ln_r_hi.abs() / area.a;
        let hi = sandwich.ln_r_lo.abs() / area.a;
        (Some(lo), Some(hi), Some(constants.k <= lo && hi <= constants.kprime))
    } else {
        (None, None, None)
    };
    let out = RadiusOut {
        removals: spec.removals.iter().map(removal_diag).collect(),
        spec,
        a: area.a,
        approximate_area: area.approximate,
        sandwich,
        ratio_lo,
        ratio_hi,
        pass,
    };
    let text = render(run.format, &out, || {
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        csv_text(
            &["a", "ln_r_lo", "ln_r_hi", "ratio_lo", "ratio_hi", "pass", "method"],
            &[vec![
                num(out.a),
                num(out.sandwich.ln_r_lo),
                num(out.sandwich.ln_r_hi),
                opt(out.ratio_lo),
                opt(out.ratio_hi),
                out.pass.map(bool_cell).unwrap_or_default(),
                to_json(&out.sandwich.method).trim().trim_matches('"').to_string(),
            ]],
        )
    });
    Ok(Outcome {
        text,
        pass: out.pass.unwrap_or(true),
    })
}

fn cmd_check_crz(run: &RunConfig, family: Campaign, count: usize) -> Result<Outcome, Failure> {
    let constants = assemble_constants()?;
    let cases = run_campaign(family, count, &run.walk(), &constants)?;
    let summary = summarize(&cases);
    #[derive(Serialize)]
    struct Out<'a> {
        family: &'a str,
        cases: &'a [crate::crz::CampaignCase],
        summary: &'a crate::crz::CampaignSummary,
    }
    let out = Out {
        family: family.name(),
        cases: &cases,
        summary: &summary,
    };
    let text = render(run.format, &out, || {
        let mut rows: Vec<Vec<String>> = cases
            .iter()
            .map(|c| {
                let r = &c.report;
                vec![
                    c.case_id.clone(),
                    num(r.a),
                    num(r.ln_r_lo),
                    num(r.ln_r_hi),
                    num(r.ratio_lo),
                    num(r.ratio_hi),
                    bool_cell(r.pass),
                ]
            })
            .collect();
        rows.push(vec![
            "summary".into(),
            String::new(),
            String::new(),
            String::new(),
            num(summary.min_ratio),
            num(summary.max_ratio),
            bool_cell(summary.violations == 0),
        ]);
        csv_text(
            &["case_id", "a", "ln_r_lo", "ln_r_hi", "ratio_lo", "ratio_hi", "pass"],
            &rows,
        )
    });
    Ok(Outcome {
        text,
        pass: summary.violations == 0,
    })
}

/// The chain `r e^{2πik/q}` with step bound `d` (default: its own step).
pub fn polygon_chain(q: u32, r: f64, d: Option<f64>) -> Result<Chain, Failure> {
    if q < 3 || !(r > 0.0 && r < 1.0) {
        return Err(usage("q-gon chains need q >= 3 and 0 < r < 1"));
    }
    let points = (0..q)
        .map(|k| {
            let z = Complex64::from_polar(r, TAU * k as f64 / q as f64);
            [z.re, z.im]
        })
        .collect();
    Ok(Chain {
        points,
        d: d.unwrap_or_else(|| polygon_step(r, q)),
        paths: None,
    })
}

#[derive(Serialize)]
struct ChainOut {
    chain: Chain,
    report: ChainReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_lemma: Option<FinalLemmaReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    pass: bool,
}

fn cmd_chain(
    run: &RunConfig,
    file: Option<&Path>,
    q: Option<u32>,
    r: Option<f64>,
    d: Option<f64>,
) -> Result<Outcome, Failure> {
    let constants = assemble_constants()?;
    let chain = match (file, q, r) {
        (Some(path), None, None) => {
            let mut c: Chain = read_json(path)?;
            if let Some(d) = d {
                c.d = d;
            }
            c
        }
        (None, Some(q), Some(r)) => polygon_chain(q, r, d)?,
        _ => return Err(usage("give either a chain file or --q and --r")),
    };
    let report = chain_bound(&chain, &constants)?;
    let final_lemma = match (q, r) {
        (Some(q), Some(r)) => Some(final_lemma_check(
            &standard_test_maps(),
            chain.d,
            r,
            q,
            &constants,
        )?),
        _ => None,
    };
    let threshold = threshold_r(chain.d, 4096).ok();
    let pass = report.ln_r_upper < 0.0
        && report.k_of_d >= 1.0
        && report.area_bound_holds
        && final_lemma.as_ref().is_none_or(|f| f.failures == 0);
    let out = ChainOut {
        chain,
        report,
        final_lemma,
        threshold,
        pass,
    };
    let text = render(run.format, &out, || {
        let rep = &out.report;
        let branch = to_json(&rep.branch).trim().trim_matches('"').to_string();
        let mut rows = vec![
            vec!["n".into(), rep.n.to_string()],
            vec!["winding".into(), rep.winding.to_string()],
            vec!["d".into(), num(rep.d)],
            vec!["max_step".into(), num(rep.max_step)],
            vec!["m".into(), num(rep.m)],
            vec!["u".into(), num(rep.u)],
            vec!["branch".into(), branch],
            vec!["selected".into(), rep.selected.to_string()],
            vec!["area_sum".into(), num(rep.area_sum)],
            vec!["area_bound_holds".into(), bool_cell(rep.area_bound_holds)],
            vec!["K_of_d".into(), num(rep.k_of_d)],
            vec!["ln_r_upper".into(), num(rep.ln_r_upper)],
            vec!["ln_r_branch".into(), num(rep.ln_r_branch)],
            vec!["ln_r_area".into(), num(rep.ln_r_area)],
            vec!["ln_r_point".into(), num(rep.ln_r_point)],
        ];
        if let Some(t) = out.threshold {
            rows.push(vec!["R_of_d".into(), num(t)]);
        }
        if let Some(f) = &out.final_lemma {
            rows.push(vec!["final_checked".into(), f.checked.to_string()]);
            rows.push(vec!["final_skipped".into(), f.skipped.to_string()]);
            rows.push(vec!["final_failures".into(), f.failures.to_string()]);
        }
        rows.push(vec!["pass".into(), bool_cell(out.pass)]);
        csv_text(&["name", "value"], &rows)
    });
    Ok(Outcome { text, pass })
}

#[derive(Serialize)]
struct ConeOut {
    grid: ConeGrid,
    rows: Vec<ConeLength>,
    decreasing: bool,
    converged: bool,
    pass: bool,
}

fn cmd_cone(run: &RunConfig, us: &[f64]) -> Result<Outcome, Failure> {
    let grid = run.cone_grid();
    let rows: Vec<ConeLength> = us
        .iter()
        .map(|&u| cone_length(u, &grid))
        .collect::<crate::Result<_>>()?;
    let decreasing = rows
        .windows(2)
        .all(|w| w[0].u >= w[1].u || w[0].value() > w[1].value());
    let converged = rows.iter().all(|r| r.rel_change < 0.02);
    let out = ConeOut {
        grid,
        decreasing,
        converged,
        pass: decreasing && converged,
        rows,
    };
    let text = render(run.format, &out, || {
        let rows: Vec<Vec<String>> = out
            .rows
            .iter()
            .map(|r| {
                vec![
                    num(r.u),
                    num(r.value()),
                    num(r.coarse),
                    num(r.fine),
                    num(r.rel_change),
                ]
            })
            .collect();
        csv_text(&["u", "l", "l_coarse", "l_fine", "rel_change"], &rows)
    });
    Ok(Outcome {
        text,
        pass: out.pass,
    })
}

#[derive(Serialize)]
struct LemmaERow {
    #[serde(flatten)]
    estimate: LemmaERatio,
    /// Lower bound from the rectangle detour chain.
    chain_ratio: f64,
    c1: f64,
    pass: bool,
}

fn cmd_lemma_e(run: &RunConfig, xs: &[f64]) -> Result<Outcome, Failure> {
    let constants = assemble_constants()?;
    let cfg = run.walk();
    let rows: Vec<LemmaERow> = xs
        .iter()
        .map(|&x| {
            let estimate = lemma_e_ratio(x, &cfg)?;
            Ok(LemmaERow {
                chain_ratio: lemma_e_chain_ratio(x, constants.c2_bound)?,
                c1: constants.c1,
                pass: estimate.ratio + 3.0 * estimate.std_err >= constants.c1,
                estimate,
            })
        })
        .collect::<crate::Result<_>>()?;
    let pass = rows.iter().all(|r| r.pass);
    let text = render(run.format, &rows, || {
        let cells: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    num(r.estimate.x),
                    num(r.estimate.ratio),
                    num(r.estimate.std_err),
                    num(r.chain_ratio),
                    num(r.c1),
                    bool_cell(r.pass),
                ]
            })
            .collect();
        csv_text(&["x", "ratio", "std_err", "chain_ratio", "C1", "pass"], &cells)
    });
    Ok(Outcome { text, pass })
}

#[derive(Serialize)]
struct SuperaddRow {
    trial: usize,
    #[serde(flatten)]
    report: SuperadditivityReport,
}

fn cmd_superadd(
    run: &RunConfig,
    a: Option<&Path>,
    b: Option<&Path>,
    trials: usize,
) -> Result<Outcome, Failure> {
    let cfg = run.walk();
    let rows: Vec<SuperaddRow> = match (a, b) {
        (Some(a), Some(b)) => {
            let sa: DomainSpec = read_json(a)?;
            let sb: DomainSpec = read_json(b)?;
            vec![SuperaddRow {
                trial: 0,
                report: superadditivity_check(&sa, &sb, &cfg)?,
            }]
        }
        (None, None) => (0..trials)
            .map(|i| {
                let (sa, sb) = random_triangle_pair(run.seed, i);
                let c = WalkConfig {
                    seed: run.seed.wrapping_add(i as u64),
                    ..cfg
                };
                Ok(SuperaddRow {
                    trial: i,
                    report: superadditivity_check(&sa, &sb, &c)?,
                })
            })
            .collect::<crate::Result<_>>()?,
        _ => return Err(usage("superadd needs two domain files or none")),
    };
    let pass = rows.iter().all(|r| r.report.pass);
    let text = render(run.format, &rows, || {
        let cells: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.trial.to_string(),
                    num(r.report.lhs),
                    num(r.report.rhs),
                    num(r.report.combined_err),
                    bool_cell(r.report.pass),
                ]
            })
            .collect();
        csv_text(&["trial", "ln_r_union", "ln_r_sum", "combined_err", "pass"], &cells)
    });
    Ok(Outcome { text, pass })
}

/// Runs a parsed command and renders its report.
pub fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    let run = &cli.run;
    if matches!(
        cli.command,
        Command::Radius { .. }
            | Command::CheckCrz { .. }
            | Command::LemmaE { .. }
            | Command::Superadd { .. }
    ) {
        run.walk().validate()?;
    }
    match &cli.command {
        Command::Constants => cmd_constants(run),
        Command::Radius { spec } => cmd_radius(run, spec),
        Command::CheckCrz { family, count } => cmd_check_crz(run, *family, *count),
        Command::Chain { file, q, r, d } => cmd_chain(run, file.as_deref(), *q, *r, *d),
        Command::Cone { u } => cmd_cone(run, u),
        Command::LemmaE { x } => cmd_lemma_e(run, x),
        Command::Superadd { a, b, trials } => cmd_superadd(run, a.as_deref(), b.as_deref(), *trials),
    }
}

/// Entry point for the binary; returns the exit status.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    init_thread_pool();
    match execute(&cli) {
        Ok(outcome) => {
            let written = match &cli.run.out {
                Some(path) => std::fs::write(path, &outcome.text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => std::io::stdout()
                    .write_all(outcome.text.as_bytes())
                    .map_err(|e| e.to_string()),
            };
            if let Err(m) = written {
                eprintln!("error: {m}");
                return EXIT_USAGE;
            }
            if outcome.pass {
                EXIT_PASS
            } else {
                EXIT_FINDING
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
