//! Batch front-end: argument parsing, dispatch, and JSON/CSV rendering.
//!
//! Every report is wrapped in an envelope carrying the tool name, version,
//! subcommand and the full parameter set, so a report can be reproduced from
//! itself. Exit codes: `0` success or certified, `1` a check failed or no
//! certificate, `2` invalid input.

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use serde::Serialize;
use serde_json::Value;

use crate::bounds::{self, BoundReport, CertificateParams, ExponentReport, ThresholdScan};
use crate::bqf::{self, BinaryQuadraticForm, CharacterDecomposition};
use crate::lattice::{self, CongruenceReport, DecompositionCheck, KummerDecomposition};
use crate::modcurve::{self, CongruenceIndexReport};
use crate::rounding::{Directed, Slack};
use crate::toric::{self, CartierImage, ConeSmoothness, EhrhartPolynomial, KummerToric, ReidTaiReport};

pub const TOOL: &str = "kgt";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SLACK_ENV: &str = "KGT_SLACK_BITS";
pub const EHRHART_MAX_K: u64 = 200;
pub const OBSTRUCTION_K_MAX: u64 = 300;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Parses `0.25`, `1/4` or `1` into an exact rational.
pub fn parse_ratio(s: &str) -> Result<Rational64, String> {
    let s = s.trim();
    let bad = || format!("cannot parse {s:?} as a rational number");
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10i64.pow(frac.len() as u32);
        let f: i64 = frac.parse().map_err(|_| bad())?;
        let num = int.abs() * den + f;
        return Ok(Rational64::new(if neg { -num } else { num }, den));
    }
    s.parse::<i64>().map(Rational64::from_integer).map_err(|_| bad())
}

#[derive(Parser, Clone, Debug, PartialEq)]
#[command(name = "kgt", version, about = "Certified bounds and exact oracles for Kummer-type orthogonal modular varieties")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = OutputFormat::Json, global = true)]
    pub output: OutputFormat,
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, PartialEq)]
pub enum Command {
    /// Evaluate α₀ … α₃ and the certificate at one d
    Certify {
        #[arg(long)]
        d: u64,
        #[arg(long, default_value = "1/4", value_parser = parse_ratio)]
        epsilon: Rational64,
        #[arg(long, default_value = "1/4", value_parser = parse_ratio)]
        gamma: Rational64,
    },
    /// Search for the least d with a positive margin
    Scan {
        #[arg(long, default_value = "1/4", value_parser = parse_ratio)]
        epsilon: Rational64,
        #[arg(long, default_value = "1/4", value_parser = parse_ratio)]
        gamma: Rational64,
        #[arg(long, default_value_t = 1_000_000)]
        dmax: u64,
    },
    /// Recompute the toric resolution data and compare with the reference tables
    VerifyToric,
    /// Class number of a negative discriminant
    ClassNumber {
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
    },
    /// Indices of Γ₀(n), Γ₁(n) and the order-3 elliptic point count
    Indices {
        #[arg(long)]
        n: u64,
    },
    /// Lattice-point counts of the dilates of the obstruction polytope
    Ehrhart {
        #[arg(long, default_value_t = 6)]
        k: u64,
    },
    /// Discriminant group decomposition and congruence counts for one d
    Congruence {
        #[arg(long)]
        d: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Certify { .. } => "certify",
            Command::Scan { .. } => "scan",
            Command::VerifyToric => "verify-toric",
            Command::ClassNumber { .. } => "class-number",
            Command::Indices { .. } => "indices",
            Command::Ehrhart { .. } => "ehrhart",
            Command::Congruence { .. } => "congruence",
        }
    }
}

/// Parsed command line plus the rounding slack from the environment.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub cli: Cli,
    pub slack: Slack,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn invalid(msg: impl Into<String>) -> Self {
        Outcome {
            code: EXIT_INVALID,
            stdout: String::new(),
            stderr: msg.into(),
        }
    }
}

pub fn slack_from_env(value: Option<&str>) -> Result<Slack, String> {
    match value {
        None => Ok(Slack::default()),
        Some(v) => v
            .trim()
            .parse::<u32>()
            .ok()
            .and_then(Slack::from_bits)
            .ok_or_else(|| format!("{SLACK_ENV} must be an integer in 1..=52, got {v:?}")),
    }
}

impl RunConfig {
    pub fn parse<I, T>(args: I, slack_env: Option<&str>) -> Result<Self, Outcome>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        let cli = Cli::try_parse_from(args).map_err(|e| {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome::invalid(text)
            }
        })?;
        let slack = slack_from_env(slack_env).map_err(Outcome::invalid)?;
        Ok(RunConfig { cli, slack })
    }
}

/// Entry point shared by the binary and the tests.
pub fn main_with<I, T>(args: I, slack_env: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::parse(args, slack_env) {
        Ok(cfg) => run(&cfg),
        Err(o) => o,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dmax: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disc: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    pub output: OutputFormat,
    pub seed: u64,
    pub slack_bits: u32,
}

impl Parameters {
    fn of(cfg: &RunConfig) -> Self {
        let mut p = Parameters {
            d: None,
            epsilon: None,
            gamma: None,
            a: None,
            dmax: None,
            disc: None,
            n: None,
            k: None,
            output: cfg.cli.output,
            seed: cfg.cli.seed,
            slack_bits: cfg.slack.bits(),
        };
        match &cfg.cli.command {
            Command::Certify { d, epsilon, gamma } => {
                p.d = Some(*d);
                p.epsilon = Some(epsilon.to_string());
                p.gamma = Some(gamma.to_string());
                p.a = Some(bounds::DEFAULT_WEIGHT);
            }
            Command::Scan { epsilon, gamma, dmax } => {
                p.epsilon = Some(epsilon.to_string());
                p.gamma = Some(gamma.to_string());
                p.dmax = Some(*dmax);
                p.a = Some(bounds::DEFAULT_WEIGHT);
            }
            Command::VerifyToric => {}
            Command::ClassNumber { disc } => p.disc = Some(*disc),
            Command::Indices { n } => p.n = Some(*n),
            Command::Ehrhart { k } => p.k = Some(*k),
            Command::Congruence { d } => p.d = Some(*d),
        }
        p
    }
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    parameters: &'a Parameters,
    result: R,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertifyResult {
    #[serde(flatten)]
    pub report: BoundReport,
    pub exponents: ExponentReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassNumberResult {
    pub discriminant: i64,
    pub h: u64,
    pub forms: Vec<BinaryQuadraticForm>,
    pub character: CharacterDecomposition,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_bound: Option<Directed>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndicesResult {
    #[serde(flatten)]
    pub formula: CongruenceIndexReport,
    pub epsilon3: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<CongruenceIndexReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon3_oracle: Option<u64>,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EhrhartRow {
    pub dilate: u64,
    pub count: u64,
    pub predicted: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EhrhartResult {
    pub polytope: String,
    pub coefficients: Vec<String>,
    pub rows: Vec<EhrhartRow>,
    pub all_match: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CongruenceResult {
    pub decomposition: KummerDecomposition,
    pub check: DecompositionCheck,
    pub counts: CongruenceReport,
    pub index_bound: u64,
    pub oql_bound: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oql_order: Option<u64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ToricChecks {
    pub all_cones_smooth: bool,
    pub sigma_singular: bool,
    pub cartier_table_matches: bool,
    pub star_rays_match: bool,
    pub restriction_consistent: bool,
    pub z1_matches: bool,
    pub z2_matches: bool,
    pub p_z2_empty: bool,
    pub ehrhart_matches: bool,
    pub obstruction_bound_holds: bool,
    pub reid_tai_matches: bool,
}

impl ToricChecks {
    fn all(&self) -> bool {
        self.all_cones_smooth
            && self.sigma_singular
            && self.cartier_table_matches
            && self.star_rays_match
            && self.restriction_consistent
            && self.z1_matches
            && self.z2_matches
            && self.p_z2_empty
            && self.ehrhart_matches
            && self.obstruction_bound_holds
            && self.reid_tai_matches
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ToricResult {
    pub ray_labels: Vec<String>,
    pub rays: Vec<Vec<i64>>,
    pub smoothness: Vec<ConeSmoothness>,
    pub sigma_determinant: i64,
    pub k_prime: Vec<i64>,
    pub e6_prime: Vec<i64>,
    pub cartier_table: Vec<CartierImage>,
    pub star_rays: Vec<Vec<i64>>,
    pub z1: Vec<i64>,
    pub z2: Vec<i64>,
    pub p_z1_vertices: Vec<Vec<String>>,
    pub ehrhart: Vec<String>,
    pub ehrhart_counts: Vec<u64>,
    pub bundle_excess_k6: Vec<String>,
    pub reid_tai: Vec<ReidTaiReport>,
    pub obstruction_k_max: u64,
    pub checks: ToricChecks,
    pub all_pass: bool,
}

/// Published values the toric computation is compared against.
pub mod reference {
    pub const CARTIER_K_PRIME: [[i64; 4]; 6] = [
        [0, -1, -2, -1],
        [0, -1, 0, -2],
        [0, -2, -1, -1],
        [0, 0, -1, -2],
        [0, -1, -1, -1],
        [0, -1, -1, -2],
    ];
    pub const CARTIER_IMAGES: [[i64; 3]; 6] = [
        [-1, -2, -1],
        [-1, 0, -2],
        [-2, -1, -1],
        [0, -1, -2],
        [-1, -1, -1],
        [-1, -1, -2],
    ];
    pub const STAR_RAYS: [[i64; 3]; 5] = [[-1, -1, -2], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, -1]];
    pub const Z1: [i64; 5] = [5, -1, -1, -1, 2];
    pub const Z2: [i64; 5] = [-6, 0, 0, 0, -3];
    /// leading coefficient first, as `(numerator, denominator)`
    pub const EHRHART_6PZ1: [(i64, i64); 4] = [(18, 1), (45, 2), (17, 2), (1, 1)];
}

fn strings(v: &[Rational64]) -> Vec<String> {
    v.iter().map(|q| q.to_string()).collect()
}

pub fn verify_toric() -> Result<ToricResult, toric::ToricError> {
    let t = KummerToric::compute()?;
    let smoothness = toric::verify_smooth(&t.fan)?;
    let sigma = toric::verify_smooth(&toric::kummer_cone())?;
    let sigma_determinant = sigma[0].determinant;
    let ehrhart: EhrhartPolynomial = t.obstruction_ehrhart()?;
    let cartier_table = t.z1.images.clone();

    let k_prime = t.k_prime.integral().unwrap_or_default();
    let star_rays = t.z1.star.fan.rays().to_vec();
    // coefficients of K′ on the star rays, read directly
    let direct: Vec<i64> = t.z1.star.source_rays.iter().map(|&r| k_prime[r]).collect();
    let z1 = t.z1.divisor.integral().unwrap_or_default();
    let z2 = t.z2.divisor.integral().unwrap_or_default();

    let mut obstruction_ok = true;
    for k in (6..=OBSTRUCTION_K_MAX).step_by(6) {
        obstruction_ok &= toric::obstruction_dim_bound_with(k, &ehrhart)?.holds;
    }
    let reid_tai = vec![
        toric::reid_tai(&[1, 1, 1, 2], 6)?,
        toric::reid_tai(&[0, 1, 1, 2], 6)?,
        toric::reid_tai(&[1, 1, 1, 1], 2)?,
    ];
    let bundle = toric::form_bundle_divisor(6, &t.fan)?;

    let reference_ehrhart: Vec<Rational64> = reference::EHRHART_6PZ1
        .iter()
        .map(|&(n, d)| Rational64::new(n, d))
        .collect();
    let checks = ToricChecks {
        all_cones_smooth: smoothness.iter().all(|c| c.smooth),
        sigma_singular: sigma_determinant.abs() == 6,
        cartier_table_matches: cartier_table.len() == 6
            && cartier_table.iter().zip(reference::CARTIER_K_PRIME.iter().zip(&reference::CARTIER_IMAGES)).all(
                |(row, (m, img))| row.m == m.to_vec() && row.image == img.to_vec(),
            ),
        star_rays_match: star_rays == reference::STAR_RAYS.iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
        restriction_consistent: direct == z1,
        z1_matches: z1 == reference::Z1,
        z2_matches: z2 == reference::Z2,
        p_z2_empty: t.p_z2.is_empty()?,
        ehrhart_matches: ehrhart.coefficients == reference_ehrhart,
        obstruction_bound_holds: obstruction_ok,
        reid_tai_matches: reid_tai[0].noncanonical && reid_tai[1].noncanonical && !reid_tai[2].noncanonical,
    };
    let all_pass = checks.all();
    Ok(ToricResult {
        ray_labels: t.fan.labels().to_vec(),
        rays: t.fan.rays().to_vec(),
        smoothness,
        sigma_determinant,
        k_prime,
        e6_prime: t.e6_prime.integral().unwrap_or_default(),
        cartier_table,
        star_rays,
        z1,
        z2,
        p_z1_vertices: t.p_z1.vertices()?.iter().map(|v| strings(v)).collect(),
        ehrhart: strings(&ehrhart.coefficients),
        ehrhart_counts: ehrhart.counts.clone(),
        bundle_excess_k6: strings(&bundle.excess.coefficients),
        reid_tai,
        obstruction_k_max: OBSTRUCTION_K_MAX,
        checks,
        all_pass,
    })
}

pub fn ehrhart_table(k_max: u64) -> Result<EhrhartResult, toric::ToricError> {
    let t = KummerToric::compute()?;
    let poly = t.obstruction_ehrhart()?;
    let p = t.p_z1.dilate(6);
    let mut rows = Vec::new();
    let mut all_match = true;
    for k in 0..=k_max {
        let count = p.dilate(k as i64).count_lattice_points()?;
        let predicted = poly.eval(k as i64);
        all_match &= predicted == Rational64::from_integer(count as i64);
        rows.push(EhrhartRow {
            dilate: k,
            count,
            predicted: predicted.to_string(),
        });
    }
    Ok(EhrhartResult {
        polytope: "6P_Z1".to_string(),
        coefficients: strings(&poly.coefficients),
        rows,
        all_match,
    })
}

pub fn class_number_report(disc: i64, slack: Slack) -> Result<ClassNumberResult, bqf::BqfError> {
    let forms = bqf::reduced_forms(disc)?;
    let character = bqf::decompose_character(disc)?;
    let upper_bound = if disc < -4 {
        Some(bqf::class_number_upper_bound(disc, slack)?)
    } else {
        None
    };
    Ok(ClassNumberResult {
        discriminant: disc,
        h: forms.len() as u64,
        forms,
        character,
        upper_bound,
    })
}

pub fn indices_report(n: u64) -> Result<IndicesResult, modcurve::ModcurveError> {
    let formula = modcurve::indices(n)?;
    let epsilon3 = modcurve::epsilon3(n)?;
    let oracle = (n <= modcurve::COSET_ORACLE_CAP)
        .then(|| modcurve::indices_oracle(n))
        .transpose()?;
    let epsilon3_oracle = (n <= modcurve::EPSILON3_ORACLE_CAP)
        .then(|| modcurve::epsilon3_oracle(n))
        .transpose()?;
    let agrees = oracle.map_or(true, |o| o == formula)
        && (n % 27 == 0 || epsilon3_oracle.map_or(true, |e| e == epsilon3));
    Ok(IndicesResult {
        formula,
        epsilon3,
        oracle,
        epsilon3_oracle,
        agrees,
    })
}

pub fn congruence_result(d: u64) -> Result<CongruenceResult, lattice::LatticeError> {
    let decomposition = KummerDecomposition::new(d)?;
    let check = lattice::check_kummer_decomposition(d)?;
    let counts = lattice::congruence_report(d)?;
    let index_bound = lattice::index_bound(d)?;
    let oql_bound = lattice::oql_bound(d)?;
    let oql_order = if 12 * d <= lattice::DEFAULT_OQL_CAP {
        Some(lattice::oql_order_oracle(d, lattice::DEFAULT_OQL_CAP)?)
    } else {
        None
    };
    let pass = check.passed() && counts.caps_respected && oql_order.map_or(true, |o| o <= oql_bound);
    Ok(CongruenceResult {
        decomposition,
        check,
        counts,
        index_bound,
        oql_bound,
        oql_order,
        pass,
    })
}

fn render<R: Serialize>(cfg: &RunConfig, params: &Parameters, result: &R) -> Result<String, String> {
    let env = Envelope {
        tool: TOOL,
        version: VERSION,
        command: cfg.cli.command.name(),
        parameters: params,
        result,
    };
    match cfg.cli.output {
        OutputFormat::Json => serde_json::to_string_pretty(&env)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| e.to_string()),
        OutputFormat::Csv => {
            let value = serde_json::to_value(&env).map_err(|e| e.to_string())?;
            let mut rows = Vec::new();
            flatten("", &value, &mut rows);
            write_csv(&["key", "value"], rows.into_iter().map(|(k, v)| vec![k, v]))
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                flatten(&join(k), child, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), child, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn write_csv<I>(header: &[&str], rows: I) -> Result<String, String>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(header).map_err(|e| e.to_string())?;
    for r in rows {
        w.write_record(&r).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

fn ehrhart_csv(params: &Parameters, r: &EhrhartResult) -> Result<String, String> {
    let k = params.k.unwrap_or_default().to_string();
    let poly = r.coefficients.join(" ");
    write_csv(
        &["tool", "version", "k", "seed", "slack_bits", "polytope", "coefficients", "dilate", "count", "predicted"],
        r.rows.iter().map(|row| {
            vec![
                TOOL.to_string(),
                VERSION.to_string(),
                k.clone(),
                params.seed.to_string(),
                params.slack_bits.to_string(),
                r.polytope.clone(),
                poly.clone(),
                row.dilate.to_string(),
                row.count.to_string(),
                row.predicted.clone(),
            ]
        }),
    )
}

fn finish<R: Serialize>(cfg: &RunConfig, params: &Parameters, result: &R, ok: bool) -> Outcome {
    match render(cfg, params, result) {
        Ok(stdout) => Outcome {
            code: if ok { EXIT_OK } else { EXIT_FAILED },
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome::invalid(e),
    }
}

pub fn run(cfg: &RunConfig) -> Outcome {
    let params = Parameters::of(cfg);
    let slack = cfg.slack;
    match &cfg.cli.command {
        Command::Certify { d, epsilon, gamma } => {
            let p = CertificateParams {
                d: *d,
                epsilon: *epsilon,
                gamma: *gamma,
                a: bounds::DEFAULT_WEIGHT,
            };
            match bounds::certify(&p, slack) {
                Ok(report) => {
                    let ok = report.verdict;
                    let result = CertifyResult {
                        report,
                        exponents: bounds::exponents(*epsilon, *gamma),
                    };
                    finish(cfg, &params, &result, ok)
                }
                Err(e) => Outcome::invalid(e.to_string()),
            }
        }
        Command::Scan { epsilon, gamma, dmax } => {
            match bounds::threshold_scan(*epsilon, *gamma, *dmax, cfg.cli.seed, slack) {
                Ok(scan) => {
                    let ok = scan_passed(&scan);
                    finish(cfg, &params, &scan, ok)
                }
                Err(e) => Outcome::invalid(e.to_string()),
            }
        }
        Command::VerifyToric => match verify_toric() {
            Ok(r) => {
                let ok = r.all_pass;
                finish(cfg, &params, &r, ok)
            }
            Err(e) => Outcome {
                code: EXIT_FAILED,
                stdout: String::new(),
                stderr: e.to_string(),
            },
        },
        Command::ClassNumber { disc } => match class_number_report(*disc, slack) {
            Ok(r) => {
                let ok = r.upper_bound.map_or(true, |b| r.h as f64 <= b.value);
                finish(cfg, &params, &r, ok)
            }
            Err(e) => Outcome::invalid(e.to_string()),
        },
        Command::Indices { n } => match indices_report(*n) {
            Ok(r) => {
                let ok = r.agrees;
                finish(cfg, &params, &r, ok)
            }
            Err(e) => Outcome::invalid(e.to_string()),
        },
        Command::Ehrhart { k } => {
            if *k > EHRHART_MAX_K {
                return Outcome::invalid(format!("--k must be at most {EHRHART_MAX_K}"));
            }
            match ehrhart_table(*k) {
                Ok(r) => {
                    let ok = r.all_match;
                    match cfg.cli.output {
                        OutputFormat::Csv => match ehrhart_csv(&params, &r) {
                            Ok(stdout) => Outcome {
                                code: if ok { EXIT_OK } else { EXIT_FAILED },
                                stdout,
                                stderr: String::new(),
                            },
                            Err(e) => Outcome::invalid(e),
                        },
                        OutputFormat::Json => finish(cfg, &params, &r, ok),
                    }
                }
                Err(e) => Outcome {
                    code: EXIT_FAILED,
                    stdout: String::new(),
                    stderr: e.to_string(),
                },
            }
        }
        Command::Congruence { d } => match congruence_result(*d) {
            Ok(r) => {
                let ok = r.pass;
                finish(cfg, &params, &r, ok)
            }
            Err(e) => Outcome::invalid(e.to_string()),
        },
    }
}

fn scan_passed(scan: &ThresholdScan) -> bool {
    scan.threshold.is_some() && scan.predecessor_fails == Some(true) && scan.sample_failures.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rounding::DEFAULT_SLACK_BITS;

    #[test]
    fn ratios() {
        assert_eq!(parse_ratio("0.25").unwrap(), Rational64::new(1, 4));
        assert_eq!(parse_ratio("1/4").unwrap(), Rational64::new(1, 4));
        assert_eq!(parse_ratio("1").unwrap(), Rational64::from_integer(1));
        assert_eq!(parse_ratio("-0.5").unwrap(), Rational64::new(-1, 2));
        assert!(parse_ratio("x").is_err());
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("0.").is_err());
    }

    #[test]
    fn slack_env() {
        assert_eq!(slack_from_env(None).unwrap().bits(), DEFAULT_SLACK_BITS);
        assert_eq!(slack_from_env(Some("30")).unwrap().bits(), 30);
        assert!(slack_from_env(Some("0")).is_err());
        assert!(slack_from_env(Some("abc")).is_err());
    }

    #[test]
    fn class_number_cli() {
        let o = main_with(["kgt", "class-number", "--disc", "-23"], None);
        assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["result"]["h"], 3);
        assert_eq!(v["parameters"]["disc"], -23);
        assert_eq!(v["version"], VERSION);
    }

    #[test]
    fn invalid_inputs_exit_2() {
        assert_eq!(main_with(["kgt", "class-number", "--disc", "-5"], None).code, EXIT_INVALID);
        assert_eq!(main_with(["kgt", "certify", "--d", "10"], None).code, EXIT_INVALID);
        assert_eq!(main_with(["kgt", "frobnicate"], None).code, EXIT_INVALID);
        assert_eq!(main_with(["kgt", "indices", "--n", "0"], None).code, EXIT_INVALID);
        assert_eq!(main_with(["kgt", "indices", "--n", "6"], Some("99")).code, EXIT_INVALID);
        assert_eq!(main_with(["kgt", "certify", "--d", "48", "--epsilon", "0.01"], None).code, EXIT_INVALID);
    }

    #[test]
    fn csv_is_rfc4180() {
        let o = main_with(["kgt", "indices", "--n", "6", "--output", "csv"], None);
        assert_eq!(o.code, EXIT_OK);
        assert!(o.stdout.starts_with("key,value\r\n"));
        let mut r = csv::Reader::from_reader(o.stdout.as_bytes());
        let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        assert!(rows.iter().any(|x| &x[0] == "result.index_gamma1" && &x[1] == "24"));
        assert!(rows.iter().any(|x| &x[0] == "version"));
    }
}
