//! Command-line front end: verification suites, supersingular scan, tower
//! enumeration, and genus/Ihara table emission.
//!
//! Element literals use the form `a+b*g` over the canonical generator `g` of
//! the declared field; `i` is accepted as an alias for `g` (natural when the
//! F_9 modulus is g^2+1). Outputs are written atomically and embed the seed.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dmtower_core::ff::is_prime;
use dmtower_core::report::run_verification;
use dmtower_core::tower::{self, GenusRow};
use dmtower_core::{Error as CoreError, Field, Mode, ParamsConfig, TowerParams};

#[derive(Parser)]
#[command(
    name = "dmtower",
    version,
    about = "Exact arithmetic for the reduced Drinfeld modular tower over F_{q^4}",
    after_help = "Element literals: `a+b*g` (or `a+bg`, `g^2`, plain integers) over the \
canonical generator g of the relevant field; `i` is an alias for g. Example: --eta 1+2i.\n\
Set DMTOWER_THREADS to bound the worker pool."
)]
struct Cli {
    /// TOML file with the parameter context (flags override its fields).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Reduced,
    Specialized,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct ParamsArgs {
    /// Prime power q = p^e.
    #[arg(long)]
    q: Option<u64>,
    /// eta in F_{q^2}, as an element literal (reduced mode).
    #[arg(long)]
    eta: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Explicit specialization point in the ambient field (element literal).
    #[arg(long)]
    t_point: Option<String>,
    /// Seed for specialization sampling; recorded in every output.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the F_{q^2} modulus: comma-separated ascending coefficients.
    #[arg(long)]
    zeta_modulus: Option<String>,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Write the artifact here (atomically); otherwise print to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suites and print a pass/fail matrix.
    Verify {
        #[command(flatten)]
        params: ParamsArgs,
        /// Number of specialization points per check.
        #[arg(long, default_value_t = 24)]
        points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compute the supersingular j-set over F_{q^4}.
    Supersingular {
        #[command(flatten)]
        params: ParamsArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Enumerate the reduced tower points for levels 1..=k.
    Enumerate {
        #[command(flatten)]
        params: ParamsArgs,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Genus table rows (k, epsilon, kappa, genus, ss_count, ratio).
    Genus {
        /// Prime power q.
        #[arg(long)]
        q: u64,
        /// Level range: `N` (meaning 1..=N) or `A..B` (inclusive).
        #[arg(long, default_value = "10")]
        k: String,
        /// Seed recorded in the output for provenance.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Ihara ratio table and optimality trend.
    Ihara {
        #[arg(long)]
        q: u64,
        /// Maximum level (table runs 1..=k).
        #[arg(long, default_value_t = 30)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(n) = std::env::var("DMTOWER_THREADS") {
        if let Ok(n) = n.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.downcast_ref::<CoreError>().map_or(false, |c| {
                matches!(
                    c,
                    CoreError::InvalidConfig { .. }
                        | CoreError::CompositeModulus { .. }
                        | CoreError::NoValidEta { .. }
                )
            }) {
                2
            } else {
                1
            };
            std::process::exit(code);
        }
    }
}

/// Splits q into (p, e) with q = p^e, p prime.
fn split_prime_power(q: u64) -> anyhow::Result<(u64, usize)> {
    if q < 2 {
        bail!(CoreError::InvalidConfig {
            field: "q",
            reason: "must be >= 2".into()
        });
    }
    let p = (2..=q).find(|d| q % d == 0).unwrap();
    if !is_prime(p) {
        bail!(CoreError::CompositeModulus { p });
    }
    let mut rest = q;
    let mut e = 0usize;
    while rest > 1 {
        if rest % p != 0 {
            bail!(CoreError::InvalidConfig {
                field: "q",
                reason: format!("{q} is not a prime power"),
            });
        }
        rest /= p;
        e += 1;
    }
    Ok((p, e))
}

fn resolve_config(file: &Option<PathBuf>, args: &ParamsArgs) -> anyhow::Result<ParamsConfig> {
    let mut cfg: ParamsConfig = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            toml::from_str(&text).with_context(|| "parsing TOML config")?
        }
        None => ParamsConfig {
            p: 3,
            q_exponent: 1,
            zeta_modulus: None,
            eta: None,
            mode: Mode::Reduced,
            t_point: None,
            seed: 0,
            ambient_exponent: None,
        },
    };
    if let Some(q) = args.q {
        let (p, e) = split_prime_power(q)?;
        cfg.p = p;
        cfg.q_exponent = e;
    }
    if let Some(mode) = args.mode {
        cfg.mode = match mode {
            ModeArg::Reduced => Mode::Reduced,
            ModeArg::Specialized => Mode::Specialized,
        };
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(zm) = &args.zeta_modulus {
        let coeffs: Vec<u64> = zm
            .split(',')
            .map(|s| s.trim().parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CoreError::InvalidConfig {
                field: "zeta_modulus",
                reason: "expected comma-separated integers".into(),
            })?;
        cfg.zeta_modulus = Some(coeffs);
    }
    if let Some(eta) = &args.eta {
        let fq2 = match &cfg.zeta_modulus {
            Some(m) => Field::with_modulus(cfg.p, m)?,
            None => Field::new(cfg.p, 2 * cfg.q_exponent)?,
        };
        let elem = fq2.parse_element(eta)?;
        cfg.eta = Some(elem.coeffs().to_vec());
    }
    if let Some(tp) = &args.t_point {
        let m = *cfg.ambient_exponent.get_or_insert(2);
        let ambient = Field::new(cfg.p, 4 * cfg.q_exponent * m)?;
        let elem = ambient.parse_element(tp)?;
        cfg.t_point = Some(elem.coeffs().to_vec());
    }
    Ok(cfg)
}

/// Atomic write: temp file in the target directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| anyhow!("persisting {}: {}", path.display(), e.error))?;
    Ok(())
}

fn emit(output: &OutputArgs, rendered: &str, stdout_summary: &str) -> anyhow::Result<()> {
    match &output.out {
        Some(path) => {
            write_atomic(path, rendered.as_bytes())?;
            println!("{stdout_summary}");
            println!("wrote {}", path.display());
        }
        None => println!("{rendered}"),
    }
    Ok(())
}

fn genus_csv(rows: &[GenusRow], seed: u64, q: u64) -> String {
    let mut out = format!("# seed={seed} q={q}\n");
    out.push_str("k,epsilon,kappa,genus,ss_count,ratio_num,ratio_den\n");
    for r in rows {
        let (rn, rd) = r
            .ratio
            .map(|(n, d)| (n.to_string(), d.to_string()))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.k, r.epsilon, r.kappa, r.genus, r.ss_count, rn, rd
        );
    }
    out
}

fn parse_k_range(spec: &str) -> anyhow::Result<(u32, u32)> {
    if let Some((a, b)) = spec.split_once("..") {
        let lo: u32 = a.trim().parse().context("k range start")?;
        let hi: u32 = b.trim().trim_start_matches('=').parse().context("k range end")?;
        if lo < 1 || hi < lo {
            bail!(CoreError::InvalidConfig {
                field: "k",
                reason: "range must be 1 <= A <= B".into()
            });
        }
        Ok((lo, hi))
    } else {
        let hi: u32 = spec.trim().parse().context("k value")?;
        if hi < 1 {
            bail!(CoreError::InvalidConfig {
                field: "k",
                reason: "must be >= 1".into()
            });
        }
        Ok((1, hi))
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Verify {
            params,
            points,
            output,
        } => {
            let cfg = resolve_config(&cli.config, &params)?;
            let matrix = run_verification(&cfg, points)?;
            print!("{}", matrix.render());
            if let Some(path) = &output.out {
                let json = serde_json::to_string_pretty(&matrix)?;
                write_atomic(path, json.as_bytes())?;
                println!("wrote {}", path.display());
            }
            Ok(if matrix.pass() { 0 } else { 1 })
        }
        Command::Supersingular { params, output } => {
            let cfg = resolve_config(&cli.config, &params)?;
            let built = TowerParams::build(&cfg)?;
            let scan = tower::supersingular_scan(&built)?;
            let rendered_set: Vec<String> =
                scan.direct_set.iter().map(|j| j.to_string()).collect();
            match output.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Artifact<'a> {
                        params_digest: String,
                        seed: u64,
                        q: u64,
                        supersingular_j: &'a [dmtower_core::FieldElement],
                        rendered: &'a [String],
                        direct_matches_proof_display: bool,
                        simplified_matches_direct: bool,
                        all_in_fq2: bool,
                        anomalies: &'a [String],
                    }
                    let art = Artifact {
                        params_digest: built.digest(),
                        seed: cfg.seed,
                        q: built.q(),
                        supersingular_j: &scan.direct_set,
                        rendered: &rendered_set,
                        direct_matches_proof_display: scan.direct_matches_proof_display,
                        simplified_matches_direct: scan.simplified_matches_direct,
                        all_in_fq2: scan.all_in_fq2,
                        anomalies: &scan.anomalies,
                    };
                    let json = serde_json::to_string_pretty(&art)?;
                    emit(
                        &output,
                        &json,
                        &format!("supersingular j-set: {{{}}}", rendered_set.join(", ")),
                    )?;
                }
                Format::Csv => {
                    let mut text = format!("# seed={} q={}\n", cfg.seed, built.q());
                    text.push_str("j\n");
                    for j in &rendered_set {
                        let _ = writeln!(text, "{j}");
                    }
                    emit(
                        &output,
                        &text,
                        &format!("supersingular j-set: {{{}}}", rendered_set.join(", ")),
                    )?;
                }
            }
            Ok(0)
        }
        Command::Enumerate { params, k, output } => {
            let cfg = resolve_config(&cli.config, &params)?;
            let built = TowerParams::build(&cfg)?;
            let enumeration = tower::enumerate_tower(&built, k)?;
            for w in &enumeration.warnings {
                log::warn!("{w}");
            }
            let counts: Vec<u128> = enumeration.levels.iter().map(|l| l.count).collect();
            let summary = format!("counts per level 1..={k}: {counts:?}");
            match output.format {
                Format::Json => {
                    let json = serde_json::to_string_pretty(&enumeration)?;
                    emit(&output, &json, &summary)?;
                }
                Format::Csv => {
                    let mut text = format!("# seed={} q={}\n", cfg.seed, built.q());
                    text.push_str("k,count,expected\n");
                    for l in &enumeration.levels {
                        let _ = writeln!(text, "{},{},{}", l.k, l.count, l.expected);
                    }
                    emit(&output, &text, &summary)?;
                }
            }
            Ok(0)
        }
        Command::Genus {
            q,
            k,
            seed,
            output,
        } => {
            let (lo, hi) = parse_k_range(&k)?;
            let rows: Vec<GenusRow> = (lo..=hi)
                .map(|k| tower::genus_row(q, k))
                .collect::<Result<_, _>>()?;
            let summary = format!(
                "genus for k={lo}..={hi}: {:?}",
                rows.iter().map(|r| r.genus).collect::<Vec<_>>()
            );
            match output.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Artifact<'a> {
                        seed: u64,
                        q: u64,
                        rows: &'a [GenusRow],
                    }
                    let json = serde_json::to_string_pretty(&Artifact { seed, q, rows: &rows })?;
                    emit(&output, &json, &summary)?;
                }
                Format::Csv => emit(&output, &genus_csv(&rows, seed, q), &summary)?,
            }
            Ok(0)
        }
        Command::Ihara { q, k, seed, output } => {
            let report = tower::ihara_table(q, k)?;
            let gap = report
                .final_gap
                .map(|(n, d)| format!("{n}/{d}"))
                .unwrap_or_else(|| "-".into());
            let summary = format!(
                "bound q^2-1 = {}; min ratio = {}; strictly decreasing: {}; final gap = {}",
                report.bound,
                report
                    .min_ratio
                    .map(|(n, d)| format!("{n}/{d}"))
                    .unwrap_or_else(|| "-".into()),
                report.strictly_decreasing,
                gap
            );
            match output.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Artifact<'a> {
                        seed: u64,
                        #[serde(flatten)]
                        report: &'a dmtower_core::IharaReport,
                    }
                    let json = serde_json::to_string_pretty(&Artifact {
                        seed,
                        report: &report,
                    })?;
                    emit(&output, &json, &summary)?;
                }
                Format::Csv => {
                    let mut text = genus_csv(&report.rows, seed, q);
                    let _ = writeln!(text, "# {summary}");
                    emit(&output, &text, &summary)?;
                }
            }
            Ok(0)
        }
    }
}
