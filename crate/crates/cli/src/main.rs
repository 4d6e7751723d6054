//! `rpci`: certified verification of π(x)² < (αx/log x)·π(x/α).
//!
//! The analytic side (certify/threshold/constants) proves the inequality for
//! all x above a certified threshold; the sieve side (check/scan/pi,
//! audit-theta) verifies it exactly at concrete integers below. Exit codes:
//! 0 success or verdict true, 1 verification failure or a failing point,
//! 2 usage error, 3 resource limit.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use rpci_core::envelope::{envelope_constants, scaled_c, CSign, EnvelopeConstants};
use rpci_core::numerics::interval::{CertReal, LogPoint, PrecisionContext};
use rpci_core::ramanujan::{build_certificate_with_env, hassani_dk, Certificate};
use rpci_core::sieve::{
    audit_theta_bound, check_point, scan_csv, scan_range_detailed, sieve_pi_theta, CheckResult,
    SieveConfig,
};
use rpci_core::theta::{a_eval, ThetaParams};
use rpci_core::{Error, Result};

/// Published envelope bounds, injectable in place of the certified pipeline
/// so the two halves of the verification can be audited independently.
const PAPER_LOWER: &str = "-936.64603213534";
const PAPER_UPPER: &str = "1177.56019022252";

#[derive(Parser)]
#[command(name = "rpci", version, about = "Certified range and exact pointwise verification of Ramanujan's prime counting inequality")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Working precision in decimal digits (minimum 40)
    #[arg(long, global = true, default_value_t = 60)]
    digits: u32,

    /// Output format; csv applies to scan only
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Streaming memory budget for the sieve, in bytes
    #[arg(long, global = true, env = "RPCI_MEMORY_BUDGET", default_value_t = 256 << 20)]
    memory_budget: u64,

    /// Segment span in numbers; derived from the memory budget when unset
    #[arg(long, global = true)]
    segment_span: Option<u64>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full analytic pipeline and emit a certificate
    Certify {
        /// anchor u1 = log x1
        #[arg(long, default_value = "3157.442")]
        u1: String,
        /// substitute the published envelope bounds for the certified ones
        #[arg(long)]
        use_paper_constants: bool,
        /// drop the timestamp so equal runs give byte-identical output
        #[arg(long)]
        omit_timestamp: bool,
    },
    /// Certified threshold u* above which the inequality always holds
    Threshold {
        #[arg(long, default_value = "3157.442")]
        u1: String,
        #[arg(long)]
        use_paper_constants: bool,
    },
    /// Recompute the anchor constants; --full adds the integral constants
    /// and the certified envelope bounds
    Constants {
        #[arg(long, default_value = "3157.442")]
        u1: String,
        #[arg(long)]
        full: bool,
    },
    /// Check the inequality at a single integer
    Check {
        x: u64,
        /// decimal scale factor, or the symbol e
        #[arg(long, default_value = "e")]
        alpha: String,
    },
    /// Check every integer in [lo, hi] from one shared sieve pass
    Scan {
        lo: u64,
        hi: u64,
        #[arg(long, default_value = "e")]
        alpha: String,
        /// resumable state file for long scans
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Exact prime count and log-prime sum at x
    Pi { x: u64 },
    /// Audit the prime counting error envelope up to a limit
    AuditTheta { limit: u64 },
    /// Coefficient of x²/log^{4+k}x in the expansion of the inequality gap
    Dk { k: u32 },
}

fn main() {
    // die quietly on a closed pipe like other unix filters
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let code = match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ResourceLimit(_) => 3,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let ctx = PrecisionContext::new(cli.digits)?;
    let prec = ctx.prec_bits();
    let sieve_cfg = SieveConfig {
        memory_budget: cli.memory_budget,
        segment_span: cli.segment_span,
        prec,
        ..SieveConfig::default()
    };
    if cli.format == Format::Csv && !matches!(cli.command, Command::Scan { .. }) {
        // a usage error, reported like one
        eprintln!("error: --format csv is only available for scan");
        return Ok(2);
    }

    match &cli.command {
        Command::Certify {
            u1,
            use_paper_constants,
            omit_timestamp,
        } => cmd_certify(u1, *use_paper_constants, *omit_timestamp, &ctx, cli.format),
        Command::Threshold {
            u1,
            use_paper_constants,
        } => cmd_threshold(u1, *use_paper_constants, &ctx, cli.format),
        Command::Constants { u1, full } => cmd_constants(u1, *full, &ctx, cli.format),
        Command::Check { x, alpha } => cmd_check(*x, alpha, &sieve_cfg, cli.format),
        Command::Scan {
            lo,
            hi,
            alpha,
            checkpoint,
        } => cmd_scan(*lo, *hi, alpha, checkpoint.as_deref(), &sieve_cfg, cli.format),
        Command::Pi { x } => cmd_pi(*x, &sieve_cfg, cli.format),
        Command::AuditTheta { limit } => cmd_audit(*limit, &sieve_cfg, cli.format),
        Command::Dk { k } => cmd_dk(*k, cli.format),
    }
}

fn parse_u1(s: &str, prec: u32) -> Result<CertReal> {
    CertReal::from_decimal(s, prec)
}

fn parse_alpha(s: &str, prec: u32) -> Result<CertReal> {
    if s == "e" {
        Ok(CertReal::e(prec))
    } else {
        CertReal::from_decimal(s, prec)
    }
}

fn pair(v: &CertReal) -> Value {
    let (lo, hi) = v.to_decimal_pair();
    json!([lo, hi])
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

/// Envelope constants with the published bounds substituted; the anchor
/// constants are still recomputed so the report stays self-describing.
fn paper_env(u1: &CertReal, ctx: &PrecisionContext) -> Result<EnvelopeConstants> {
    let prec = u1.prec();
    let params = ThetaParams::new(prec);
    let a_at_anchor = a_eval(&params, &LogPoint::new(u1.clone())?)?;
    let tol = ctx.default_tolerance;
    Ok(EnvelopeConstants {
        u1: u1.clone(),
        a_at_anchor,
        scaled_c0: scaled_c(u1, CSign::Minus, tol, ctx)?,
        scaled_c1: scaled_c(u1, CSign::Plus, tol, ctx)?,
        lower: CertReal::from_decimal(PAPER_LOWER, prec)?,
        upper: CertReal::from_decimal(PAPER_UPPER, prec)?,
    })
}

fn make_certificate(
    u1_text: &str,
    use_paper_constants: bool,
    ctx: &PrecisionContext,
) -> Result<Certificate> {
    let u1 = parse_u1(u1_text, ctx.prec_bits())?;
    let env = if use_paper_constants {
        paper_env(&u1, ctx)?
    } else {
        envelope_constants(&u1, ctx.default_tolerance, ctx)?
    };
    build_certificate_with_env(env, ctx)
}

/// Text layout: the envelope constants first, then the endgame quantities,
/// then the verdict, for side-by-side auditing.
fn print_certificate_text(c: &Certificate) {
    println!("anchor u1            = {:.24}", c.u1);
    println!("a(x1)                = {:.24}", c.env.a_at_anchor);
    println!("scaled C0            = {:.24}", c.env.scaled_c0);
    println!("scaled C1            = {:.24}", c.env.scaled_c1);
    println!("envelope lower bound = {:.24}", c.env.lower);
    println!("envelope upper bound = {:.24}", c.env.upper);
    println!("gap at u1 + 1        = {:.24}", c.gap_at_anchor);
    match &c.u_threshold {
        Some(t) => println!("threshold u*         = {t:.24}"),
        None => println!("threshold u*         = (above the anchor)"),
    }
    println!("margin at u1 + 1     = {:.24}", c.margin);
    match &c.failure {
        Some(f) => println!("verdict              = NOT certified ({f})"),
        None => println!("verdict              = certified"),
    }
}

fn cmd_certify(
    u1: &str,
    use_paper: bool,
    omit_timestamp: bool,
    ctx: &PrecisionContext,
    format: Format,
) -> Result<i32> {
    let mut cert = make_certificate(u1, use_paper, ctx)?;
    if omit_timestamp {
        cert.metadata.generated_at_unix = None;
    }
    match format {
        Format::Json => print_json(&cert.to_json()),
        _ => print_certificate_text(&cert),
    }
    Ok(if cert.verdict { 0 } else { 1 })
}

fn cmd_threshold(
    u1: &str,
    use_paper: bool,
    ctx: &PrecisionContext,
    format: Format,
) -> Result<i32> {
    let cert = make_certificate(u1, use_paper, ctx)?;
    match format {
        Format::Json => {
            let mut m = Map::new();
            m.insert("schema".into(), json!("threshold/1"));
            m.insert("u1".into(), pair(&cert.u1));
            m.insert(
                "u_threshold".into(),
                cert.u_threshold.as_ref().map(pair).unwrap_or(Value::Null),
            );
            m.insert("gap_at_anchor".into(), pair(&cert.gap_at_anchor));
            m.insert("margin".into(), pair(&cert.margin));
            m.insert("verdict".into(), json!(cert.verdict));
            print_json(&Value::Object(m));
        }
        _ => {
            match &cert.u_threshold {
                Some(t) => println!("threshold u*     = {t:.24}"),
                None => println!("threshold u*     = (above the anchor)"),
            }
            println!("gap at u1 + 1    = {:.24}", cert.gap_at_anchor);
            println!("margin at u1 + 1 = {:.24}", cert.margin);
        }
    }
    Ok(if cert.verdict { 0 } else { 1 })
}

fn cmd_constants(u1_text: &str, full: bool, ctx: &PrecisionContext, format: Format) -> Result<i32> {
    let prec = ctx.prec_bits();
    let u1 = parse_u1(u1_text, prec)?;
    let params = ThetaParams::new(prec);
    let a_at_anchor = a_eval(&params, &LogPoint::new(u1.clone())?)?;

    let env = if full {
        Some(envelope_constants(&u1, ctx.default_tolerance, ctx)?)
    } else {
        None
    };

    match format {
        Format::Json => {
            let mut m = Map::new();
            m.insert("schema".into(), json!("constants/1"));
            m.insert("u1".into(), pair(&u1));
            m.insert("a_at_anchor".into(), pair(&a_at_anchor));
            if let Some(env) = &env {
                m.insert("scaled_c0".into(), pair(&env.scaled_c0));
                m.insert("scaled_c1".into(), pair(&env.scaled_c1));
                m.insert("envelope_lower".into(), pair(&env.lower));
                m.insert("envelope_upper".into(), pair(&env.upper));
            }
            print_json(&Value::Object(m));
        }
        _ => {
            println!("anchor u1            = {u1:.24}");
            println!("a(x1)                = {a_at_anchor:.24}");
            if let Some(env) = &env {
                println!("scaled C0            = {:.24}", env.scaled_c0);
                println!("scaled C1            = {:.24}", env.scaled_c1);
                println!("envelope lower bound = {:.24}", env.lower);
                println!("envelope upper bound = {:.24}", env.upper);
            }
        }
    }
    Ok(0)
}

fn check_to_json(r: &CheckResult) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), json!("check/1"));
    m.insert("x".into(), json!(r.x));
    m.insert("alpha".into(), pair(&r.alpha));
    // the floor convention for pi at the irrational scale x/alpha
    m.insert("floor_convention".into(), json!("pi(floor(x/alpha))"));
    m.insert("floor_x_over_alpha".into(), json!(r.floor_x_over_alpha));
    m.insert("pi_x".into(), json!(r.pi_x));
    m.insert("pi_floor".into(), json!(r.pi_floor));
    m.insert("lhs".into(), json!(r.lhs.to_string()));
    m.insert("rhs".into(), pair(&r.rhs));
    m.insert(
        "holds".into(),
        match r.holds {
            Some(b) => json!(b),
            None => json!("undecided"),
        },
    );
    Value::Object(m)
}

fn print_check_text(r: &CheckResult) {
    println!("x                  = {}", r.x);
    println!("alpha              = {:.24}", r.alpha);
    println!("floor(x/alpha)     = {}", r.floor_x_over_alpha);
    println!("pi(x)              = {}", r.pi_x);
    println!("pi(floor(x/alpha)) = {}", r.pi_floor);
    println!("lhs pi(x)^2        = {}", r.lhs);
    println!("rhs                = {:.24}", r.rhs);
    println!(
        "holds              = {}",
        match r.holds {
            Some(true) => "true",
            Some(false) => "false",
            None => "undecided",
        }
    );
}

fn cmd_check(x: u64, alpha: &str, cfg: &SieveConfig, format: Format) -> Result<i32> {
    let alpha = parse_alpha(alpha, cfg.prec)?;
    let r = check_point(x, &alpha, cfg)?;
    match format {
        Format::Json => print_json(&check_to_json(&r)),
        _ => print_check_text(&r),
    }
    Ok(match r.holds {
        Some(true) => 0,
        _ => 1,
    })
}

fn cmd_scan(
    lo: u64,
    hi: u64,
    alpha: &str,
    checkpoint: Option<&std::path::Path>,
    cfg: &SieveConfig,
    format: Format,
) -> Result<i32> {
    let alpha = parse_alpha(alpha, cfg.prec)?;
    let rows = scan_range_detailed(lo, hi, &alpha, cfg, checkpoint)?;
    let failing: Vec<u64> = rows
        .iter()
        .filter(|r| r.holds == Some(false))
        .map(|r| r.x)
        .collect();
    if rows.iter().any(|r| r.holds.is_none()) {
        return Err(Error::Domain(
            "comparison undecided at some point of the scan".into(),
        ));
    }
    match format {
        Format::Csv => print!("{}", scan_csv(&rows)),
        Format::Json => {
            let mut m = Map::new();
            m.insert("schema".into(), json!("scan/1"));
            m.insert("lo".into(), json!(lo));
            m.insert("hi".into(), json!(hi));
            m.insert("alpha".into(), pair(&alpha));
            m.insert("floor_convention".into(), json!("pi(floor(x/alpha))"));
            m.insert("failing".into(), json!(failing));
            print_json(&Value::Object(m));
        }
        Format::Text => {
            println!("scanned [{lo}, {hi}]: {} failing point(s)", failing.len());
            for x in &failing {
                println!("{x}");
            }
        }
    }
    Ok(0)
}

fn cmd_pi(x: u64, cfg: &SieveConfig, format: Format) -> Result<i32> {
    let r = sieve_pi_theta(x, cfg)?;
    match format {
        Format::Json => {
            let mut m = Map::new();
            m.insert("schema".into(), json!("pi/1"));
            m.insert("x".into(), json!(r.x));
            m.insert("pi".into(), json!(r.pi));
            m.insert("theta".into(), pair(&r.theta));
            print_json(&Value::Object(m));
        }
        _ => {
            println!("pi({x})    = {}", r.pi);
            println!("theta({x}) = {:.24}", r.theta);
        }
    }
    Ok(0)
}

fn cmd_audit(limit: u64, cfg: &SieveConfig, format: Format) -> Result<i32> {
    let report = audit_theta_bound(limit, cfg)?;
    match format {
        Format::Json => {
            let mut m = Map::new();
            m.insert("schema".into(), json!("audit-theta/1"));
            m.insert("limit".into(), json!(report.limit));
            m.insert("max_ratio".into(), pair(&report.max_ratio));
            m.insert("argmax_x".into(), json!(report.argmax_x));
            m.insert("runner_up".into(), json!(format!("{:.17e}", report.runner_up)));
            m.insert("runner_up_x".into(), json!(report.runner_up_x));
            m.insert("points_checked".into(), json!(report.points_checked));
            print_json(&Value::Object(m));
        }
        _ => {
            println!("audited up to   = {}", report.limit);
            println!("max ratio       = {:.24}", report.max_ratio);
            println!("attained at x   = {}", report.argmax_x);
            println!(
                "runner-up       = {:.12} at x = {}",
                report.runner_up, report.runner_up_x
            );
            println!("points checked  = {}", report.points_checked);
        }
    }
    Ok(0)
}

fn cmd_dk(k: u32, format: Format) -> Result<i32> {
    let c = hassani_dk(k);
    match format {
        Format::Json => {
            let mut m = Map::new();
            m.insert("schema".into(), json!("dk/1"));
            m.insert("k".into(), json!(c.k));
            m.insert("d_k".into(), json!(c.d_k.to_string()));
            print_json(&Value::Object(m));
        }
        _ => println!("d_{} = {}", c.k, c.d_k),
    }
    Ok(0)
}
