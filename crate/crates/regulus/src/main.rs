//! Command-line front end: transform points, integrate flows, run billiards,
//! classify quadrics, run the verification suite.

use clap::{Args, Parser, Subcommand};
use regulus::billiards::{run_billiard, BilliardSpec, StopRule};
use regulus::cli::{
    default_state, events_csv, orbit_csv, parse_state, parse_tspan, parse_walls, read_input,
    trajectory_csv, trajectory_json, RunConfig,
};
use regulus::error::RegulusError;
use regulus::geometry::{hopf_image_classify, CenteredQuadric4};
use regulus::quat::{hopf, PureQuaternion, Quaternion};
use regulus::systems::{integrate, SystemKind};
use regulus::transforms::{
    bw_base, bw_lift, bw_phase, ks_forward, ks_lift, levi_civita, phi1, phi2, BwPoint,
    LambdaHatPoint, MoebiusPoint, PhasePointH, PhasePointIH,
};
use regulus::verify::{run_suite, summary_table, to_json_lines};
use serde::Deserialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "regulus", version, about = "Quaternionic regularization transforms, Hamiltonian flows and integrable mechanical billiards")]
struct Cli {
    /// JSON configuration file; flags override its keys.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    /// Seed for all pseudorandom sampling (default: REGULUS_SEED or 42).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// System parameters, e.g. "f=0.5,m=-1,C=0.3".
    #[arg(long, global = true)]
    params: Option<String>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a transform to a point read from JSON.
    Transform(TransformArgs),
    /// Integrate a Hamiltonian flow and export the trajectory.
    Simulate(SimulateArgs),
    /// Run a mechanical billiard and export arcs and events.
    Billiard(BilliardArgs),
    /// Classify the Hopf image of an S¹-invariant centered quadric.
    Classify(ClassifyArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct TransformArgs {
    /// One of: hopf, ks, lc, bw, phi1, phi2.
    map: String,
    /// Inline JSON or @file.
    #[arg(long = "in")]
    input: String,
    /// Fiber angle for lifts.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Apply the inverse / fiber lift where defined (ks, bw, phi1, phi2).
    #[arg(long)]
    inverse: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    system: String,
    /// Initial state (inline JSON or @file); a documented default per system
    /// is used when omitted.
    #[arg(long)]
    state: Option<String>,
    /// Integration span "t0,t1".
    #[arg(long)]
    tspan: String,
    #[arg(long)]
    out: Option<String>,
    /// csv (default) or json.
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
}

#[derive(Args)]
struct BilliardArgs {
    #[arg(long)]
    system: String,
    #[arg(long)]
    state: Option<String>,
    /// Wall shorthand, repeatable: sphere:r=2.0, cone:psi=1.0, spheroid:b=0.8,
    /// hyperboloid:a=0.5,sheet=+, plane:x1=0, quadric:@file.json.
    #[arg(long = "wall")]
    walls: Vec<String>,
    /// Stop after this many reflections.
    #[arg(long, default_value_t = 10)]
    bounces: usize,
    /// Stop at this flow time.
    #[arg(long, default_value_t = 1e4)]
    tmax: f64,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Quadric JSON {"A":[16 row-major]} (inline or @file).
    #[arg(long)]
    quadric: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// Check names to run (repeatable); all checks when omitted.
    #[arg(long = "suite")]
    suites: Vec<String>,
    /// Sample-count override for sampling-based checks.
    #[arg(long)]
    trials: Option<u64>,
    /// Write the JSON-lines report here (stdout otherwise).
    #[arg(long)]
    out: Option<String>,
    /// List available check names and exit.
    #[arg(long)]
    list: bool,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let (code, kind) = match e {
                RegulusError::Usage(_) => (2, "usage"),
                RegulusError::Domain(_) | RegulusError::Constraint(_) | RegulusError::Chart(_) => {
                    (2, "invalid input")
                }
                _ => (3, "numerical"),
            };
            eprintln!("{}", json!({ "error": e.to_string(), "kind": kind }));
            code
        }
    });
}

fn effective_config(cli: &Cli) -> Result<RunConfig, RegulusError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    cfg.seed_from_env();
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(params) = &cli.params {
        cfg.apply_params(params)?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), RegulusError> {
    let cfg = effective_config(&cli)?;
    if cli.dump_config {
        println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(RegulusError::Usage("missing subcommand; see --help".into()));
    };
    match command {
        Command::Transform(args) => cmd_transform(&cfg, args),
        Command::Simulate(args) => cmd_simulate(&cfg, args),
        Command::Billiard(args) => cmd_billiard(&cfg, args),
        Command::Classify(args) => cmd_classify(args),
        Command::Verify(args) => cmd_verify(&cfg, args),
    }
}

fn moebius_json(p: MoebiusPoint) -> serde_json::Value {
    match p {
        MoebiusPoint::Finite(q) => json!(q),
        MoebiusPoint::Infinity => json!("infinity"),
    }
}

fn cmd_transform(_cfg: &RunConfig, args: TransformArgs) -> Result<(), RegulusError> {
    let input = read_input(&args.input)?;
    let bad = |e: serde_json::Error| RegulusError::Usage(format!("input: {e}"));
    let out = match (args.map.as_str(), args.inverse) {
        ("hopf", false) => {
            let z: Quaternion = serde_json::from_str(&input).map_err(bad)?;
            json!(hopf(z))
        }
        ("ks", false) => {
            let pt: PhasePointH = serde_json::from_str(&input).map_err(bad)?;
            json!(ks_forward(&pt)?)
        }
        ("ks", true) => {
            let pt: PhasePointIH = serde_json::from_str(&input).map_err(bad)?;
            json!(ks_lift(&pt, args.theta)?)
        }
        ("lc", false) => {
            #[derive(Deserialize)]
            struct In {
                z: [f64; 2],
                w: [f64; 2],
            }
            let v: In = serde_json::from_str(&input).map_err(bad)?;
            let (q, p) = levi_civita(
                num_complex::Complex64::new(v.z[0], v.z[1]),
                num_complex::Complex64::new(v.w[0], v.w[1]),
            )?;
            json!({ "q": [q.re, q.im], "p": [p.re, p.im] })
        }
        ("bw", false) => {
            let pt: PhasePointH = serde_json::from_str(&input).map_err(bad)?;
            let lam = LambdaHatPoint::new(pt.z, pt.w, 1e-10)?;
            let (x, y) = bw_phase(&lam)?;
            json!({ "x": x, "y": y })
        }
        ("bw", true) => {
            #[derive(Deserialize)]
            struct In {
                x: PureQuaternion,
                y: PureQuaternion,
            }
            let v: In = serde_json::from_str(&input).map_err(bad)?;
            let pt = bw_lift(v.x, v.y, args.theta)?;
            json!({ "z": pt.z, "w": pt.w })
        }
        ("bw_base", false) => {
            let z: Quaternion = serde_json::from_str(&input).map_err(bad)?;
            match bw_base(z)? {
                BwPoint::Finite(x) => json!(x),
                BwPoint::Infinity => json!("infinity"),
            }
        }
        ("phi1", inv) => {
            let z: Quaternion = serde_json::from_str(&input).map_err(bad)?;
            let _ = inv; // φ₁ is an involution: the inverse is the same map
            moebius_json(phi1(MoebiusPoint::Finite(z)))
        }
        ("phi2", _) => {
            let q: PureQuaternion = serde_json::from_str(&input).map_err(bad)?;
            match phi2(BwPoint::Finite(q)) {
                BwPoint::Finite(x) => json!(x),
                BwPoint::Infinity => json!("infinity"),
            }
        }
        (other, _) => {
            return Err(RegulusError::Usage(format!(
                "unknown transform '{other}' (expected hopf|ks|lc|bw|bw_base|phi1|phi2)"
            )))
        }
    };
    println!("{out}");
    Ok(())
}

fn integrator_opts(
    cfg: &RunConfig,
    rel: Option<f64>,
    abs: Option<f64>,
    max_step: Option<f64>,
) -> regulus::systems::IntegrateOpts {
    let mut opts = cfg.integrator;
    if let Some(v) = rel {
        opts.rel_tol = v;
    }
    if let Some(v) = abs {
        opts.abs_tol = v;
    }
    if let Some(v) = max_step {
        opts.max_step = v;
    }
    opts
}

fn write_or_print(path: &Option<String>, content: &str) -> Result<(), RegulusError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| RegulusError::Usage(format!("cannot write '{p}': {e}"))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_simulate(cfg: &RunConfig, args: SimulateArgs) -> Result<(), RegulusError> {
    let kind = SystemKind::parse(&args.system)?;
    let spec = cfg.system_spec(kind)?;
    let y0 = match &args.state {
        Some(s) => parse_state(kind, &read_input(s)?)?,
        None => default_state(kind, cfg.param("C")),
    };
    let tspan = parse_tspan(&args.tspan)?;
    let opts = integrator_opts(cfg, args.rel_tol, args.abs_tol, args.max_step);
    let traj = integrate(&spec, &y0, tspan, opts)?;
    let content = match args.format.as_str() {
        "csv" => trajectory_csv(&spec, &traj),
        "json" => trajectory_json(&spec, &traj),
        other => return Err(RegulusError::Usage(format!("unknown format '{other}'"))),
    };
    write_or_print(&args.out, &content)
}

fn parse_wall_args(walls: &[String]) -> Result<Vec<regulus::billiards::WallSurface>, RegulusError> {
    let mut out = Vec::with_capacity(walls.len());
    for w in walls {
        if let Some(rest) = w.strip_prefix("quadric:") {
            let text = read_input(rest)?;
            let q: CenteredQuadric4 = serde_json::from_str(&text)
                .map_err(|e| RegulusError::Usage(format!("wall '{w}': {e}")))?;
            out.push(regulus::billiards::WallSurface::Quadric4(q));
        } else {
            out.extend(parse_walls(std::slice::from_ref(w))?);
        }
    }
    Ok(out)
}

fn cmd_billiard(cfg: &RunConfig, args: BilliardArgs) -> Result<(), RegulusError> {
    let kind = SystemKind::parse(&args.system)?;
    let spec = cfg.system_spec(kind)?;
    let y0 = match &args.state {
        Some(s) => parse_state(kind, &read_input(s)?)?,
        None => default_state(kind, cfg.param("C")),
    };
    let walls = parse_wall_args(&args.walls)?;
    let stop = StopRule { max_reflections: args.bounces, max_time: args.tmax };
    let mut bspec = BilliardSpec::new(spec, walls, stop)?;
    bspec.opts = integrator_opts(cfg, args.rel_tol, args.abs_tol, args.max_step);
    let orbit = run_billiard(&bspec, &y0)?;
    match args.format.as_str() {
        "csv" => {
            write_or_print(&args.out, &orbit_csv(&spec, &orbit))?;
            if let Some(path) = &args.out {
                let events_path = match path.rsplit_once('.') {
                    Some((stem, ext)) => format!("{stem}.events.{ext}"),
                    None => format!("{path}.events"),
                };
                std::fs::write(&events_path, events_csv(&spec, &orbit)).map_err(|e| {
                    RegulusError::Usage(format!("cannot write '{events_path}': {e}"))
                })?;
            } else {
                print!("{}", events_csv(&spec, &orbit));
            }
        }
        "json" => {
            let arcs: Vec<_> = orbit
                .arcs
                .iter()
                .map(|a| json!({ "times": a.times, "states": a.states }))
                .collect();
            let events: Vec<_> = orbit
                .events
                .iter()
                .map(|e| {
                    json!({
                        "t": e.t, "wall": e.wall, "state_in": e.y_in, "state_out": e.y_out,
                        "v_in": e.v_in, "v_out": e.v_out, "normal": e.normal
                    })
                })
                .collect();
            let doc = json!({
                "system": spec,
                "reflections": orbit.events.len(),
                "conserved_names": orbit.conserved_names,
                "conserved_per_arc": orbit.conserved_per_arc,
                "arcs": arcs,
                "events": events,
            });
            write_or_print(&args.out, &serde_json::to_string_pretty(&doc).expect("serializes"))?;
        }
        other => return Err(RegulusError::Usage(format!("unknown format '{other}'"))),
    }
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> Result<(), RegulusError> {
    let text = read_input(&args.quadric)?;
    let q: CenteredQuadric4 = serde_json::from_str(&text)
        .map_err(|e| RegulusError::Usage(format!("quadric: {e}")))?;
    let nf = q.normal_form();
    let image = hopf_image_classify(&q)?;
    let doc = json!({
        "s1_invariant": q.is_s1_invariant(),
        "normal_form": nf.axes.iter().map(|a| json!({"sigma": a.sigma, "a": a.a})).collect::<Vec<_>>(),
        "eigenvalues": nf.eigenvalues,
        "image": image,
        "semi_axes": image.semi_axes(),
        "foci": image.foci(),
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
    Ok(())
}

fn cmd_verify(cfg: &RunConfig, args: VerifyArgs) -> Result<(), RegulusError> {
    if args.list {
        for name in regulus::verify::check_names() {
            println!("{name}");
        }
        return Ok(());
    }
    let reports = run_suite(&args.suites, cfg.seed, args.trials)?;
    let jsonl = to_json_lines(&reports);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &jsonl)
                .map_err(|e| RegulusError::Usage(format!("cannot write '{path}': {e}")))?;
        }
        None => print!("{jsonl}"),
    }
    print!("{}", summary_table(&reports));
    if reports.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(RegulusError::Numerical("verification suite failed".into()))
    }
}
