use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ratiocut_core::dynamics::{iterate, CurvilinearQuad, DynamicsOptions, SidePolicy};
use ratiocut_core::graphlap::{
    bipartition, interface_x, inverse_power_method, partition_csv, sample_domain, AffinityGraph,
    IpmOptions,
};
use ratiocut_core::perturbation::{
    audit_table, coefficients_json, predict_cut_gated, AuditOptions, ExpansionTable, MultiIndex,
    Order, Ratio, SLOT_NAMES,
};
use ratiocut_core::ratiocut::{
    lemma2_check, optimize_cut, ratio_cut_gated, rectangle_cut_search, SidePair,
};
use ratiocut_core::svg::scatter;
use ratiocut_core::sweep::{run_sweep, SweepOptions, SweepSpec};
use ratiocut_core::{CutParams, DomainParams, Error, OptimizeOptions, Param};
use serde_json::json;

const EXTENDED_GATE: f64 = 0.5;

// stdout may be a closed pipe (`| head`); that is not an error here
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser, Debug)]
#[command(
    name = "ratiocut",
    version,
    about = "Ratio cuts of nearly rectangular domains"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone, Default)]
struct Global {
    /// key = value file; RATIOCUT_CONFIG is read when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for written files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Largest admissible |σ| entry.
    #[arg(long, global = true)]
    gate: Option<f64>,
    /// Shorthand for a gate of 0.5.
    #[arg(long, global = true)]
    extend_gate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
    All,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Ratio cut of one cut.
    Eval {
        #[arg(long, default_value = "")]
        sigma: String,
        /// q,p,theta
        #[arg(long)]
        cut: String,
    },
    /// Numerically optimal cut.
    Optimize {
        #[arg(long, default_value = "")]
        sigma: String,
    },
    /// Cut predicted by the expansion.
    Predict {
        #[arg(long, default_value = "")]
        sigma: String,
        #[arg(long, default_value = "first")]
        order: String,
    },
    /// Optimal against predicted ratio cut along a parameter path.
    Sweep {
        /// path:lo:hi[:count], e.g. a1:0:0.1 or a1=-eps_t/5:0:0.1:21.
        #[arg(long, conflicts_with = "families")]
        spec: Option<String>,
        /// Run the eight comparison families.
        #[arg(long)]
        families: bool,
        #[arg(long, default_value = "first")]
        order: String,
    },
    /// Coefficient audit and rectangle cut checks.
    Verify {
        /// Audit the table as printed rather than with errata applied.
        #[arg(long)]
        printed: bool,
        /// Smaller stencils and grids.
        #[arg(long)]
        quick: bool,
        /// Override one slot: INDEX:SLOT=VALUE, e.g. a1*a2:q=5/3.
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// Repeated cuts of a curvilinear quadrilateral.
    Iterate {
        /// rectangle[:w:h], triangle or sigma:a1=0.08,...
        #[arg(long, default_value = "rectangle:2:1")]
        domain: String,
        #[arg(long, default_value_t = 6)]
        steps: usize,
        #[arg(long, default_value = "away-from-original")]
        policy: String,
    },
    /// Point-cloud graph bipartition by the inverse power method.
    Graphcut {
        #[arg(long, default_value = "rectangle:2:1")]
        domain: String,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// Neighbours of the kNN graph.
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Use an ε-ball graph with this radius instead of kNN.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 5)]
        starts: usize,
    },
    /// Dump the expansion table as JSON.
    Coefficients,
}

#[derive(Debug)]
enum Failure {
    Parse(String),
    Compute(Error),
    Verify(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 1,
            Failure::Compute(_) => 2,
            Failure::Verify(_) => 3,
            Failure::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Parse(m) => write!(f, "parse error: {m}"),
            Failure::Compute(e) => write!(f, "{e}"),
            Failure::Verify(m) => write!(f, "verification failed: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(m) => Failure::Parse(m),
            e => Failure::Compute(e),
        }
    }
}

type Out<T> = Result<T, Failure>;

/// Effective settings after merging the config file and the flags.
#[derive(Debug)]
struct Settings {
    out: PathBuf,
    seed: u64,
    format: Format,
    gate: f64,
}

fn read_config(path: &Path) -> Out<BTreeMap<String, String>> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Failure::Parse(format!(
                "{}:{}: expected key = value",
                path.display(),
                n + 1
            )));
        };
        let k = k.trim().replace('-', "_");
        if !matches!(
            k.as_str(),
            "out" | "seed" | "format" | "gate" | "extend_gate"
        ) {
            return Err(Failure::Parse(format!(
                "{}:{}: unknown key `{k}`",
                path.display(),
                n + 1
            )));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn settings(g: &Global) -> Out<Settings> {
    let path = g
        .config
        .clone()
        .or_else(|| std::env::var_os("RATIOCUT_CONFIG").map(PathBuf::from));
    let cfg = match path {
        Some(p) => read_config(&p)?,
        None => BTreeMap::new(),
    };
    let parse = |k: &str| -> Out<Option<f64>> {
        cfg.get(k)
            .map(|v| {
                v.parse()
                    .map_err(|_| Failure::Parse(format!("bad {k} `{v}`")))
            })
            .transpose()
    };
    let seed = match (g.seed, cfg.get("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => v
            .parse()
            .map_err(|_| Failure::Parse(format!("bad seed `{v}`")))?,
        (None, None) => 0,
    };
    let format = match (g.format, cfg.get("format")) {
        (Some(f), _) => f,
        (None, Some(v)) => v.parse().map_err(Failure::Parse)?,
        (None, None) => Format::All,
    };
    let extend = g.extend_gate
        || cfg
            .get("extend_gate")
            .is_some_and(|v| matches!(v.as_str(), "true" | "1" | "yes"));
    let gate = match (g.gate, parse("gate")?) {
        (Some(v), _) | (None, Some(v)) => v,
        (None, None) if extend => EXTENDED_GATE,
        (None, None) => ratiocut_core::geometry::DEFAULT_GATE,
    };
    if !(gate > 0.0) {
        return Err(Failure::Parse(format!("gate must be positive, got {gate}")));
    }
    let out = g
        .out
        .clone()
        .or_else(|| cfg.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    Ok(Settings {
        out,
        seed,
        format,
        gate,
    })
}

/// `a1=0.1,eps_t=-0.2`; missing entries are zero.
fn parse_sigma(s: &str) -> Out<DomainParams> {
    let mut sigma = DomainParams::zero();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::Parse(format!("expected name=value, got `{item}`")))?;
        let p: Param = k.trim().parse()?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Failure::Parse(format!("bad value `{v}` for {p}")))?;
        sigma.set(p, v);
    }
    Ok(sigma)
}

fn parse_cut(s: &str) -> Out<CutParams> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Parse(format!("bad cut `{s}`")))?;
    match v.as_slice() {
        [q, p, t] => Ok(CutParams::new(*q, *p, *t)),
        _ => Err(Failure::Parse(format!("cut `{s}` is not q,p,theta"))),
    }
}

fn parse_order(s: &str) -> Out<Order> {
    Ok(s.parse()?)
}

fn parse_domain(s: &str) -> Out<CurvilinearQuad> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "rectangle" => {
            let dims: Vec<f64> = if rest.is_empty() {
                vec![2.0, 1.0]
            } else {
                rest.split(':')
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| Failure::Parse(format!("bad rectangle `{s}`")))?
            };
            match dims.as_slice() {
                [w, h] if *w > 0.0 && *h > 0.0 => Ok(CurvilinearQuad::rectangle(*w, *h)?),
                _ => Err(Failure::Parse(format!(
                    "rectangle `{s}` needs positive w:h"
                ))),
            }
        }
        "triangle" => Ok(CurvilinearQuad::triangle()?),
        "sigma" => Ok(CurvilinearQuad::from_sigma(&parse_sigma(rest)?)?),
        _ => Err(Failure::Parse(format!(
            "unknown domain `{s}` (rectangle[:w:h], triangle, sigma:...)"
        ))),
    }
}

fn parse_override(s: &str) -> Out<(MultiIndex, usize, Ratio)> {
    let bad = || Failure::Parse(format!("override `{s}` is not INDEX:SLOT=VALUE"));
    let (lhs, value) = s.split_once('=').ok_or_else(bad)?;
    let (idx, slot) = lhs.rsplit_once(':').ok_or_else(bad)?;
    let slot = SLOT_NAMES
        .iter()
        .position(|n| *n == slot.trim())
        .ok_or_else(|| Failure::Parse(format!("unknown slot `{slot}`")))?;
    Ok((idx.parse()?, slot, value.parse()?))
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn write(dir: &Path, name: &str, body: &str) -> Out<()> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// File-name form of a sweep path: `a1=-eps_t/5` becomes `a1_eq_neg_eps_t_over_5`.
fn slug(name: &str) -> String {
    name.replace('=', "_eq_")
        .replace('-', "neg_")
        .replace('/', "_over_")
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn wants(f: Format, kind: Format) -> bool {
    f == Format::All || f == kind
}

fn eval(st: &Settings, sigma: &str, cut: &str) -> Out<()> {
    let (sigma, cut) = (parse_sigma(sigma)?, parse_cut(cut)?);
    let b = ratio_cut_gated(&sigma, &cut, st.gate)?;
    out!("{}", pretty(&b));
    Ok(())
}

fn optimize(st: &Settings, sigma: &str) -> Out<()> {
    let sigma = parse_sigma(sigma)?;
    let opts = OptimizeOptions {
        gate: st.gate,
        ..OptimizeOptions::default()
    };
    out!("{}", pretty(&optimize_cut(&sigma, &opts)?));
    Ok(())
}

fn predict(st: &Settings, sigma: &str, order: &str) -> Out<()> {
    let (sigma, order) = (parse_sigma(sigma)?, parse_order(order)?);
    let cut = predict_cut_gated(&sigma, order, st.gate)?;
    let value = ratio_cut_gated(&sigma, &cut, st.gate).map(|b| b.value).ok();
    out!("{}", pretty(&json!({ "cut": cut, "value": value })));
    Ok(())
}

fn sweep(st: &Settings, spec: Option<&str>, families: bool, order: &str) -> Out<()> {
    let specs = match (spec, families) {
        (Some(s), _) => vec![s.parse::<SweepSpec>()?],
        (None, true) => SweepSpec::families(),
        (None, false) => return Err(Failure::Parse("give --spec or --families".into())),
    };
    let opts = SweepOptions {
        gate: st.gate,
        order: parse_order(order)?,
        ..SweepOptions::default()
    };
    for (k, spec) in specs.iter().enumerate() {
        let res = run_sweep(spec, &opts);
        let stem = if families {
            format!("sweep{}_{}", k + 1, slug(&spec.name))
        } else {
            format!("sweep_{}", slug(&spec.name))
        };
        if wants(st.format, Format::Csv) {
            write(&st.out, &format!("{stem}.csv"), &res.to_csv())?;
        }
        if wants(st.format, Format::Json) {
            write(&st.out, &format!("{stem}.json"), &pretty(&res))?;
        }
        if wants(st.format, Format::Svg) {
            write(&st.out, &format!("{stem}_values.svg"), &res.values_svg())?;
            write(&st.out, &format!("{stem}_error.svg"), &res.error_svg())?;
            match res.extremal_svg() {
                Ok(svg) => write(&st.out, &format!("{stem}_extremal.svg"), &svg)?,
                Err(e) => eprintln!("{stem}: no extremal drawing: {e}"),
            }
        }
        let flagged = res.rows.iter().filter(|r| r.status.is_some()).count();
        out!(
            "{}",
            json!({
                "sweep": spec.label,
                "rows": res.rows.len(),
                "flagged": flagged,
                "origin_abs_err": res.origin_row().abs_err,
                "growth_violations": res.growth_violations(),
            })
        );
    }
    Ok(())
}

fn verify(st: &Settings, printed: bool, quick: bool, overrides: &[String]) -> Out<()> {
    let mut table = if printed {
        ExpansionTable::printed()
    } else {
        ExpansionTable::corrected()
    };
    for o in overrides {
        let (idx, slot, v) = parse_override(o)?;
        if table.get(idx).is_none() {
            return Err(Failure::Parse(format!("`{idx}` is not in the table")));
        }
        table.set_slot(idx, slot, v);
    }
    let audit_opts = if quick {
        AuditOptions::quick()
    } else {
        AuditOptions::default()
    };
    let audit = audit_table(&table, &audit_opts)?;
    let mut problems: Vec<String> = audit
        .failures()
        .iter()
        .map(|e| {
            format!(
                "coefficient {} slot {}: table {} vs finite difference {:.6}",
                e.index, e.slot, e.table, e.finite_difference
            )
        })
        .collect();

    let (boundary, thetas) = if quick { (120, 21) } else { (200, 41) };
    let a = 2.0;
    let search = rectangle_cut_search(a, 1.0, boundary, thetas, 1.0)?;
    let adjacent = search.category_minimum[SidePair::Adjacent as usize];
    if ((search.best_value - 4.0 / a) / (4.0 / a)).abs() > 1e-3 {
        problems.push(format!(
            "rectangle minimum {} is not 4/a",
            search.best_value
        ));
    }
    if adjacent < 4.6 / a * (1.0 - 1e-3) {
        problems.push(format!("adjacent-side cut {adjacent} undercuts 4.6/a"));
    }
    let lemma2: Vec<_> = [0.05, 0.1, 0.2, 0.4]
        .iter()
        .map(|&t| lemma2_check(1.0, t, 0.05, 0.5))
        .collect::<Result<_, _>>()?;
    for c in lemma2.iter().filter(|c| !c.holds) {
        problems.push(format!(
            "cap bound fails at theta {}: {} > {}",
            c.theta, c.cap, c.bound
        ));
    }

    let report = json!({
        "table": if printed { "printed" } else { "corrected" },
        "audited": audit.entries.len(),
        "audit_failures": audit.failures(),
        "rectangle": search,
        "cap_bound": lemma2,
        "problems": problems,
    });
    if wants(st.format, Format::Json) {
        write(&st.out, "verify.json", &pretty(&report))?;
    }
    for p in &problems {
        out!("FAIL {p}");
    }
    out!(
        "{} coefficient slots audited, {} problems",
        audit.entries.len(),
        problems.len()
    );
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(format!("{} problems", problems.len())))
    }
}

fn iterate_cmd(st: &Settings, domain: &str, steps: usize, policy: &str) -> Out<()> {
    let q0 = parse_domain(domain)?;
    let policy: SidePolicy = policy.parse()?;
    let mut opts = DynamicsOptions {
        gate: st.gate,
        ..DynamicsOptions::default()
    };
    opts.optimize.gate = st.gate;
    let traj = iterate(&q0, steps, policy, &opts);
    if let Some(stop) = &traj.stopped {
        if stop.step == 0 {
            return Err(Failure::Compute(Error::Domain(format!(
                "step 0: {}",
                stop.reason
            ))));
        }
        eprintln!("stopped at step {}: {}", stop.step, stop.reason);
    }
    if wants(st.format, Format::Json) {
        write(&st.out, "trajectory.jsonl", &traj.to_jsonl())?;
    }
    if wants(st.format, Format::Svg) {
        write(&st.out, "trajectory.svg", &traj.filmstrip_svg())?;
    }
    out!("{}", traj.to_jsonl().trim_end());
    Ok(())
}

fn graphcut(
    st: &Settings,
    domain: &str,
    n: usize,
    k: usize,
    radius: Option<f64>,
    starts: usize,
) -> Out<()> {
    let q = parse_domain(domain)?;
    let cloud = sample_domain(&q, n, st.seed)?;
    let g = match radius {
        Some(r) => AffinityGraph::radius(&cloud.points, r, None)?,
        None => AffinityGraph::knn_gaussian(&cloud.points, k, None)?,
    };
    g.check_connected()?;
    let opts = IpmOptions {
        starts,
        seed: st.seed,
        ..IpmOptions::default()
    };
    let res = inverse_power_method(&g, &opts)?;
    let (a, b) = bipartition(&res.f)?;
    let x = interface_x(&cloud.points, &a, &b)?;
    let xs = cloud.points.iter().map(|p| p.x);
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
        (l.min(v), h.max(v))
    });
    if wants(st.format, Format::Csv) {
        write(
            &st.out,
            "partition.csv",
            &partition_csv(&cloud.points, &res.f)?,
        )?;
    }
    if wants(st.format, Format::Svg) {
        let mut side = vec![false; cloud.points.len()];
        for &i in &a {
            side[i] = true;
        }
        let svg = scatter(
            &cloud.points,
            &side,
            &format!("n={n} seed={} x*={x:.4}", st.seed),
        );
        write(&st.out, "partition.svg", &svg)?;
    }
    out!(
        "{}",
        pretty(&json!({
            "n": n,
            "edges": g.edges().len(),
            "bandwidth": g.bandwidth,
            "lambda": res.lambda,
            "iterations": res.iterations,
            "converged": res.converged,
            "monotone": res.monotone(),
            "sizes": [a.len(), b.len()],
            "interface_x": x,
            "midline_x": 0.5 * (lo + hi),
        }))
    );
    Ok(())
}

fn run(cli: Cli) -> Out<()> {
    let st = settings(&cli.global)?;
    match cli.cmd {
        Cmd::Eval { sigma, cut } => eval(&st, &sigma, &cut),
        Cmd::Optimize { sigma } => optimize(&st, &sigma),
        Cmd::Predict { sigma, order } => predict(&st, &sigma, &order),
        Cmd::Sweep {
            spec,
            families,
            order,
        } => sweep(&st, spec.as_deref(), families, &order),
        Cmd::Verify {
            printed,
            quick,
            set,
        } => verify(&st, printed, quick, &set),
        Cmd::Iterate {
            domain,
            steps,
            policy,
        } => iterate_cmd(&st, &domain, steps, &policy),
        Cmd::Graphcut {
            domain,
            n,
            k,
            radius,
            starts,
        } => graphcut(&st, &domain, n, k, radius, starts),
        Cmd::Coefficients => {
            out!("{}", coefficients_json());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
