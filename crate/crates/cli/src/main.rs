//! heatlab: graph generation, exact exit/hitting-time experiments, potential
//! theory and sub-Gaussian scaling checks on finite weighted graphs.
//!
//! Exit codes: 0 success, 2 validation error, 3 experiment fail-flag
//! (inequality violation or instability), 1 internal error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use heatlab_core::bounds::{
    chain_lower_bound, envelope_family, exit_time_envelope, heat_profile, heat_profile_family,
    profile_family, scaling_window, subgaussian_profile, EnvelopeConfig, WindowConfig,
    WindowFamily,
};
use heatlab_core::exit::{
    exit_profile, kappa, nu, IterParams, RadiusRule, SolverOracle,
};
use heatlab_core::graph::{
    gen_bottleneck, gen_lattice, gen_product, gen_sierpinski, Vertex, WeightedGraph,
};
use heatlab_core::kernel::{exit_distribution, TransitionOperator};
use heatlab_core::potential::{green_column, green_table, harnack_constant, green_resistance_rows};
use heatlab_core::report::{fmt_f64, write_atomic, ExperimentReport, GraphStamp};
use heatlab_core::verify::verify_suite;
use heatlab_core::{Error, Result};

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "heatlab", version, about = "Random-walk exit times, heat kernels and potential theory on finite weighted graphs")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Master seed; falls back to HEATLAB_SEED, then 42.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Ceil,
    Continuum,
}

#[derive(Args)]
struct OutArgs {
    /// Output file (atomic write); stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a graph family and write its canonical JSON.
    Gen {
        #[arg(long)]
        family: String,
        #[arg(long)]
        dim: Option<u32>,
        #[arg(long)]
        side: Option<u32>,
        #[arg(long)]
        level: Option<u32>,
        /// Left factor (product family).
        #[arg(long)]
        left: Option<PathBuf>,
        /// Right factor (product family).
        #[arg(long)]
        right: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Mean exit times E(x,R) and their in-ball suprema over a radius list.
    MeanExit {
        #[arg(short = 'g', long)]
        graph: PathBuf,
        #[arg(long)]
        center: Vertex,
        /// Radii: comma list `1,2,3` or range `2:24:2`.
        #[arg(long)]
        radii: String,
        #[arg(long, default_value_t = 0.5)]
        lazy: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact exit-time CDF from a ball.
    ExitDist {
        #[arg(short = 'g', long)]
        graph: PathBuf,
        #[arg(long)]
        center: Vertex,
        #[arg(long)]
        radius: u32,
        #[arg(long, default_value_t = 200)]
        t_max: u32,
        #[arg(long, default_value_t = 0.5)]
        lazy: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Iteration counts kappa and nu at one (t, R).
    IterCounts {
        #[arg(short = 'g', long)]
        graph: PathBuf,
        #[arg(long)]
        center: Vertex,
        #[arg(long)]
        t: f64,
        #[arg(long = "R")]
        radius: u32,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, value_enum, default_value = "ceil")]
        rule: Rule,
        /// Scan cap (defaults to R).
        #[arg(long)]
        cap: Option<u32>,
        #[arg(long, default_value_t = 0.5)]
        lazy: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact Harnack constants of the ball pairs (B(x,R), B(x,2R)).
    Harnack {
        #[arg(short = 'g', long)]
        graph: PathBuf,
        #[arg(long)]
        center: Vertex,
        #[arg(long)]
        radii: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Annulus resistances with Green-kernel extremes over an (r, R) grid.
    Resistance {
        #[arg(short = 'g', long)]
        graph: PathBuf,
        #[arg(long)]
        center: Vertex,
        #[arg(long)]
        inner: String,
        #[arg(long)]
        outer: String,
        #[arg(long, default_value_t = 0.5)]
        lazy: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Green kernel of a ball: full table, or one column with --source.
    Green {
        #[arg(short = 'g', long)]
        graph: PathBuf,
        #[arg(long)]
        center: Vertex,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        source: Option<Vertex>,
        #[arg(long, default_value_t = 0.5)]
        lazy: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Chaining lower bound for a hitting probability vs the exact value.
    ChainBound {
        #[arg(short = 'g', long)]
        graph: PathBuf,
        #[arg(long)]
        from: Vertex,
        #[arg(long)]
        to: Vertex,
        #[arg(long)]
        t: u32,
        #[arg(long)]
        l: u32,
        #[arg(long, default_value_t = 0.5)]
        lazy: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exit-time distribution envelopes (kappa/nu fits) on a family preset.
    Envelope {
        /// `lattice-2d` or `gasket`.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, default_value_t = 6)]
        b: u32,
        #[arg(long, default_value_t = 0.5)]
        lazy: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sub-Gaussian profile regressions.
    Profile {
        /// `exit` (exit-probability profile) or `heat` (heat-kernel profile).
        #[arg(long, default_value = "exit")]
        kind: String,
        /// exit: `path` or `gasket`; heat: `path`, `gasket` or `product`.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 0.5)]
        lazy: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Short-time scaling-window experiment along t = theta d^beta.
    Asymptotics {
        /// `lattice-1d` or `gasket`.
        #[arg(long)]
        family: String,
        /// Exponent: `auto` fits the family, or a number.
        #[arg(long, default_value = "auto")]
        beta: String,
        /// Comma list, e.g. `1,2,4`.
        #[arg(long, default_value = "1,2,4")]
        theta: String,
        /// Range `lo:hi`, e.g. `3:7`.
        #[arg(long, default_value = "3:7")]
        levels: String,
        #[arg(long, default_value_t = 3)]
        base: u32,
        #[arg(long, default_value_t = 0.5)]
        lazy: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the invariant suite on a graph.
    Verify {
        #[arg(short = 'g', long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        lazy: f64,
        #[command(flatten)]
        out: OutArgs,
    },
}

/// Reproducibility header serialized into every output.
#[derive(Serialize, Clone)]
struct RunConfig {
    version: String,
    command: String,
    graph: Option<String>,
    lazy: Option<f64>,
    q: Option<f64>,
    seed: u64,
    format: String,
    params: BTreeMap<String, String>,
}

impl RunConfig {
    fn new(command: &str, seed: u64, format: Format) -> Self {
        RunConfig {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            graph: None,
            lazy: None,
            q: None,
            seed,
            format: match format {
                Format::Json => "json".into(),
                Format::Csv => "csv".into(),
            },
            params: BTreeMap::new(),
        }
    }
    fn graph(mut self, path: &Path) -> Self {
        self.graph = Some(path.display().to_string());
        self
    }
    fn lazy(mut self, alpha: f64) -> Self {
        self.lazy = Some(alpha);
        self
    }
    fn q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }
    fn param(mut self, key: &str, value: String) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

fn parse_u32_list(s: &str) -> Result<Vec<u32>> {
    let bad = |s: &str| Error::InvalidParameter(format!("cannot parse list '{s}'"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let nums: Vec<u32> = parts
            .iter()
            .map(|p| p.parse().map_err(|_| bad(s)))
            .collect::<Result<_>>()?;
        match nums.as_slice() {
            [lo, hi] => Ok((*lo..=*hi).collect()),
            [lo, hi, step] if *step > 0 => Ok((*lo..=*hi).step_by(*step as usize).collect()),
            _ => Err(bad(s)),
        }
    } else {
        s.split(',')
            .map(|p| p.trim().parse().map_err(|_| bad(s)))
            .collect()
    }
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse list '{s}'")))
        })
        .collect()
}

fn emit(out: &OutArgs, text: &str) -> Result<()> {
    match &out.out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn csv_header(config: &RunConfig, stamp: Option<&GraphStamp>, columns: &str) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "# heatlab {} {}\n# config: {}\n",
        config.version,
        config.command,
        serde_json::to_string(config).unwrap_or_default()
    ));
    if let Some(st) = stamp {
        s.push_str(&format!(
            "# graph: family={} n={} edges={} hash={}\n",
            st.family, st.n, st.edges, st.hash
        ));
    }
    s.push_str(columns);
    s.push('\n');
    s
}

fn load_graph(path: &Path) -> Result<(Arc<WeightedGraph>, GraphStamp)> {
    let g = Arc::new(WeightedGraph::load(path)?);
    let stamp = GraphStamp::of(&g)?;
    Ok((g, stamp))
}

fn operator(g: Arc<WeightedGraph>, alpha: f64) -> Result<TransitionOperator> {
    TransitionOperator::new(g, alpha)
}

fn report_json(report: &ExperimentReport) -> Result<String> {
    report.to_json_pretty()
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("cannot set --jobs: {e}")))?;
    }
    let seed = cli
        .seed
        .or_else(|| {
            std::env::var("HEATLAB_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(DEFAULT_SEED);

    match cli.cmd {
        Cmd::Gen {
            family,
            dim,
            side,
            level,
            left,
            right,
            out,
        } => {
            let need = |o: Option<u32>, what: &str| {
                o.ok_or_else(|| Error::InvalidParameter(format!("--{what} required for this family")))
            };
            let g = match family.as_str() {
                "lattice" => gen_lattice(need(dim, "dim")?, need(side, "side")?)?,
                "sierpinski" => gen_sierpinski(need(level, "level")?)?,
                "bottleneck" => gen_bottleneck(need(side, "side")?)?,
                "product" => {
                    let lp = left.ok_or_else(|| {
                        Error::InvalidParameter("--left required for product".into())
                    })?;
                    let rp = right.ok_or_else(|| {
                        Error::InvalidParameter("--right required for product".into())
                    })?;
                    gen_product(&WeightedGraph::load(&lp)?, &WeightedGraph::load(&rp)?)?
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown family '{other}' (lattice, sierpinski, bottleneck, product)"
                    )))
                }
            };
            let json = g.to_json_string()?;
            match out {
                Some(path) => write_atomic(&path, json.as_bytes())?,
                None => println!("{json}"),
            }
            Ok(0)
        }

        Cmd::MeanExit {
            graph,
            center,
            radii,
            lazy,
            out,
        } => {
            let (g, stamp) = load_graph(&graph)?;
            let op = operator(g, lazy)?;
            let radii = parse_u32_list(&radii)?;
            let config = RunConfig::new("mean-exit", seed, out.format)
                .graph(&graph)
                .lazy(lazy)
                .param("center", center.to_string())
                .param("radii", format!("{radii:?}"));
            let mut rows = Vec::new();
            for &r in &radii {
                let p = exit_profile(&op, center, r)?;
                rows.push((r, p.mean, p.mean_sup));
            }
            match out.format {
                Format::Csv => {
                    let mut s = csv_header(&config, Some(&stamp), "R,E,Ebar");
                    for (r, e, ebar) in rows {
                        s.push_str(&format!("{r},{},{}\n", fmt_f64(e), fmt_f64(ebar)));
                    }
                    emit(&out, &s)?;
                }
                Format::Json => {
                    let mut rep = ExperimentReport::new("mean-exit");
                    rep.config = serde_json::to_value(&config)?;
                    rep.graph = Some(stamp);
                    for (r, e, ebar) in rows {
                        rep.grid
                            .push(serde_json::json!({"R": r, "E": e, "Ebar": ebar}));
                    }
                    emit(&out, &report_json(&rep)?)?;
                }
            }
            Ok(0)
        }

        Cmd::ExitDist {
            graph,
            center,
            radius,
            t_max,
            lazy,
            out,
        } => {
            let (g, stamp) = load_graph(&graph)?;
            let op = operator(g.clone(), lazy)?;
            let ball = g.ball(center, radius)?;
            let cdf = exit_distribution(&op, &ball, center, t_max)?;
            let config = RunConfig::new("exit-dist", seed, out.format)
                .graph(&graph)
                .lazy(lazy)
                .param("center", center.to_string())
                .param("radius", radius.to_string())
                .param("t_max", t_max.to_string());
            match out.format {
                Format::Csv => {
                    let mut s = csv_header(&config, Some(&stamp), "t,cdf");
                    for (t, p) in cdf.iter().enumerate() {
                        s.push_str(&format!("{t},{}\n", fmt_f64(*p)));
                    }
                    emit(&out, &s)?;
                }
                Format::Json => {
                    let payload = serde_json::json!({
                        "t": (0..cdf.len()).collect::<Vec<usize>>(),
                        "cdf": cdf,
                        "meta": {"config": serde_json::to_value(&config)?, "graph": serde_json::to_value(&stamp)?},
                    });
                    emit(&out, &serde_json::to_string_pretty(&payload)?)?;
                }
            }
            Ok(0)
        }

        Cmd::IterCounts {
            graph,
            center,
            t,
            radius,
            q,
            rule,
            cap,
            lazy,
            out,
        } => {
            let (g, stamp) = load_graph(&graph)?;
            let op = operator(g.clone(), lazy)?;
            let oracle = SolverOracle::new(&op);
            let a = g.ball(center, radius)?.interior;
            let mut params = IterParams::new(q).rule(match rule {
                Rule::Ceil => RadiusRule::CeilInt,
                Rule::Continuum => RadiusRule::Continuum,
            });
            if let Some(c) = cap {
                params = params.cap(c);
            }
            let k = kappa(&oracle, t, radius, &a, &params)?;
            let n = nu(&oracle, t, radius, &a, &params)?;
            let config = RunConfig::new("iter-counts", seed, out.format)
                .graph(&graph)
                .lazy(lazy)
                .q(q)
                .param("center", center.to_string())
                .param("t", t.to_string())
                .param("R", radius.to_string());
            match out.format {
                Format::Csv => {
                    let mut s = csv_header(&config, Some(&stamp), "t,R,kappa,nu");
                    let nu_str = n.map_or("inf".to_string(), |v| v.to_string());
                    s.push_str(&format!("{},{radius},{k},{nu_str}\n", fmt_f64(t)));
                    emit(&out, &s)?;
                }
                Format::Json => {
                    let mut rep = ExperimentReport::new("iter-counts");
                    rep.config = serde_json::to_value(&config)?;
                    rep.graph = Some(stamp);
                    rep.grid.push(serde_json::json!({
                        "t": t, "R": radius, "kappa": k, "nu": n,
                    }));
                    emit(&out, &report_json(&rep)?)?;
                }
            }
            Ok(0)
        }

        Cmd::Harnack {
            graph,
            center,
            radii,
            out,
        } => {
            let (g, stamp) = load_graph(&graph)?;
            let radii = parse_u32_list(&radii)?;
            let config = RunConfig::new("harnack", seed, out.format)
                .graph(&graph)
                .param("center", center.to_string())
                .param("radii", format!("{radii:?}"));
            let mut rows = Vec::new();
            for &r in &radii {
                rows.push((r, harnack_constant(&g, center, r)?.constant));
            }
            match out.format {
                Format::Csv => {
                    let mut s = csv_header(&config, Some(&stamp), "x,R,H");
                    for (r, h) in rows {
                        s.push_str(&format!("{center},{r},{}\n", fmt_f64(h)));
                    }
                    emit(&out, &s)?;
                }
                Format::Json => {
                    let mut rep = ExperimentReport::new("harnack");
                    rep.config = serde_json::to_value(&config)?;
                    rep.graph = Some(stamp);
                    for (r, h) in rows {
                        rep.grid
                            .push(serde_json::json!({"x": center, "R": r, "H": h}));
                    }
                    emit(&out, &report_json(&rep)?)?;
                }
            }
            Ok(0)
        }

        Cmd::Resistance {
            graph,
            center,
            inner,
            outer,
            lazy,
            out,
        } => {
            let (g, stamp) = load_graph(&graph)?;
            let op = operator(g, lazy)?;
            let inner = parse_u32_list(&inner)?;
            let outer = parse_u32_list(&outer)?;
            let mut grid = Vec::new();
            for &r in &inner {
                for &rr in &outer {
                    if r < rr {
                        grid.push((center, r, rr));
                    }
                }
            }
            if grid.is_empty() {
                return Err(Error::Domain("no (r, R) pairs with r < R".into()));
            }
            let rows = green_resistance_rows(&op, &grid)?;
            let config = RunConfig::new("resistance", seed, out.format)
                .graph(&graph)
                .lazy(lazy)
                .param("center", center.to_string())
                .param("inner", format!("{inner:?}"))
                .param("outer", format!("{outer:?}"));
            match out.format {
                Format::Csv => {
                    let mut s = csv_header(&config, Some(&stamp), "x,r,R,rho,inf_g,sup_g");
                    for row in &rows {
                        s.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            row.center,
                            row.r,
                            row.big_r,
                            fmt_f64(row.rho),
                            fmt_f64(row.inf_green_closed_inner),
                            fmt_f64(row.sup_green_outside_inner)
                        ));
                    }
                    emit(&out, &s)?;
                }
                Format::Json => {
                    let mut rep = ExperimentReport::new("resistance");
                    rep.config = serde_json::to_value(&config)?;
                    rep.graph = Some(stamp);
                    for row in &rows {
                        rep.grid.push(serde_json::to_value(row)?);
                    }
                    emit(&out, &report_json(&rep)?)?;
                }
            }
            Ok(0)
        }

        Cmd::Green {
            graph,
            center,
            radius,
            source,
            lazy,
            out,
        } => {
            let (g, stamp) = load_graph(&graph)?;
            let op = operator(g.clone(), lazy)?;
            let ball = g.ball(center, radius)?;
            let config = RunConfig::new("green", seed, out.format)
                .graph(&graph)
                .lazy(lazy)
                .param("center", center.to_string())
                .param("radius", radius.to_string());
            let mut s = csv_header(&config, Some(&stamp), "x,y,g");
            match source {
                Some(x) => {
                    let col = green_column(&op, &ball, x)?;
                    for &w in &ball.interior {
                        s.push_str(&format!("{x},{w},{}\n", fmt_f64(col[w as usize])));
                    }
                }
                None => {
                    let table = green_table(&op, &ball)?;
                    for (i, &x) in table.interior.iter().enumerate() {
                        for (j, &y) in table.interior.iter().enumerate() {
                            s.push_str(&format!("{x},{y},{}\n", fmt_f64(table.at(i, j))));
                        }
                    }
                }
            }
            emit(&out, &s)?;
            Ok(0)
        }

        Cmd::ChainBound {
            graph,
            from,
            to,
            t,
            l,
            lazy,
            out,
        } => {
            let (g, stamp) = load_graph(&graph)?;
            let op = operator(g, lazy)?;
            let cb = chain_lower_bound(&op, from, to, t, l)?;
            let holds = cb.bound <= cb.exact + 1e-12;
            let config = RunConfig::new("chain-bound", seed, out.format)
                .graph(&graph)
                .lazy(lazy)
                .param("from", from.to_string())
                .param("to", to.to_string())
                .param("t", t.to_string())
                .param("l", l.to_string());
            let mut rep = ExperimentReport::new("chain-bound");
            rep.config = serde_json::to_value(&config)?;
            rep.graph = Some(stamp);
            rep.grid.push(serde_json::to_value(&cb)?);
            rep.constants.insert("bound".into(), cb.bound);
            rep.constants.insert("exact".into(), cb.exact);
            rep.constants.insert("link_inf".into(), cb.link_inf);
            rep.pass = holds;
            emit(&out, &report_json(&rep)?)?;
            Ok(if holds { 0 } else { 3 })
        }

        Cmd::Envelope {
            family,
            q,
            b,
            lazy,
            out,
        } => {
            let preset = envelope_family(&family, lazy)?;
            let cfg = EnvelopeConfig {
                q,
                b,
                ..EnvelopeConfig::default()
            };
            let env = exit_time_envelope(&preset.op, &preset.centers, &preset.radii, &cfg)?;
            let config = RunConfig::new("envelope", seed, out.format)
                .lazy(lazy)
                .q(q)
                .param("family", family.clone())
                .param("b", b.to_string());
            let mut rep = ExperimentReport::new("envelope");
            rep.config = serde_json::to_value(&config)?;
            rep.graph = Some(GraphStamp::of(preset.op.graph())?);
            for p in &env.points {
                rep.grid.push(serde_json::to_value(p)?);
            }
            rep.constants.insert("c_hat".into(), env.c_hat);
            rep.constants.insert("C_hat".into(), env.big_c_hat);
            rep.constants.insert("spread_c".into(), env.spread_c);
            rep.constants.insert("spread_C".into(), env.spread_big_c);
            rep.constants.insert("q".into(), env.q);
            rep.constants.insert("b".into(), env.b as f64);
            rep.constants
                .insert("sup_ratio_max".into(), env.sup_ratio_max);
            for (r, h) in &env.harnack {
                rep.constants.insert(format!("harnack_R{r}"), *h);
            }
            rep.pass = env.pass;
            rep.excluded = env.excluded;
            emit(&out, &report_json(&rep)?)?;
            Ok(if env.pass { 0 } else { 3 })
        }

        Cmd::Profile {
            kind,
            family,
            lazy,
            out,
        } => {
            let config = RunConfig::new("profile", seed, out.format)
                .lazy(lazy)
                .param("kind", kind.clone())
                .param("family", family.clone());
            let mut rep = ExperimentReport::new("profile");
            rep.config = serde_json::to_value(&config)?;
            let (pass, diagnostic) = match kind.as_str() {
                "exit" => {
                    let p = profile_family(&family, lazy)?;
                    let prof = subgaussian_profile(
                        &p.op,
                        &p.fit,
                        &p.centers,
                        &p.radii,
                        &p.xi,
                        p.r2_threshold,
                    )?;
                    rep.graph = Some(GraphStamp::of(p.op.graph())?);
                    for pt in &prof.points {
                        rep.grid.push(serde_json::to_value(pt)?);
                    }
                    rep.constants.insert("beta".into(), prof.beta);
                    rep.constants.insert("slope".into(), prof.slope);
                    rep.constants.insert("intercept".into(), prof.intercept);
                    rep.constants.insert("r2".into(), prof.r2);
                    rep.constants
                        .insert("upper_offset".into(), prof.upper_offset);
                    rep.constants
                        .insert("lower_offset".into(), prof.lower_offset);
                    rep.excluded = prof.excluded;
                    (prof.pass, false)
                }
                "heat" => {
                    let p = heat_profile_family(&family, lazy)?;
                    let prof = heat_profile(&p.op, p.beta, &p.pairs, &p.times, p.r2_threshold)?;
                    rep.graph = Some(GraphStamp::of(p.op.graph())?);
                    for pt in &prof.points {
                        rep.grid.push(serde_json::to_value(pt)?);
                    }
                    rep.constants.insert("beta".into(), prof.beta);
                    rep.constants.insert("slope".into(), prof.slope);
                    rep.constants.insert("r2".into(), prof.r2);
                    rep.excluded = prof.excluded;
                    if p.diagnostic {
                        rep.notes.push(
                            "diagnostic family: fit quality is recorded, not asserted".into(),
                        );
                    }
                    (prof.pass, p.diagnostic)
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown profile kind '{other}' (exit or heat)"
                    )))
                }
            };
            rep.pass = pass || diagnostic;
            emit(&out, &report_json(&rep)?)?;
            Ok(if rep.pass { 0 } else { 3 })
        }

        Cmd::Asymptotics {
            family,
            beta,
            theta,
            levels,
            base,
            lazy,
            out,
        } => {
            let fam = match family.as_str() {
                "lattice-1d" => WindowFamily::Lattice1d,
                "gasket" => WindowFamily::Gasket,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown asymptotics family '{other}' (lattice-1d or gasket)"
                    )))
                }
            };
            let beta_choice = if beta == "auto" {
                None
            } else {
                Some(beta.parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!("--beta must be 'auto' or a number, got '{beta}'"))
                })?)
            };
            let levels = parse_u32_list(&levels)?;
            let cfg = WindowConfig {
                family: fam,
                thetas: parse_f64_list(&theta)?,
                levels,
                alpha: lazy,
                beta: beta_choice,
                base,
            };
            let win = scaling_window(&cfg)?;
            let config = RunConfig::new("asymptotics", seed, out.format)
                .lazy(lazy)
                .param("family", family.clone())
                .param("beta", beta.clone())
                .param("theta", theta.clone())
                .param("base", base.to_string());
            let mut rep = ExperimentReport::new("asymptotics");
            rep.config = serde_json::to_value(&config)?;
            for p in &win.points {
                rep.grid.push(serde_json::to_value(p)?);
            }
            rep.constants.insert("beta".into(), win.beta);
            for s in &win.series {
                rep.constants
                    .insert(format!("stabilized_theta_{}", s.theta), s.stabilized);
                rep.constants
                    .insert(format!("spread_theta_{}", s.theta), s.spread_top3);
                rep.constants
                    .insert(format!("upper_fit_theta_{}", s.theta), s.upper_fit);
                rep.constants
                    .insert(format!("lower_fit_theta_{}", s.theta), s.lower_fit);
            }
            rep.pass = win.pass;
            rep.excluded = win.excluded;
            emit(&out, &report_json(&rep)?)?;
            Ok(if win.pass { 0 } else { 3 })
        }

        Cmd::Verify { graph, lazy, out } => {
            let (g, stamp) = load_graph(&graph)?;
            let suite = verify_suite(g, lazy, seed)?;
            let config = RunConfig::new("verify", seed, out.format)
                .graph(&graph)
                .lazy(lazy);
            let mut rep = ExperimentReport::new("verify");
            rep.config = serde_json::to_value(&config)?;
            rep.graph = Some(stamp);
            for c in &suite.checks {
                rep.grid.push(serde_json::to_value(c)?);
            }
            rep.pass = suite.pass;
            emit(&out, &report_json(&rep)?)?;
            Ok(if suite.pass { 0 } else { 3 })
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    };
    std::process::exit(code);
}
