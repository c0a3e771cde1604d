//! Command-line surface: every module operation behind one binary, with
//! JSON/CSV results, run manifests, and a zeros cache.

use clap::{Parser, Subcommand};
use momentlab::arith::{gcd, sieve_lambda, CharacterGroup};
use momentlab::combin::{enumerate_class, formula_f, verify_formulas, ClassTag};
use momentlab::explicit::{psi_eta_ap, psi_eta_char, psi_eta_zero_side};
use momentlab::manifest::{
    hash_file, load_config, schema_for, validate_schema, Config, RunManifest, ZeroProvenance,
};
use momentlab::model::{estimate_moments, model_mean_exact, sample_H, SampleMode};
use momentlab::moments::{
    distribution_histogram, moment_character_side, moment_residue_side, m_n_spectral,
    omega_search, vsn_empirical, vsn_spectral, DeltaMode, OmegaMode, Trajectory,
};
use momentlab::weights::{Kernel, Weight};
use momentlab::zeros::{count_tolerance, expected_count, load_zeros, ZeroStore};
use momentlab::{Error, Result};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "momentlab", version, about = "moments of primes in progressions")]
struct Cli {
    /// output directory for results and manifests
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// zeros cache root (env MOMENTLAB_CACHE overrides the default)
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// TOML config file; flags override config values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// generic work budget override
    #[arg(long, global = true)]
    budget: Option<f64>,
    /// generic tolerance override
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the Dirichlet characters mod q with conductors and parities
    Chars {
        #[arg(long)]
        q: u64,
    },
    /// Compute (or load from cache) zeros up to height T and certify counts
    Zeros {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 50.0)]
        t: f64,
        #[arg(long)]
        conrey: Option<u64>,
    },
    /// Evaluate ψ_η on the prime side or the zero side
    Psi {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        a: Option<u64>,
        #[arg(long)]
        conrey: Option<u64>,
        #[arg(long, default_value = "expK:1")]
        eta: String,
        #[arg(long, default_value = "prime")]
        mode: String,
        #[arg(long, default_value_t = 200.0)]
        t: f64,
    },
    /// Pointwise moment M_n(x): residue side vs character side
    Moments {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value = "expK:1")]
        eta: String,
    },
    /// Moment of moments V_{s,n}(T): spectral and empirical routes
    Vmoment {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        s: u32,
        #[arg(long, default_value_t = 50.0)]
        t: f64,
        #[arg(long, default_value = "expK:1")]
        eta: String,
        #[arg(long, default_value = "triangle")]
        phi: String,
        #[arg(long, default_value = "both")]
        mode: String,
        #[arg(long, default_value_t = 0.02)]
        grid: f64,
        #[arg(long, default_value_t = 80.0)]
        zero_height: f64,
    },
    /// Involution class counts against the closed formulas
    Combin {
        #[arg(long)]
        s: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "F")]
        class: String,
    },
    /// Monte Carlo sampling of the limiting variable H_n
    Model {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "expK:1")]
        eta: String,
        #[arg(long, default_value = "li")]
        mode: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50.0)]
        zero_height: f64,
        /// also dump per-sample values to samples.csv
        #[arg(long)]
        dump_csv: bool,
    },
    /// Scan for large moment values over a grid of x
    OmegaSearch {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value = "expK:1")]
        eta: String,
        #[arg(long, default_value_t = 1.0e3)]
        x_min: f64,
        #[arg(long, default_value_t = 1.0e7)]
        x_max: f64,
        #[arg(long, default_value_t = 25)]
        points: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        /// m2 (smoothed moment) or raw (unsmoothed ψ deviation)
        #[arg(long, default_value = "m2")]
        mode: String,
        /// log-window beyond x_max for the streaming prime pass
        #[arg(long, default_value_t = 6.0)]
        window: f64,
    },
    /// Distribution of normalized ψ deviations over residue classes
    Histogram {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1.0e7)]
        x: f64,
        #[arg(long, default_value_t = 20)]
        bins: usize,
    },
    /// Run the invariant suite
    Verify {
        #[arg(long, default_value = "quick")]
        level: String,
    },
}

fn main() {
    let code = match run() {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation(_) => 1,
                Error::Budget(_) => 2,
                Error::Io(_) | Error::Format { .. } | Error::Serde(_) => 3,
            }
        }
    };
    std::process::exit(code);
}

struct Ctx {
    out: PathBuf,
    cache: PathBuf,
    manifest: RunManifest,
    started: Instant,
}

impl Ctx {
    fn emit(&mut self, command: &str, name: &str, mut value: Value) -> Result<()> {
        self.manifest.wall_ms = self.started.elapsed().as_millis() as u64;
        self.manifest.finalize();
        self.manifest.append(&self.out)?;
        value
            .as_object_mut()
            .expect("result payloads are objects")
            .insert("manifest".into(), Value::String(self.manifest.id.clone()));
        if let Some(schema_text) = schema_for(command) {
            let schema: Value = serde_json::from_str(schema_text)?;
            validate_schema(&value, &schema)?;
        }
        std::fs::create_dir_all(&self.out)?;
        let text = format!("{}\n", serde_json::to_string_pretty(&value)?);
        std::fs::write(self.out.join(name), &text)?;
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), "{text}"); // ignore closed pipes
        Ok(())
    }

    /// Load cached zero lists for q if certified high enough, else compute
    /// and refresh the cache. Records provenance in the manifest.
    fn obtain_store(&mut self, q: u64, t: f64) -> Result<ZeroStore> {
        let group = CharacterGroup::new(q);
        let mut store = ZeroStore::new();
        let mut all_cached = true;
        for chi in group.non_principal() {
            let path = ZeroStore::cache_path(&self.cache, q, chi.conrey);
            if path.is_file() {
                let loaded = load_zeros(&path)?;
                for &(lq, lc) in loaded.keys().collect::<Vec<_>>() {
                    let list = loaded.get(lq, lc).unwrap().clone();
                    store.insert(lq, lc, list);
                }
            }
        }
        store.recertify(q);
        for chi in group.non_principal() {
            if store.get(q, chi.conrey).map_or(true, |l| l.t_cert < t) {
                all_cached = false;
            }
        }
        if !all_cached {
            // headroom so the reloaded lists re-certify past t (certification
            // stops at the last listed zero)
            store.compute_group(q, t + 5.0)?;
            store.save_cache(&self.cache)?;
        }
        for chi in group.non_principal() {
            let list = store.get(q, chi.conrey).expect("list present");
            let path = ZeroStore::cache_path(&self.cache, q, chi.conrey);
            self.manifest.zero_data.push(ZeroProvenance {
                q,
                conrey: chi.conrey,
                t_cert: list.t_cert,
                provenance: format!("{:?}", list.provenance),
                content_hash: path.is_file().then(|| hash_file(&path)).transpose()?,
            });
        }
        Ok(store)
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => load_config(path)?,
        None => Config::default(),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let cache = cli
        .cache_dir
        .clone()
        .or_else(|| std::env::var("MOMENTLAB_CACHE").ok().map(PathBuf::from))
        .or_else(|| config.cache_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("cache/zeros"));

    let args: Vec<String> = std::env::args().skip(1).collect();
    let command = args.first().cloned().unwrap_or_default();
    let mut ctx = Ctx {
        out,
        cache,
        manifest: RunManifest::new(&command, &args),
        started: Instant::now(),
    };
    std::fs::create_dir_all(&ctx.out)?;
    if let Some(b) = cli.budget.or(config.budget) {
        ctx.manifest.budgets.insert("budget".into(), b);
    }
    if let Some(t) = cli.tol.or(config.tol) {
        ctx.manifest.tolerances.insert("tol".into(), t);
    }

    match cli.cmd {
        Cmd::Chars { q } => {
            let group = CharacterGroup::new(q);
            let characters: Vec<Value> = group
                .characters()
                .iter()
                .map(|c| {
                    json!({
                        "conrey": c.conrey,
                        "conductor": c.conductor,
                        "parity": c.parity,
                        "is_primitive": c.is_primitive(),
                        "primitive_conrey": c.primitive_conrey,
                    })
                })
                .collect();
            let payload = json!({"q": q, "phi": group.phi, "characters": characters});
            ctx.emit("chars", &format!("chars_q{q}.json"), payload)
        }
        Cmd::Zeros { q, t, conrey } => {
            let store = ctx.obtain_store(q, t)?;
            let group = CharacterGroup::new(q);
            let mut lists = Vec::new();
            for chi in group.non_principal() {
                if let Some(c) = conrey {
                    if chi.conrey != c {
                        continue;
                    }
                }
                let list = store.get(q, chi.conrey).expect("computed");
                lists.push(json!({
                    "conrey": chi.conrey,
                    "count": list.count_up_to(t),
                    "t_cert": list.t_cert,
                    "expected_count": expected_count(chi.conductor, t),
                    "tolerance": count_tolerance(chi.conductor, t),
                    "provenance": format!("{:?}", list.provenance),
                    "cache_path": ZeroStore::cache_path(&ctx.cache, q, chi.conrey)
                        .display().to_string(),
                }));
            }
            let payload = json!({"q": q, "t": t, "lists": lists});
            ctx.emit("zeros", &format!("zeros_q{q}.json"), payload)
        }
        Cmd::Psi { x, q, a, conrey, eta, mode, t } => {
            let eta = Weight::parse(&eta)?;
            let group = CharacterGroup::new(q);
            let (value, label) = match mode.as_str() {
                "prime" => {
                    let table = sieve_lambda((x.ceil() as u64).max(100) + 10)?;
                    match (a, conrey) {
                        (Some(a), None) => (psi_eta_ap(x, q, a, &eta, &table)?, json!({"a": a})),
                        (None, Some(c)) => {
                            (psi_eta_char(x, &group, c, &eta, &table)?, json!({"conrey": c}))
                        }
                        _ => {
                            return Err(Error::Validation(
                                "pass exactly one of --a or --conrey".into(),
                            ))
                        }
                    }
                }
                "zero" => {
                    let c = conrey.ok_or_else(|| {
                        Error::Validation("zero side needs --conrey".into())
                    })?;
                    let store = ctx.obtain_store(q, t)?;
                    (psi_eta_zero_side(x, &group, c, &eta, &store, t)?, json!({"conrey": c}))
                }
                other => {
                    return Err(Error::Validation(format!(
                        "mode must be prime or zero, got {other}"
                    )))
                }
            };
            let mut payload = json!({
                "x": x,
                "q": q,
                "side": format!("{:?}", value.side),
                "value": [value.value.re, value.value.im],
                "bound": value.bound,
                "eta": eta.spec_string(),
            });
            for (k, v) in label.as_object().unwrap() {
                payload.as_object_mut().unwrap().insert(k.clone(), v.clone());
            }
            ctx.emit("psi", "psi.json", payload)
        }
        Cmd::Moments { q, n, x, eta } => {
            let eta = Weight::parse(&eta)?;
            let group = CharacterGroup::new(q);
            // table reaching a few e-folds past x keeps the tail negligible
            let limit = ((x * 55.0).ceil() as u64).clamp(100_000, 100_000_000);
            let table = sieve_lambda(limit)?;
            let residue = moment_residue_side(x, &group, n, &eta, &table)?;
            let character = moment_character_side(x, &group, n, &eta, &table)?;
            let denom = residue.abs().max(1e-300);
            let payload = json!({
                "q": q, "n": n, "x": x, "eta": eta.spec_string(),
                "residue_side": residue,
                "character_side": character,
                "rel_diff": (residue - character).abs() / denom,
            });
            ctx.emit("moments", &format!("moments_q{q}_n{n}.json"), payload)
        }
        Cmd::Vmoment { q, n, s, t, eta, phi, mode, grid, zero_height } => {
            let eta = Weight::parse(&eta)?;
            let kernel = Kernel::parse(&phi)?;
            let group = CharacterGroup::new(q);
            let store = ctx.obtain_store(q, zero_height)?;
            let m_n = m_n_spectral(&group, &store, n, &eta, zero_height)?;
            let run_spec = mode == "spectral" || mode == "both";
            let run_emp = mode == "empirical" || mode == "both";
            if !run_spec && !run_emp {
                return Err(Error::Validation(format!(
                    "mode must be spectral, empirical, or both, got {mode}"
                )));
            }
            let spectral = if run_spec {
                Some(vsn_spectral(
                    &group, &store, s, n, &eta, &kernel, t, zero_height, DeltaMode::Smoothed,
                )?)
            } else {
                None
            };
            let empirical = if run_emp {
                Some(vsn_empirical(
                    &group, &store, s, n, &eta, &kernel, t, grid, m_n, zero_height,
                )?)
            } else {
                None
            };
            if run_emp {
                // trajectory CSV for plotting
                let traj = Trajectory::new(&group, &store, &eta, zero_height)?;
                let mut w = csv::Writer::from_path(
                    ctx.out.join(format!("vmoment_q{q}_s{s}_n{n}_trajectory.csv")),
                )
                .map_err(csv_err)?;
                w.write_record(["t", "m_n"]).map_err(csv_err)?;
                let npts = (t / grid.max(1e-6)).ceil() as usize;
                for i in 0..=npts.min(500_000) {
                    let ti = i as f64 * grid;
                    w.write_record([format!("{ti}"), format!("{}", traj.m_n(ti, n))])
                        .map_err(csv_err)?;
                }
                w.flush()?;
            }
            let rep = |r: &momentlab::moments::MomentReport| {
                json!({"value": r.value, "main_term": r.main_term,
                       "residual": r.residual, "budget": r.budget})
            };
            let gap = match (&spectral, &empirical) {
                (Some(a), Some(b)) => json!((a.value - b.value).abs()),
                _ => Value::Null,
            };
            let payload = json!({
                "q": q, "s": s, "n": n, "t": t,
                "eta": eta.spec_string(), "kernel": kernel.spec_string(),
                "zero_height": zero_height, "m_n": m_n,
                "spectral": spectral.as_ref().map(rep),
                "empirical": empirical.as_ref().map(rep),
                "gap": gap,
            });
            ctx.emit("vmoment", &format!("vmoment_q{q}_s{s}_n{n}.json"), payload)
        }
        Cmd::Combin { s, n, class } => {
            let tag: ClassTag = class.parse()?;
            let result = enumerate_class(s, n, tag)?;
            let formula = if tag == ClassTag::F { formula_f(s, n)? } else { None };
            let formula_str = formula.as_ref().map(|f| f.to_string());
            let matches = formula
                .as_ref()
                .map(|f| f.is_integer() && f.to_integer() == result.count.clone().into());
            let payload = json!({
                "s": s, "n": n, "class": format!("{tag:?}"),
                "count": result.count.to_string(),
                "raw_scanned": result.raw_scanned.to_string(),
                "formula_value": formula_str,
                "match": matches,
            });
            ctx.emit("combin", &format!("combin_s{s}_n{n}.json"), payload)
        }
        Cmd::Model { q, n, eta, mode, samples, seed, zero_height, dump_csv } => {
            let eta = Weight::parse(&eta)?;
            let group = CharacterGroup::new(q);
            let store = ctx.obtain_store(q, zero_height)?;
            let mode = match mode.as_str() {
                "li" => SampleMode::Li,
                "time-average" => SampleMode::TimeAverage,
                other => {
                    return Err(Error::Validation(format!(
                        "mode must be li or time-average, got {other}"
                    )))
                }
            };
            ctx.manifest.seed = Some(seed);
            let batch = sample_H(&group, &store, n, &eta, mode, seed, samples, zero_height)?;
            let report = estimate_moments(&batch, &[2, 3], &group, &eta)?;
            let exact = if n == 2 {
                Some(model_mean_exact(&group, &store, 2, &eta, zero_height)?)
            } else {
                None
            };
            if dump_csv {
                let mut w = csv::Writer::from_path(ctx.out.join("samples.csv")).map_err(csv_err)?;
                w.write_record(["index", "value"]).map_err(csv_err)?;
                for (i, v) in batch.values.iter().enumerate() {
                    w.write_record([format!("{i}"), format!("{v}")]).map_err(csv_err)?;
                }
                w.flush()?;
            }
            let payload = json!({
                "q": q, "n": n, "count": report.count, "seed": seed,
                "mode": match mode { SampleMode::Li => "li", SampleMode::TimeAverage => "time-average" },
                "eta": eta.spec_string(), "zero_height": zero_height,
                "mean": report.mean, "mean_std_error": report.mean_std_error,
                "exact_mean": exact, "max_imag": batch.max_imag,
                "centered": report.centered,
            });
            ctx.emit("model", &format!("model_q{q}_n{n}.json"), payload)
        }
        Cmd::OmegaSearch { q, eta, x_min, x_max, points, epsilon, mode, window } => {
            let eta = Weight::parse(&eta)?;
            if points < 2 || x_min >= x_max {
                return Err(Error::Validation("need points >= 2 and x_min < x_max".into()));
            }
            let grid: Vec<f64> = (0..points)
                .map(|i| {
                    (x_min.ln() + i as f64 / (points - 1) as f64 * (x_max / x_min).ln()).exp()
                })
                .collect();
            let omode = match mode.as_str() {
                "m2" => OmegaMode::MomentM { m: 1 },
                "m4" => OmegaMode::MomentM { m: 2 },
                "raw" => OmegaMode::RawPsi { c: 0.5 },
                other => {
                    return Err(Error::Validation(format!(
                        "mode must be m2, m4, or raw, got {other}"
                    )))
                }
            };
            let report = omega_search(q, &eta, &grid, epsilon, omode, window)?;
            let mut w =
                csv::Writer::from_path(ctx.out.join(format!("omega_q{q}.csv"))).map_err(csv_err)?;
            w.write_record(["x", "value", "threshold", "tail_heuristic", "tail_unconditional"])
                .map_err(csv_err)?;
            for h in &report.evaluated {
                w.write_record([
                    format!("{}", h.x),
                    format!("{}", h.value),
                    format!("{}", h.threshold),
                    format!("{}", h.tail_heuristic),
                    format!("{}", h.tail_unconditional),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
            let payload = serde_json::to_value(&report)?;
            ctx.emit("omega-search", &format!("omega_q{q}.json"), payload)
        }
        Cmd::Histogram { q, x, bins } => {
            let report = distribution_histogram(x, q, bins)?;
            let mut w = csv::Writer::from_path(ctx.out.join(format!("histogram_q{q}.csv")))
                .map_err(csv_err)?;
            w.write_record(["lo", "hi", "count", "frequency"]).map_err(csv_err)?;
            for b in &report.bins {
                w.write_record([
                    format!("{}", b.lo),
                    format!("{}", b.hi),
                    format!("{}", b.count),
                    format!("{}", b.frequency),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
            let payload = serde_json::to_value(&report)?;
            ctx.emit("histogram", &format!("histogram_q{q}.json"), payload)
        }
        Cmd::Verify { level } => {
            let full = match level.as_str() {
                "quick" => false,
                "full" => true,
                other => {
                    return Err(Error::Validation(format!(
                        "level must be quick or full, got {other}"
                    )))
                }
            };
            verify(full)
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Validation(format!("csv write failed: {e}"))
}

fn check(name: &str, ok: bool, failures: &mut Vec<String>) {
    if ok {
        println!("PASS {name}");
    } else {
        println!("FAIL {name}");
        failures.push(name.to_string());
    }
}

/// The invariant suite behind `verify`.
fn verify(full: bool) -> Result<()> {
    let mut failures = Vec::new();

    let qmax = if full { 50 } else { 20 };
    let mut orth = true;
    for q in 3..=qmax {
        orth &= CharacterGroup::new(q).verify_orthogonality(1e-10).is_ok();
    }
    check(&format!("orthogonality q<={qmax}"), orth, &mut failures);

    let mut cond = true;
    for q in 3..=(if full { 200 } else { 50 }) {
        let (mean, _) = momentlab::zeros::conductor_moments(q)?;
        cond &= mean.abs() < 1e-12;
    }
    check("conductor first-moment identity", cond, &mut failures);

    let mut delta_ok = true;
    for s in 1..=4usize {
        let mut idx = vec![0i32; s];
        'grid: loop {
            let sigma: Vec<momentlab::moments::Sigma> = idx
                .iter()
                .map(|&i| momentlab::moments::Sigma::new((i - 2) as f64, i == 2))
                .collect();
            let expect = i64::from(
                idx.iter().map(|&i| i - 2).sum::<i32>() == 0 && idx.iter().all(|&i| i != 2),
            );
            delta_ok &= momentlab::moments::delta_s(&sigma) == expect;
            let mut k = s;
            loop {
                if k == 0 {
                    break 'grid;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < 5 {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
    check("Delta_s indicator (s <= 4)", delta_ok, &mut failures);

    let report = verify_formulas(if full { 12 } else { 8 })?;
    check("involution class formulas", report.all_match, &mut failures);

    let eta = Weight::parse("expK:1")?;
    let h = eta.spectral()?;
    let b3 = momentlab::weights::beta_q(&h, 3)?;
    check("beta_3 reference value", (b3 + 3.285495437309503).abs() < 1e-8, &mut failures);

    if full {
        let mut store = ZeroStore::new();
        store.compute_group(3, 60.0)?;
        let group = CharacterGroup::new(3);
        let chi = group.non_principal().next().expect("q=3 has one");
        let list = store.get(3, chi.conrey).expect("computed");
        check("zero count certificate q=3", list.t_cert >= 60.0, &mut failures);

        let table = sieve_lambda(1_000_000)?;
        let r = moment_residue_side(1e4, &group, 2, &eta, &table)?;
        let c = moment_character_side(1e4, &group, 2, &eta, &table)?;
        check(
            "moment identity q=3 n=2",
            (r - c).abs() <= 1e-9 * r.abs().max(1e-12),
            &mut failures,
        );

        let m2 = m_n_spectral(&group, &store, 2, &eta, 60.0)?;
        let exact = model_mean_exact(&group, &store, 2, &eta, 60.0)?;
        check("model mean equals spectral m_2", (m2 - exact).abs() < 1e-12, &mut failures);
    }

    // character value sanity on a composite modulus
    let g12 = CharacterGroup::new(12);
    let mut conductors: Vec<u64> = g12.characters().iter().map(|c| c.conductor).collect();
    conductors.sort_unstable();
    check("q=12 conductors {1,3,4,12}", conductors == vec![1, 3, 4, 12], &mut failures);

    let principal_units: bool = (1..12u64)
        .filter(|&a| gcd(a, 12) == 1)
        .all(|a| (g12.principal().value(a).re - 1.0).abs() < 1e-15);
    check("principal character is 1 on units", principal_units, &mut failures);

    if failures.is_empty() {
        println!("verify: all checks passed");
        Ok(())
    } else {
        Err(Error::Validation(format!("{} check(s) failed: {failures:?}", failures.len())))
    }
}
