//! Command-line surface: `run`, `compare`, `derive`, `check`.
//!
//! `run` integrates one formulation and writes `<out>.csv` plus a `<out>.json`
//! manifest; `compare` integrates several formulations from the same initial
//! state and writes a divergence report; `derive` dumps the assembled frame
//! matrices and equation rows at a state; `check` executes the invariant
//! suites. Exit codes: 0 clean, 1 hard error, 2 run finished with recorded
//! events, 3 check-suite failure.

use std::collections::BTreeMap;

use crate::checks::{run_suite, suite_names, SuiteConfig};
use crate::dynamics::{
    assembled_system, determinacy_matrix, solve_accel, Formulation, SolverConfig,
};
use crate::expr::{emit_model_file, parse_model_file};
use crate::integrate::{integrate, monitor_first_integrals, project_velocities, IntegratorConfig};
use crate::model::{DynState, MechModel};
use crate::models::{builtin_names, get_builtin, BuiltinModel};
use crate::report::{content_hash, flat_json, fmt_f64, trajectory_csv, JsonValue, RunManifest};

pub fn run_cli(args: &[String]) -> i32 {
    let Some((cmd, rest)) = args.split_first() else {
        eprintln!("{}", USAGE);
        return 1;
    };
    let flags = match Flags::parse(rest) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {}", e);
            return 1;
        }
    };
    let result = match cmd.as_str() {
        "run" => cmd_run(&flags),
        "compare" => cmd_compare(&flags),
        "derive" => cmd_derive(&flags),
        "check" => cmd_check(&flags),
        "help" | "--help" | "-h" => {
            println!("{}", USAGE);
            return 0;
        }
        other => Err(format!("unknown subcommand `{}`", other)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            1
        }
    }
}

const USAGE: &str = "transposit: constrained-Lagrangian dynamics across four formulations

USAGE:
    transposit run     --model <name|path> --formulation <id> [--t-end <r>] [--dt <r>]
                       [--init \"x=..,dx=..\"] [--set k=v]... [--project on|off] [--out <path>]
    transposit compare --model <name|path> --formulation <id>,<id>[,..] [run options]
    transposit derive  --model <name|path> [--formulation <id>] [--init ...] [--set k=v]...
                       [--json] [--emit-model]
    transposit check   [--suite <id>]... [--seed <n>] [--states <n>]

Formulations: dalembert, vakonomic, mvm-t1, mvm-t2, voronets, chaplygin
Suites:       autodiff, frames, equivalence, transposition, oracles, integrals
Builtins:     free_particle, holonomic_circle_a, holonomic_circle_b, skate,
              skate_vakonomic, appell_hamel_t1, appell_hamel_t2, gantmacher,
              rolling_drum";

struct Flags {
    values: BTreeMap<String, Vec<String>>,
}

impl Flags {
    fn parse(args: &[String]) -> Result<Flags, String> {
        let mut values: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let boolean = ["--json", "--emit-model"];
        let mut i = 0;
        while i < args.len() {
            let a = &args[i];
            if !a.starts_with("--") {
                return Err(format!("unexpected argument `{}`", a));
            }
            let key = a.trim_start_matches("--").to_string();
            if boolean.contains(&a.as_str()) {
                values.entry(key).or_default().push("true".to_string());
                i += 1;
            } else {
                let v = args
                    .get(i + 1)
                    .ok_or_else(|| format!("flag `{}` needs a value", a))?;
                values.entry(key).or_default().push(v.clone());
                i += 2;
            }
        }
        Ok(Flags { values })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).and_then(|v| v.last()).map(|s| s.as_str())
    }

    fn get_all(&self, key: &str) -> Vec<&str> {
        self.values.get(key).map(|v| v.iter().map(|s| s.as_str()).collect()).unwrap_or_default()
    }

    fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn get_f64(&self, key: &str, default: f64) -> Result<f64, String> {
        match self.get(key) {
            Some(v) => v.parse().map_err(|_| format!("--{} expects a number, got `{}`", key, v)),
            None => Ok(default),
        }
    }

    fn get_u64(&self, key: &str, default: u64) -> Result<u64, String> {
        match self.get(key) {
            Some(v) => v.parse().map_err(|_| format!("--{} expects an integer, got `{}`", key, v)),
            None => Ok(default),
        }
    }
}

struct LoadedModel {
    model: MechModel,
    builtin: Option<BuiltinModel>,
    source: String,
    hash: String,
}

fn load_model(flags: &Flags) -> Result<LoadedModel, String> {
    let name = flags.get("model").ok_or("--model is required")?;
    let mut overrides: BTreeMap<String, f64> = BTreeMap::new();
    for kv in flags.get_all("set") {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set needs k=v, got `{}`", kv))?;
        let v: f64 = v.trim().parse().map_err(|_| format!("--set {}: `{}` is not a number", k, v))?;
        overrides.insert(k.trim().to_string(), v);
    }
    let (spec, builtin, source, canonical) = if builtin_names().contains(&name) {
        let b = get_builtin(name).map_err(|e| e.to_string())?;
        let spec = match flags.get("aux") {
            Some(id) => b
                .spec_with_aux(id)
                .ok_or_else(|| format!("model `{}` has no aux set `{}`", name, id))?,
            None => b.spec.clone(),
        };
        let canonical = emit_model_file(&spec);
        (spec, Some(b), "builtin".to_string(), canonical)
    } else {
        let text = std::fs::read_to_string(name)
            .map_err(|e| format!("cannot read model file `{}`: {}", name, e))?;
        let spec = parse_model_file(&text).map_err(|e| format!("{}: {}", name, e))?;
        (spec, None, name.to_string(), text)
    };
    let hash = content_hash(canonical.as_bytes());
    let model = MechModel::compile(&spec).with_params(&overrides);
    Ok(LoadedModel { model, builtin, source, hash })
}

fn parse_assignments(text: &str) -> Result<BTreeMap<String, f64>, String> {
    let mut out = BTreeMap::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, v) = part.split_once('=').ok_or_else(|| format!("`{}` is not name=value", part))?;
        let v: f64 =
            v.trim().parse().map_err(|_| format!("`{}` is not a number in `{}`", v, part))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

/// Initial state: builtin reference (or zeros), overridden by `--init`, with
/// the velocities projected onto the constraint manifold.
fn build_init(
    loaded: &LoadedModel,
    flags: &Flags,
    wants_lambda: bool,
) -> Result<DynState, String> {
    let model = &loaded.model;
    let mut state = match &loaded.builtin {
        Some(b) => b.reference_state(model),
        None => DynState::new(0.0, vec![0.0; model.n()], vec![0.0; model.n()]),
    };
    if let Some(init) = flags.get("init") {
        let assign = parse_assignments(init)?;
        for (k, v) in &assign {
            if k == "t" {
                state.t = *v;
            } else if let Some(i) = model.coords.iter().position(|c| c == k) {
                state.x[i] = *v;
            } else if let Some(stripped) = k.strip_prefix('d') {
                if let Some(i) = model.coords.iter().position(|c| c == stripped) {
                    state.v[i] = *v;
                } else {
                    return Err(format!("`{}` names no coordinate or velocity", k));
                }
            } else if let Some(idx) = k.strip_prefix("lambda_").and_then(|s| s.parse::<usize>().ok())
            {
                if idx == 0 || idx > model.m() {
                    return Err(format!("lambda index {} out of range", idx));
                }
                if state.lambda.len() != model.m() {
                    state.lambda = vec![0.0; model.m()];
                }
                state.lambda[idx - 1] = *v;
            } else {
                return Err(format!("`{}` names no coordinate or velocity", k));
            }
        }
    }
    if wants_lambda && state.lambda.len() != model.m() {
        let seed = model.param("lambda0").unwrap_or(0.0);
        state.lambda = vec![seed; model.m()];
    }
    if !wants_lambda {
        state.lambda.clear();
    }
    project_velocities(model, &state, 1e-12)
        .map_err(|e| format!("cannot project the initial velocities: {}", e))
}

fn integrator_config(flags: &Flags, model: &MechModel, builtin: Option<&str>) -> Result<IntegratorConfig, String> {
    let dt = flags.get_f64("dt", 1e-3)?;
    let t_end = flags.get_f64("t-end", 5.0)?;
    if dt <= 0.0 {
        return Err("--dt must be positive".to_string());
    }
    let mut cfg = IntegratorConfig::new(dt, t_end);
    match flags.get("project") {
        Some("on") | None => cfg.project = true,
        Some("off") => cfg.project = false,
        Some(other) => return Err(format!("--project expects on|off, got `{}`", other)),
    }
    cfg.solver.singular_base = flags.get_f64("singular-threshold", cfg.solver.singular_base)?;
    if let Some(name) = builtin {
        cfg.monitors = crate::checks::monitors_for(model, name);
    }
    Ok(cfg)
}

fn out_stem(flags: &Flags, default: String) -> String {
    let stem = flags.get("out").map(|s| s.to_string()).unwrap_or(default);
    stem.trim_end_matches(".csv").trim_end_matches(".json").to_string()
}

fn write_file(path: &str, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("cannot write `{}`: {}", path, e))
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

fn cmd_run(flags: &Flags) -> Result<i32, String> {
    let loaded = load_model(flags)?;
    let formulation = Formulation::from_id(flags.get("formulation").unwrap_or("dalembert"))
        .ok_or("unknown formulation")?;
    let init = build_init(&loaded, flags, formulation.carries_lambda())?;
    let cfg = integrator_config(flags, &loaded.model, loaded.builtin.as_ref().map(|b| b.name))?;
    let traj = integrate(&loaded.model, formulation, &init, &cfg).map_err(|e| e.to_string())?;
    let monitor_names: Vec<String> = cfg.monitors.iter().map(|(n, _)| n.clone()).collect();
    let drifts = monitor_first_integrals(&traj, &monitor_names);
    let stem = out_stem(flags, format!("run_{}_{}", loaded.model.spec.name, formulation.id()));
    let csv = trajectory_csv(&loaded.model, &traj, &monitor_names);
    write_file(&format!("{}.csv", stem), &csv)?;
    let manifest = RunManifest {
        model: &loaded.model,
        model_source: loaded.source.clone(),
        model_hash: loaded.hash.clone(),
        formulation,
        cfg: &cfg,
        init: &init,
        params: loaded.model.params(),
        traj: &traj,
        monitor_drifts: drifts,
    };
    write_file(&format!("{}.json", stem), &manifest.to_json())?;
    println!(
        "wrote {}.csv and {}.json ({} samples, {} events{})",
        stem,
        stem,
        traj.samples.len(),
        traj.events.len(),
        if traj.truncated { ", truncated" } else { "" }
    );
    Ok(if traj.events.is_empty() { 0 } else { 2 })
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

fn cmd_compare(flags: &Flags) -> Result<i32, String> {
    let loaded = load_model(flags)?;
    let mut formulations: Vec<Formulation> = Vec::new();
    for spec in flags.get_all("formulation") {
        for id in spec.split(',') {
            formulations
                .push(Formulation::from_id(id.trim()).ok_or_else(|| format!("unknown formulation `{}`", id))?);
        }
    }
    if formulations.len() < 2 {
        return Err("compare needs at least two formulations".to_string());
    }
    let cfg = integrator_config(flags, &loaded.model, loaded.builtin.as_ref().map(|b| b.name))?;
    let mut trajectories = Vec::new();
    for &f in &formulations {
        let init = build_init(&loaded, flags, f.carries_lambda())?;
        let traj = integrate(&loaded.model, f, &init, &cfg)
            .map_err(|e| format!("{}: {}", f.id(), e))?;
        trajectories.push(traj);
    }
    let mut entries: Vec<(String, JsonValue)> = vec![
        ("model.name".into(), loaded.model.spec.name.as_str().into()),
        ("model.hash".into(), loaded.hash.as_str().into()),
        ("config.dt".into(), cfg.dt.into()),
        ("config.t_end".into(), cfg.t_end.into()),
    ];
    for (i, f) in formulations.iter().enumerate() {
        entries.push((format!("formulations.{}", i), f.id().into()));
    }
    let mut diverged = false;
    let mut printed = Vec::new();
    for i in 0..formulations.len() {
        for j in i + 1..formulations.len() {
            let (fa, fb) = (formulations[i], formulations[j]);
            let (ta, tb) = (&trajectories[i], &trajectories[j]);
            let common = ta.samples.len().min(tb.samples.len());
            let mut pos = 0.0_f64;
            let mut vel = 0.0_f64;
            let mut mult = 0.0_f64;
            let mut pos_at = 0.0_f64;
            for k in 0..common {
                let (sa, sb) = (&ta.samples[k], &tb.samples[k]);
                let p = sa
                    .x
                    .iter()
                    .zip(&sb.x)
                    .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
                if p > pos {
                    pos = p;
                    pos_at = sa.t;
                }
                vel = sa.v.iter().zip(&sb.v).fold(vel, |acc, (a, b)| acc.max((a - b).abs()));
                mult = sa
                    .mult
                    .iter()
                    .zip(&sb.mult)
                    .fold(mult, |acc, (a, b)| acc.max((a - b).abs()));
            }
            let key = format!("gap.{}.{}", fa.id(), fb.id());
            entries.push((format!("{}.position_max", key), pos.into()));
            entries.push((format!("{}.position_argmax_t", key), pos_at.into()));
            entries.push((format!("{}.velocity_max", key), vel.into()));
            entries.push((format!("{}.multiplier_max", key), mult.into()));
            if pos > 0.1 {
                diverged = true;
            }
            printed.push(format!(
                "{} vs {}: max position gap {:.3e} (at t = {:.3}), max multiplier gap {:.3e}",
                fa.id(),
                fb.id(),
                pos,
                pos_at,
                mult
            ));
        }
    }
    entries.push(("diverged".into(), JsonValue::Bool(diverged)));
    let report = flat_json(&entries);
    if flags.get("out").is_some() {
        let stem = out_stem(flags, String::new());
        write_file(&format!("{}.json", stem), &report)?;
        println!("wrote {}.json", stem);
    } else {
        print!("{}", report);
    }
    for line in printed {
        println!("{}", line);
    }
    println!("diverged: {}", diverged);
    Ok(0)
}

// ---------------------------------------------------------------------------
// derive
// ---------------------------------------------------------------------------

fn mat_entries(prefix: &str, m: &crate::linalg::Mat, entries: &mut Vec<(String, JsonValue)>) {
    for i in 0..m.rows {
        for j in 0..m.cols {
            entries.push((format!("{}.{}.{}", prefix, i, j), m[(i, j)].into()));
        }
    }
}

fn cmd_derive(flags: &Flags) -> Result<i32, String> {
    let loaded = load_model(flags)?;
    if flags.has("emit-model") {
        print!("{}", emit_model_file(&loaded.model.spec));
        return Ok(0);
    }
    let formulation = Formulation::from_id(flags.get("formulation").unwrap_or("mvm-t1"))
        .ok_or("unknown formulation")?;
    let init = build_init(&loaded, flags, formulation.carries_lambda())?;
    let model = &loaded.model;
    let solver = SolverConfig::default();
    let sol = solve_accel(model, formulation, &init, &solver).map_err(|e| e.to_string())?;
    let json = flags.has("json");
    let mut entries: Vec<(String, JsonValue)> = Vec::new();
    entries.push(("model.name".into(), model.spec.name.as_str().into()));
    entries.push(("formulation".into(), formulation.id().into()));
    if !json {
        println!("model: {}   formulation: {}", model.spec.name, formulation.id());
        println!(
            "state (projected): t = {}, x = {:?}, v = {:?}",
            init.t, init.x, init.v
        );
    }
    for (i, c) in model.coords.iter().enumerate() {
        entries.push((format!("state.x.{}", c), init.x[i].into()));
        entries.push((format!("state.v.d{}", c), init.v[i].into()));
        entries.push((format!("accel.dd{}", c), sol.accel[i].into()));
    }
    for (i, r) in sol.mult_rate.iter().enumerate() {
        entries.push((format!("mult_rate.{}", i + 1), (*r).into()));
    }
    if let Some(frames) = &sol.frames {
        let omega = frames.omega_at(&sol.accel);
        if !json {
            println!("detW = {}   cond(W) = {:.3e}", fmt_f64(frames.det_w), frames.cond_w);
            println!("W =\n{}", frames.w);
            println!("Omega (split remainder part) =\n{}", frames.omega_rem);
            println!("Omega at solved accel =\n{}", omega);
            if let Some(a) = &frames.a {
                println!("A =\n{}", a);
            }
        }
        entries.push(("detW".into(), frames.det_w.into()));
        entries.push(("condW".into(), frames.cond_w.into()));
        mat_entries("W", &frames.w, &mut entries);
        mat_entries("Omega_rem", &frames.omega_rem, &mut entries);
        mat_entries("Omega", &omega, &mut entries);
        if let Some(a) = &frames.a {
            mat_entries("A", a, &mut entries);
        }
    }
    if formulation == Formulation::MvmT1 {
        let (g, det_g) = determinacy_matrix(model, &init, &solver).map_err(|e| e.to_string())?;
        if !json {
            println!("detG = {}", fmt_f64(det_g));
            println!("G =\n{}", g);
        }
        entries.push(("detG".into(), det_g.into()));
        mat_entries("G", &g, &mut entries);
        if let Some((f1, f2)) = &sol.forces {
            if !json {
                println!("F1 = {:?}", f1);
                println!("F2 = {:?}", f2);
            }
            for (i, v) in f1.iter().enumerate() {
                entries.push((format!("F1.{}", i), (*v).into()));
            }
            for (i, v) in f2.iter().enumerate() {
                entries.push((format!("F2.{}", i), (*v).into()));
            }
        }
    }
    match assembled_system(model, formulation, &init, &solver) {
        Ok((mat, rhs)) => {
            if !json {
                println!("assembled system rows [matrix | rhs]:");
                for i in 0..mat.rows {
                    let row: Vec<String> =
                        (0..mat.cols).map(|j| format!("{:>12.5e}", mat[(i, j)])).collect();
                    println!("[{} | {:>12.5e}]", row.join(", "), rhs[i]);
                }
            }
            mat_entries("system.matrix", &mat, &mut entries);
            for (i, v) in rhs.iter().enumerate() {
                entries.push((format!("system.rhs.{}", i), (*v).into()));
            }
        }
        Err(_) => {
            if !json {
                println!("(coordinate-block system; no single assembled matrix for this formulation)");
            }
        }
    }
    if !json {
        println!("accel = {:?}", sol.accel);
        println!("mult_rate = {:?}", sol.mult_rate);
        println!("residual = {:.3e}", sol.residual);
    } else {
        entries.push(("residual".into(), sol.residual.into()));
        print!("{}", flat_json(&entries));
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

fn cmd_check(flags: &Flags) -> Result<i32, String> {
    let seed = flags.get_u64("seed", 7)?;
    let states = flags.get_u64("states", 50)? as usize;
    let cfg = SuiteConfig { seed, states };
    let mut requested: Vec<String> = Vec::new();
    for spec in flags.get_all("suite") {
        for id in spec.split(',') {
            requested.push(id.trim().to_string());
        }
    }
    if requested.is_empty() {
        requested = suite_names().iter().map(|s| s.to_string()).collect();
    }
    let mut all_pass = true;
    println!("{:<14} {:<34} {:<6} detail", "suite", "check", "pass");
    for id in &requested {
        let results = run_suite(id, &cfg).ok_or_else(|| format!("unknown suite `{}`", id))?;
        for r in results {
            if !r.pass {
                all_pass = false;
            }
            println!(
                "{:<14} {:<34} {:<6} {}",
                r.suite,
                r.name,
                if r.pass { "ok" } else { "FAIL" },
                r.detail
            );
        }
    }
    Ok(if all_pass { 0 } else { 3 })
}
