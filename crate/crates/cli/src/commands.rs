use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use leocell::dataset::InputRanges;
use leocell::kv::fmt_num;
use leocell::metrics::PairedSeries;
use leocell::regress::fit_ols;
use leocell::simulate::{format_settings, parse_setting, REFERENCE_SETTINGS};
use leocell::{
    AnyModel, BlandAltmanMode, CycleLife, CyclingDataset, MlpModel, NetworkTopology,
    NormalizationSpec, Target,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::manifest::{write_file, Manifest};
use crate::{
    Cli, CliError, CliResult, Command, CycleLifeArgs, EvaluateArgs, FitOlsArgs, GridArgs,
    PredictArgs, SimulateArgs, TrainArgs,
};

pub fn run(cli: &Cli) -> CliResult<()> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.set_seed(seed);
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", out.display())))?;
    let ctx = Ctx {
        out,
        quiet: cli.quiet,
    };
    match &cli.command {
        Command::Simulate(a) => simulate(&ctx, config, a),
        Command::FitOls(a) => fit(&ctx, config, a),
        Command::Train(a) => train(&ctx, config, a),
        Command::Predict(a) => predict(&ctx, config, a),
        Command::Evaluate(a) => evaluate(&ctx, config, a),
        Command::CycleLife(a) => cycle_life(&ctx, config, a),
    }
}

struct Ctx {
    out: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn say(&self, text: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", text.as_ref());
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn parse_target(text: &str) -> CliResult<Target> {
    text.parse()
        .map_err(|_| CliError::Usage(format!("unknown target `{text}` (expected rc or eodv)")))
}

fn apply_grid(config: &mut RunConfig, grid: &GridArgs) -> CliResult<()> {
    let plan = &mut config.plan;
    if grid.default_grid {
        plan.settings = REFERENCE_SETTINGS.to_vec();
    }
    if !grid.settings.is_empty() {
        plan.settings = grid
            .settings
            .iter()
            .map(|s| parse_setting(s))
            .collect::<Result<_, _>>()?;
    }
    if let Some(v) = grid.cycle_start {
        plan.cycle_start = v;
    }
    if let Some(v) = grid.cycle_end {
        plan.cycle_end = v;
    }
    if let Some(v) = grid.cycle_step {
        plan.cycle_step = v;
    }
    plan.validate()?;
    Ok(())
}

fn simulate(ctx: &Ctx, mut config: RunConfig, a: &SimulateArgs) -> CliResult<()> {
    apply_grid(&mut config, &a.grid)?;
    if let Some(sd) = a.noise {
        config.plan.noise_sd_rc = sd;
        config.plan.noise_sd_eodv = sd;
    }
    if let Some(sd) = a.noise_rc {
        config.plan.noise_sd_rc = sd;
    }
    if let Some(sd) = a.noise_eodv {
        config.plan.noise_sd_eodv = sd;
    }
    let dataset = config.plan.generate(&config.params)?;
    let path = ctx.path("dataset.csv");
    dataset.write_csv(&path)?;
    ctx.say(format!(
        "{} records over settings {} -> {}",
        dataset.len(),
        format_settings(&config.plan.settings),
        path.display()
    ));
    let mut m = Manifest::new("simulate", &config);
    m.outputs.push(path);
    m.write(&ctx.out)
}

fn fit(ctx: &Ctx, config: RunConfig, a: &FitOlsArgs) -> CliResult<()> {
    let target = parse_target(&a.target)?;
    let dataset = CyclingDataset::read_csv(&a.data)?;
    let model = fit_ols(&dataset, target)?;
    ctx.say(model.to_string());
    if let Some(stats) = &model.residual_stats {
        ctx.say(format!(
            "n = {}, RMSE = {:.6}, max |residual| = {:.6}",
            stats.n, stats.rmse, stats.max_abs_residual
        ));
    }
    if let Some(ranges) = InputRanges::of(&dataset) {
        match model.effect_ranking(&ranges) {
            Ok(ranking) => {
                ctx.say("effect over observed range (largest first):");
                for (var, effect) in ranking {
                    ctx.say(format!("  {:<14} {:.4} {}", var.name(), effect, target.units()));
                }
            }
            Err(e) => eprintln!("warning: no effect ranking: {e}"),
        }
    }
    let path = ctx.path(&format!("{target}_linear.model"));
    write_file(&path, &model.to_kv_string())?;
    let mut m = Manifest::new("fit-ols", &config);
    m.inputs.push(a.data.clone());
    m.outputs.push(path);
    m.write(&ctx.out)
}

fn train(ctx: &Ctx, mut config: RunConfig, a: &TrainArgs) -> CliResult<()> {
    let target = parse_target(&a.target)?;
    if let Some(h) = &a.hidden {
        config.hidden = h.clone();
    }
    if let Some(v) = a.learning_rate {
        config.training.learning_rate = v;
    }
    if let Some(v) = a.momentum {
        config.training.momentum = v;
    }
    if let Some(v) = a.error_target {
        config.error_target_pct = Some(v);
    }
    if let Some(v) = a.max_epochs {
        config.training.max_epochs = v;
    }
    if let Some(v) = a.eval_every {
        config.training.eval_every = v;
    }
    if a.shuffle {
        config.training.shuffle_each_epoch = true;
    }
    if let Some(v) = a.output_low {
        config.output_low = v;
    }
    if let Some(v) = a.output_high {
        config.output_high = v;
    }
    let training = config.training_for(target);
    config.training = training.clone();
    config.error_target_pct = Some(training.error_target_pct);

    let full = CyclingDataset::read_csv(&a.data)?;
    // Normalization always spans the whole file so that a model trained on
    // the even half can still be evaluated on the odd half.
    let train_set = if a.even_only {
        full.split_even_odd().0
    } else {
        full.clone()
    };

    let start = match &a.resume {
        Some(path) => {
            let model = MlpModel::load(path)?;
            if model.target != target {
                return Err(CliError::Core(leocell::Error::Mismatch(format!(
                    "{} predicts {} but --target is {target}",
                    path.display(),
                    model.target
                ))));
            }
            model
        }
        None => {
            let topology = NetworkTopology::with_hidden(&config.hidden)?;
            let norm = NormalizationSpec::fit(&full, target, config.output_low, config.output_high)?;
            MlpModel::init(topology, config.seed(), norm, target)?
        }
    };
    let (model, report) = start.train(&train_set, &training)?;

    let model_path = ctx.path(&format!("{target}_mlp.model"));
    model.save(&model_path)?;
    let report_path = ctx.path("train_report.json");
    write_file(
        &report_path,
        &serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Usage(format!("cannot serialize report: {e}")))?,
    )?;
    let mut history = String::from("epoch,train_mape_pct\n");
    for (epoch, mape) in &report.error_history {
        let _ = writeln!(history, "{epoch},{}", fmt_num(*mape));
    }
    let history_path = ctx.path("error_history.csv");
    write_file(&history_path, &history)?;

    ctx.say(format!(
        "{}: {} epochs, training MAPE {:.4}% (target {}%) -> {}",
        if report.converged { "converged" } else { "stopped at epoch budget" },
        report.epochs_run,
        report.final_train_mape_pct,
        training.error_target_pct,
        model_path.display()
    ));
    let mut m = Manifest::new("train", &config);
    m.inputs.push(a.data.clone());
    m.inputs.extend(a.resume.clone());
    m.outputs.extend([model_path, report_path, history_path]);
    m.write(&ctx.out)
}

/// Refuses (or, when allowed, warns about) a query outside the fitted range.
fn check_range(model: &AnyModel, t: f64, dod: f64, c: f64, allow: bool) -> CliResult<()> {
    let mut problems = model.out_of_range(t, dod, c);
    if problems.is_empty() {
        return Ok(());
    }
    if allow {
        for p in &problems {
            eprintln!("warning: extrapolating: {p}");
        }
        Ok(())
    } else {
        Err(CliError::Core(problems.remove(0)))
    }
}

fn predict(ctx: &Ctx, mut config: RunConfig, a: &PredictArgs) -> CliResult<()> {
    let model = AnyModel::load(&a.model)?;
    let target = model.target();
    let column = target.column();
    let mut m_inputs = vec![a.model.clone()];
    let mut outputs = Vec::new();
    match (&a.at, a.sweep) {
        (Some(at), false) => {
            let &[t, dod, c] = at.as_slice() else {
                return Err(CliError::Usage(format!(
                    "--at needs three values T,DOD,C, got {}",
                    at.len()
                )));
            };
            check_range(&model, t, dod, c, a.allow_extrapolation)?;
            let y = model.predict(t, dod, c);
            let path = ctx.path("prediction.csv");
            write_file(
                &path,
                &format!(
                    "temperature_c,dod_pct,cycle,{column}\n{},{},{},{}\n",
                    fmt_num(t),
                    fmt_num(dod),
                    fmt_num(c),
                    fmt_num(y)
                ),
            )?;
            outputs.push(path);
            ctx.say(format!("{target} = {y:.6} {} at T={t}, DOD={dod}, C={c}", target.units()));
        }
        (None, true) => {
            apply_grid(&mut config, &a.grid)?;
            let mut long = format!("temperature_c,dod_pct,cycle,{column}\n");
            for &(t, dod) in &config.plan.settings {
                let mut one = format!("cycle,{column}\n");
                for c in config.plan.cycles() {
                    let c = c as f64;
                    check_range(&model, t, dod, c, a.allow_extrapolation)?;
                    let y = fmt_num(model.predict(t, dod, c));
                    let _ = writeln!(long, "{},{},{},{y}", fmt_num(t), fmt_num(dod), fmt_num(c));
                    let _ = writeln!(one, "{},{y}", fmt_num(c));
                }
                let path = ctx.path(&format!("sweep_T{}_DOD{}.csv", fmt_num(t), fmt_num(dod)));
                write_file(&path, &one)?;
                outputs.push(path);
            }
            let path = ctx.path("sweep_long.csv");
            write_file(&path, &long)?;
            ctx.say(format!(
                "{} settings x {} cycles -> {}",
                config.plan.settings.len(),
                config.plan.cycles().count(),
                path.display()
            ));
            outputs.push(path);
        }
        _ => {
            return Err(CliError::Usage(
                "predict needs exactly one of --at T,DOD,C or --sweep".into(),
            ))
        }
    }
    let mut m = Manifest::new("predict", &config);
    m.inputs.append(&mut m_inputs);
    m.outputs = outputs;
    m.write(&ctx.out)
}

fn evaluate(ctx: &Ctx, config: RunConfig, a: &EvaluateArgs) -> CliResult<()> {
    let model = AnyModel::load(&a.model)?;
    let mode: BlandAltmanMode = a
        .ba_mode
        .parse()
        .map_err(|_| CliError::Usage(format!("unknown --ba-mode `{}`", a.ba_mode)))?;
    let dataset = CyclingDataset::read_csv(&a.data)?;
    let dataset = match a.split.as_deref() {
        None => dataset,
        Some("even-odd") => dataset.split_even_odd().1,
        Some(other) => {
            return Err(CliError::Usage(format!(
                "unknown --split `{other}` (expected even-odd)"
            )))
        }
    };
    let target = model.target();
    let observed = dataset.target_values(target)?;
    let pairs = dataset
        .records()
        .iter()
        .zip(observed)
        .map(|(r, y)| (y, model.predict(r.temperature_c, r.dod_pct, r.cycle as f64)))
        .collect();
    let label = format!("{} {target}", model.kind());
    let series = PairedSeries::new(pairs, label, target.units())?;
    let report = series.comparison_report(mode);

    let report_path = ctx.path("report.json");
    write_file(&report_path, &report.to_json())?;
    let one_path = ctx.path("one_to_one.csv");
    write_file(&one_path, &series.one_to_one_csv())?;
    let mut outputs = vec![report_path, one_path];
    if let Some(ba) = report.bland_altman.value() {
        let path = ctx.path("bland_altman.csv");
        write_file(&path, &ba.to_csv())?;
        outputs.push(path);
    }

    let show = |s: &leocell::metrics::Stat<f64>| match s.value() {
        Some(v) => format!("{v:.6}"),
        None => "unavailable".to_string(),
    };
    ctx.say(format!("n            {}", report.n));
    ctx.say(format!("AAPE %       {}", show(&report.aape_pct)));
    ctx.say(format!("Pearson r    {}", show(&report.pearson_r)));
    ctx.say(format!("R^2          {}", show(&report.r_squared)));
    ctx.say(format!("CV           {}", show(&report.cv)));
    if let Some(ba) = report.bland_altman.value() {
        ctx.say(format!(
            "bias {:.6}, limits of agreement [{:.6}, {:.6}]",
            ba.bias, ba.loa_low, ba.loa_high
        ));
    }
    let mut m = Manifest::new("evaluate", &config);
    m.inputs.extend([a.model.clone(), a.data.clone()]);
    m.outputs = outputs;
    m.write(&ctx.out)
}

#[derive(Serialize)]
struct CycleLifeResult {
    temperature_c: f64,
    dod_pct: f64,
    rc_floor: f64,
    eodv_floor: f64,
    method: &'static str,
    #[serde(flatten)]
    life: CycleLife,
}

fn cycle_life(ctx: &Ctx, config: RunConfig, a: &CycleLifeArgs) -> CliResult<()> {
    let (t, dod) = (a.temperature, a.dod);
    let mut inputs = Vec::new();
    let (life, method) = match (&a.rc_model, &a.eodv_model) {
        (Some(rc_path), Some(eodv_path)) => {
            let rc = load_for(rc_path, Target::Rc)?;
            let eodv = load_for(eodv_path, Target::Eodv)?;
            inputs.extend([rc_path.clone(), eodv_path.clone()]);
            (scan_life(&rc, &eodv, t, dod, a), "model scan")
        }
        _ => {
            config.params.validate()?;
            (
                config
                    .params
                    .cycle_life(t, dod, a.rc_floor, a.eodv_floor, a.horizon),
                "closed form",
            )
        }
    };
    match life {
        CycleLife::Fails { cycle, criterion } => ctx.say(format!(
            "T={t} DOD={dod}: fails at cycle {cycle} ({} floor, {method})",
            format!("{criterion:?}").to_lowercase()
        )),
        CycleLife::NoFailure { horizon } => ctx.say(format!(
            "T={t} DOD={dod}: no failure up to cycle {horizon} ({method})"
        )),
    }
    let result = CycleLifeResult {
        temperature_c: t,
        dod_pct: dod,
        rc_floor: a.rc_floor,
        eodv_floor: a.eodv_floor,
        method,
        life,
    };
    let path = ctx.path("cycle_life.json");
    write_file(
        &path,
        &serde_json::to_string_pretty(&result)
            .map_err(|e| CliError::Usage(format!("cannot serialize result: {e}")))?,
    )?;
    let mut m = Manifest::new("cycle-life", &config);
    m.inputs = inputs;
    m.outputs.push(path);
    m.write(&ctx.out)
}

fn load_for(path: &Path, target: Target) -> CliResult<AnyModel> {
    let model = AnyModel::load(path)?;
    if model.target() != target {
        return Err(CliError::Core(leocell::Error::Mismatch(format!(
            "{} predicts {} where a {target} model is required",
            path.display(),
            model.target()
        ))));
    }
    Ok(model)
}

/// First cycle, stepping by one, at which either model drops below its floor.
fn scan_life(rc: &AnyModel, eodv: &AnyModel, t: f64, dod: f64, a: &CycleLifeArgs) -> CycleLife {
    for c in 0..=a.horizon {
        let x = c as f64;
        let rc_fail = rc.predict(t, dod, x) < a.rc_floor;
        let eodv_fail = eodv.predict(t, dod, x) < a.eodv_floor;
        if rc_fail || eodv_fail {
            let at = |fail: bool| fail.then_some(c as u64);
            return CycleLife::from_crossings(at(rc_fail), at(eodv_fail), a.horizon);
        }
    }
    CycleLife::NoFailure { horizon: a.horizon }
}
