use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use quietrotor::agent::{greedy_rollout, init_rng, train, window_means, IterationRecord, TurbineTrainingEnv};
use quietrotor::baseline_control::{classify_region, tune_pid, ClassicController, Region};
use quietrotor::energy_stats::{
    build_epc, expected_annual_energy, expected_sigma, fit_gp, fit_weibull, EnergySetup, EpcSample, EpcTable, GpModel,
    MeanStd, WeibullParams,
};
use quietrotor::environment::{sample_initial_state_at, EnvState, Environment, WindProcess, WindSeries};
use quietrotor::qnet::Mlp;
use quietrotor::simulation::{simulate_agent, simulate_classic, summarize, ControllerKind, SimRecord, SimSummary};

use crate::context::Ctx;
use crate::output::{num, opt, write_table};
use crate::CliError;

fn summary_json(s: &SimSummary) -> Value {
    json!({
        "steps": s.steps,
        "energy_mwh": s.energy_wh / 1e6,
        "mean_power_w": s.mean_power,
        "mean_cp": s.mean_cp,
        "max_oaspl_dba": s.max_oaspl,
        "mean_oaspl_dba": s.mean_oaspl,
        "boundary_violations": s.boundary_violations,
    })
}

pub fn train_cmd(ctx: &Ctx, kind: ControllerKind) -> Result<Value, CliError> {
    if kind == ControllerKind::Classic {
        return tune_classic(ctx);
    }
    let tcfg = ctx.cfg.train_config();
    let plant = &ctx.plant;
    let env = Environment::new(plant, ctx.env_config(kind), WindProcess::steady(10.0), 10.0, 0.0)?;
    let mut tenv = TurbineTrainingEnv::new(env);
    let ckpt_dir = ctx.out("checkpoints");
    let every = ctx.cfg.train.checkpoint_every;
    if every > 0 {
        std::fs::create_dir_all(&ckpt_dir).map_err(|e| CliError::Runtime(format!("creating {}: {e}", ckpt_dir.display())))?;
    }
    let mut ckpt_error = None;
    let outcome = train(&mut tenv, Mlp::q_network(&mut init_rng(tcfg.seed)), &tcfg, |rec: &IterationRecord, net: &Mlp| {
        if every > 0 && (rec.iteration + 1) % every == 0 && ckpt_error.is_none() {
            let p = ckpt_dir.join(format!("{}_iter{:06}.bin", kind.name(), rec.iteration + 1));
            if let Err(e) = net.save(&p) {
                ckpt_error = Some(e);
            }
        }
    })?;
    if let Some(e) = ckpt_error {
        return Err(CliError::Runtime(e.to_string()));
    }
    outcome.primary.save(&ctx.weights_path(kind)).map_err(|e| CliError::Runtime(e.to_string()))?;

    let rows: Vec<Vec<String>> = outcome
        .log
        .iter()
        .map(|r| vec![r.iteration.to_string(), r.env_steps.to_string(), opt(r.loss), num(r.mean_q), num(r.epsilon)])
        .collect();
    write_table(
        &ctx.out(&format!("train_log_{}.csv", kind.name())),
        &ctx.hash,
        ctx.cfg.seed,
        &["iteration", "env_steps", "loss", "mean_q", "epsilon"],
        &rows,
    )?;
    let q: Vec<f64> = outcome.log.iter().map(|r| r.mean_q).collect();
    let (first, last) = window_means(&q, 0.1);
    let last_loss = outcome.log.iter().rev().find_map(|r| r.loss);
    Ok(json!({
        "agent": kind.name(),
        "cp_nom": ctx.nominal.cp_nom,
        "iterations": outcome.log.len(),
        "env_steps": outcome.log.last().map_or(0, |r| r.env_steps),
        "final_loss": last_loss,
        "mean_q_first_window": first,
        "mean_q_last_window": last,
        "acoustic_calls": tenv.env.acoustic_calls(),
        "bem_failure_steps": tenv.env.bem_failures(),
        "weights": ctx.weights_path(kind).file_name().unwrap().to_string_lossy(),
    }))
}

/// Tunes the region boundaries and PI gains and writes them as a config block.
fn tune_classic(ctx: &Ctx) -> Result<Value, CliError> {
    let regions = ctx.regions();
    let gains = tune_pid(&ctx.plant, &regions, ctx.cfg.controller.dt);
    let text = format!(
        "# config_sha256={} seed={}\n# tuned by `quietrotor train --agent classic`\n[controller]\ncut_in = {}\ncut_off = {}\ndt = {}\nkp = {}\nki = {}\nkd = {}\n\n# derived (informational)\n# rated_wind = {}\n# tracking_limit = {}\n# lambda_opt = {}\n# theta_opt = {}\n# pid_direction = {}\n",
        ctx.hash,
        ctx.cfg.seed,
        num(regions.cut_in),
        num(regions.cut_off),
        num(ctx.cfg.controller.dt),
        num(gains.kp),
        num(gains.ki),
        num(gains.kd),
        num(regions.rated_wind),
        num(regions.tracking_limit()),
        num(regions.lambda_opt),
        num(regions.theta_opt),
        num(gains.direction),
    );
    let path = ctx.out("controller_classic.toml");
    std::fs::write(&path, text).map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
    Ok(json!({
        "agent": "classic",
        "rated_wind": regions.rated_wind,
        "tracking_limit": regions.tracking_limit(),
        "lambda_opt": regions.lambda_opt,
        "theta_opt": regions.theta_opt,
        "kp": gains.kp,
        "ki": gains.ki,
        "kd": gains.kd,
        "direction": gains.direction,
    }))
}

/// Common starting setpoint: the classic controller's command at the first wind sample.
fn initial_setpoint(ctrl: &ClassicController, u0: f64, dt: f64) -> (f64, f64) {
    let mut c = ctrl.clone();
    c.reset();
    let r = c.regions.clone();
    let current = (r.rated_rpm, r.pitch_for_max_power(u0));
    let cmd = c.command(u0, current, r.rated_power, dt);
    if cmd.shutdown { (r.rotor_bounds.0, r.theta_opt) } else { (cmd.rotor_speed, cmd.pitch) }
}

enum Runner {
    Agent(ControllerKind, Mlp),
    Classic(ClassicController),
}

fn runners(ctx: &Ctx, kinds: &[ControllerKind]) -> Result<Vec<Runner>, CliError> {
    kinds
        .iter()
        .map(|&k| match k {
            ControllerKind::Classic => Ok(Runner::Classic(ctx.classic())),
            _ => ctx.load_agent(k).map(|m| Runner::Agent(k, m)),
        })
        .collect()
}

fn run_all(ctx: &Ctx, kinds: &[ControllerKind], series: &WindSeries) -> Result<Vec<Vec<SimRecord>>, CliError> {
    let runners = runners(ctx, kinds)?;
    let classic = ctx.classic();
    let start = initial_setpoint(&classic, series.speeds[0], series.dt);
    runners
        .into_par_iter()
        .map(|r| match r {
            Runner::Agent(kind, model) => {
                Ok(simulate_agent(&model, &ctx.plant, ctx.env_config(kind), series, start)?)
            }
            Runner::Classic(mut c) => {
                Ok(simulate_classic(&mut c, &ctx.plant, &ctx.reward(ControllerKind::Classic), series, start)?)
            }
        })
        .collect()
}

fn write_sim(ctx: &Ctx, name: &str, recs: &[SimRecord]) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = recs
        .iter()
        .map(|r| {
            vec![
                num(r.time),
                num(r.wind_speed),
                num(r.rotor_speed),
                num(r.pitch),
                num(r.power),
                num(r.cp),
                num(r.oaspl),
                num(r.reward),
                r.action.map_or(String::new(), |a| a.label().to_string()),
                r.region.map_or(String::new(), |g| g.label().to_string()),
                (r.boundary_violation as u8).to_string(),
            ]
        })
        .collect();
    write_table(
        &ctx.out(name),
        &ctx.hash,
        ctx.cfg.seed,
        &["time_s", "wind_speed_ms", "rotor_rpm", "pitch_deg", "power_w", "cp", "oaspl_dba", "reward", "action", "region", "boundary_violation"],
        &rows,
    )
}

pub fn simulate_cmd(ctx: &Ctx, kinds: &[ControllerKind], wind: Option<PathBuf>) -> Result<Value, CliError> {
    let path = wind.unwrap_or_else(|| ctx.cfg.wind.simulate.clone());
    let series = ctx.load_wind(&path)?;
    let runs = run_all(ctx, kinds, &series)?;
    let mut results = serde_json::Map::new();
    for (kind, recs) in kinds.iter().zip(&runs) {
        write_sim(ctx, &format!("simulate_{}.csv", kind.name()), recs)?;
        let s = summarize(recs, series.dt);
        let over = recs.iter().filter(|r| r.oaspl > ctx.cfg.reward.spl_threshold_db + ctx.cfg.reward.delta_db).count();
        let mut j = summary_json(&s);
        j["minutes_over_hard_limit"] = json!(over);
        results.insert(kind.name().into(), j);
    }
    Ok(json!({
        "wind_file": path.file_name().map(|f| f.to_string_lossy().to_string()),
        "samples": series.len(),
        "clipped": series.clipped,
        "filled_gaps": series.filled_gaps,
        "controllers": results,
    }))
}

pub fn pareto_cmd(ctx: &Ctx, kind: ControllerKind) -> Result<Value, CliError> {
    if kind == ControllerKind::Classic {
        return Err(CliError::Validation("pareto needs a trained agent (quiet or power)".into()));
    }
    let model = ctx.load_agent(kind)?;
    let p = &ctx.cfg.pareto;
    let r = ctx.plant.blade_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    rng.set_stream(4);
    let states: Vec<EnvState> = (0..p.cloud_points).map(|_| sample_initial_state_at(&mut rng, p.wind_speed, &ctx.bounds, r)).collect();
    let cloud: Vec<(EnvState, f64, f64)> = states
        .par_iter()
        .map(|s| ctx.plant.evaluate_state(s, true).map(|e| (*s, e.cp, e.oaspl.expect("noise requested"))))
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<String>> =
        cloud.iter().map(|(s, cp, l)| vec![num(s.rotor_speed), num(s.pitch), num(s.tip_speed_ratio(r)), num(*cp), num(*l)]).collect();
    write_table(&ctx.out("pareto_cloud.csv"), &ctx.hash, ctx.cfg.seed, &["rotor_rpm", "pitch_deg", "tsr", "cp", "oaspl_dba"], &rows)?;

    let env_cfg = quietrotor::environment::EnvConfig { evaluate_acoustics: true, ..ctx.env_config(kind) };
    let mut summary = Vec::new();
    let mut cases = Vec::new();
    for (i, &[rpm0, pitch0]) in p.initial_states.iter().enumerate() {
        let mut env = Environment::new(&ctx.plant, env_cfg, WindProcess::steady(p.wind_speed), rpm0, pitch0)?;
        let start = ctx.plant.evaluate(p.wind_speed, rpm0, pitch0, true)?;
        let traj = greedy_rollout(&model, &mut env, p.rollout_steps)?;
        let mut rows = vec![vec!["0".into(), num(rpm0), num(pitch0), num(start.cp), opt(start.oaspl), String::new(), String::new()]];
        for (k, s) in traj.iter().enumerate() {
            rows.push(vec![
                (k + 1).to_string(),
                num(s.next_state.rotor_speed),
                num(s.next_state.pitch),
                num(s.cp),
                opt(s.oaspl),
                num(s.reward),
                s.action.label().to_string(),
            ]);
        }
        write_table(
            &ctx.out(&format!("pareto_traj_{}.csv", i + 1)),
            &ctx.hash,
            ctx.cfg.seed,
            &["step", "rotor_rpm", "pitch_deg", "cp", "oaspl_dba", "reward", "action"],
            &rows,
        )?;
        let end = traj.last().map(|s| (s.next_state, s.cp, s.oaspl.unwrap_or(f64::NAN)));
        let (end_state, end_cp, end_l) = end.unwrap_or((EnvState::new(p.wind_speed, rpm0, pitch0), start.cp, start.oaspl.unwrap_or(f64::NAN)));
        summary.push(vec![
            (i + 1).to_string(),
            num(rpm0),
            num(pitch0),
            num(start.cp),
            opt(start.oaspl),
            num(end_state.rotor_speed),
            num(end_state.pitch),
            num(end_cp),
            num(end_l),
        ]);
        cases.push(json!({
            "case": i + 1,
            "start": {"rotor_rpm": rpm0, "pitch_deg": pitch0, "cp": start.cp, "oaspl_dba": start.oaspl},
            "end": {"rotor_rpm": end_state.rotor_speed, "pitch_deg": end_state.pitch, "cp": end_cp, "oaspl_dba": end_l},
        }));
    }
    if !summary.is_empty() {
        write_table(
            &ctx.out("pareto_summary.csv"),
            &ctx.hash,
            ctx.cfg.seed,
            &["case", "rotor0_rpm", "pitch0_deg", "cp0", "oaspl0_dba", "rotor_end_rpm", "pitch_end_deg", "cp_end", "oaspl_end_dba"],
            &summary,
        )?;
    }
    Ok(json!({ "agent": kind.name(), "wind_speed": p.wind_speed, "cloud_points": cloud.len(), "cases": cases }))
}

fn ms(m: Option<MeanStd>) -> [String; 2] {
    m.map_or([String::new(), String::new()], |m| [num(m.mean), num(m.std)])
}

fn write_epc(ctx: &Ctx, name: &str, t: &EpcTable) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = t
        .bins
        .iter()
        .map(|b| {
            let mut row = vec![num(b.lower), num(b.upper), b.count.to_string()];
            for f in [b.cp, b.power, b.rotor_speed, b.pitch, b.oaspl] {
                row.extend(ms(f));
            }
            row
        })
        .collect();
    write_table(
        &ctx.out(name),
        &ctx.hash,
        ctx.cfg.seed,
        &[
            "wind_lo_ms", "wind_hi_ms", "count", "cp_mean", "cp_std", "power_mean_w", "power_std_w", "rotor_mean_rpm",
            "rotor_std_rpm", "pitch_mean_deg", "pitch_std_deg", "oaspl_mean_dba", "oaspl_std_dba",
        ],
        &rows,
    )
}

fn gp_grid(ctx: &Ctx) -> Vec<f64> {
    let c = &ctx.cfg.controller;
    let step = ctx.cfg.annual.gp_resolution;
    let n = ((c.cut_off - c.cut_in) / step + 1e-9).floor() as usize;
    let mut g: Vec<f64> = (0..=n).map(|i| c.cut_in + i as f64 * step).collect();
    if g.last().is_some_and(|&u| u < c.cut_off - 1e-9) {
        g.push(c.cut_off);
    }
    g
}

fn write_gp(ctx: &Ctx, name: &str, gp: &GpModel) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = gp_grid(ctx).into_iter().map(|u| vec![num(u), num(gp.mean(u)), num(gp.std_dev(u))]).collect();
    write_table(&ctx.out(name), &ctx.hash, ctx.cfg.seed, &["wind_speed_ms", "cp_mean", "cp_std"], &rows)
}

struct Analysed {
    records: Vec<SimRecord>,
    epc: EpcTable,
    gp: GpModel,
}

fn analyse(ctx: &Ctx, kinds: &[ControllerKind], series: &WindSeries) -> Result<Vec<Analysed>, CliError> {
    let runs = run_all(ctx, kinds, series)?;
    let c = &ctx.cfg.controller;
    runs.into_par_iter()
        .map(|records| {
            if records.len() < 100 {
                return Err(CliError::Validation(format!("need at least 100 wind samples, got {}", records.len())));
            }
            let samples: Vec<EpcSample> = records.iter().map(EpcSample::from).collect();
            let epc = build_epc(&samples, ctx.cfg.annual.epc_bin_width, (c.cut_in, c.cut_off))?;
            let points: Vec<(f64, f64)> = records.iter().map(|r| (r.wind_speed, r.cp)).collect();
            let gp = fit_gp(&points)?;
            Ok(Analysed { records, epc, gp })
        })
        .collect()
}

/// Steady-state power of the classic schedule.
fn theoretical_power_curve(ctx: &Ctx) -> Vec<(f64, f64)> {
    let ctrl = ctx.classic();
    let r = &ctrl.regions;
    gp_grid(ctx)
        .into_iter()
        .map(|u| {
            let p = match classify_region(u, r) {
                Region::I | Region::IV => 0.0,
                Region::III => r.rated_power,
                _ => {
                    let mut c = ctrl.clone();
                    let cmd = c.command(u, (r.rated_rpm, r.theta_opt), 0.0, ctx.cfg.controller.dt);
                    ctx.plant.performance(u, cmd.rotor_speed, cmd.pitch).power.min(r.rated_power)
                }
            };
            (u, p)
        })
        .collect()
}

pub fn epc_cmd(ctx: &Ctx, kinds: &[ControllerKind], wind: Option<PathBuf>) -> Result<Value, CliError> {
    let path = wind.unwrap_or_else(|| ctx.cfg.wind.epc.clone());
    let series = ctx.load_wind(&path)?;
    let analysed = analyse(ctx, kinds, &series)?;
    let mut results = serde_json::Map::new();
    for (kind, a) in kinds.iter().zip(&analysed) {
        write_epc(ctx, &format!("epc_{}.csv", kind.name()), &a.epc)?;
        write_gp(ctx, &format!("gp_{}.csv", kind.name()), &a.gp)?;
        let max_rotor = a.epc.bins.iter().filter_map(|b| b.rotor_speed.map(|m| m.mean)).fold(f64::NEG_INFINITY, f64::max);
        let max_bin_noise = a.epc.bins.iter().filter_map(|b| b.oaspl.map(|m| m.mean)).fold(f64::NEG_INFINITY, f64::max);
        results.insert(
            kind.name().into(),
            json!({
                "samples": a.records.len(),
                "populated_bins": a.epc.bins.iter().filter(|b| !b.is_empty()).count(),
                "max_bin_mean_rotor_rpm": max_rotor,
                "max_bin_mean_oaspl_dba": max_bin_noise,
                "gp": {
                    "signal_variance": a.gp.hyper.signal_variance,
                    "length_scale": a.gp.hyper.length_scale,
                    "noise_variance": a.gp.hyper.noise_variance,
                    "log_marginal_likelihood": a.gp.log_marginal_likelihood,
                },
            }),
        );
    }
    if kinds.contains(&ControllerKind::Classic) {
        let rows: Vec<Vec<String>> = theoretical_power_curve(ctx).into_iter().map(|(u, p)| vec![num(u), num(p)]).collect();
        write_table(&ctx.out("tpc_classic.csv"), &ctx.hash, ctx.cfg.seed, &["wind_speed_ms", "power_w"], &rows)?;
    }
    Ok(json!({ "wind_file": path.file_name().map(|f| f.to_string_lossy().to_string()), "controllers": results }))
}

fn weibull_for(ctx: &Ctx) -> Result<(WeibullParams, f64, f64), CliError> {
    let a = &ctx.cfg.annual;
    let (mean, std) = match &a.wind_stats_csv {
        Some(p) => {
            let s = ctx.load_wind(p)?;
            (s.mean(), s.std_dev())
        }
        None => (a.wind_mean, a.wind_std),
    };
    Ok((fit_weibull(mean, std)?, mean, std))
}

pub fn annual_cmd(ctx: &Ctx, wind: Option<PathBuf>) -> Result<Value, CliError> {
    let path = wind.unwrap_or_else(|| ctx.cfg.wind.epc.clone());
    let series = ctx.load_wind(&path)?;
    let (weibull, mean, std) = weibull_for(ctx)?;
    let kinds = ControllerKind::ALL;
    let analysed = analyse(ctx, &kinds, &series)?;
    let c = &ctx.cfg.controller;
    let base = EnergySetup::annual(ctx.cfg.turbine.air_density, ctx.plant.geometry.rotor_area(), (c.cut_in, c.cut_off));
    let mut energy = Vec::new();
    for (kind, a) in kinds.iter().zip(&analysed) {
        let setup = EnergySetup {
            power_cap: (*kind == ControllerKind::PowerDdqn).then_some(ctx.plant.geometry.rated_power),
            ..base
        };
        let e = expected_annual_energy(&a.gp, &weibull, &setup)?;
        let s = expected_sigma(&a.gp, &weibull, (c.cut_in, c.cut_off))?;
        energy.push((*kind, e / 1e6, s));
    }
    let classic_e = energy.iter().find(|e| e.0 == ControllerKind::Classic).map(|e| e.1).unwrap_or(f64::NAN);
    let rows: Vec<Vec<String>> =
        energy.iter().map(|(k, e, s)| vec![k.name().to_string(), num(*e), num(*s), num(e / classic_e)]).collect();
    write_table(&ctx.out("annual.csv"), &ctx.hash, ctx.cfg.seed, &["controller", "energy_mwh", "sigma_cp", "ratio_to_classic"], &rows)?;
    for (kind, a) in kinds.iter().zip(&analysed) {
        write_gp(ctx, &format!("gp_{}.csv", kind.name()), &a.gp)?;
    }
    let rows_json: Vec<Value> = energy
        .iter()
        .map(|(k, e, s)| json!({"controller": k.name(), "energy_mwh": e, "sigma_cp": s, "ratio_to_classic": e / classic_e}))
        .collect();
    Ok(json!({
        "wind_file": path.file_name().map(|f| f.to_string_lossy().to_string()),
        "weibull": {"shape": weibull.shape, "scale": weibull.scale, "source_mean": mean, "source_std": std},
        "controllers": rows_json,
    }))
}

/// User-facing smoke test of core invariants; returns `(name, passed, detail)`.
pub fn validate_cmd(ctx: &Ctx) -> Vec<(&'static str, bool, String)> {
    use quietrotor::acoustics::{combine_uncorrelated, SplSpectrum};
    use quietrotor::agent::toy::{max_norm, ToyMdp};
    use quietrotor::agent::QModel;
    use quietrotor::qnet::TdSample;
    use quietrotor::turbine::BETZ_LIMIT;

    let mut out = Vec::new();

    let mut worst: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            for k in 0..5 {
                let u = 4.0 + 3.0 * i as f64;
                let rpm = 6.0 + 3.0 * j as f64;
                let th = -5.0 + 3.75 * k as f64;
                worst = worst.max(ctx.plant.performance(u, rpm, th).cp);
            }
        }
    }
    out.push(("betz_bound", worst < BETZ_LIMIT, format!("max Cp {worst:.4} < {BETZ_LIMIT:.4}")));

    let a = SplSpectrum::from_levels(vec![40.0; quietrotor::acoustics::BAND_COUNT], false);
    let sum = combine_uncorrelated(&[a.clone(), a.clone()]).map(|s| s.levels[0]).unwrap_or(f64::NAN);
    out.push(("db_addition", (sum - 43.0103).abs() < 1e-4, format!("40 dB + 40 dB = {sum:.4} dB")));

    let net = Mlp::new(&[3, 8, 5], &mut init_rng(ctx.cfg.seed));
    let batch = [
        TdSample { features: [0.2, -0.4, 0.9], action: 1, target: 0.7 },
        TdSample { features: [-0.8, 0.1, 0.3], action: 4, target: -0.2 },
    ];
    let (_, g) = net.loss_and_gradient(&batch);
    let h = 1e-5;
    let mut max_rel: f64 = 0.0;
    for i in 0..g.len() {
        let mut p = net.clone();
        p.parameters_mut()[i] += h;
        let lp = p.loss(&batch);
        p.parameters_mut()[i] -= 2.0 * h;
        let lm = p.loss(&batch);
        let fd = (lp - lm) / (2.0 * h);
        max_rel = max_rel.max((fd - g[i]).abs() / g[i].abs().max(fd.abs()).max(1e-7));
    }
    out.push(("gradient_check", max_rel < 1e-4, format!("max relative error {max_rel:.2e}")));

    let mdp = ToyMdp::standard();
    let toy = train(&mut mdp.env(), quietrotor::agent::toy::LookupTable::zeros(mdp.n_states()), &ToyMdp::train_config(ctx.cfg.seed), |_, _| {});
    let (ok, detail) = match toy {
        Ok(t) => {
            let e = max_norm(&t.primary, &mdp.optimal_q());
            (e < 1e-2, format!("max-norm error {e:.2e}"))
        }
        Err(e) => (false, e.to_string()),
    };
    out.push(("toy_mdp_q_star", ok, detail));
    out
}
