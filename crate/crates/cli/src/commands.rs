use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::info;
use serde::Serialize;
use serde_json::json;

use surface17::analysis::{self, DecodeSettings};
use surface17::calibration::{self, CrosstalkMatrix, GaussianMixture3, GmmOptions, IqBatch};
use surface17::code::{self, GateSchedule, NUM_DATA};
use surface17::decoder::{weights_from_json, weights_to_json, Decoder};
use surface17::experiment::{self, RejectionMode, RunConfig, ShotRecord};
use surface17::noise::DeviceParams;
use surface17::seed::derive_seed;

use crate::{
    AnalyzeArgs, CalibrateCommand, Command, DecodeArgs, FidelityArgs, Filtering, FluxArgs, GmmArgs, SimulateArgs, ValidateArgs,
    WeightsArgs, OUTPUT_DIR_ENV,
};

/// Invalid invocation: reported with exit code 1.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub fn run(command: Command) -> Result<u8> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Weights(a) => weights(a),
        Command::Decode(a) => decode(a),
        Command::Analyze(a) => analyze(a),
        Command::Fidelity(a) => fidelity(a),
        Command::Calibrate(c) => match c {
            CalibrateCommand::Gmm(a) => gmm(a),
            CalibrateCommand::Flux(a) => flux(a),
            CalibrateCommand::Drive(a) => emit(
                None,
                "drive_crosstalk_ratio",
                &json!({ "ratio": calibration::drive_crosstalk_ratio(a.target_amplitude, a.cross_amplitude)? }),
            ),
            CalibrateCommand::Dephasing(a) => emit(
                None,
                "phase_flip_probability",
                &json!({ "gamma_per_us": a.gamma, "tau_ns": a.tau, "p_phi": calibration::dephasing_to_flip(a.gamma, a.tau)? }),
            ),
        },
        Command::ValidateSchedule(a) => validate_schedule(a),
    }
}

fn input(path: &Path) -> Result<&Path> {
    if !path.is_file() {
        return Err(usage(format!("input file {} does not exist", path.display())));
    }
    Ok(path)
}

/// Output location, relocated under the output-directory override when relative.
fn output(path: &Path) -> Result<PathBuf> {
    let path = match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(path)
}

fn device(path: Option<&Path>) -> Result<DeviceParams> {
    match path {
        Some(p) => Ok(DeviceParams::load(input(p)?).with_context(|| format!("reading device file {}", p.display()))?),
        None => Ok(DeviceParams::paper()),
    }
}

fn read_shots(path: &Path) -> Result<Vec<ShotRecord>> {
    let f = File::open(input(path)?)?;
    let shots = experiment::read_jsonl(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))?;
    if shots.is_empty() {
        anyhow::bail!("{} holds no shots", path.display());
    }
    Ok(shots)
}

fn settings(f: &Filtering, cap: usize) -> DecodeSettings {
    DecodeSettings { rejection: f.rejection.into(), first_round: f.first_round.into(), cap }
}

/// Prints `value` tagged with `metric` and writes it to `out` if given.
fn emit<T: Serialize>(out: Option<&Path>, metric: &str, value: &T) -> Result<u8> {
    let text = analysis::tagged_json(metric, value)?;
    if let Some(p) = out {
        let p = output(p)?;
        fs::write(&p, &text).with_context(|| format!("writing {}", p.display()))?;
        info!("wrote {}", p.display());
    }
    print_line(&text)?;
    Ok(0)
}

/// Writes one line to stdout; a closed pipe is not an error.
fn print_line(text: &str) -> Result<()> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn simulate(a: SimulateArgs) -> Result<u8> {
    let dev = device(a.device.as_deref())?;
    let out = output(&a.out)?;
    let code = code::build_surface17();
    let cfg = RunConfig::new(a.state, a.cycles, a.shots, a.seed);
    info!("simulating {} shots of {} over {} cycles", a.shots, a.state, a.cycles);
    let shots = experiment::run_memory_experiment(&code, &dev, &cfg)?;
    let mut w = BufWriter::new(File::create(&out).with_context(|| format!("creating {}", out.display()))?);
    experiment::write_jsonl(&mut w, &shots)?;
    w.flush()?;
    let mode: RejectionMode = a.filter.rejection.into();
    let (kept, summary) = experiment::reject_leakage(&shots, mode);
    let sigma = analysis::mean_syndrome_element(&code, &kept, a.filter.first_round.into());
    emit(
        None,
        "mean_syndrome_element",
        &json!({
            "output": out,
            "state": a.state,
            "n_cycles": a.cycles,
            "shots": summary.total,
            "heralded": summary.heralded,
            "herald_rate": summary.heralded as f64 / summary.total as f64,
            "rejection": mode,
            "retained": summary.retained,
            "retained_fraction": summary.fraction,
            "mean_syndrome": sigma,
        }),
    )
}

fn weights(a: WeightsArgs) -> Result<u8> {
    let shots = read_shots(&a.input)?;
    let out = output(&a.out)?;
    let code = code::build_surface17();
    let (kept, summary) = experiment::reject_leakage(&shots, a.filter.rejection.into());
    if kept.is_empty() {
        anyhow::bail!("no shots left after leakage rejection");
    }
    let first = &kept[0];
    let (graph, probs) = analysis::learn_weights(&code, &kept, first.basis(), first.n_cycles(), a.filter.first_round.into())?;
    fs::write(&out, weights_to_json(&graph, &probs, a.cap)?).with_context(|| format!("writing {}", out.display()))?;
    info!("learned {} edges from {} shots", graph.edges.len(), summary.retained);
    print_line(
        &json!({ "output": out, "edges": graph.edges.len(), "vertices": graph.num_vertices(), "shots": summary.retained })
            .to_string(),
    )?;
    Ok(0)
}

fn decode(a: DecodeArgs) -> Result<u8> {
    let shots = read_shots(&a.input)?;
    let text = fs::read_to_string(input(&a.weights)?)?;
    let out = output(&a.out)?;
    let code = code::build_surface17();
    let (graph, probs, cap) = weights_from_json(&code, &text).with_context(|| format!("reading {}", a.weights.display()))?;
    let decoder = Decoder::new(graph, &probs, cap)?;
    let point = analysis::decode_point(&code, &decoder, &shots, settings(&a.filter, cap))?;
    emit(Some(&out), "logical_expectation", &point)
}

#[derive(Serialize)]
struct Summary<'a> {
    states: &'a [analysis::StateSummary],
    /// Mean fitted error per cycle over the states.
    epsilon_l: f64,
    t_c_us: f64,
}

fn write_study(dir: &Path, study: &analysis::MemoryStudy, t_c_us: f64) -> Result<f64> {
    let mut csv = BufWriter::new(File::create(dir.join("memory.csv"))?);
    analysis::write_memory_csv(&mut csv, &study.points)?;
    csv.flush()?;
    let eps = study.states.iter().map(|s| s.fit.epsilon_l).sum::<f64>() / study.states.len() as f64;
    let summary = Summary { states: &study.states, epsilon_l: eps, t_c_us };
    fs::write(dir.join("summary.json"), analysis::tagged_json("epsilon_L", &summary)?)?;
    Ok(eps)
}

fn analyze(a: AnalyzeArgs) -> Result<u8> {
    let dir = output(&a.out_dir.join("memory.csv"))?.parent().map(Path::to_path_buf).unwrap_or_default();
    let settings = settings(&a.filter, a.cap);
    let code = code::build_surface17();
    if !a.simulate {
        if a.points.is_empty() {
            return Err(usage("give decoded --points files or --simulate"));
        }
        let mut points = Vec::new();
        for p in &a.points {
            let text = fs::read_to_string(input(p)?)?;
            points
                .push(serde_json::from_str::<analysis::MemoryPoint>(&text).with_context(|| format!("reading {}", p.display()))?);
        }
        points.sort_by_key(|p| (p.state.to_string(), p.n));
        let states = analysis::summarize(&points, a.cycle_us)?;
        let study = analysis::MemoryStudy { points, states };
        let eps = write_study(&dir, &study, a.cycle_us)?;
        return emit(None, "epsilon_L", &json!({ "epsilon_l": eps, "states": study.states, "out_dir": dir }));
    }
    let seed = a.seed.ok_or_else(|| usage("--simulate requires --seed"))?;
    if a.cycles.contains(&0) {
        return Err(usage("cycle counts must be at least 1"));
    }
    let mut dev = device(a.device.as_deref())?;
    if a.uniform {
        dev = dev.uniform_average()?;
    }
    let t_c = dev.timing.cycle_us();
    info!("memory study: {} states x {} cycle counts, {} shots each", a.states.len(), a.cycles.len(), a.shots);
    let study = analysis::memory_study(&code, &dev, &a.states, &a.cycles, a.shots, derive_seed(seed, "analyze"), settings)?;
    let eps = write_study(&dir, &study, t_c)?;
    let mut result = json!({ "epsilon_l": eps, "states": study.states, "out_dir": dir });
    if !a.scaling.is_empty() {
        if a.scaling.iter().any(|&x| x.is_nan() || x < 1.0) {
            return Err(usage("improvement factors must be at least 1"));
        }
        info!("scaling study over {:?}", a.scaling);
        let base = if a.uniform { dev.clone() } else { dev.uniform_average()? };
        let scaling = analysis::scaling_study(
            &code,
            &base,
            &a.scaling,
            &a.states,
            &a.cycles,
            a.shots,
            derive_seed(seed, "scaling"),
            settings,
        )?;
        let mut csv = BufWriter::new(File::create(dir.join("scaling.csv"))?);
        analysis::write_scaling_csv(&mut csv, &scaling)?;
        csv.flush()?;
        fs::write(dir.join("scaling.json"), analysis::tagged_json("epsilon_L_scaling", &scaling)?)?;
        result["scaling_exponent"] = json!(scaling.exponent);
        result["scaling_exponent_se"] = json!(scaling.exponent_se);
    }
    emit(None, "epsilon_L", &result)
}

fn fidelity(a: FidelityArgs) -> Result<u8> {
    let dev = device(a.device.as_deref())?;
    let code = code::build_surface17();
    if a.subspaces == 0 {
        return Err(usage("--subspaces must be at least 1"));
    }
    let seed = derive_seed(a.seed, "fidelity");
    if !a.readout_mitigation {
        let corr = analysis::simulate_tomography(&code, &dev, a.shots, seed, None)?;
        let report = analysis::fidelity_correctable(&code, &corr, a.subspaces, derive_seed(seed, "subspaces"))?;
        return emit(a.out.as_deref(), "logical_state_fidelity", &report);
    }
    let eps: [f64; NUM_DATA] = std::array::from_fn(|q| dev.qubits[q].eps_ro2);
    let corr = analysis::simulate_tomography(&code, &dev, a.shots, seed, Some(eps))?;
    let raw = analysis::fidelity_correctable(&code, &corr, a.subspaces, derive_seed(seed, "subspaces"))?;
    let fixed = analysis::mitigate_readout(&code, &corr, &eps)?;
    let mitigated = analysis::fidelity_correctable(&code, &fixed, a.subspaces, derive_seed(seed, "subspaces"))?;
    emit(a.out.as_deref(), "logical_state_fidelity", &json!({ "raw": raw, "mitigated": mitigated, "readout_error": eps }))
}

fn gmm(a: GmmArgs) -> Result<u8> {
    let batch: IqBatch = match (&a.input, &a.planted) {
        (Some(p), _) => {
            serde_json::from_str(&fs::read_to_string(input(p)?)?).with_context(|| format!("reading {}", p.display()))?
        }
        (None, Some(p)) => {
            let model: GaussianMixture3 =
                serde_json::from_str(&fs::read_to_string(input(p)?)?).with_context(|| format!("reading {}", p.display()))?;
            calibration::synthesize_iq(&model, a.per_level, a.seed)?
        }
        (None, None) => return Err(usage("give --input or --planted")),
    };
    if let Some(p) = &a.save_batch {
        fs::write(output(p)?, serde_json::to_string(&batch)?)?;
    }
    let fit = calibration::fit_gmm3(&batch, &GmmOptions::default())?;
    let labels = batch.labels();
    let three = fit.model.assign_batch(&batch, 3, a.equal_priors);
    let two = fit.model.assign_batch(&batch, 2, a.equal_priors);
    let result = json!({
        "model": fit.model,
        "iterations": fit.iterations,
        "log_likelihood": fit.log_likelihood.last(),
        "confusion": calibration::confusion_matrix(&three, &labels, 3)?,
        "epsilon_2": calibration::readout_error(&two, &labels, 2)?,
        "epsilon_3": calibration::readout_error(&three, &labels, 3)?,
        "equal_priors": a.equal_priors,
    });
    emit(a.out.as_deref(), "readout_error", &result)
}

fn flux(a: FluxArgs) -> Result<u8> {
    let c = match &a.matrix {
        Some(p) => CrosstalkMatrix::read_csv(File::open(input(p)?)?).with_context(|| format!("reading {}", p.display()))?,
        None => {
            if a.size == 0 {
                return Err(usage("--size must be at least 1"));
            }
            calibration::planted_crosstalk(a.size, a.planted_off, a.seed)
        }
    };
    let mut result = json!({ "size": c.dim(), "condition_number": c.condition_number() });
    if !a.target.is_empty() {
        if a.target.len() != c.dim() {
            return Err(usage(format!("--target has {} entries, the matrix has {}", a.target.len(), c.dim())));
        }
        result["voltages"] = json!(calibration::compensate(&c, &a.target)?);
    }
    if a.rounds > 0 {
        result["compensation"] = serde_json::to_value(calibration::flux_compensation_study(&c, a.noise, a.rounds, a.seed)?)?;
    }
    emit(a.out.as_deref(), "flux_crosstalk_suppression", &result)
}

fn validate_schedule(a: ValidateArgs) -> Result<u8> {
    let code = code::build_surface17();
    let schedule = match &a.schedule {
        Some(p) => GateSchedule::from_table(&fs::read_to_string(input(p)?)?)?,
        None => code::paper_schedule(),
    };
    let violations = code::validate_schedule(&code, &schedule)?;
    let ok = violations.is_empty();
    emit(None, "schedule_hook_errors", &json!({ "valid": ok, "violations": violations }))?;
    Ok(if ok { 0 } else { 2 })
}
