use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use serde::Serialize;
use serde_json::json;

use sepmaj::formats::{read_json, EnsembleFile, OperationFile, StateFile, TargetFile};
use sepmaj::harness::{self, CampaignConfig, InstanceRanges, IntRange, Target};
use sepmaj::majorization::{self, MajorizationReport};
use sepmaj::rng::seeded;
use sepmaj::sepops::{self, Ensemble, LoccParams};
use sepmaj::states::{self, PureState};
use sepmaj::{Error, Result};

use crate::{Command, GenCommand, RangeArgs, VerifyArgs};

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Schmidt { state } => schmidt(&state),
        Command::Apply { operation, state, prune_tol } => apply(&operation, &state, prune_tol),
        Command::Feasible { state, target, pmax, tol } => feasible(&state, &target, pmax, tol),
        Command::Verify(args) => verify(args),
        Command::Replay { target, seed, ranges, tol } => replay(&target, seed, &ranges, tol),
        Command::Gen { what } => generate(what),
    }
}

/// Writes JSON to `out` or stdout. Reports are pretty-printed, data files compact.
fn emit<T: Serialize>(value: &T, out: Option<&Path>, pretty: bool) -> Result<()> {
    let text = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .expect("serializable output");
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Error::InvalidInput(format!("cannot write to stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn load_state(path: &Path) -> Result<PureState> {
    read_json::<StateFile>(path)?.to_state()
}

fn schmidt(path: &Path) -> Result<ExitCode> {
    let s = load_state(path)?;
    let weights = states::schmidt_weights(&s)?;
    let e_n = states::prefix_sums(&weights);
    emit(&json!({ "weights": weights, "e_n": e_n }), None, false)?;
    Ok(ExitCode::SUCCESS)
}

fn apply(op_path: &Path, state_path: &Path, prune_tol: f64) -> Result<ExitCode> {
    let op = read_json::<OperationFile>(op_path)?.to_set()?;
    eprintln!("closure residual: {:e}", op.closure_residual());
    if !op.is_closed() {
        return Err(Error::Precondition(format!(
            "operation not separable-closed (residual {:e})",
            op.closure_residual()
        )));
    }
    let s = load_state(state_path)?;
    let ens = sepops::apply_to_pure(&op, &s, prune_tol)?;
    emit(&EnsembleFile::from_ensemble(&ens), None, false)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct FeasibilityOutput {
    target_kind: &'static str,
    feasible: bool,
    report: MajorizationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pmax: Option<f64>,
}

fn feasible(state_path: &Path, target_path: &Path, want_pmax: bool, tol: f64) -> Result<ExitCode> {
    let source = load_state(state_path)?;
    let text = std::fs::read_to_string(target_path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", target_path.display())))?;
    let (kind, ensemble, target) = match TargetFile::parse(&text)? {
        TargetFile::State(f) => {
            let t = f.to_state()?;
            ("state", Ensemble::singleton(t.clone()), Some(t))
        }
        TargetFile::Ensemble(f) => ("ensemble", f.to_ensemble()?, None),
    };
    let report = majorization::check_ensemble_majorization(&source, &ensemble, tol)?;
    let pmax = match (want_pmax, &target) {
        (false, _) => None,
        (true, Some(t)) => Some(majorization::pmax_sep(&source, t)?),
        (true, None) => return Err(Error::InvalidInput("--pmax needs a single target state".into())),
    };
    let ok = report.verdict;
    emit(&FeasibilityOutput { target_kind: kind, feasible: ok, report, pmax }, None, true)?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn ranges(args: &RangeArgs) -> Result<InstanceRanges> {
    let dims_a: IntRange = args.dims.parse()?;
    let dims_b = match &args.dims_b {
        Some(r) => r.parse()?,
        None => dims_a,
    };
    let r = InstanceRanges { dims_a, dims_b, kraus: args.kraus.parse()?, rounds: args.rounds.parse()? };
    r.validate()?;
    Ok(r)
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let target: Target = args.target.parse()?;
    let seed = match (args.seed, &args.json_out) {
        (Some(s), _) => s,
        (None, Some(_)) => return Err(Error::InvalidInput("--json-out requires an explicit --seed".into())),
        (None, None) => {
            let s = rand::random::<u64>();
            eprintln!("using random seed {s}");
            s
        }
    };
    let mut cfg = CampaignConfig::new(target, args.instances, seed);
    cfg.ranges = ranges(&args.ranges)?;
    cfg.tolerance = args.tol;
    cfg.workers = args.workers;
    let report = harness::run_campaign(&cfg)?;
    eprintln!(
        "{target}: {} instances, {} violations, {:.3}s",
        report.instances,
        report.violations.len(),
        report.wall_clock.as_secs_f64()
    );
    emit(&report, args.json_out.as_deref(), true)?;
    Ok(if report.is_clean() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn replay(target: &str, seed: u64, range_args: &RangeArgs, tol: f64) -> Result<ExitCode> {
    let r = harness::replay_named(target, seed, &ranges(range_args)?, tol)?;
    emit(&r, None, true)?;
    Ok(if r.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn rng_for(seed: Option<u64>) -> sepmaj::rng::SeededRng {
    seeded(seed.unwrap_or_else(rand::random))
}

fn generate(what: GenCommand) -> Result<ExitCode> {
    match what {
        GenCommand::State { dims, schmidt, seed, out } => {
            let state = match schmidt {
                Some(w) => {
                    let total: f64 = w.iter().sum();
                    if total.is_nan() || total <= 0.0 {
                        return Err(Error::InvalidInput("Schmidt weights must have a positive sum".into()));
                    }
                    if (total - 1.0).abs() > 1e-12 {
                        eprintln!("warning: Schmidt weights sum to {total}; normalizing");
                    }
                    let (da, db) = match dims.as_deref() {
                        Some([a, b]) => (*a, *b),
                        _ => (w.len(), w.len()),
                    };
                    let w: Vec<f64> = w.iter().map(|x| x / total).collect();
                    PureState::from_schmidt_weights(da, db, &w)?
                }
                None => {
                    let [da, db] = match dims.as_deref() {
                        Some([a, b]) => [*a, *b],
                        _ => return Err(Error::InvalidInput("gen state needs --dims or --schmidt".into())),
                    };
                    if da == 0 || db == 0 {
                        return Err(Error::InvalidInput("dimensions must be positive".into()));
                    }
                    PureState::random(&mut rng_for(seed), da, db)
                }
            };
            emit(&StateFile::from_state(&state), out.as_deref(), false)?;
        }
        GenCommand::Sepop { dims, rounds, outcomes, branch_independent, bob_first, seed, out } => {
            let mut params = LoccParams::new((dims[0], dims[1]), rounds, outcomes);
            params.branch_dependent = !branch_independent;
            params.alice_first = !bob_first;
            if dims.contains(&0) {
                return Err(Error::InvalidInput("dimensions must be positive".into()));
            }
            let op = sepops::gen_separable_locc(&mut rng_for(seed), params)?;
            eprintln!("{} Kraus pairs, closure residual {:e}", op.len(), op.closure_residual());
            emit(&OperationFile::from_pairs(op.pairs()), out.as_deref(), false)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
