use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::Path;

use leggett_core::inequality::evaluate;
use leggett_core::nlhv::verify::{run_verification, VerifyOptions};
use leggett_core::optimizer::{
    default_theta_grid, maximize, scan_theta_curve, scan_w_family, GridRange, MaximizeSpec,
    ScanSpec, SettingsMode, SettingsSearch, StateSearch, ThetaSearch,
};
use leggett_core::settings::{ghz_optimal_settings, reference_settings, MeasurementConfig};
use leggett_core::{optimal_theta, StateFamilySpec};

use crate::args::{
    Cli, Command, EvaluateArgs, Family, OptimizeArgs, ScanMode, ScanThetaArgs, ScanWArgs,
    SettingsChoice, StateArgs, VerifyArgs,
};
use crate::error::{CliError, CliResult};
use crate::output::{csv_bytes, json_bytes, real, write_with_manifest, VERSION};

/// Converts an angle flag to radians.
#[derive(Clone, Copy)]
struct Angles {
    degrees: bool,
}

impl Angles {
    fn get(self, x: f64) -> f64 {
        if self.degrees {
            x.to_radians()
        } else {
            x
        }
    }

    fn opt(self, x: Option<f64>) -> Option<f64> {
        x.map(|v| self.get(v))
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let angles = Angles {
        degrees: cli.degrees,
    };
    match &cli.command {
        Command::Evaluate(a) => cmd_evaluate(cli, a, angles),
        Command::ScanW(a) => cmd_scan_w(cli, a, angles),
        Command::ScanTheta(a) => cmd_scan_theta(cli, a),
        Command::Optimize(a) => cmd_optimize(cli, a, angles),
        Command::VerifyNlhv(a) => cmd_verify(cli, a),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn read_config(path: &Path) -> CliResult<MeasurementConfig> {
    Ok(MeasurementConfig::from_json(&read_text(path)?)?)
}

fn read_state(path: &Path) -> CliResult<StateFamilySpec> {
    let spec: StateFamilySpec = serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    spec.validate()?;
    Ok(spec)
}

fn reject_flags(family: &str, flags: &[(&str, bool)]) -> CliResult<()> {
    match flags.iter().find(|(_, set)| *set) {
        Some((name, _)) => Err(CliError::Invalid(format!(
            "--{name} does not apply to the {family} family"
        ))),
        None => Ok(()),
    }
}

fn check_family_flags(s: &StateArgs, family: Family) -> CliResult<()> {
    let (xi, eta, mu, phi) = (
        s.xi.is_some(),
        s.eta.is_some(),
        s.mu.is_some(),
        s.phi.is_some(),
    );
    match family {
        Family::Ghz => reject_flags("ghz", &[("xi", xi), ("eta", eta), ("mu", mu), ("phi", phi)]),
        Family::W3 => reject_flags("w3", &[("mu", mu), ("phi", phi)]),
        Family::Arbitrary3 => reject_flags("arbitrary3", &[("xi", xi), ("eta", eta)]),
        Family::Generic => reject_flags(
            "generic",
            &[("xi", xi), ("eta", eta), ("mu", mu), ("phi", phi)],
        ),
    }
}

fn mu_array(mu: &[f64]) -> CliResult<[f64; 5]> {
    mu.try_into().map_err(|_| {
        CliError::Invalid(format!(
            "--mu takes 5 comma-separated values, got {}",
            mu.len()
        ))
    })
}

/// A single state for evaluation; defaults to GHZ.
fn fixed_state(s: &StateArgs, angles: Angles) -> CliResult<StateFamilySpec> {
    if let Some(path) = &s.state_file {
        return read_state(path);
    }
    let family = s.family.unwrap_or(Family::Ghz);
    check_family_flags(s, family)?;
    let spec = match family {
        Family::Ghz => StateFamilySpec::Ghz { n: s.n },
        Family::W3 => match (angles.opt(s.xi), angles.opt(s.eta)) {
            (Some(xi), Some(eta)) => StateFamilySpec::W3 { xi, eta },
            _ => {
                return Err(CliError::Invalid(
                    "the w3 family needs --xi and --eta".into(),
                ))
            }
        },
        Family::Arbitrary3 => match &s.mu {
            Some(mu) => StateFamilySpec::Arbitrary3 {
                mu: mu_array(mu)?,
                phi: angles.opt(s.phi).unwrap_or(0.0),
            },
            None => return Err(CliError::Invalid("the arbitrary3 family needs --mu".into())),
        },
        Family::Generic => {
            return Err(CliError::Invalid(
                "the generic family can only be optimized".into(),
            ))
        }
    };
    spec.validate()?;
    Ok(spec)
}

/// The state part of a search; unset parameters of a family are searched.
fn state_search(s: &StateArgs, angles: Angles) -> CliResult<StateSearch> {
    if let Some(path) = &s.state_file {
        return Ok(StateSearch::Fixed {
            state: read_state(path)?,
        });
    }
    let family = s
        .family
        .ok_or_else(|| CliError::Invalid("--family or --state-file is required".into()))?;
    check_family_flags(s, family)?;
    let search = match family {
        Family::Ghz => StateSearch::Fixed {
            state: StateFamilySpec::Ghz { n: s.n },
        },
        Family::W3 => match (angles.opt(s.xi), angles.opt(s.eta)) {
            (Some(xi), Some(eta)) => StateSearch::Fixed {
                state: StateFamilySpec::W3 { xi, eta },
            },
            (xi, eta) => StateSearch::W3 { xi, eta },
        },
        Family::Arbitrary3 => match (&s.mu, s.phi) {
            (Some(mu), phi) => StateSearch::Fixed {
                state: StateFamilySpec::Arbitrary3 {
                    mu: mu_array(mu)?,
                    phi: angles.opt(phi).unwrap_or(0.0),
                },
            },
            (None, Some(_)) => {
                return Err(CliError::Invalid(
                    "--phi without --mu; omit both to search them".into(),
                ))
            }
            (None, None) => StateSearch::Arbitrary3,
        },
        Family::Generic => StateSearch::Generic { n: s.n },
    };
    if let StateSearch::Fixed { state } = &search {
        state.validate()?;
    }
    Ok(search)
}

fn cmd_evaluate(cli: &Cli, a: &EvaluateArgs, angles: Angles) -> CliResult<()> {
    let state = fixed_state(&a.state, angles)?;
    let theta = angles.opt(a.theta);
    let config = if let Some(path) = &a.config {
        read_config(path)?
    } else if a.reference_settings {
        reference_settings(theta.expect("clap requires --theta"))?
    } else {
        ghz_optimal_settings(state.n_qubits(), theta.expect("clap requires --theta"))?
    };
    let report = evaluate(&state.build()?, &config)?;
    let bytes = json_bytes(&report);
    print!("{}", String::from_utf8_lossy(&bytes));
    if let Some(out) = &a.out {
        write_with_manifest(out, &bytes, cli.command.name(), cli, None)?;
    }
    Ok(())
}

fn cmd_scan_w(cli: &Cli, a: &ScanWArgs, angles: Angles) -> CliResult<()> {
    let xi = GridRange {
        start: angles.opt(a.xi_min).unwrap_or(PI / 12.0),
        end: angles.opt(a.xi_max).unwrap_or(FRAC_PI_2),
        count: a.xi_points,
    };
    let eta = GridRange {
        start: angles.opt(a.eta_min).unwrap_or(0.0),
        end: angles.opt(a.eta_max).unwrap_or(FRAC_PI_2),
        count: a.eta_points,
    };
    let (mode, comment) = match a.mode {
        ScanMode::Fixed => {
            let theta = angles.opt(a.theta).unwrap_or_else(optimal_theta);
            (
                SettingsMode::Fixed { theta },
                format!("mode=fixed theta={} seed=none", real(theta)),
            )
        }
        ScanMode::Optimized => {
            if a.theta.is_some() {
                return Err(CliError::Invalid(
                    "--theta only applies to --mode fixed".into(),
                ));
            }
            (
                SettingsMode::Optimized {
                    restarts: a.restarts,
                    max_evals: a.max_evals,
                    seed: a.seed,
                },
                format!(
                    "mode=optimized theta=optimized seed={} restarts={} max_evals={}",
                    a.seed, a.restarts, a.max_evals
                ),
            )
        }
    };
    let spec = ScanSpec { xi, eta, mode };
    let rows = scan_w_family(&spec)?;
    let bytes = csv_bytes(
        &format!(
            "leggett {VERSION} scan-w {comment} xi=[{},{}]x{} eta=[{},{}]x{}",
            real(xi.start),
            real(xi.end),
            xi.count,
            real(eta.start),
            real(eta.end),
            eta.count
        ),
        &["xi", "eta", "value"],
        rows.iter()
            .map(|r| vec![real(r.xi), real(r.eta), real(r.value)]),
    );
    let seed = matches!(a.mode, ScanMode::Optimized).then_some(a.seed);
    write_with_manifest(&a.out, &bytes, cli.command.name(), cli, seed)?;
    let best = rows
        .iter()
        .map(|r| r.value)
        .fold(f64::NEG_INFINITY, f64::max);
    println!(
        "{} rows, max I = {} -> {}",
        rows.len(),
        real(best),
        a.out.display()
    );
    Ok(())
}

fn cmd_scan_theta(cli: &Cli, a: &ScanThetaArgs) -> CliResult<()> {
    let grid = match a.points {
        Some(count) => {
            if count < 2 {
                return Err(CliError::Invalid("--points must be at least 2".into()));
            }
            GridRange {
                start: 0.0,
                end: PI,
                count,
            }
            .values()
        }
        None => default_theta_grid(),
    };
    let rows = scan_theta_curve(&grid)?;
    let bytes = csv_bytes(
        &format!(
            "leggett {VERSION} scan-theta mode=ghz3-reference-settings theta=grid({}) seed=none",
            grid.len()
        ),
        &["theta", "value", "closed_form"],
        rows.iter()
            .map(|r| vec![real(r.theta), real(r.value), real(r.closed_form)]),
    );
    write_with_manifest(&a.out, &bytes, cli.command.name(), cli, None)?;
    let peak = rows
        .iter()
        .max_by(|x, y| x.value.total_cmp(&y.value))
        .expect("grid is non-empty");
    println!(
        "{} rows, peak I = {} at theta = {} -> {}",
        rows.len(),
        real(peak.value),
        real(peak.theta),
        a.out.display()
    );
    Ok(())
}

fn cmd_optimize(cli: &Cli, a: &OptimizeArgs, angles: Angles) -> CliResult<()> {
    if a.restarts == 0 {
        return Err(CliError::Invalid("--restarts must be at least 1".into()));
    }
    let state = state_search(&a.state, angles)?;
    let settings = match (&a.config, a.free_settings, a.settings) {
        (Some(path), _, _) => SettingsSearch::Fixed {
            config: Box::new(read_config(path)?),
        },
        (None, true, _) | (None, false, SettingsChoice::Free) => SettingsSearch::Free,
        (None, false, SettingsChoice::Reference) => SettingsSearch::Reference,
        (None, false, SettingsChoice::GhzOptimal) => SettingsSearch::GhzOptimal,
    };
    let theta = match angles.opt(a.theta) {
        Some(theta) => ThetaSearch::Fixed { theta },
        None => ThetaSearch::Free,
    };
    let spec = MaximizeSpec {
        state,
        settings,
        theta,
        restarts: a.restarts,
        max_evals: a.max_evals,
        seed: a.seed,
        initial: None,
    };
    let result = maximize(&spec)?;
    write_with_manifest(
        &a.out,
        &json_bytes(&result),
        cli.command.name(),
        cli,
        Some(a.seed),
    )?;
    println!(
        "I* = {} at theta = {} (converged: {}) -> {}",
        real(result.best_value),
        real(result.theta),
        result.converged,
        a.out.display()
    );
    Ok(())
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> CliResult<()> {
    let cases =
        usize::try_from(a.cases).map_err(|_| CliError::Invalid("--cases is too large".into()))?;
    let report = run_verification(&VerifyOptions {
        cases,
        seed: a.seed,
    });
    let bytes = json_bytes(&report);
    print!("{}", String::from_utf8_lossy(&bytes));
    if let Some(out) = &a.out {
        write_with_manifest(out, &bytes, cli.command.name(), cli, Some(a.seed))?;
    }
    if report.all_passed {
        Ok(())
    } else {
        let failed = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.clone())
            .collect();
        Err(CliError::VerificationFailed(failed))
    }
}
