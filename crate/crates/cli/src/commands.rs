use std::fs;
use std::io::Write;
use std::path::Path;

use loopsampler::analysis::{self, DEFAULT_DEPHASING_RATIO_MAX};
use loopsampler::io::{self as formats, to_json_string};
use loopsampler::loop_model::program_unitary;
use loopsampler::matrices::{dft_matrix, haar_random_unitary, hadamard_matrix};
use loopsampler::{compiler, sampler};
use loopsampler::{
    ComplexMatrix, Error, LossParams, OccupationConfiguration, Result, Strategy, TimingParams, UnitaryMatrix,
};
use serde::Serialize;

use crate::{Command, Output, StrategyArg, UnitaryKind};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::GenUnitary { kind, n, seed, output } => {
            let u = match kind {
                UnitaryKind::Dft => dft_matrix(n)?,
                UnitaryKind::Hadamard => hadamard_matrix(n)?,
                UnitaryKind::Haar => {
                    let seed = seed.ok_or_else(|| Error::Validation("haar unitaries need --seed".into()))?;
                    haar_random_unitary(n, seed)?
                }
            };
            emit(&output, &formats::unitary_to_json(&u))
        }
        Command::Compile {
            unitary,
            strategy,
            tau,
            output,
        } => {
            let target = read_matrix(&unitary)?;
            let strategy = match strategy {
                StrategyArg::PerRotation => Strategy::PerRotation,
                StrategyArg::Packed => Strategy::Packed,
            };
            if !target.is_square() {
                return Err(Error::Validation(format!(
                    "{} does not hold a square matrix",
                    unitary.display()
                )));
            }
            let program = compiler::compile_unitary(&target, strategy)?.with_tau(tau)?;
            emit(&output, &formats::program_to_json(&program))
        }
        Command::Evaluate { program, output } => {
            let prog = formats::program_from_json(&read_text(&program)?)?;
            emit(&output, &formats::unitary_to_json(&program_unitary(&prog)))
        }
        Command::Dist { unitary, input, output } => {
            let (u, input) = load_experiment(&unitary, &input)?;
            let table = sampler::output_distribution(&u, &input)?;
            emit(&output, &formats::distribution_to_csv(&table))
        }
        Command::Sample {
            unitary,
            input,
            shots,
            seed,
            output,
        } => {
            let (u, input) = load_experiment(&unitary, &input)?;
            let table = sampler::output_distribution(&u, &input)?;
            let draws = sampler::sample(&table, shots, seed)?;
            emit(&output, &formats::samples_to_csv(&draws))
        }
        Command::Similarity { unitary, output } => {
            let m = read_matrix(&unitary)?;
            #[derive(Serialize)]
            struct Report {
                n: usize,
                similarity: f64,
            }
            let s = analysis::similarity(&m)?;
            emit(
                &output,
                &to_json_string(&Report {
                    n: m.rows(),
                    similarity: s,
                }),
            )
        }
        Command::McSimilarity {
            n,
            m,
            trials,
            seed,
            output,
        } => {
            let res = analysis::monte_carlo_max_similarity(n, m, trials, seed)?;
            emit(&output, &formats::similarity_study_to_csv(&res))
        }
        Command::Loss {
            eta_inner,
            eta_outer,
            n,
            roundtrips,
            program,
            output,
        } => {
            let loss = LossParams::new(eta_inner, eta_outer)?;
            #[derive(Serialize)]
            struct Report {
                n: usize,
                roundtrips: usize,
                eta_inner: f64,
                eta_outer: f64,
                net_efficiency: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                program_max_singular_value: Option<f64>,
            }
            let program_max_singular_value = match program {
                Some(path) => {
                    let prog = formats::program_from_json(&read_text(&path)?)?;
                    Some(analysis::lossy_program_matrix(&prog, &loss).max_singular_value())
                }
                None => None,
            };
            let report = Report {
                n,
                roundtrips,
                eta_inner,
                eta_outer,
                net_efficiency: analysis::net_efficiency(&loss, n, roundtrips),
                program_max_singular_value,
            };
            emit(&output, &to_json_string(&report))
        }
        Command::Feasibility {
            n,
            tau,
            delta,
            sigma,
            output,
        } => {
            let timing = TimingParams::new(tau, delta, sigma)?;
            let report = analysis::timing_feasibility(n, &timing, DEFAULT_DEPHASING_RATIO_MAX)?;
            emit(&output, &to_json_string(&report))
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))
}

fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    formats::unitary_from_json(&read_text(path)?)
}

fn load_experiment(path: &Path, input: &str) -> Result<(UnitaryMatrix, OccupationConfiguration)> {
    let u = UnitaryMatrix::new(read_matrix(path)?)?;
    let input: OccupationConfiguration = input.parse()?;
    if input.modes() != u.n() {
        return Err(Error::Validation(format!(
            "input occupation has {} modes but the unitary has {}",
            input.modes(),
            u.n()
        )));
    }
    let p = input.photons();
    if u.n() < p * p {
        eprintln!(
            "warning: {} modes for {p} photons is below p^2 = {}; sampling may be classically easy",
            u.n(),
            p * p
        );
    }
    Ok((u, input))
}

fn emit(output: &Output, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Error::Resource(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Resource(format!("cannot write to stdout: {e}"))),
    }
}
