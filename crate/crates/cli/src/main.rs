//! `rankone`: sample, evaluate and verify rank-one perturbed β-ensembles.

mod config;
mod error;
mod spectra;

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rankone::density::{log_density_perturbed, DensityParams};
use rankone::dist::DistSpec;
use rankone::ensembles::{sample_perturbed, CouplingLaw, EnsembleSpec};
use rankone::perturb::{sample_spectrum, PerturbedSpectrum};
use rankone::rng::RngStream;
use rankone::verify::{self, JacobianCase, TestReport};
use rayon::prelude::*;
use serde_json::json;

use config::{Flags, Format, RunConfig, Suite};
use error::{CliError, EXIT_FAILED};
use spectra::Row;

#[derive(Parser, Debug)]
#[command(name = "rankone", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw perturbed spectra, one row per sample
    Sample(Flags),
    /// Joint log density of spectra read from --input or stdin
    Density(Flags),
    /// Run verification suites, one JSON report per line
    Verify(Flags),
    /// Forward/inverse and two-route spectrum residuals
    Roundtrip(Flags),
}

fn main() -> ExitCode {
    verify::init_threads_from_env();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(f) => RunConfig::resolve(f).and_then(|c| cmd_sample(&c)),
        Command::Density(f) => RunConfig::resolve(f).and_then(|c| cmd_density(&c)),
        Command::Verify(f) => RunConfig::resolve(f).and_then(|c| cmd_verify(&c)),
        Command::Roundtrip(f) => RunConfig::resolve(f).and_then(|c| cmd_roundtrip(&c)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            match &e {
                CliError::Core(rankone::Error::Unsupported(msg)) => eprintln!("rankone: unsupported: {msg}"),
                _ => eprintln!("rankone: {e}"),
            }
            e.exit_code()
        }
    }
}

fn open_out(config: &RunConfig) -> Result<Box<dyn Write>, CliError> {
    Ok(match &config.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|source| CliError::Io { path: path.clone(), source })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_lines(config: &RunConfig, lines: impl IntoIterator<Item = String>) -> Result<(), CliError> {
    let mut out = open_out(config)?;
    let io_err = |source| match &config.out {
        Some(path) => CliError::Io { path: path.clone(), source },
        None => CliError::Stdio(source),
    };
    for line in lines {
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

fn draw_row(base: &RngStream, idx: u64, config: &RunConfig) -> rankone::Result<Row> {
    let s = sample_perturbed(&mut base.substream(idx), &config.spec, &config.law)?;
    let z = sample_spectrum(&s)?.into_vec();
    Ok(Row { idx, l: s.l, z })
}

fn cmd_sample(config: &RunConfig) -> Result<bool, CliError> {
    let base = RngStream::new(config.seed);
    let rows: Vec<Row> = (0..config.samples as u64).into_par_iter().map(|i| draw_row(&base, i, config)).collect::<rankone::Result<_>>()?;
    let lines: Vec<String> = match config.format {
        Format::Csv => std::iter::once(spectra::csv_header(config.spec.n())).chain(rows.iter().map(spectra::csv_line)).collect(),
        Format::Json => rows.iter().map(spectra::json_line).collect(),
    };
    write_lines(config, lines)?;
    Ok(true)
}

fn cmd_density(config: &RunConfig) -> Result<bool, CliError> {
    let text = match &config.input {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    let params = DensityParams { spec: config.spec, law: config.law };
    let values = spectra::parse_spectra(&text)?
        .into_iter()
        .map(|z| log_density_perturbed(&params, &nontrivial(&config.spec, z)).map(spectra::density_line))
        .collect::<rankone::Result<Vec<_>>>()?;
    write_lines(config, values)?;
    Ok(true)
}

/// Full singular Laguerre spectra lose their `n - m - 1` smallest entries.
fn nontrivial(spec: &EnsembleSpec, z: Vec<num_complex::Complex64>) -> Vec<num_complex::Complex64> {
    match *spec {
        EnsembleSpec::Laguerre { n, m, .. } if m < n && z.len() == n => {
            let mut s = PerturbedSpectrum::new(z);
            s.remove_smallest(n - m - 1);
            s.into_vec()
        }
        _ => z,
    }
}

const SUITES: [Suite; 9] = [
    Suite::Identities,
    Suite::Roundtrip,
    Suite::Configuration,
    Suite::ChangeOfVariables,
    Suite::Jacobian,
    Suite::Normalization,
    Suite::CrossDense,
    Suite::SamplerLaws,
    Suite::Display,
];

fn cmd_verify(config: &RunConfig) -> Result<bool, CliError> {
    let base = RngStream::new(config.seed);
    let mut reports = Vec::new();
    for (i, suite) in SUITES.iter().enumerate() {
        let rng = base.substream(i as u64);
        match config.suite {
            Suite::All if applies(*suite, config) => reports.extend(run_suite(*suite, config, &rng)?),
            s if s == *suite => reports.extend(run_suite(s, config, &rng)?),
            _ => {}
        }
    }
    let pass = reports.iter().all(|r| r.pass);
    write_lines(config, reports.iter().map(TestReport::to_json_line))?;
    Ok(pass)
}

fn applies(suite: Suite, config: &RunConfig) -> bool {
    let beta = config.spec.beta();
    match suite {
        Suite::CrossDense => beta == 1.0 || beta == 2.0,
        Suite::Display => matches!(config.spec, EnsembleSpec::Gaussian { .. }) && !matches!(config.law, CouplingLaw::CustomGamma { .. }),
        _ => true,
    }
}

fn run_suite(suite: Suite, config: &RunConfig, rng: &RngStream) -> Result<Vec<TestReport>, CliError> {
    let (spec, law, samples) = (&config.spec, &config.law, config.samples);
    let reports = match suite {
        Suite::Identities => vec![verify::identity_sweep(spec, law, samples, rng)?],
        Suite::Roundtrip => verify::roundtrip_sweep(spec, law, samples, rng)?,
        Suite::Configuration => vec![verify::configuration_sweep(spec, law, samples, rng)?],
        Suite::ChangeOfVariables => vec![verify::change_of_variables_sweep(spec, law, samples, rng)?],
        Suite::Jacobian => {
            let case = match *spec {
                EnsembleSpec::Laguerre { n, m, .. } if m < n => JacobianCase::LaguerreSemidef { m },
                _ => JacobianCase::Gaussian { n: spec.n() },
            };
            vec![verify::jacobian_check(case, samples, rng)?]
        }
        Suite::Normalization => {
            let mut out = vec![verify::normalization_mc(spec, law, samples, &rng.substream(0))?];
            if !spec.is_semidefinite() {
                out.push(verify::normalization_independent(spec, law, samples, &rng.substream(1))?);
            }
            out
        }
        Suite::CrossDense => verify::cross_validate_dense(spec, law, samples, rng)?,
        Suite::SamplerLaws => sampler_laws(spec, law)
            .iter()
            .enumerate()
            .map(|(i, d)| verify::sampler_law_check(d, samples, &rng.substream(i as u64)))
            .collect::<rankone::Result<_>>()?,
        Suite::Display => match (*spec, *law) {
            (EnsembleSpec::Gaussian { beta, n }, CouplingLaw::GammaType { sigma }) => {
                vec![verify::gaussian_coupling_display_check(beta, sigma, n, samples, rng)?]
            }
            (EnsembleSpec::Gaussian { beta, n }, CouplingLaw::ChiHalf) => vec![verify::chi_half_display_check(beta, n, samples, rng)?],
            _ => {
                return Err(
                    rankone::Error::Unsupported("display suite needs a Gaussian model with gamma_type or chi_half coupling".into()).into()
                )
            }
        },
        Suite::All => unreachable!("expanded by the caller"),
    };
    Ok(reports)
}

/// Distinct laws drawn by the sampler for this model.
fn sampler_laws(spec: &EnsembleSpec, law: &CouplingLaw) -> Vec<DistSpec> {
    let mut out = Vec::new();
    let mut push = |d: DistSpec| {
        if !out.contains(&d) {
            out.push(d);
        }
    };
    match *spec {
        EnsembleSpec::Gaussian { beta, n } => {
            push(DistSpec::Normal { sigma: 1.0 });
            (1..n).for_each(|j| push(DistSpec::ChiTilde { k: beta * (n - j) as f64 }));
        }
        EnsembleSpec::Laguerre { beta, n, m } => {
            (1..=m.min(n)).for_each(|j| push(DistSpec::Chi { k: beta * (m + 1 - j) as f64 }));
            (1..n.min(m + 1)).for_each(|j| push(DistSpec::Chi { k: beta * (n - j) as f64 }));
        }
    }
    if let Ok(d) = law.dist(spec.beta(), spec.n()) {
        push(d);
    }
    out
}

fn cmd_roundtrip(config: &RunConfig) -> Result<bool, CliError> {
    let rng = RngStream::new(config.seed);
    let reports = verify::roundtrip_sweep(&config.spec, &config.law, config.samples, &rng)?;
    let mut summary = serde_json::Map::new();
    summary.insert("samples".into(), json!(config.samples));
    for r in &reports {
        let key = match r.name.as_str() {
            "roundtrip_forward_inverse" => "forward_inverse",
            "roundtrip_inverse_forward" => "inverse_forward",
            "two_route_spectra" => "two_route",
            other => other,
        };
        summary.insert(key.into(), json!(r.max_residual));
    }
    let threshold = reports.first().map_or(0.0, |r| r.threshold);
    let pass = reports.iter().all(|r| r.pass);
    summary.insert("threshold".into(), json!(threshold));
    summary.insert("pass".into(), json!(pass));
    write_lines(config, [serde_json::Value::Object(summary).to_string()])?;
    Ok(pass)
}
