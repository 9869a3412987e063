use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rankone::ensembles::{CouplingLaw, EnsembleSpec};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Gaussian,
    Laguerre,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Identities,
    Roundtrip,
    Configuration,
    ChangeOfVariables,
    Jacobian,
    Normalization,
    CrossDense,
    SamplerLaws,
    Display,
    #[default]
    All,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Default)]
pub struct Flags {
    /// Ensemble family
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Laguerre parameter m
    #[arg(long)]
    pub m: Option<usize>,
    /// gamma_type, chi_half, custom_gamma, or an inline JSON law
    #[arg(long)]
    pub coupling: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Shape of a custom_gamma coupling
    #[arg(long)]
    pub shape: Option<f64>,
    /// Scale of a custom_gamma coupling
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// JSON config file; flags win on conflict
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Spectra for `density`; stdin when absent
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    ensemble: Option<EnsembleSpec>,
    coupling: Option<CouplingLaw>,
    samples: Option<usize>,
    seed: Option<u64>,
    format: Option<Format>,
    out: Option<PathBuf>,
    suite: Option<Suite>,
    input: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub spec: EnsembleSpec,
    pub law: CouplingLaw,
    pub samples: usize,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub suite: Suite,
    pub input: Option<PathBuf>,
}

pub const DEFAULT_SAMPLES: usize = 1000;

impl RunConfig {
    pub fn resolve(flags: Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
                serde_json::from_str::<FileConfig>(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let spec = resolve_spec(&flags, file.ensemble)?;
        let law = resolve_law(&flags, file.coupling)?;
        law.dist(spec.beta(), spec.n())?;
        Ok(Self {
            spec,
            law,
            samples: flags.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            format: flags.format.or(file.format).unwrap_or_default(),
            out: flags.out.or(file.out),
            suite: flags.suite.or(file.suite).unwrap_or_default(),
            input: flags.input.or(file.input),
        })
    }
}

fn resolve_spec(flags: &Flags, base: Option<EnsembleSpec>) -> Result<EnsembleSpec, CliError> {
    let (kind, beta, n, m) = match base {
        Some(EnsembleSpec::Gaussian { beta, n }) => (Some(Kind::Gaussian), Some(beta), Some(n), None),
        Some(EnsembleSpec::Laguerre { beta, n, m }) => (Some(Kind::Laguerre), Some(beta), Some(n), Some(m)),
        None => (None, None, None, None),
    };
    let kind = flags.kind.or(kind).ok_or_else(|| CliError::Usage("missing --kind".into()))?;
    let beta = flags.beta.or(beta).unwrap_or(2.0);
    let n = flags.n.or(n).ok_or_else(|| CliError::Usage("missing --n".into()))?;
    let spec = match kind {
        Kind::Gaussian => EnsembleSpec::gaussian(beta, n)?,
        Kind::Laguerre => {
            let m = flags.m.or(m).ok_or_else(|| CliError::Usage("laguerre needs --m".into()))?;
            EnsembleSpec::laguerre(beta, m, n)?
        }
    };
    Ok(spec)
}

fn resolve_law(flags: &Flags, base: Option<CouplingLaw>) -> Result<CouplingLaw, CliError> {
    let mut law = base.unwrap_or(CouplingLaw::GammaType { sigma: 1.0 });
    if let Some(text) = flags.coupling.as_deref().map(str::trim) {
        law = if text.starts_with('{') {
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("--coupling: {e}")))?
        } else {
            match (text, law) {
                ("gamma_type", CouplingLaw::GammaType { .. }) | ("chi_half", CouplingLaw::ChiHalf) => law,
                ("custom_gamma", CouplingLaw::CustomGamma { .. }) => law,
                ("gamma_type", _) => CouplingLaw::GammaType { sigma: 1.0 },
                ("chi_half", _) => CouplingLaw::ChiHalf,
                ("custom_gamma", _) => CouplingLaw::CustomGamma { shape: 1.0, scale: 1.0 },
                _ => return Err(CliError::Usage(format!("--coupling: unknown law '{text}'"))),
            }
        };
    }
    match &mut law {
        CouplingLaw::GammaType { sigma } => {
            if flags.shape.is_some() || flags.scale.is_some() {
                return Err(CliError::Usage("--shape/--scale need --coupling custom_gamma".into()));
            }
            *sigma = flags.sigma.unwrap_or(*sigma);
        }
        CouplingLaw::CustomGamma { shape, scale } => {
            if flags.sigma.is_some() {
                return Err(CliError::Usage("--sigma needs --coupling gamma_type".into()));
            }
            *shape = flags.shape.unwrap_or(*shape);
            *scale = flags.scale.unwrap_or(*scale);
        }
        CouplingLaw::ChiHalf => {
            if flags.sigma.is_some() || flags.shape.is_some() || flags.scale.is_some() {
                return Err(CliError::Usage("chi_half takes no parameters".into()));
            }
        }
    }
    Ok(law)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> Flags {
        Flags { kind: Some(Kind::Gaussian), n: Some(3), ..Flags::default() }
    }

    #[test]
    fn defaults() {
        let c = RunConfig::resolve(flags()).unwrap();
        assert_eq!(c.spec, EnsembleSpec::gaussian(2.0, 3).unwrap());
        assert_eq!(c.law, CouplingLaw::GammaType { sigma: 1.0 });
        assert_eq!((c.samples, c.seed, c.format, c.suite), (DEFAULT_SAMPLES, 0, Format::Csv, Suite::All));
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("rankone-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(
            &path,
            r#"{"ensemble":{"kind":"laguerre","beta":1,"n":3,"m":5},"coupling":{"kind":"gamma_type","sigma":2.0},"seed":9,"samples":4}"#,
        )
        .unwrap();
        let c = RunConfig::resolve(Flags { config: Some(path.clone()), beta: Some(0.5), samples: Some(7), ..Flags::default() }).unwrap();
        assert_eq!(c.spec, EnsembleSpec::laguerre(0.5, 5, 3).unwrap());
        assert_eq!(c.law, CouplingLaw::GammaType { sigma: 2.0 });
        assert_eq!((c.samples, c.seed), (7, 9));
        let c = RunConfig::resolve(Flags { config: Some(path), kind: Some(Kind::Gaussian), sigma: Some(3.0), ..Flags::default() }).unwrap();
        assert_eq!(c.spec, EnsembleSpec::gaussian(1.0, 3).unwrap());
        assert_eq!(c.law, CouplingLaw::GammaType { sigma: 3.0 });
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn coupling_forms() {
        let c = RunConfig::resolve(Flags { coupling: Some("chi_half".into()), ..flags() }).unwrap();
        assert_eq!(c.law, CouplingLaw::ChiHalf);
        let f = Flags { coupling: Some(r#"{"kind":"custom_gamma","shape":1,"scale":1}"#.into()), scale: Some(2.0), ..flags() };
        assert_eq!(RunConfig::resolve(f).unwrap().law, CouplingLaw::CustomGamma { shape: 1.0, scale: 2.0 });
        assert!(RunConfig::resolve(Flags { coupling: Some("levy".into()), ..flags() }).is_err());
        assert!(RunConfig::resolve(Flags { coupling: Some("chi_half".into()), sigma: Some(1.0), ..flags() }).is_err());
    }

    #[test]
    fn invalid_specs_are_usage_errors() {
        assert!(RunConfig::resolve(Flags { n: Some(0), ..flags() }).is_err());
        assert!(RunConfig::resolve(Flags { kind: Some(Kind::Laguerre), ..flags() }).is_err());
        assert!(RunConfig::resolve(Flags { beta: Some(-1.0), ..flags() }).is_err());
        assert!(RunConfig::resolve(Flags::default()).is_err());
    }
}
