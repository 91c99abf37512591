//! Command execution: validate the payload, dispatch to the engine, and
//! assemble the result body plus optional sample dump.

use std::collections::BTreeMap;

use polymoment::forwardvariance::{
    bergomi_vix_moment, forward_vix_squared, volterra_vix_moment_closed, ForwardCurve, FwdVarError,
    KernelSpec, VixQuery,
};
use polymoment::generator::{build_dual_matrix, GeneratorError, GeneratorSpec};
use polymoment::mcsim::{
    estimate_from_values, mc_moment, simulate_bergomi_vix, simulate_diffusion,
    simulate_volterra_pdmp_paths, DiffusionModel, McError, SimConfig,
};
use polymoment::moments::{moment_vector_with, MomentsError};
use polymoment::polybasis::Polynomial;
use polymoment::signature::expected_signature_bm;

use crate::config::*;
use crate::output::{z_score, CompareRow, ResultBody};

/// Errors split by exit code: configuration problems exit with 2, numerical
/// failures inside the engine with 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

fn generator_error(e: GeneratorError) -> CliError {
    match &e {
        // Degree increase is a property of the computation, not the schema.
        GeneratorError::DegreeIncrease { .. } => CliError::Numerical(e.to_string()),
        _ => CliError::Config(e.to_string()),
    }
}

fn mc_error(e: McError) -> CliError {
    match &e {
        McError::CovarianceNotPd { .. } | McError::ThinningBoundViolated { .. } => {
            CliError::Numerical(e.to_string())
        }
        _ => CliError::Config(e.to_string()),
    }
}

fn moments_error(e: MomentsError) -> CliError {
    match e {
        MomentsError::Generator(inner) => generator_error(inner),
        MomentsError::NonSquare { .. } | MomentsError::NonFinite => {
            CliError::Numerical(e.to_string())
        }
        _ => CliError::Config(e.to_string()),
    }
}

fn fwdvar_error(e: FwdVarError) -> CliError {
    CliError::Config(e.to_string())
}

pub struct CommandOutput {
    pub result: ResultBody,
    /// Per-path sample values for `--dump`, when the command produced any.
    pub samples: Option<Vec<f64>>,
}

pub fn execute(config: &RunConfig) -> Result<CommandOutput, CliError> {
    match &config.command {
        CommandConfig::Moments(payload) => run_moments(payload, config.seed),
        CommandConfig::VixBergomi(payload) => run_vix_bergomi(payload, config.seed),
        CommandConfig::VixVolterra(payload) => run_vix_volterra(payload, config.seed),
        CommandConfig::Signature(payload) => run_signature(payload),
        CommandConfig::Simulate(payload) => run_simulate(payload, config.seed),
    }
}

fn sim_config(seed: u64, n_paths: usize, dt: f64, clamp: &Option<ClampConfig>) -> SimConfig {
    let cfg = SimConfig::new(n_paths, dt, seed);
    match clamp {
        Some(c) => cfg.with_clamp(c.lo.clone(), c.hi.clone()),
        None => cfg,
    }
}

fn run_moments(payload: &MomentsConfig, seed: u64) -> Result<CommandOutput, CliError> {
    let spec = GeneratorSpec::try_from(&payload.generator).map_err(generator_error)?;
    let dual = build_dual_matrix(&spec, payload.truncation).map_err(generator_error)?;
    let analytic =
        moment_vector_with(&dual, &payload.y0, payload.horizon).map_err(moments_error)?;
    let basis: Vec<String> = dual
        .basis()
        .indices()
        .iter()
        .map(|a| a.to_string())
        .collect();

    let Some(mc) = &payload.mc else {
        return Ok(CommandOutput {
            result: ResultBody::Moments {
                basis,
                moments: analytic.values,
            },
            samples: None,
        });
    };

    let model = DiffusionModel::new(spec, mc.sigma.clone()).map_err(mc_error)?;
    let cfg = sim_config(seed, mc.n_paths, mc.dt, &mc.clamp);
    let samples =
        simulate_diffusion(&model, &payload.y0, payload.horizon, &cfg).map_err(mc_error)?;
    let mut rows = Vec::with_capacity(basis.len());
    for (i, name) in basis.iter().enumerate() {
        let monomial = Polynomial::monomial(dual.basis().monomial_at(i).clone(), 1.0);
        let est = mc_moment(&samples, &monomial).map_err(mc_error)?;
        let z = z_score(analytic.values[i], est.mean, est.std_error);
        rows.push(CompareRow {
            name: name.clone(),
            analytic: analytic.values[i],
            mc_mean: est.mean,
            mc_se: est.std_error,
            z,
            flagged: z.abs() > 3.0,
        });
    }
    // Dump the first coordinate of the terminal state per path.
    let dump = samples.iter().map(|y| y[0]).collect();
    Ok(CommandOutput {
        result: ResultBody::Compare { rows },
        samples: Some(dump),
    })
}

fn run_vix_bergomi(payload: &VixBergomiConfig, seed: u64) -> Result<CommandOutput, CliError> {
    let query = VixQuery::new(payload.t, payload.delta, payload.k);
    let analytic = bergomi_vix_moment(&payload.kernels, &payload.curve, &query, payload.n_nodes)
        .map_err(fwdvar_error)?;

    let Some(mc) = &payload.mc else {
        return Ok(CommandOutput {
            result: ResultBody::VixValue {
                k: payload.k,
                value: analytic,
            },
            samples: None,
        });
    };

    let cfg = SimConfig::new(mc.n_paths, 1.0, seed);
    let samples = simulate_bergomi_vix(
        &payload.kernels,
        &payload.curve,
        payload.t,
        payload.delta,
        mc.n_x,
        &cfg,
    )
    .map_err(mc_error)?;
    let powered: Vec<f64> = samples.iter().map(|v| v.powi(payload.k as i32)).collect();
    let est = estimate_from_values(&powered).map_err(mc_error)?;
    let z = z_score(analytic, est.mean, est.std_error);
    Ok(CommandOutput {
        result: ResultBody::Compare {
            rows: vec![CompareRow {
                name: format!("k={}", payload.k),
                analytic,
                mc_mean: est.mean,
                mc_se: est.std_error,
                z,
                flagged: z.abs() > 3.0,
            }],
        },
        samples: Some(samples),
    })
}

fn run_vix_volterra(payload: &VixVolterraConfig, seed: u64) -> Result<CommandOutput, CliError> {
    let query = VixQuery::new(payload.t, payload.delta, payload.k);
    query.validate().map_err(fwdvar_error)?;
    let analytic = volterra_vix_moment_closed(payload.b, payload.gamma, payload.omega, &query);
    let curve = ForwardCurve::Exponential {
        b: payload.b,
        gamma: payload.gamma,
        c: 0.0,
    };
    let kernel = KernelSpec::Exponential {
        omega: payload.omega,
        gamma: payload.gamma,
    };

    let Some(mc) = &payload.mc else {
        return Ok(CommandOutput {
            result: ResultBody::VixValue {
                k: payload.k,
                value: analytic,
            },
            samples: None,
        });
    };

    let (est_mean, est_se, samples) = if mc.exact_k1 && payload.k == 1 {
        // Jump-free case: the uniform start is averaged by quadrature, so the
        // oracle value is deterministic.
        let value =
            forward_vix_squared(&curve, payload.t, payload.delta, 64).map_err(fwdvar_error)?;
        (value, 0.0, None)
    } else {
        let cfg = SimConfig::new(mc.n_paths, 1.0, seed);
        let paths = simulate_volterra_pdmp_paths(
            &kernel,
            &curve,
            payload.t,
            payload.delta,
            payload.k,
            &cfg,
        )
        .map_err(mc_error)?;
        let values: Vec<f64> = paths.iter().map(|p| p.weight * p.payoff).collect();
        let est = estimate_from_values(&values).map_err(mc_error)?;
        (est.mean, est.std_error, Some(values))
    };
    let z = z_score(analytic, est_mean, est_se);
    Ok(CommandOutput {
        result: ResultBody::Compare {
            rows: vec![CompareRow {
                name: format!("k={}", payload.k),
                analytic,
                mc_mean: est_mean,
                mc_se: est_se,
                z,
                flagged: z.abs() > 3.0,
            }],
        },
        samples,
    })
}

fn run_signature(payload: &SignatureConfig) -> Result<CommandOutput, CliError> {
    if payload.dim == 0 || payload.dim > 9 {
        return Err(CliError::Config(format!(
            "signature.dim = {} must be between 1 and 9",
            payload.dim
        )));
    }
    if payload.t < 0.0 {
        return Err(CliError::Config(format!(
            "signature.t = {} must be non-negative",
            payload.t
        )));
    }
    let tensor = expected_signature_bm(payload.dim, payload.level, payload.t);
    let mut words = BTreeMap::new();
    for level in 0..=tensor.max_level() {
        for (flat, &value) in tensor.level(level).iter().enumerate() {
            if value == 0.0 {
                continue;
            }
            let mut letters = Vec::with_capacity(level);
            let mut rem = flat;
            for _ in 0..level {
                letters.push((rem % payload.dim) as u8 + 1);
                rem /= payload.dim;
            }
            letters.reverse();
            let word: String = letters.iter().map(|l| l.to_string()).collect();
            words.insert(word, value);
        }
    }
    Ok(CommandOutput {
        result: ResultBody::Signature {
            dim: payload.dim,
            level: payload.level,
            t: payload.t,
            words,
        },
        samples: None,
    })
}

fn run_simulate(payload: &SimulateConfig, seed: u64) -> Result<CommandOutput, CliError> {
    let spec = GeneratorSpec::try_from(&payload.generator).map_err(generator_error)?;
    let dim = spec.dim();
    let model = DiffusionModel::new(spec, payload.sigma.clone()).map_err(mc_error)?;
    let poly = polymoment::generator::poly_from_json(dim, &payload.polynomial)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let cfg = sim_config(seed, payload.n_paths, payload.dt, &payload.clamp);
    let samples =
        simulate_diffusion(&model, &payload.y0, payload.horizon, &cfg).map_err(mc_error)?;
    let values: Vec<f64> = samples
        .iter()
        .map(|y| poly.eval(y))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let est = estimate_from_values(&values).map_err(mc_error)?;
    Ok(CommandOutput {
        result: ResultBody::Estimate {
            mean: est.mean,
            std_error: est.std_error,
            n_paths: est.n_paths,
            seed,
        },
        samples: Some(values),
    })
}
