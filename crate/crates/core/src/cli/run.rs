//! Orchestration of the subcommands.

use std::sync::Arc;

use rayon::prelude::*;

use super::config::{Command, RunConfig};
use super::output::{Cell, Table};
use super::RunError;
use crate::bogoliubov::{
    build_quadratic, diagonalize, solve_condensate, BogoliubovOptions, BogoliubovReport, GpOptions, MeanFieldFunctional,
};
use crate::exact::{obdm, solve_lowest_k, SolverOptions, SpectrumResult};
use crate::fock::FockBasis;
use crate::hamiltonian::{assemble_total, ModelParams};
use crate::orbitals::{default_interaction_tensor, interaction_tensor, InteractionTensor, QuadratureRule};
use crate::Error;

pub const COMPARISON_HEADER: [&str; 13] = [
    "g",
    "N",
    "M",
    "E_exact",
    "E_gp",
    "E_bog",
    "gap1_exact",
    "eps1_bog",
    "depletion_bog",
    "fc_exact",
    "fc_bog",
    "mu",
    "status",
];

/// Exact and Bogoliubov results at one parameter point. Values a failed
/// stage could not produce are NaN and `status` names the failure.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub g: f64,
    pub n: usize,
    pub m: usize,
    pub e_exact: f64,
    pub e_gp: f64,
    pub e_bog: f64,
    pub gap1_exact: f64,
    pub eps1_bog: f64,
    pub depletion_bog: f64,
    pub fc_exact: f64,
    pub fc_bog: f64,
    pub mu: f64,
    pub status: String,
}

impl ComparisonRow {
    fn blank(g: f64, n: usize, m: usize) -> Self {
        Self {
            g,
            n,
            m,
            e_exact: f64::NAN,
            e_gp: f64::NAN,
            e_bog: f64::NAN,
            gap1_exact: f64::NAN,
            eps1_bog: f64::NAN,
            depletion_bog: f64::NAN,
            fc_exact: f64::NAN,
            fc_bog: f64::NAN,
            mu: f64::NAN,
            status: String::new(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Float(self.g),
            Cell::Int(self.n as u64),
            Cell::Int(self.m as u64),
            Cell::Float(self.e_exact),
            Cell::Float(self.e_gp),
            Cell::Float(self.e_bog),
            Cell::Float(self.gap1_exact),
            Cell::Float(self.eps1_bog),
            Cell::Float(self.depletion_bog),
            Cell::Float(self.fc_exact),
            Cell::Float(self.fc_bog),
            Cell::Float(self.mu),
            Cell::Text(self.status.clone()),
        ]
    }
}

pub fn comparison_table(rows: &[ComparisonRow]) -> Table {
    let mut table = Table::new(COMPARISON_HEADER);
    for row in rows {
        table.push(row.cells());
    }
    table
}

/// Short machine-readable tag for the status column.
pub fn error_tag(err: &Error) -> &'static str {
    match err {
        Error::NonConvergence { .. } => "nonconvergence",
        Error::Divergence(_) => "divergence",
        Error::FirstOrderResidual { .. } => "first_order_residual",
        Error::Instability { .. } => "instability",
        Error::IndefiniteForm => "indefinite",
        Error::Capacity(_) => "capacity",
        _ => "error",
    }
}

/// Basis and tensor for one mode cutoff.
struct Setup {
    basis: Arc<FockBasis>,
    tensor: InteractionTensor,
}

impl Setup {
    fn new(config: &RunConfig, modes: usize) -> Result<Self, RunError> {
        let basis = FockBasis::new(config.n_particles, modes)
            .map_err(|e| RunError::numerical(f64::NAN, e))?
            .into_shared();
        let tensor = if config.quadrature_nodes == 0 {
            default_interaction_tensor(modes)
        } else {
            QuadratureRule::gauss_hermite(config.quadrature_nodes, 2.0)
                .and_then(|rule| interaction_tensor(modes, &rule))
        }
        .map_err(|e| RunError::numerical(f64::NAN, e))?;
        Ok(Self { basis, tensor })
    }

    fn modes(&self) -> usize {
        self.basis.mode_count()
    }
}

fn solver_options(config: &RunConfig) -> SolverOptions {
    SolverOptions {
        tol: config.eig_tol,
        seed: config.seed,
        ..SolverOptions::default()
    }
}

fn gp_options(config: &RunConfig) -> GpOptions {
    GpOptions {
        tol: config.gp_tol,
        max_iter: config.gp_max_iter,
        weight: config.interaction_weight,
    }
}

fn bogoliubov_options(config: &RunConfig) -> BogoliubovOptions {
    BogoliubovOptions {
        gp: gp_options(config),
        goldstone_tol: config.goldstone_tol,
    }
}

fn exact_spectrum(config: &RunConfig, setup: &Setup, g: f64, k: usize) -> crate::Result<SpectrumResult> {
    let params = ModelParams::new(config.n_particles, setup.modes(), g)?;
    let h = assemble_total(&params, &setup.basis, &setup.tensor)?;
    solve_lowest_k(&h, &setup.basis, k.min(setup.basis.len()), &solver_options(config))
}

fn compare_point(config: &RunConfig, setup: &Setup, g: f64) -> ComparisonRow {
    let n = config.n_particles;
    let mut row = ComparisonRow::blank(g, n, setup.modes());
    let mut failures: Vec<String> = Vec::new();

    let exact = exact_spectrum(config, setup, g, config.lowest_k.max(2))
        .and_then(|spectrum| Ok((obdm(spectrum.ground_state()).condensate_fraction()?, spectrum)));
    match exact {
        Ok((fc, spectrum)) => {
            row.e_exact = spectrum.ground_energy();
            row.gap1_exact = spectrum.first_gap().unwrap_or(f64::NAN);
            row.fc_exact = fc;
        }
        Err(e) => failures.push(format!("exact_{}", error_tag(&e))),
    }

    let bog = (|| {
        let params = ModelParams::new(n, setup.modes(), g)?;
        let orbital = solve_condensate(&params, &setup.tensor, &gp_options(config))?;
        if orbital.converged {
            row.e_gp = n as f64 * orbital.energy_per_particle;
            row.mu = orbital.mu;
        }
        let form = build_quadratic(&params, &setup.tensor, &orbital)?;
        diagonalize(&form, config.goldstone_tol)
    })();
    match bog {
        Ok(spectrum) => {
            row.e_bog = spectrum.ground_energy;
            row.eps1_bog = spectrum.epsilons.first().copied().unwrap_or(f64::NAN);
            row.depletion_bog = spectrum.depletion;
            row.fc_bog = 1.0 - spectrum.depletion / n as f64;
        }
        Err(e) => failures.push(error_tag(&e).to_string()),
    }

    row.status = if failures.is_empty() {
        "ok".into()
    } else {
        failures.join(";")
    };
    row
}

/// One comparison row per coupling value, in sweep order.
pub fn run_compare(config: &RunConfig) -> Result<Vec<ComparisonRow>, RunError> {
    let setup = Setup::new(config, config.modes)?;
    Ok(config
        .couplings()
        .par_iter()
        .map(|&g| compare_point(config, &setup, g))
        .collect())
}

/// Comparison rows for every coupling and every cutoff `2..=modes`,
/// coupling-major.
pub fn run_sweep(config: &RunConfig) -> Result<Vec<ComparisonRow>, RunError> {
    let setups = (2..=config.modes)
        .map(|m| Setup::new(config, m))
        .collect::<Result<Vec<_>, _>>()?;
    let points: Vec<(f64, &Setup)> = config
        .couplings()
        .into_iter()
        .flat_map(|g| setups.iter().map(move |s| (g, s)))
        .collect();
    Ok(points
        .par_iter()
        .map(|&(g, setup)| compare_point(config, setup, g))
        .collect())
}

fn run_exact(config: &RunConfig) -> Result<Table, RunError> {
    let setup = Setup::new(config, config.modes)?;
    let spectra = config
        .couplings()
        .par_iter()
        .map(|&g| exact_spectrum(config, &setup, g, config.lowest_k).map_err(|e| RunError::numerical(g, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(["g", "N", "M", "level", "energy", "excitation", "residual"]);
    for (g, spectrum) in config.couplings().into_iter().zip(&spectra) {
        let e0 = spectrum.ground_energy();
        for (level, (&e, &r)) in spectrum.eigenvalues.iter().zip(&spectrum.residual_norms).enumerate() {
            table.push(vec![
                Cell::Float(g),
                Cell::Int(config.n_particles as u64),
                Cell::Int(config.modes as u64),
                Cell::Int(level as u64),
                Cell::Float(e),
                Cell::Float(e - e0),
                Cell::Float(r),
            ]);
        }
    }
    Ok(table)
}

fn run_condensate(config: &RunConfig) -> Result<Table, RunError> {
    let setup = Setup::new(config, config.modes)?;
    let m = config.modes;
    let n = config.n_particles;
    let orbitals = config
        .couplings()
        .par_iter()
        .map(|&g| {
            let params = ModelParams::new(n, m, g).map_err(|e| RunError::numerical(g, e))?;
            let orbital =
                solve_condensate(&params, &setup.tensor, &gp_options(config)).map_err(|e| RunError::numerical(g, e))?;
            if !orbital.converged {
                return Err(RunError::numerical(
                    g,
                    Error::NonConvergence {
                        what: "condensate orbital",
                        iterations: orbital.iterations,
                        residual: orbital.residual,
                    },
                ));
            }
            let functional = MeanFieldFunctional::with_kappa(&params, &setup.tensor, orbital.kappa)
                .map_err(|e| RunError::numerical(g, e))?;
            let virial = functional.parts(&orbital.coeffs).virial_residual();
            Ok((g, orbital, virial))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut header: Vec<String> = ["g", "N", "M", "mu", "E_gp", "residual", "iterations", "virial"]
        .into_iter()
        .map(String::from)
        .collect();
    header.extend((0..m).map(|i| format!("c_{i}")));
    let mut table = Table::new(header);
    for (g, orbital, virial) in orbitals {
        let mut row = vec![
            Cell::Float(g),
            Cell::Int(n as u64),
            Cell::Int(m as u64),
            Cell::Float(orbital.mu),
            Cell::Float(n as f64 * orbital.energy_per_particle),
            Cell::Float(orbital.residual),
            Cell::Int(orbital.iterations as u64),
            Cell::Float(virial),
        ];
        row.extend(orbital.coeffs.iter().map(|&c| Cell::Float(c)));
        table.push(row);
    }
    Ok(table)
}

fn run_bogoliubov(config: &RunConfig) -> Result<Table, RunError> {
    let setup = Setup::new(config, config.modes)?;
    let m = config.modes;
    let n = config.n_particles;
    let reports: Vec<(f64, BogoliubovReport)> = config
        .couplings()
        .par_iter()
        .map(|&g| {
            let params = ModelParams::new(n, m, g).map_err(|e| RunError::numerical(g, e))?;
            crate::bogoliubov::bogoliubov_report(&params, &setup.tensor, &bogoliubov_options(config))
                .map(|r| (g, r))
                .map_err(|e| RunError::numerical(g, e))
        })
        .collect::<Result<_, _>>()?;

    let mut header: Vec<String> = ["g", "N", "M", "mu", "E_gp", "E_bog", "depletion", "fc_bog", "goldstone"]
        .into_iter()
        .map(String::from)
        .collect();
    header.extend((1..m).map(|j| format!("eps_{j}")));
    let mut table = Table::new(header);
    for (g, report) in reports {
        let mut row = vec![
            Cell::Float(g),
            Cell::Int(n as u64),
            Cell::Int(m as u64),
            Cell::Float(report.mu),
            Cell::Float(report.e_gp),
            Cell::Float(report.e_bog),
            Cell::Float(report.depletion),
            Cell::Float(report.condensate_fraction),
            Cell::Int(report.spectrum.goldstone_count as u64),
        ];
        row.extend((0..m - 1).map(|j| Cell::Float(report.epsilons.get(j).copied().unwrap_or(f64::NAN))));
        table.push(row);
    }
    Ok(table)
}

/// Runs `command` on an already validated configuration.
pub fn execute(command: Command, config: &RunConfig) -> Result<Table, RunError> {
    match command {
        Command::Exact => run_exact(config),
        Command::Condensate => run_condensate(config),
        Command::Bogoliubov => run_bogoliubov(config),
        Command::Compare => Ok(comparison_table(&run_compare(config)?)),
        Command::Sweep => Ok(comparison_table(&run_sweep(config)?)),
    }
}

/// Writes the Hamiltonian at the first coupling value as `row,col,value`.
pub fn dump_operator(config: &RunConfig, out: impl std::io::Write) -> Result<(), RunError> {
    let setup = Setup::new(config, config.modes)?;
    let g = config.couplings()[0];
    let params = ModelParams::new(config.n_particles, config.modes, g).map_err(|e| RunError::numerical(g, e))?;
    let h = assemble_total(&params, &setup.basis, &setup.tensor).map_err(|e| RunError::numerical(g, e))?;
    h.write_csv(out).map_err(|e| RunError::Io(e.to_string()))
}

/// Writes the interaction tensor as `i,j,k,l,value`.
pub fn dump_tensor(config: &RunConfig, out: impl std::io::Write) -> Result<(), RunError> {
    let setup = Setup::new(config, config.modes)?;
    setup.tensor.write_csv(out).map_err(|e| RunError::Io(e.to_string()))
}
