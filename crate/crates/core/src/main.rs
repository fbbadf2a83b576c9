//! Command-line front end: index coefficients, free spectra, single index
//! runs, star/trace diagnostics, Chern integrals, sign calibration, and
//! config-driven sweeps.

use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use lattice_index::clifford::clifford_rep;
use lattice_index::error::{Error, Result};
use lattice_index::index::experiment::{run_experiment, write_csv, SweepConfig};
use lattice_index::index::{
    calibrate_sign, calibrate_sign_t4, i_coefficient, i_coefficient_sign_sum, index_defect,
    lattice_index_count,
};
use lattice_index::lattice::{flux_gauge_field_t2, product_gauge_field_t4};
use lattice_index::linalg::{default_gap_tol, hermitian_eigenvalues, ComplexMatrix};
use lattice_index::quantizer::{quantizer_trace, star_residual};
use lattice_index::symbol::{
    chern_integral, f_dw_symbol, test_projection_t2, Symbol, TrigPoly,
};
use lattice_index::wilson::{free_spectrum_closed_form, wilson_dirac, wilson_dirac_fixed_mass};

#[derive(Parser)]
#[command(
    name = "lattice-index",
    about = "Wilson-Dirac index counts and Bohr-Sommerfeld quantization checks on torus lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print I_n(m), computed from the chamber formula and the corner sign sum.
    Icoef { n: usize, m: f64 },
    /// Closed-form spectrum of the trivial-field Wilson-Dirac operator.
    FreeSpectrum {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        m: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
    /// One Wilson-Dirac index run against its topological prediction.
    WilsonIndex {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 12)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        m: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 1)]
        q: i64,
        /// Second flux charge (n = 4 only).
        #[arg(long, default_value_t = 1)]
        q2: i64,
        /// Use the fixed-mass operator D + gamma (W + M) instead of m k.
        #[arg(long)]
        fixed_mass: Option<f64>,
    },
    /// Quantized test-projection count against the Chern integral.
    BsIndex {
        #[arg(long, default_value_t = 24)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 0.35)]
        smoothing: f64,
    },
    /// Star-product residuals over a k range for the built-in symbol pair.
    StarCheck {
        #[arg(long, default_value_t = 1)]
        l: usize,
        #[arg(long, default_value_t = 8)]
        kmin: usize,
        #[arg(long, default_value_t = 64)]
        kmax: usize,
    },
    /// Quantizer trace against the mean formula over a k range.
    TraceCheck {
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32, 64])]
        k: Vec<usize>,
    },
    /// Chern-character integral of a built-in symbol.
    Chern {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Mass for the n = 2 Wilson-Dirac symbol.
        #[arg(long, default_value_t = 0.5)]
        m: f64,
    },
    /// Measure and print the global orientation sign.
    Calibrate,
    /// Run a config-driven sweep and write a CSV.
    Sweep {
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: String,
        #[arg(long)]
        jobs: Option<usize>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Icoef { n, m } => {
            let a = i_coefficient(n, m)?;
            let b = i_coefficient_sign_sum(n, m)?;
            println!("I_{n}({m}) = {a} (chamber formula), {b} (corner sign sum)");
            Ok(ExitCode::SUCCESS)
        }
        Command::FreeSpectrum { n, k, m, r } => {
            let spec = free_spectrum_closed_form(n, k, m, r, 1 << (n / 2))?;
            println!("free Wilson-Dirac spectrum, n={n} k={k} m={m} r={r}:");
            for chunk in spec.chunks(8) {
                let row: Vec<String> = chunk.iter().map(|v| format!("{v:+.6}")).collect();
                println!("  {}", row.join(" "));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::WilsonIndex {
            n,
            k,
            m,
            r,
            q,
            q2,
            fixed_mass,
        } => {
            let cl = clifford_rep(n)?;
            let (field, predicted) = match n {
                2 => {
                    let sign = calibrate_sign()?;
                    (
                        flux_gauge_field_t2(k, q)?,
                        sign.epsilon * q * i_coefficient(2, m)?,
                    )
                }
                4 => {
                    let sign = calibrate_sign_t4()?;
                    (
                        product_gauge_field_t4(k, q, q2)?,
                        sign.epsilon * q * q2 * i_coefficient(4, m)?,
                    )
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "wilson-index supports n = 2 and n = 4".into(),
                    ))
                }
            };
            let wd = match fixed_mass {
                Some(mass) => wilson_dirac_fixed_mass(&field, &cl, mass)?,
                None => wilson_dirac(&field, &cl, m, r)?,
            };
            let spectrum = hermitian_eigenvalues(wd.operator())?;
            let gap_tol = default_gap_tol(spectrum.spectral_norm());
            let defect = index_defect(&spectrum, gap_tol)?;
            let matched = defect == predicted;
            println!(
                "n={n} k={k} m={m} r={r} q=({q},{q2}) dim={} count_pos={} defect={defect} \
                 predicted={predicted} matched={matched} min|eig|={:.3e}",
                spectrum.dim(),
                defect + (spectrum.dim() / 2) as i64,
                spectrum.min_abs()
            );
            Ok(if matched {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::BsIndex {
            k,
            threshold,
            grid,
            smoothing,
        } => {
            let p = test_projection_t2(smoothing)?;
            let one = Symbol::constant(1, ComplexMatrix::identity(2));
            let u = Symbol::lincomb(&[
                (Complex64::new(2.0, 0.0), &p),
                (Complex64::new(-1.0, 0.0), &one),
            ])?;
            let count_p = lattice_index_count(&p, k, threshold)?;
            let count_u = lattice_index_count(&u, k, 2.0 * (threshold - 0.5))?;
            let integral = chern_integral(&u, k, grid)?;
            let predicted = integral.re.round() as i64;
            let matched = count_p as i64 == predicted && count_u == count_p;
            println!(
                "k={k} rank E_{{>{threshold}}}(phi^k(p)) = {count_p}, invertible route = {count_u}, \
                 chern integral = {:.6} + {:.2e} i -> predicted {predicted}, matched={matched}",
                integral.re, integral.im
            );
            Ok(if matched {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::StarCheck { l, kmin, kmax } => {
            let (f, g) = builtin_star_pair();
            println!("star residual |phi(f)phi(g) - sum_(j<=l) (-i/k)^j phi(C_j)|, l = {l}:");
            let mut k = kmin.max(2);
            let mut rows = Vec::new();
            while k <= kmax {
                let res = star_residual(&f, &g, l, k)?;
                println!("  k = {k:4}: {res:.6e}  (x k^{} = {:.4})", l + 1, res * (k as f64).powi(l as i32 + 1));
                rows.push((k as f64, res));
                k *= 2;
            }
            if rows.len() >= 2 {
                let slope = log_log_slope(&rows);
                println!("log-log slope: {slope:.3} (theory: <= -{})", l + 1);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::TraceCheck { k } => {
            let f = trace_symbol();
            for &kk in &k {
                let t = quantizer_trace(&f, kk)?;
                let expected = 2.0 * kk as f64;
                println!(
                    "k = {kk:4}: Trace phi^k(f) = {:.12}, k * mean = {expected:.1}, deviation {:.3e}",
                    t.re,
                    (t - Complex64::new(expected, 0.0)).norm()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Chern { n, k, grid, m } => {
            let value = match n {
                1 => {
                    let p = test_projection_t2(0.35)?;
                    let one = Symbol::constant(1, ComplexMatrix::identity(2));
                    let u = Symbol::lincomb(&[
                        (Complex64::new(2.0, 0.0), &p),
                        (Complex64::new(-1.0, 0.0), &one),
                    ])?;
                    chern_integral(&u, k, grid)?
                }
                2 => {
                    let cl = clifford_rep(2)?;
                    let f = f_dw_symbol(&cl, m, 1.0)?;
                    chern_integral(&f, k, grid)?
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "chern supports n = 1 and n = 2".into(),
                    ))
                }
            };
            println!(
                "chern integral (n={n}, k={k}, grid={grid}): {:.9} + {:.3e} i (nearest integer {})",
                value.re,
                value.im,
                value.re.round()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Calibrate => {
            let s2 = calibrate_sign()?;
            println!("epsilon (n=2) = {:+} from {}", s2.epsilon, s2.provenance);
            let s4 = calibrate_sign_t4()?;
            println!("epsilon (n=4) = {:+} from {}", s4.epsilon, s4.provenance);
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            config,
            out,
            jobs,
            seed,
        } => {
            let text = fs::read_to_string(&config)?;
            let mut config = SweepConfig::from_json(&text)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let records = run_experiment(&config, jobs)?;
            let file = fs::File::create(&out)?;
            write_csv(&records, file)?;
            let mismatched = records.iter().filter(|r| !r.matched).count();
            for r in records.iter().filter(|r| r.note.is_some()) {
                eprintln!(
                    "row (k={}, m={}, q=({},{})): {}",
                    r.k,
                    r.m,
                    r.q1,
                    r.q2,
                    r.note.as_deref().unwrap_or("")
                );
            }
            println!(
                "{} rows written to {out}; {} matched, {} mismatched",
                records.len(),
                records.len() - mismatched,
                mismatched
            );
            Ok(if mismatched == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

/// f = e^{i theta} (2 + cos 2 pi x), g = e^{-i theta} (1 + (sin 2 pi x)/2):
/// both theta- and x-dependent so every Moyal order is active.
fn builtin_star_pair() -> (Symbol, Symbol) {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let scalar = |v: Complex64| ComplexMatrix::from_entries(1, 1, vec![v]).unwrap();

    let mut terms = BTreeMap::new();
    terms.insert(vec![0i64], scalar(c(2.0, 0.0)));
    terms.insert(vec![1i64], scalar(c(0.5, 0.0)));
    terms.insert(vec![-1i64], scalar(c(0.5, 0.0)));
    let f = Symbol::single_mode(1, vec![1], TrigPoly::from_terms(1, 1, terms).unwrap()).unwrap();

    let mut terms = BTreeMap::new();
    terms.insert(vec![0i64], scalar(c(1.0, 0.0)));
    terms.insert(vec![1i64], scalar(c(0.0, -0.25)));
    terms.insert(vec![-1i64], scalar(c(0.0, 0.25)));
    let g = Symbol::single_mode(1, vec![-1], TrigPoly::from_terms(1, 1, terms).unwrap()).unwrap();
    (f, g)
}

/// f0 = 2 + cos(2 pi x) as a theta-independent symbol.
fn trace_symbol() -> Symbol {
    let c = |re: f64| Complex64::new(re, 0.0);
    let scalar = |v: Complex64| ComplexMatrix::from_entries(1, 1, vec![v]).unwrap();
    let mut terms = BTreeMap::new();
    terms.insert(vec![0i64], scalar(c(2.0)));
    terms.insert(vec![1i64], scalar(c(0.5)));
    terms.insert(vec![-1i64], scalar(c(0.5)));
    Symbol::single_mode(1, vec![0], TrigPoly::from_terms(1, 1, terms).unwrap()).unwrap()
}

fn log_log_slope(rows: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(_, r)| *r > 0.0)
        .map(|(k, r)| (k.ln(), r.ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|(x, _)| x).sum();
    let sy: f64 = pts.iter().map(|(_, y)| y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
