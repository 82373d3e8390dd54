//! Resource table over `(method, n)` cells.

use std::ops::RangeInclusive;

use qsynth_core::grover::build_exact_grover;
use qsynth_core::linalg::{random_unit_vector, random_unitary, Matrix};
use qsynth_core::qram::{functional_qram, implement_via_qram};
use qsynth_core::sim::{
    expanded_resources, implementation_distance, resources, ResourceReport, SimConfig, StateVector,
};
use qsynth_core::statesynth::{build_qacf0_state_circuit, build_qnc_state_circuit};
use qsynth_core::unitsynth::{depth_synthesis_resources, depth_synthesize, oracle_synthesize};
use qsynth_core::Error;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::json::FORMAT_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMethod {
    /// Exact search circuit, as built.
    Grover,
    /// Unitary from a functional qRAM, oracle calls counted as one gate.
    Qram,
    /// Gate-level qRAM pipeline, lowered and fully expanded.
    Depth,
    /// Amplitude-table pipeline.
    Oracle,
    StateQacf0,
    StateQnc,
}

impl BenchMethod {
    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::Grover => "grover",
            BenchMethod::Qram => "qram",
            BenchMethod::Depth => "depth",
            BenchMethod::Oracle => "oracle",
            BenchMethod::StateQacf0 => "state-qacf0",
            BenchMethod::StateQnc => "state-qnc",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            BenchMethod::Grover,
            BenchMethod::Qram,
            BenchMethod::Depth,
            BenchMethod::Oracle,
            BenchMethod::StateQacf0,
            BenchMethod::StateQnc,
        ]
        .into_iter()
        .find(|m| m.name() == s)
    }

    /// Largest `n` the method accepts.
    pub fn max_n(self) -> usize {
        match self {
            BenchMethod::Grover => 30,
            BenchMethod::Qram => 8,
            BenchMethod::Depth => 9,
            BenchMethod::Oracle => 3,
            BenchMethod::StateQacf0 | BenchMethod::StateQnc => 12,
        }
    }

    /// Largest `n` whose distance is measured.
    fn max_distance_n(self) -> usize {
        match self {
            BenchMethod::Qram => 5,
            BenchMethod::Depth => 2,
            BenchMethod::Oracle => 3,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub method: &'static str,
    pub n: usize,
    pub depth: usize,
    pub size: usize,
    pub ancillae: usize,
    pub queries: usize,
    /// Implementation distance, where simulated.
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchTable {
    pub format: u32,
    pub rows: Vec<BenchRow>,
}

fn cell_rng(seed: u64, n: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ n as u64)
}

fn row(method: BenchMethod, n: usize, r: ResourceReport, distance: Option<f64>) -> BenchRow {
    BenchRow {
        method: method.name(),
        n,
        depth: r.depth,
        size: r.size,
        ancillae: r.ancillae,
        queries: r.queries(),
        distance,
    }
}

fn cell(
    method: BenchMethod,
    n: usize,
    seed: u64,
    b: u32,
    cfg: &SimConfig,
) -> Result<BenchRow, Error> {
    if n == 0 || n > method.max_n() {
        return Err(Error::InvalidParameter(format!(
            "{} accepts n in 1..={}, got {n}",
            method.name(),
            method.max_n()
        )));
    }
    let mut rng = cell_rng(seed, n);
    let measure = n <= method.max_distance_n() && n <= cfg.qubit_cap;
    let unitary = |rng: &mut ChaCha8Rng| -> Matrix { random_unitary(1 << n, rng) };
    Ok(match method {
        BenchMethod::Grover => row(method, n, resources(&build_exact_grover(n)?), None),
        BenchMethod::Qram => {
            let u = unitary(&mut rng);
            let bc = implement_via_qram(&functional_qram(&u)?)?;
            let d = if measure {
                Some(implementation_distance(&bc.circuit, &bc.bindings, &u, cfg)?)
            } else {
                None
            };
            row(method, n, resources(&bc.circuit), d)
        }
        BenchMethod::Depth => {
            let u = unitary(&mut rng);
            let d = if measure {
                let bc = depth_synthesize(&u)?;
                Some(implementation_distance(&bc.circuit, &bc.bindings, &u, cfg)?)
            } else {
                None
            };
            row(method, n, depth_synthesis_resources(&u)?.report, d)
        }
        BenchMethod::Oracle => {
            let u = unitary(&mut rng);
            let s = oracle_synthesize(&u, b)?;
            let r = expanded_resources(&s.circuit.circuit, &s.circuit.bindings)?;
            row(method, n, r, Some(s.distance))
        }
        BenchMethod::StateQacf0 | BenchMethod::StateQnc => {
            let psi = StateVector::from_amps(random_unit_vector(1 << n, &mut rng))?;
            let c = if method == BenchMethod::StateQacf0 {
                build_qacf0_state_circuit(&psi)?
            } else {
                build_qnc_state_circuit(&psi)?
            };
            row(method, n, resources(&c), None)
        }
    })
}

/// One row per `(method, n)`, methods in the given order, `n` ascending.
pub fn bench(
    methods: &[BenchMethod],
    ns: RangeInclusive<usize>,
    seed: u64,
    precision_bits: u32,
    cfg: &SimConfig,
) -> Result<BenchTable, Error> {
    let mut rows = Vec::new();
    for &m in methods {
        for n in ns.clone() {
            rows.push(cell(m, n, seed, precision_bits, cfg)?);
        }
    }
    Ok(BenchTable {
        format: FORMAT_VERSION,
        rows,
    })
}

/// Right-aligned text columns.
pub fn render_table(t: &BenchTable) -> String {
    let header = [
        "method", "n", "depth", "size", "ancillae", "queries", "distance",
    ];
    let mut cells: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for r in &t.rows {
        cells.push(vec![
            r.method.to_string(),
            r.n.to_string(),
            r.depth.to_string(),
            r.size.to_string(),
            r.ancillae.to_string(),
            r.queries.to_string(),
            r.distance.map_or("-".into(), |d| format!("{d:.3e}")),
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|j| cells.iter().map(|row| row[j].len()).max().unwrap_or(0))
        .collect();
    cells
        .iter()
        .map(|row| {
            row.iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}
