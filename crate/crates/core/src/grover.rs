//! Zero-error Grover search for a single marked string.
//!
//! The flag qubit is rotated so that the overlap of the start state with
//! `|x, 1>` is `sin(theta)` with `(2t + 1) theta = pi / 2` exactly; after `t`
//! iterations the register holds `|x, 1>` and a final X resets the flag.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{adjoint2, hadamard, pauli_x, ry, scale2, Mat2, ONE};
use crate::sim::{
    run_circuit, Bindings, Circuit, CircuitBuilder, Direction, Gate, GateClass, GateSink,
    OracleAction, OracleId, Registers, StateVector,
};

pub const MARKED_ORACLE: &str = "marked";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroverParams {
    pub n: usize,
    pub t: usize,
    pub theta: f64,
    pub p: f64,
}

impl GroverParams {
    /// Flag rotation angle: `Ry(phi)|0> = sqrt(1-p)|0> + sqrt(p)|1>`.
    pub fn flag_angle(&self) -> f64 {
        2.0 * libm::asin(libm::sqrt(self.p))
    }
}

/// `t = ceil(pi/4 2^{n/2})`, `theta = (pi/2)/(2t+1)`, `p = 2^n sin^2 theta`.
pub fn grover_params(n: usize) -> Result<GroverParams> {
    if n == 0 || n > 62 {
        return Err(Error::InvalidParameter(alloc::format!(
            "grover needs 1 <= n <= 62, got {n}"
        )));
    }
    let t = libm::ceil(PI / 4.0 * libm::pow(2.0, n as f64 / 2.0)) as usize;
    let theta = (PI / 2.0) / (2 * t + 1) as f64;
    let s = libm::sin(theta);
    let p = libm::pow(2.0, n as f64) * s * s;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "flag probability p = {p} outside (0, 1] for n = {n}"
        )));
    }
    Ok(GroverParams { n, t, theta, p })
}

/// Oracle `I - 2|x,1><x,1|` on `n + 1` qubits, with a query counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedReflectionOracle {
    pub n: usize,
    pub marked: u64,
    pub query_count: u64,
}

impl MarkedReflectionOracle {
    pub fn new(n: usize, marked: u64) -> Result<Self> {
        if n == 0 || n > 62 || marked >> n != 0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "marked string {marked} does not fit in {n} bits"
            )));
        }
        Ok(MarkedReflectionOracle {
            n,
            marked,
            query_count: 0,
        })
    }

    pub fn pattern(&self) -> Vec<bool> {
        let mut p: Vec<bool> = (0..self.n)
            .map(|i| (self.marked >> (self.n - 1 - i)) & 1 == 1)
            .collect();
        p.push(true);
        p
    }

    pub fn action(&self) -> OracleAction {
        let targets: Vec<usize> = (0..=self.n).collect();
        let c = Circuit::new(
            self.n + 1,
            GateClass::Qacf0,
            Registers::new(),
            vec![vec![Gate::reflection(targets, self.pattern())]],
        )
        .expect("reflection circuit is well formed");
        OracleAction::Circuit(alloc::boxed::Box::new(c))
    }

    pub fn bindings(&self) -> Bindings {
        Bindings::new().with(MARKED_ORACLE, self.action())
    }
}

/// One step of the Grover schedule.
#[derive(Debug, Clone)]
enum Step {
    /// Same one-qubit gate on every input qubit plus a flag gate.
    Local {
        input: Mat2,
        flag: Mat2,
    },
    /// `I - 2|0^{n+1}><0^{n+1}|`
    ZeroReflection,
    /// Query to the marked-string reflection.
    Oracle,
    FlagX,
}

fn forward_steps(params: &GroverParams) -> Vec<Step> {
    let h = hadamard();
    let r = ry(params.flag_angle());
    let neg_r_dag = scale2(-ONE, &adjoint2(&r));
    let mut steps = vec![Step::Local { input: h, flag: r }];
    for _ in 0..params.t {
        steps.push(Step::Oracle);
        // 2|psi0><psi0| - I = L (2|0><0| - I) L^dag; the sign rides on L^dag.
        steps.push(Step::Local {
            input: h,
            flag: neg_r_dag,
        });
        steps.push(Step::ZeroReflection);
        steps.push(Step::Local { input: h, flag: r });
    }
    steps.push(Step::FlagX);
    steps
}

fn reverse_steps(params: &GroverParams) -> Vec<Step> {
    forward_steps(params)
        .into_iter()
        .rev()
        .map(|s| match s {
            Step::Local { input, flag } => Step::Local {
                input: adjoint2(&input),
                flag: adjoint2(&flag),
            },
            other => other,
        })
        .collect()
}

/// Emits the Grover schedule on `input` and `flag` starting at `layer`.
/// Each oracle query is delegated to `oracle`, which returns the layers it used.
/// Returns the first free layer.
pub fn emit_grover<S: GateSink + ?Sized>(
    sink: &mut S,
    layer: usize,
    input: &[usize],
    flag: usize,
    reverse: bool,
    oracle: &mut dyn FnMut(&mut S, usize) -> usize,
) -> Result<usize> {
    let params = grover_params(input.len())?;
    let steps = if reverse {
        reverse_steps(&params)
    } else {
        forward_steps(&params)
    };
    let mut l = layer;
    let mut all: Vec<usize> = input.to_vec();
    all.push(flag);
    let zeros = vec![false; all.len()];
    for step in steps {
        match step {
            Step::Local { input: g, flag: f } => {
                for &q in input {
                    sink.place(l, Gate::one_qubit(q, g));
                }
                sink.place(l, Gate::one_qubit(flag, f));
                l += 1;
            }
            Step::ZeroReflection => {
                sink.place(l, Gate::reflection(all.clone(), zeros.clone()));
                l += 1;
            }
            Step::Oracle => l += oracle(sink, l),
            Step::FlagX => {
                sink.place(l, Gate::one_qubit(flag, pauli_x()));
                l += 1;
            }
        }
    }
    Ok(l)
}

fn build(n: usize, reverse: bool) -> Result<Circuit> {
    let mut b = CircuitBuilder::new(GateClass::Qacf0);
    let input_start = b.alloc(n);
    let flag = b.alloc(1);
    b.name_register("input", input_start, n);
    b.name_register("flag", flag, 1);
    let input: Vec<usize> = (input_start..input_start + n).collect();
    let mut targets = input.clone();
    targets.push(flag);
    emit_grover(&mut b, 0, &input, flag, reverse, &mut |s, l| {
        s.place(
            l,
            Gate::oracle(
                OracleId::new(MARKED_ORACLE),
                Direction::Forward,
                targets.clone(),
            ),
        );
        1
    })?;
    b.finish()
}

/// Grover circuit on `n + 1` qubits with `t` calls to the `marked` oracle.
pub fn build_exact_grover(n: usize) -> Result<Circuit> {
    build(n, false)
}

/// The inverse schedule: maps `|x, 0>` to `|0^{n+1}>`.
pub fn build_reverse_grover(n: usize) -> Result<Circuit> {
    build(n, true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroverOutcome {
    /// Most likely value of the input register.
    pub found: u64,
    /// Fidelity of the final state with `|x, 0>`.
    pub fidelity: f64,
    pub queries: u64,
}

/// Runs the exact Grover circuit against `oracle` and bumps its counter.
pub fn run_exact_grover(n: usize, oracle: &mut MarkedReflectionOracle) -> Result<GroverOutcome> {
    if oracle.n != n {
        return Err(Error::DimensionMismatch(alloc::format!(
            "oracle is on {} bits, search on {n}",
            oracle.n
        )));
    }
    let c = build_exact_grover(n)?;
    let mut s = StateVector::zero(n + 1);
    let log = run_circuit(&mut s, &c, &oracle.bindings())?;
    let (fwd, bwd) = log.get(&OracleId::new(MARKED_ORACLE));
    oracle.query_count += fwd + bwd;
    let target = (oracle.marked as usize) << 1;
    Ok(GroverOutcome {
        found: (s.most_likely() >> 1) as u64,
        fidelity: s.probability(target),
        queries: fwd + bwd,
    })
}

pub fn format_bits(value: u64, n: usize) -> String {
    (0..n)
        .map(|i| {
            if (value >> (n - 1 - i)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

pub fn parse_bits(s: &str) -> Option<u64> {
    if s.is_empty() || s.len() > 64 {
        return None;
    }
    s.chars().try_fold(0u64, |acc, c| match c {
        '0' => Some(acc << 1),
        '1' => Some((acc << 1) | 1),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, Matrix, ZERO};
    use crate::sim::{circuit_as_matrix, SimConfig};

    #[test]
    fn params_match_formulas() {
        let p2 = grover_params(2).unwrap();
        assert_eq!(p2.t, 2);
        assert!((p2.theta - PI / 10.0).abs() < 1e-15);
        assert!((p2.p - 0.381966).abs() < 1e-6);
        let p4 = grover_params(4).unwrap();
        assert_eq!(p4.t, 4);
        assert!((p4.theta - PI / 18.0).abs() < 1e-15);
        // 16 sin^2(pi/18), evaluated independently
        assert!((p4.p - 0.482_459_033_712_733).abs() < 1e-12);
        for n in 1..=30 {
            let g = grover_params(n).unwrap();
            assert!(g.p <= 1.0);
            assert!(((2 * g.t + 1) as f64 * g.theta - PI / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn small_searches() {
        for (n, x) in [(1usize, 0u64), (1, 1), (2, 0b11), (3, 0b101)] {
            let mut o = MarkedReflectionOracle::new(n, x).unwrap();
            let r = run_exact_grover(n, &mut o).unwrap();
            assert_eq!(r.found, x);
            assert!(r.fidelity >= 1.0 - 1e-9);
            assert_eq!(o.query_count, grover_params(n).unwrap().t as u64);
        }
        let mut o = MarkedReflectionOracle::new(3, 0b101).unwrap();
        for k in 1..=3 {
            run_exact_grover(3, &mut o).unwrap();
            assert_eq!(o.query_count, 3 * k);
        }
    }

    #[test]
    fn reverse_uncomputes_marked_string() {
        let o = MarkedReflectionOracle::new(2, 0b01).unwrap();
        let c = build_reverse_grover(2).unwrap();
        let mut s = StateVector::basis(3, 0b010);
        run_circuit(&mut s, &c, &o.bindings()).unwrap();
        assert!(s.probability(0) >= 1.0 - 1e-9);
        assert_eq!(c.gates().filter(|g| g.is_oracle_call()).count(), 2);
    }

    #[test]
    fn diffusion_matches_rank_one_reflection() {
        for n in 1..=5 {
            let params = grover_params(n).unwrap();
            let full = build_exact_grover(n).unwrap();
            // layers 2..=4 are L^dag, reflection, L of the first iteration
            let sub = Circuit::new(
                n + 1,
                GateClass::Qacf0,
                Registers::new(),
                full.layers()[2..5].to_vec(),
            )
            .unwrap();
            let m = circuit_as_matrix(&sub, &Bindings::new(), &SimConfig::default()).unwrap();
            let dim = 1usize << (n + 1);
            let amp = |i: usize| {
                let u = libm::pow(2.0, -(n as f64) / 2.0);
                if i & 1 == 1 {
                    u * libm::sqrt(params.p)
                } else {
                    u * libm::sqrt(1.0 - params.p)
                }
            };
            let mut want = Matrix::from_element(dim, dim, ZERO);
            for i in 0..dim {
                for j in 0..dim {
                    let d = if i == j { 1.0 } else { 0.0 };
                    want[(i, j)] = c64(2.0 * amp(i) * amp(j) - d, 0.0);
                }
            }
            assert!((m - want).iter().all(|z| z.norm() <= 1e-10), "n={n}");
        }
    }

    #[test]
    fn bit_strings_round_trip() {
        assert_eq!(parse_bits("101"), Some(5));
        assert_eq!(format_bits(5, 4), "0101");
        assert_eq!(parse_bits("12"), None);
    }
}
