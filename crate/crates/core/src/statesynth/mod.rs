//! State preparation: the constant-layer QACf0 tree, its QNC lowering, and
//! synthesis from a classical table of conditional amplitudes.

pub mod dnf;
pub mod oracle;
pub mod qacf0;
pub mod tree;

pub use dnf::{build_f_dnf, eval_f, Dnf, Literal};
pub use oracle::{
    beta_oracle, build_oracle_state_circuit, oracle_state_synth, ClassicalBitOracle, LevelOracle,
    OracleSynthesis,
};
pub use qacf0::{
    build_qacf0_state_circuit, build_qnc_state_circuit, emit_state_prep, STATE_PREP_LAYERS,
};
pub use tree::{amplitude_tree, heap_index, prefix_of, AmplitudeTree};
