//! Test execution: values, the interpreter, and trace recording.

pub mod interp;
pub mod trace;
pub mod value;

pub use interp::{invoke, run_suite, run_test, FailureKind, ObserveMode, RunConfig, RunFailure};
pub use trace::{
    last_value_table, read_traces, write_traces, ElemValue, ObsValue, TestLabel, TestTrace,
    TraceParseError, VariableObservation,
};
pub use value::Value;
