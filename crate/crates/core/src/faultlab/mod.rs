//! Fault injection and the mutation benchmark.

mod bench;
mod corpus;
mod mutation;

pub use bench::{
    check_entry, run_benchmark, run_trial, BenchConfig, BenchError, BenchmarkReport, CellStats, Model, MutantRecord,
    SideClaim, SideStats, Skipped, TrialResult,
};
pub use corpus::{builtin_corpus, load_manifest, CorpusEntry, CorpusError};
pub use mutation::{
    apply_mutation, enumerate_mutations, inject_mutation, FaultSide, Mutation, MutationError, MutationKind,
    MutationOperator,
};
