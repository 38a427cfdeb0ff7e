//! Multi-programming compiler for zoned neutral-atom processors.

pub mod backend;
pub mod bundler;
pub mod checker;
pub mod corpus;
pub mod estimator;
pub mod frontend;
pub mod hw;
pub mod ir;
pub mod linalg;
pub mod orchestrator;
pub mod pipeline;
pub mod placer;
pub mod planner;

pub use backend::{compile_tile, BackendError, Tile};
pub use bundler::{bundle, first_fit, BinItem, BundleError, SAParams};
pub use checker::{check, equivalent, CheckError, Method, Verdict, DEFAULT_ORACLE_LIMIT};
pub use corpus::{load_corpus, BenchmarkEntry, Corpus, Family};
pub use estimator::{fidelity, throughput, timeline, EstimatorError, ExecutionReport, Throughput};
pub use frontend::{build_dag, emit_qasm, parse_openqasm, rebase_to_native, Circuit, FrontendError, Gate, GateDag};
pub use hw::{default_hardware, load_hardware, parse_hardware, resolve_hardware, HardwareConfig, HwError};
pub use ir::{emit_na, map_zair, parse_na, IrError, NAInstruction, NAProgram, Site, ZairInstruction};
pub use orchestrator::{merge, MergedSchedule, OrchestratorError};
pub use pipeline::{compile_circuit, run, PipelineError, RunConfig, RunOutput};
pub use placer::{batch_compatible, place, Placement, PlacerParams};
pub use planner::{plan_layout, split_layers, ExecLayer, LayerKind, LayoutError, VirtualZoneLayout};
