//! MiniLang frontend: parsing, temporary-introducing transformation, and the
//! static analyses (control flow, reaching definitions, dependence graph,
//! variable equivalence classes) the rest of the pipeline consumes.

pub mod analysis;
pub mod ast;
pub mod depgraph;
pub mod equiv;
pub mod parser;
pub mod transform;

pub use analysis::{analyze, Analysis};
pub use ast::{BinOp, Expr, Method, Program, Stmt, TempKind, TempOrigin, TestCase, TestSuite, UnOp};
pub use depgraph::{build_dependence_graph, DependencyGraph, EdgeKind, OccKind, VarOccurrence};
pub use equiv::{build_classes, EquivalenceClasses, VarClass};
pub use parser::{parse_program, parse_suite, ParseError};
pub use transform::{is_temp_name, transform_gsa};
