//! Transfer functions of signal flow graphs.
//!
//! The pipeline closes a graph with a `1/G` branch from output to input,
//! enumerates its elementary circuits, builds every combination of
//! pairwise non-touching loops, and evaluates the Shannon-Happ sum
//! `1 - Σg + Σgg - ...`, which is linear in `1/G`. Branch gains are rational
//! functions of `s` and may carry opaque symbolic factors (a delay, a
//! sub-system) that are kept separate in the result.
//!
//! ```
//! use sfg_core::graph::{gain, SfgGraph};
//! use sfg_core::poly::RationalFn;
//! use sfg_core::shannon::{transfer_function, PipelineConfig};
//!
//! // 1 -> 2 -> 3 with a feedback branch 3 -> 2.
//! let mut g = SfgGraph::new(1, 3);
//! g.add_branch(1, 2, RationalFn::one(), &[]).unwrap();
//! g.add_branch(2, 3, gain(&[1.0], &[0.0, 1.0]), &[]).unwrap(); // 1/s
//! g.add_branch(3, 2, RationalFn::constant(-2.0), &[]).unwrap();
//!
//! let tf = transfer_function(&g, &PipelineConfig::default()).unwrap();
//! let (b, a) = tf.numeric().unwrap();
//! assert_eq!(b.coeffs(), &[1.0]);
//! assert_eq!(a.coeffs(), &[2.0, 1.0]); // 1/(s + 2)
//! ```

pub mod analysis;
pub mod combos;
pub mod format;
pub mod graph;
pub mod loops;
pub mod poly;
pub mod shannon;

pub use graph::{parse_graph, SfgGraph, SymbolId};
pub use poly::{Poly, RationalFn};
pub use shannon::{transfer_function, PipelineConfig, TransferFunction};
