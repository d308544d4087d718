//! Exact solver for the unrooted maximum agreement forest problem.
//!
//! The solver is a branch-and-price over a set-cover/packing master problem
//! whose columns are agreement blocks. Columns are priced by a weighted
//! maximum agreement subtree dynamic program ([`wmast`]), and the restricted
//! master LPs are solved by a dense revised simplex ([`lpcore`]).
//!
//! ```
//! use umaf::{newick, bnp};
//!
//! let t1 = newick::parse("((a,b),(c,d));").unwrap();
//! let t2 = newick::parse("((a,c),(b,d));").unwrap();
//! let out = bnp::solve(&t1, &t2, &bnp::SolverConfig::default()).unwrap();
//! assert_eq!(out.forest.len(), 2);
//! ```

pub mod bnp;
pub mod gen;
pub mod lpcore;
pub mod newick;
pub mod oracle;
pub mod phylo;
pub mod reduce;
pub mod wmast;

pub use bnp::{AgreementForest, BranchStrategy, SolveOutcome, SolveStats, SolverConfig};
pub use phylo::{is_agreement_block, Block, Embedding, PhyloTree, TaxonSet, TreeError};
pub use wmast::{DualValues, PricingVariant, WeightAssignment, WmastResult};
