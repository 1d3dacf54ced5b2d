//! Front-end pieces of the `coarsen` command-line tool: the s-expression
//! reader, the document schemas, the infix query-formula reader, and the
//! report renderings.  The binary in `main.rs` wires these to the library
//! proper.

pub mod document;
pub mod phi;
pub mod report;
pub mod sexpr;
