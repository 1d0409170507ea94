pub mod carleson;
pub mod classify;
pub mod error;
pub mod fock;
pub mod operators;
pub mod quadrature;
pub mod suite;
pub mod symbols;
pub mod transforms;
