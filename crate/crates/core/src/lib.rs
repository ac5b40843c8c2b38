//! Tabulation of cubic number fields by discriminant, with genus-theoretic
//! class number bounds, discriminant densities in progressions and the
//! progression certificates built on top of them.

mod bigint_serde;
pub mod error;

pub mod arith;
pub mod forms;
pub mod discshape;
pub mod genus;
pub mod enumerate;
pub mod table;
pub mod progression;
pub mod density;
pub mod maier;

pub use error::{Error, Result};
pub use forms::{CubicForm, UnimodularMap};
