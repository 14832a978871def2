// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod monogamy;
pub mod qstate;
pub mod roof;
pub mod scan;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    macro_rules! chapters {
        ($($name:ident => $file:literal),* $(,)?) => {
            $(#[doc = include_str!(concat!("../../../book/src/", $file))] mod $name {})*
        };
    }
    chapters! {
        introduction => "introduction.md",
        states => "states.md",
        measures => "measures.md",
        roof => "roof.md",
        monogamy => "monogamy.md",
        analysis => "analysis.md",
        cli => "cli.md",
        figures => "figures.md",
        verification => "verification.md",
    }

    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
